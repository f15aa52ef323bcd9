//! End-to-end acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary is printed even when
//! output capture is on; exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use abclab::asymptotics::oracle_abc_posterior_auto;
use abclab::config::Config;
use abclab::experiments::{find_experiment, ExperimentResult};
use abclab::metrics::KernelSpec;
use abclab::models::{make_linear_gaussian, ObservedData};
use abclab::samplers::{rejection_abc_until, AbcSetup, Seed};
use abclab::stats::ks_statistic;

const SEED: &str = "1";

struct Outcome {
    pass: bool,
    detail: String,
}

fn run_experiment(name: &str) -> ExperimentResult {
    let mut cfg = Config::new();
    cfg.set("seed", SEED);
    find_experiment(name).unwrap().run(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Outcome of the named checks of `result` (all checks if `checks` is empty).
fn verdicts(result: &ExperimentResult, checks: &[&str]) -> Outcome {
    let chosen: Vec<_> = if checks.is_empty() {
        result.verdicts.iter().collect()
    } else {
        checks.iter().map(|c| result.verdict(c).unwrap_or_else(|| panic!("{}: no check {c}", result.name))).collect()
    };
    let detail = chosen
        .iter()
        .map(|v| {
            format!(
                "{}{}={:.4} (expected {:.4}, {})",
                if v.pass { "" } else { "!" },
                v.check,
                v.observed,
                v.expected,
                v.tolerance
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass: chosen.iter().all(|v| v.pass), detail }
}

fn sampler_exactness() -> Outcome {
    let model = make_linear_gaussian(1.0).unwrap();
    let kernel = KernelSpec::uniform();
    let (n, eps) = (100u64, 0.1);
    let mut worst = 0.0f64;
    for seed in 1..=3u64 {
        let obs = ObservedData::generate(&model, n, seed);
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernel);
        let rep = rejection_abc_until(&setup, eps, 10_000, 100_000_000, 1 << 14, Seed::new(seed)).unwrap();
        assert_eq!(rep.draws.len(), 10_000);
        let table = oracle_abc_posterior_auto(&model, &obs.s_obs, n, &kernel, eps).unwrap();
        let theta: Vec<f64> = rep.draws.iter().map(|d| d.theta[0]).collect();
        worst = worst.max(ks_statistic(&theta, |x| table.cdf(x)));
    }
    Outcome { pass: worst < 0.02, detail: format!("max KS over 3 seeds = {worst:.4} (< 0.02)") }
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_abclab"))
        .args(args)
        .env_remove("ABCLAB_OUT")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr).trim()))
    }
}

fn same_csv(stem: &str, first: &Path, second: &Path) -> bool {
    let read = |d: &Path| std::fs::read(d.join(format!("{stem}.csv"))).ok();
    matches!((read(first), read(second)), (Some(a), Some(b)) if a == b)
}

/// Each subcommand is run at one thread, then rerun from its manifest at four
/// threads; the CSV outputs must match byte for byte.
fn determinism(root: &Path) -> Outcome {
    let sample = ["sample", "--model", "linear", "--n", "1000", "--seed", "11"];
    let cases: Vec<(&str, &str, Vec<&str>)> = vec![
        ("rejection", "sample", [&sample[..], &["--sampler", "rejection", "--draws", "2000", "--eps", "0.1"]].concat()),
        ("is", "sample", [&sample[..], &["--sampler", "is", "--draws", "20000", "--accept-fraction", "0.05"]].concat()),
        (
            "ais",
            "sample",
            [&sample[..], &["--sampler", "ais", "--draws", "5000", "--eps", "0.03", "--kernel", "gaussian"]].concat(),
        ),
        ("mcmc", "sample", [&sample[..], &["--sampler", "mcmc", "--draws", "5000", "--eps", "0.05"]].concat()),
        ("predict", "predict", vec!["predict", "--model", "multi:2", "--c", "1", "--distance", "auto"]),
        ("oracle", "oracle", vec!["oracle", "--model", "bimodal", "--n", "1000", "--eps", "0.05", "--seed", "4"]),
        ("experiment", "binding", vec!["experiment", "binding", "--seed", "5"]),
    ];
    let mut failures = Vec::new();
    let mut checked = 0;
    for (label, stem, args) in &cases {
        let (first, second) = (root.join(format!("{label}-1")), root.join(format!("{label}-4")));
        let f = first.to_str().unwrap();
        let s = second.to_str().unwrap();
        if let Err(e) = run_cli(&[&args[..], &["--threads", "1", "--out", f]].concat()) {
            failures.push(e);
            continue;
        }
        let manifest = first.join(format!("{stem}.manifest.txt"));
        let sub = args[0];
        if let Err(e) = run_cli(&[sub, "--config", manifest.to_str().unwrap(), "--threads", "4", "--out", s]) {
            failures.push(e);
            continue;
        }
        if same_csv(stem, &first, &second) {
            checked += 1;
        } else {
            failures.push(format!("{label}: CSV differs or missing"));
        }
        if *label == "rejection" {
            // adjust consumes the rejection draws
            let input = first.join("sample.csv");
            let (a1, a4) = (root.join("adjust-1"), root.join("adjust-4"));
            let base = ["adjust", "--in", input.to_str().unwrap(), "--sobs", "1.0"];
            if let Err(e) = run_cli(&[&base[..], &["--threads", "1", "--out", a1.to_str().unwrap()]].concat()) {
                failures.push(e);
                continue;
            }
            let m = a1.join("adjust.manifest.txt");
            if let Err(e) =
                run_cli(&["adjust", "--config", m.to_str().unwrap(), "--threads", "4", "--out", a4.to_str().unwrap()])
            {
                failures.push(e);
                continue;
            }
            if same_csv("adjust", &a1, &a4) {
                checked += 1;
            } else {
                failures.push("adjust: CSV differs or missing".into());
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{checked} subcommand runs byte-identical at 1 and 4 threads via manifest rerun")
    } else {
        failures.join("; ")
    };
    Outcome { pass: failures.is_empty() && checked == cases.len() + 1, detail }
}

fn main() {
    // `cargo test -- --list` and similar harness probes
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    let mut report = |k: usize, name: &str, start: Instant, o: Outcome| {
        let line = format!(
            "criterion {k:>2} {name:<28} {} [{:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        println!("{line}");
        lines.push((o.pass, line));
    };

    let t = Instant::now();
    report(1, "sampler exactness", t, sampler_exactness());
    let t = Instant::now();
    report(2, "concentration", t, verdicts(&run_experiment("concentration"), &[]));
    let t = Instant::now();
    report(3, "rate law", t, verdicts(&run_experiment("rate"), &[]));
    let t = Instant::now();
    report(4, "binding gradient", t, verdicts(&run_experiment("binding"), &[]));
    let t = Instant::now();
    report(5, "model-error diagnostic", t, verdicts(&run_experiment("model_error"), &[]));
    let t = Instant::now();
    report(6, "limiting variances", t, verdicts(&run_experiment("limits"), &[]));
    let t = Instant::now();
    let ms = run_experiment("mean_sampling");
    report(
        7,
        "posterior-mean sampling",
        t,
        verdicts(
            &ms,
            &[
                "scalar_mean_sampling_vs_info_inverse",
                "mahalanobis_mean_sampling_vs_info_inverse",
                "euclidean_mean_sampling_excess",
                "projected_mean_sampling_vs_info_inverse",
            ],
        ),
    );
    let t = Instant::now();
    report(8, "over-estimation", t, verdicts(&ms, &["scalar_over_estimation_ratio"]));
    let t = Instant::now();
    report(9, "Monte Carlo error", t, verdicts(&run_experiment("mc_error"), &[]));
    let t = Instant::now();
    report(10, "regression adjustment", t, verdicts(&run_experiment("regression"), &[]));
    let t = Instant::now();
    report(11, "kernel insensitivity", t, verdicts(&run_experiment("kernel_sweep"), &[]));
    let t = Instant::now();
    report(12, "determinism", t, determinism(tmp.path()));

    let failed = lines.iter().filter(|(p, _)| !p).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
