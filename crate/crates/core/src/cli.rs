//! `abclab` command-line front end.
//!
//! Every subcommand resolves a flat [`Config`] from three layers: built-in
//! defaults, an optional `--config` file, then command-line flags. Each key
//! `some_key` is also the flag `--some-key`. A manifest holding the resolved
//! configuration is written next to every output so that
//! `abclab <subcommand> --config <manifest>` reproduces it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::adjust::{adjust_draws, fit_regression};
use crate::asymptotics::{numeric_d0, oracle_abc_posterior_auto, predict_posterior};
use crate::config::Config;
use crate::csvio::{fmt_real, parse_real, read_draws, write_draws};
use crate::error::AbcError;
use crate::experiments::{config_keys, find_experiment, write_outputs, CONFIG_KEYS, EXPERIMENTS};
use crate::metrics::{
    bandwidth, estimated_variance_distance, BandwidthSchedule, DistanceSpec, KernelSpec, PilotCovariance,
};
use crate::models::{resolve_model, ObservedData, SyntheticModel, MODEL_REGISTRY};
use crate::numerics::Mat;
use crate::par;
use crate::samplers::{
    adaptive_importance_abc_with, importance_abc, mcmc_abc, rejection_abc, rejection_abc_until, AbcSetup,
    AdaptiveConfig, Proposal, SamplerReport, Seed, Tolerance,
};

pub const OUT_ENV: &str = "ABCLAB_OUT";

/// Flags shared by every subcommand (not part of the resolved config).
pub const GLOBAL_FLAGS: &[(&str, &str)] = &[
    ("out", "output directory (default: $ABCLAB_OUT, else the current directory)"),
    ("threads", "cap on worker threads; outputs do not depend on it (0 = all cores)"),
    ("config", "flat `key = value` file; flags override it"),
];

const SAMPLE_KEYS: &[(&str, &str)] = &[
    ("model", "model registry name (see list-models)"),
    ("sampler", "rejection | is | ais | mcmc"),
    ("n", "data size"),
    ("draws", "accepted draws (rejection), proposals (is, per ais round) or chain length (mcmc)"),
    ("seed", "64-bit sampler seed"),
    ("data_seed", "seed of the observed data (default: seed)"),
    ("eps", "fixed bandwidth"),
    ("eps_scale", "a in eps = a * n^-eta"),
    ("eps_exponent", "eta in eps = a * n^-eta"),
    ("accept_fraction", "quantile acceptance fraction (rejection/is) or per-round fraction (ais)"),
    ("kernel", "uniform | gaussian"),
    ("distance", "euclidean | mahalanobis | auto"),
    ("rounds", "adaptive rounds (ais)"),
    ("step_sd", "random-walk step sd (mcmc; default 1/sqrt(n))"),
    ("max_proposals", "proposal budget for fixed-eps rejection"),
];

const ADJUST_KEYS: &[(&str, &str)] =
    &[("in", "draws CSV written by `abclab sample`"), ("sobs", "comma-separated observed summary")];

const PREDICT_KEYS: &[(&str, &str)] = &[
    ("model", "model registry name (see list-models)"),
    ("c", "limit of sqrt(n) * eps (0 = faster than 1/sqrt(n))"),
    ("kernel", "uniform | gaussian"),
    ("distance", "euclidean | mahalanobis | auto"),
];

const ORACLE_KEYS: &[(&str, &str)] = &[
    ("model", "model registry name with a scalar parameter"),
    ("n", "data size"),
    ("eps", "fixed bandwidth"),
    ("eps_scale", "a in eps = a * n^-eta"),
    ("eps_exponent", "eta in eps = a * n^-eta"),
    ("kernel", "uniform | gaussian"),
    ("seed", "seed of the observed data"),
    ("data_seed", "seed of the observed data (default: seed)"),
    ("sobs", "comma-separated observed summary (overrides the simulated one)"),
];

const SAMPLE_DEFAULTS: &str = "model = linear
sampler = rejection
n = 100
draws = 1000
seed = 0
kernel = uniform
distance = euclidean
rounds = 5
max_proposals = 10000000
";

const PREDICT_DEFAULTS: &str = "model = linear
c = 0
kernel = gaussian
distance = euclidean
";

const ORACLE_DEFAULTS: &str = "model = linear
n = 100
kernel = uniform
seed = 0
";

struct Sub {
    name: &'static str,
    about: &'static str,
    keys: Vec<(&'static str, &'static str)>,
}

fn experiment_keys() -> Vec<(&'static str, &'static str)> {
    let mut keys = vec![("experiment", "experiment name (same as the positional NAME)")];
    keys.extend_from_slice(CONFIG_KEYS);
    keys
}

fn subcommands() -> Vec<Sub> {
    vec![
        Sub { name: "sample", about: "run an ABC sampler and write the accepted draws", keys: SAMPLE_KEYS.to_vec() },
        Sub { name: "adjust", about: "regression-adjust a draws file", keys: ADJUST_KEYS.to_vec() },
        Sub { name: "predict", about: "closed-form limiting posterior", keys: PREDICT_KEYS.to_vec() },
        Sub { name: "oracle", about: "exact ABC posterior density of a scalar parameter", keys: ORACLE_KEYS.to_vec() },
        Sub { name: "experiment", about: "run a named experiment", keys: experiment_keys() },
        Sub { name: "list-models", about: "list registered models and experiments", keys: Vec::new() },
    ]
}

pub fn flag_of(key: &str) -> String {
    key.replace('_', "-")
}

/// Every `--flag` the tool accepts, deduplicated and sorted.
pub fn all_flags() -> Vec<String> {
    let mut flags: Vec<String> = GLOBAL_FLAGS.iter().map(|(k, _)| flag_of(k)).collect();
    for sub in subcommands() {
        flags.extend(sub.keys.iter().map(|(k, _)| flag_of(k)));
    }
    flags.sort();
    flags.dedup();
    flags
}

fn flag_index() -> String {
    let mut s = String::from("Flags by subcommand:\n");
    let _ = writeln!(
        s,
        "  (all)        {}",
        GLOBAL_FLAGS.iter().map(|(k, _)| format!("--{}", flag_of(k))).collect::<Vec<_>>().join(" ")
    );
    for sub in subcommands() {
        if sub.keys.is_empty() {
            continue;
        }
        let names: Vec<String> = sub.keys.iter().map(|(k, _)| format!("--{}", flag_of(k))).collect();
        let _ = writeln!(s, "  {:<12} {}", sub.name, names.join(" "));
    }
    s.push_str("\nEvery flag --some-key is also the config-file key some_key.");
    s
}

pub fn command() -> Command {
    let mut cmd = Command::new("abclab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Large-sample laboratory for Approximate Bayesian Computation")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(flag_index());
    for (key, help) in GLOBAL_FLAGS {
        cmd = cmd.arg(Arg::new(*key).long(flag_of(key)).value_name("VALUE").help(*help).global(true));
    }
    for sub in subcommands() {
        let mut c = Command::new(sub.name).about(sub.about);
        if sub.name == "experiment" {
            let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
            c = c.arg(Arg::new("name").value_name("NAME").help(format!("one of: {}", names.join(", "))));
        }
        for (key, help) in &sub.keys {
            c = c.arg(Arg::new(*key).long(flag_of(key)).value_name("VALUE").help(*help).action(ArgAction::Set));
        }
        cmd = cmd.subcommand(c);
    }
    cmd
}

enum CliError {
    Usage(String),
    Runtime(AbcError),
}

impl From<AbcError> for CliError {
    fn from(e: AbcError) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Typed lookups that report bad values against the flag name.
struct Resolved {
    cfg: Config,
}

impl Resolved {
    fn bad(&self, key: &str) -> CliError {
        usage(format!("invalid value '{}' for --{}", self.cfg.get_opt(key).unwrap_or(""), flag_of(key)))
    }

    fn has(&self, key: &str) -> bool {
        self.cfg.contains(key)
    }

    fn str(&self, key: &str) -> CliResult<&str> {
        self.cfg.get_opt(key).ok_or_else(|| usage(format!("missing required --{}", flag_of(key))))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        self.str(key)?;
        self.cfg.get(key).map_err(|_| self.bad(key))
    }

    fn opt<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        if self.has(key) {
            self.get(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn reals(&self, key: &str) -> CliResult<Vec<f64>> {
        let raw = self.str(key)?;
        raw.split(',').map(|s| parse_real(s.trim())).collect::<Option<Vec<_>>>().ok_or_else(|| self.bad(key))
    }
}

fn resolve(sub: &Sub, defaults: &str, m: &ArgMatches, file: Option<&Config>) -> CliResult<Resolved> {
    let allowed: Vec<&str> = sub.keys.iter().map(|(k, _)| *k).collect();
    let mut cfg = Config::parse(defaults).expect("built-in defaults parse");
    if let Some(f) = file {
        if let Err(AbcError::Config(msg)) = f.check_keys(&allowed) {
            return Err(usage(format!("config file: {msg} (not a flag of `{}`)", sub.name)));
        }
        cfg.merge(f);
    }
    for key in &allowed {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v.clone());
        }
    }
    Ok(Resolved { cfg })
}

fn out_dir(m: &ArgMatches) -> PathBuf {
    m.get_one::<String>("out")
        .cloned()
        .or_else(|| std::env::var(OUT_ENV).ok().filter(|s| !s.is_empty()))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(AbcError::from(e))
}

/// Writes `<stem>.manifest.txt`; the non-comment lines are a valid config.
fn write_manifest(dir: &Path, stem: &str, sub: &str, cfg: &Config, started: u64) -> CliResult<PathBuf> {
    let mut text = String::new();
    let _ = writeln!(text, "# abclab run manifest; rerun with `abclab {sub} --config <this file>`");
    let _ = writeln!(text, "# subcommand = {sub}");
    let _ = writeln!(text, "# version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "# started = {started}");
    let _ = writeln!(text, "# finished = {}", unix_now());
    text.push_str(&cfg.render());
    let path = dir.join(format!("{stem}.manifest.txt"));
    std::fs::write(&path, text).map_err(io)?;
    Ok(path)
}

fn write_file(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(io)?;
    Ok(path)
}

fn kernel_from(r: &Resolved, model: &SyntheticModel, n: u64, seed: u64) -> CliResult<KernelSpec> {
    let kind = r.str("kernel")?.parse().map_err(|_| r.bad("kernel"))?;
    let distance = match r.str("distance")? {
        "euclidean" => DistanceSpec::Euclidean,
        "mahalanobis" => DistanceSpec::mahalanobis(model.noise_cov(&model.true_theta).inverse_spd()?)?,
        "auto" => estimated_variance_distance(model, n, 1000, PilotCovariance::Diagonal, seed)?,
        _ => return Err(r.bad("distance")),
    };
    Ok(KernelSpec { kind, distance })
}

/// Bandwidth from `--eps` or `--eps-scale/--eps-exponent`, if given.
fn fixed_eps(r: &Resolved, n: u64) -> CliResult<Option<f64>> {
    let eps: Option<f64> = r.opt("eps")?;
    let a: Option<f64> = r.opt("eps_scale")?;
    let eta: Option<f64> = r.opt("eps_exponent")?;
    match (eps, a, eta) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(usage("--eps conflicts with --eps-scale/--eps-exponent")),
        (Some(e), None, None) => Ok(Some(e)),
        (None, Some(a), Some(eta)) => Ok(Some(bandwidth(&BandwidthSchedule::explicit(a, eta)?, n)?)),
        (None, Some(_), None) => Err(usage("--eps-scale needs --eps-exponent")),
        (None, None, Some(_)) => Err(usage("--eps-exponent needs --eps-scale")),
        (None, None, None) => Ok(None),
    }
}

fn observed(r: &Resolved, data: &SyntheticModel, n: u64) -> CliResult<Vec<f64>> {
    if r.has("sobs") {
        let s = r.reals("sobs")?;
        if s.len() != data.d() {
            return Err(usage(format!("--sobs needs {} values, got {}", data.d(), s.len())));
        }
        return Ok(s);
    }
    let seed: u64 = r.get("seed")?;
    let data_seed: u64 = r.opt("data_seed")?.unwrap_or(seed);
    Ok(ObservedData::generate(data, n, data_seed).s_obs)
}

fn summary_line(sampler: &str, rep: &SamplerReport) -> String {
    format!(
        "{{\"sampler\": \"{sampler}\", \"n_proposed\": {}, \"n_accepted\": {}, \"acceptance_rate\": {}, \"eps_used\": {}, \"ess\": {}}}",
        rep.n_proposed,
        rep.n_accepted,
        fmt_real(rep.acceptance_rate),
        fmt_real(rep.eps_used),
        fmt_real(rep.ess)
    )
}

fn cmd_sample(sub: &Sub, m: &ArgMatches, file: Option<&Config>, out: &Path) -> CliResult<()> {
    let started = unix_now();
    let r = resolve(sub, SAMPLE_DEFAULTS, m, file)?;
    let pair = resolve_model(r.str("model")?)?;
    let n: u64 = r.get("n")?;
    let draws: usize = r.get("draws")?;
    let seed: u64 = r.get("seed")?;
    if n == 0 {
        return Err(r.bad("n"));
    }
    if draws == 0 {
        return Err(r.bad("draws"));
    }
    let model = &pair.abc;
    let kernel = kernel_from(&r, model, n, seed)?;
    let s_obs = observed(&r, &pair.data, n)?;
    let setup = AbcSetup::new(model, &s_obs, n, &kernel);
    let eps = fixed_eps(&r, n)?;
    let q: Option<f64> = r.opt("accept_fraction")?;
    let sampler = r.str("sampler")?;
    let seeds = Seed::new(seed);
    let need_tol = || -> CliResult<Tolerance> {
        match (eps, q) {
            (Some(e), None) => Ok(Tolerance::Fixed(e)),
            (None, Some(q)) => Ok(Tolerance::Quantile(q)),
            (Some(_), Some(_)) => Err(usage("--accept-fraction conflicts with a fixed bandwidth")),
            (None, None) => {
                Err(usage(format!("sampler {sampler} needs --eps, --eps-scale/--eps-exponent or --accept-fraction")))
            }
        }
    };
    let report = match sampler {
        "rejection" => match need_tol()? {
            Tolerance::Fixed(e) => {
                let budget: usize = r.get("max_proposals")?;
                rejection_abc_until(&setup, e, draws, budget, 4096, seeds)?
            }
            Tolerance::Quantile(q) => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(r.bad("accept_fraction"));
                }
                rejection_abc(&setup, Tolerance::Quantile(q), (draws as f64 / q).ceil() as usize, seeds)?
            }
        },
        "is" => importance_abc(&setup, need_tol()?, draws, &Proposal::Prior, seeds)?,
        "ais" => {
            let mut cfg = AdaptiveConfig::new(q.unwrap_or(0.1), r.get("rounds")?, draws);
            cfg.final_eps = eps;
            adaptive_importance_abc_with(&setup, &cfg, seeds)?.report
        }
        "mcmc" => {
            let Some(e) = eps else {
                return Err(usage("sampler mcmc needs --eps or --eps-scale/--eps-exponent"));
            };
            let budget: usize = r.get("max_proposals")?;
            let start = rejection_abc_until(&setup, e, 1, budget, 4096, seeds.child(1))?;
            let sd: f64 = r.opt("step_sd")?.unwrap_or(1.0 / (n as f64).sqrt());
            if !(sd >= 0.0) || !sd.is_finite() {
                return Err(r.bad("step_sd"));
            }
            let step = Mat::identity(model.p()).scale(sd * sd);
            mcmc_abc(&setup, e, draws, &step, &start.draws[0].theta, seeds.child(2))?
        }
        _ => return Err(r.bad("sampler")),
    };
    let csv = write_file(out, "sample.csv", &write_draws(&report.draws, None))?;
    write_manifest(out, "sample", "sample", &r.cfg, started)?;
    println!("{}", summary_line(sampler, &report));
    eprintln!("wrote {}", csv.display());
    Ok(())
}

fn cmd_adjust(sub: &Sub, m: &ArgMatches, file: Option<&Config>, out: &Path) -> CliResult<()> {
    let started = unix_now();
    let r = resolve(sub, "", m, file)?;
    let input = PathBuf::from(r.str("in")?);
    let text = std::fs::read_to_string(&input)
        .map_err(|e| CliError::Runtime(AbcError::Io(format!("{}: {e}", input.display()))))?;
    let draws = read_draws(&text)?;
    let s_obs = r.reals("sobs")?;
    let fit = fit_regression(&draws)?;
    let adjusted = adjust_draws(&draws, &fit, &s_obs)?;
    let csv = write_file(out, "adjust.csv", &write_draws(&draws, Some(&adjusted)))?;
    write_manifest(out, "adjust", "adjust", &r.cfg, started)?;
    let b: Vec<String> = fit.b_hat.as_slice().iter().map(|v| fmt_real(*v)).collect();
    println!("{{\"draws\": {}, \"b_hat\": [{}]}}", draws.len(), b.join(", "));
    eprintln!("wrote {}", csv.display());
    Ok(())
}

fn cmd_predict(sub: &Sub, m: &ArgMatches, file: Option<&Config>, out: &Path) -> CliResult<()> {
    let started = unix_now();
    let r = resolve(sub, PREDICT_DEFAULTS, m, file)?;
    let model = resolve_model(r.str("model")?)?.abc;
    let c: f64 = r.get("c")?;
    let kernel = kernel_from(&r, &model, 1, 0)?;
    let d0 = numeric_d0(&model, &model.true_theta)?;
    let a0 = model.noise_cov(&model.true_theta);
    let pred = predict_posterior(&d0, &a0, &kernel, c)?;
    let tables: [(&str, Mat); 7] = [
        ("I", pred.info.clone()),
        ("I_inverse", pred.info.inverse_spd()?),
        ("I_tilde", pred.info_tilde.clone()),
        ("I_tilde_inverse", pred.info_tilde.inverse_spd()?),
        ("mean_map", pred.mean_map.clone()),
        ("posterior_cov_t", pred.cov_t.clone()),
        ("mean_sampling_cov", pred.mean_sampling_cov.clone()),
    ];
    let mut csv = String::from("quantity,row,col,value\n");
    println!("regime  {:?}", pred.regime);
    println!("c       {}", fmt_real(pred.c));
    for (name, mat) in &tables {
        for i in 0..mat.rows() {
            for j in 0..mat.cols() {
                let v = fmt_real(mat[(i, j)]);
                let _ = writeln!(csv, "{name},{},{},{v}", i + 1, j + 1);
                println!("{:<18} [{},{}]  {v}", name, i + 1, j + 1);
            }
        }
    }
    write_file(out, "predict.csv", &csv)?;
    write_manifest(out, "predict", "predict", &r.cfg, started)?;
    Ok(())
}

fn cmd_oracle(sub: &Sub, m: &ArgMatches, file: Option<&Config>, out: &Path) -> CliResult<()> {
    let started = unix_now();
    let r = resolve(sub, ORACLE_DEFAULTS, m, file)?;
    let pair = resolve_model(r.str("model")?)?;
    let n: u64 = r.get("n")?;
    if n == 0 {
        return Err(r.bad("n"));
    }
    let eps = fixed_eps(&r, n)?.ok_or_else(|| usage("oracle needs --eps or --eps-scale/--eps-exponent"))?;
    let kind = r.str("kernel")?.parse().map_err(|_| r.bad("kernel"))?;
    let kernel = KernelSpec { kind, distance: DistanceSpec::Euclidean };
    let s_obs = observed(&r, &pair.data, n)?;
    let table = oracle_abc_posterior_auto(&pair.abc, &s_obs, n, &kernel, eps)?;
    let mut csv = String::from("theta,density\n");
    for (t, d) in table.theta.iter().zip(&table.density) {
        let _ = writeln!(csv, "{},{}", fmt_real(*t), fmt_real(*d));
    }
    let path = write_file(out, "oracle.csv", &csv)?;
    write_manifest(out, "oracle", "oracle", &r.cfg, started)?;
    println!(
        "{{\"mean\": {}, \"sd\": {}, \"points\": {}}}",
        fmt_real(table.mean()),
        fmt_real(table.sd()),
        table.theta.len()
    );
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_experiment(sub: &Sub, m: &ArgMatches, file: Option<&Config>, out: &Path) -> CliResult<()> {
    let started = unix_now();
    let mut r = resolve(sub, "", m, file)?;
    let name = match (m.get_one::<String>("name"), r.cfg.remove("experiment")) {
        (Some(a), Some(b)) if *a != b => return Err(usage(format!("NAME '{a}' conflicts with --experiment '{b}'"))),
        (Some(a), _) => a.clone(),
        (None, Some(b)) => b,
        (None, None) => return Err(usage("missing experiment NAME (or --experiment)")),
    };
    let def = find_experiment(&name).map_err(|_| usage(format!("unknown experiment '{name}'")))?;
    if !r.has("seed") {
        return Err(usage("experiment needs an explicit --seed"));
    }
    r.get::<u64>("seed")?;
    let result = def.run(&r.cfg).map_err(|e| match e {
        AbcError::Config(msg) => usage(name_flags(&msg)),
        other => CliError::Runtime(other),
    })?;
    let paths = write_outputs(&result, out)?;
    let mut manifest = result.config.clone();
    manifest.set("experiment", name.as_str());
    write_manifest(out, &name, "experiment", &manifest, started)?;
    for v in &result.verdicts {
        println!(
            "{} {} observed={} expected={} tolerance={}",
            if v.pass { "PASS" } else { "FAIL" },
            v.check,
            fmt_real(v.observed),
            fmt_real(v.expected),
            v.tolerance
        );
    }
    eprintln!("wrote {}", paths.csv.display());
    Ok(())
}

/// Rewrites `key 'some_key'` in a config message as `--some-key`.
fn name_flags(msg: &str) -> String {
    let mut s = msg.to_string();
    for key in config_keys() {
        s = s.replace(&format!("key '{key}'"), &format!("--{}", flag_of(key)));
    }
    s
}

fn cmd_list_models() {
    println!("models:");
    for (name, desc) in MODEL_REGISTRY {
        println!("  {name:<18} {desc}");
    }
    println!("experiments:");
    for e in EXPERIMENTS {
        println!("  {:<18} {}", e.name, e.description);
    }
}

fn dispatch(m: &ArgMatches) -> CliResult<()> {
    let (name, sm) = m.subcommand().expect("subcommand required");
    let file = match sm.get_one::<String>("config") {
        Some(p) => Some(Config::load(Path::new(p)).map_err(|e| usage(format!("--config: {e}")))?),
        None => None,
    };
    let out = out_dir(sm);
    let subs = subcommands();
    let sub = subs.iter().find(|s| s.name == name).expect("registered subcommand");
    match name {
        "sample" => cmd_sample(sub, sm, file.as_ref(), &out),
        "adjust" => cmd_adjust(sub, sm, file.as_ref(), &out),
        "predict" => cmd_predict(sub, sm, file.as_ref(), &out),
        "oracle" => cmd_oracle(sub, sm, file.as_ref(), &out),
        "experiment" => cmd_experiment(sub, sm, file.as_ref(), &out),
        _ => {
            cmd_list_models();
            Ok(())
        }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code: 0 success, 2 usage error, 1 runtime error.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let m = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = match m.subcommand().and_then(|(_, sm)| sm.get_one::<String>("threads")) {
        None => 0,
        Some(t) => match t.parse::<usize>() {
            Ok(k) => k,
            Err(_) => {
                eprintln!("usage error: invalid value '{t}' for --threads");
                return 2;
            }
        },
    };
    match par::with_threads(threads, || dispatch(&m)) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error[{}]: {e}", e.name());
            1
        }
    }
}
