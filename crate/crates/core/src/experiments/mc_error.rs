//! Monte Carlo error of the importance-sampling estimate and acceptance
//! rates under `ε = c/√n` versus faster-shrinking bandwidths.

use super::*;
use crate::metrics::{bandwidth, BandwidthSchedule};
use crate::par;
use crate::samplers::{importance_abc, posterior_mean, Tolerance};
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "mc_error",
    description: "variance of the estimate across seeds versus N, and adaptive acceptance rates across n",
    defaults: "model = linear
n_grid = 100, 10000, 1000000
c = 1
a = 1
eta = 0.7
proposals = 1000, 10000
replicates = 200
accept_fraction = 0.1
rounds = 8
draws = 20000
kernel = uniform
sampler = is
",
    run,
};

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let model = model_of(cfg)?;
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let c: f64 = cfg.get("c")?;
    let fast = BandwidthSchedule::explicit(cfg.get("a")?, cfg.get("eta")?)?;
    let proposals: Vec<usize> = cfg.get_list("proposals")?;
    let reps: usize = cfg.get("replicates")?;
    let kernel = kernel_of(cfg)?;
    let seed = seed_of(cfg)?;
    let ceps = |n: u64| c / (n as f64).sqrt();

    // Monte Carlo error at a single n, proposal learned once by a pilot run.
    let n_mc = grid[grid.len() / 2];
    let obs = observe(&model, n_mc, seed, &[0]);
    let setup = AbcSetup::new(&model, &obs.s_obs, n_mc, &kernel);
    let pilot = run_ais(&setup, cfg, Some(ceps(n_mc)), sub_seed(seed, &[0]))?;
    let inner = setup.with_exec(INNER);
    let estimates = par::try_map_indexed(Exec::default(), proposals.len() * reps, |k| -> Result<f64> {
        let (j, r) = (k / reps, k % reps);
        let rep = importance_abc(
            &inner,
            Tolerance::Fixed(ceps(n_mc)),
            proposals[j],
            &pilot.proposal,
            sub_seed(seed, &[1, j as u64, r as u64]),
        )?;
        Ok(posterior_mean(&rep)?[0])
    })?;

    let mut rows = Vec::new();
    let mut variances = Vec::new();
    for (j, &np) in proposals.iter().enumerate() {
        let block = &estimates[j * reps..(j + 1) * reps];
        for (r, v) in block.iter().enumerate() {
            rows.push(Row::new(Some(n_mc), Some(ceps(n_mc)), Some(r), format!("estimate_proposals_{np}"), *v));
        }
        let var = stats::variance(block);
        rows.push(Row::at(n_mc, ceps(n_mc), format!("estimate_variance_proposals_{np}"), var));
        variances.push(var);
    }

    // Acceptance rates of the final adaptive round across n.
    let rates = par::try_map_indexed(Exec::default(), 2 * grid.len(), |k| -> Result<(f64, f64)> {
        let (arm, i) = (k / grid.len(), k % grid.len());
        let n = grid[i];
        let eps = if arm == 0 { ceps(n) } else { bandwidth(&fast, n)? };
        let obs = observe(&model, n, seed, &[2, i as u64]);
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernel).with_exec(INNER);
        let out = run_ais(&setup, cfg, Some(eps), sub_seed(seed, &[2, arm as u64, i as u64]))?;
        Ok((eps, out.report.acceptance_rate))
    })?;
    let (boundary, faster) = rates.split_at(grid.len());
    for (i, &n) in grid.iter().enumerate() {
        rows.push(Row::at(n, boundary[i].0, "acceptance_rate_boundary", boundary[i].1));
        rows.push(Row::at(n, faster[i].0, "acceptance_rate_faster", faster[i].1));
    }

    let mut verdicts = Vec::new();
    if variances.len() >= 2 {
        let expected = proposals[1] as f64 / proposals[0] as f64;
        let ratio = variances[0] / variances[1];
        rows.push(Row::global("estimate_variance_ratio", ratio));
        verdicts.push(Verdict::in_range("estimate_variance_ratio", ratio, 0.5 * expected, 1.5 * expected));
    }
    let min_rate = boundary.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    verdicts.push(Verdict::at_least("boundary_acceptance_bounded_below", min_rate, 0.02));
    let fr: Vec<f64> = faster.iter().map(|r| r.1).collect();
    let falling = fr.windows(2).all(|w| w[1] < w[0]);
    let drop = fr[fr.len() - 1] / fr[0];
    verdicts.push(Verdict::holds(
        "faster_acceptance_falls",
        falling && drop < 0.5,
        drop,
        0.0,
        "strictly decreasing, last/first < 0.5",
    ));

    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let plot = Plot {
        title: "Final-round acceptance rate".into(),
        x_label: "n".into(),
        y_label: "acceptance rate".into(),
        log_x: true,
        log_y: true,
        series: vec![
            ("eps = c / sqrt(n)".into(), ns.iter().copied().zip(boundary.iter().map(|r| r.1)).collect()),
            ("eps = a n^-eta".into(), ns.iter().copied().zip(fr).collect()),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
