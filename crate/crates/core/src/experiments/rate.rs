//! Posterior spread decays at the slower of `ε_n` and `1/√n`.

use super::*;
use crate::asymptotics::oracle_abc_posterior_auto;
use crate::metrics::{bandwidth, BandwidthSchedule};
use crate::par;
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "rate",
    description: "log posterior sd against log n for several bandwidth exponents",
    defaults: "model = linear
n_grid = 100, 1000, 10000, 100000, 1000000
a = 2
eta = 0.3, 0.5, 0.7
accept_fraction = 0.1
rounds = 8
draws = 50000
kernel = uniform
sampler = ais
",
    run,
};

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let model = model_of(cfg)?;
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let a: f64 = cfg.get("a")?;
    let etas: Vec<f64> = cfg.get_list("eta")?;
    let kernel = kernel_of(cfg)?;
    let seed = seed_of(cfg)?;
    if grid.len() < 2 {
        return Err(AbcError::Config("n_grid needs at least two sizes to fit a slope".into()));
    }

    let cells = par::try_map_indexed(Exec::default(), etas.len() * grid.len(), |k| -> Result<(f64, f64, f64)> {
        let (e, i) = (k / grid.len(), k % grid.len());
        let n = grid[i];
        let eps = bandwidth(&BandwidthSchedule::explicit(a, etas[e])?, n)?;
        let obs = observe(&model, n, seed, &[i as u64]);
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernel).with_exec(INNER);
        let out = run_ais(&setup, cfg, Some(eps), sub_seed(seed, &[e as u64, i as u64]))?;
        let sd = stats::weighted_variance(&out.report.theta_column(0), &out.report.weights()).sqrt();
        let oracle = oracle_abc_posterior_auto(&model, &obs.s_obs, n, &kernel, eps)?.sd();
        Ok((eps, sd, oracle))
    })?;

    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut series = Vec::new();
    for (e, eta) in etas.iter().enumerate() {
        let block = &cells[e * grid.len()..(e + 1) * grid.len()];
        for (&n, (eps, sd, oracle)) in grid.iter().zip(block) {
            rows.push(Row::at(n, *eps, format!("posterior_sd_eta_{eta}"), *sd));
            rows.push(Row::at(n, *eps, format!("oracle_sd_eta_{eta}"), *oracle));
        }
        let sds: Vec<f64> = block.iter().map(|c| c.1).collect();
        let oracle: Vec<f64> = block.iter().map(|c| c.2).collect();
        let slope = log_log_slope(&ns, &sds);
        let oracle_slope = log_log_slope(&ns, &oracle);
        rows.push(Row::global(format!("slope_eta_{eta}"), slope));
        rows.push(Row::global(format!("oracle_slope_eta_{eta}"), oracle_slope));
        verdicts.push(Verdict::within_abs(&format!("slope_eta_{eta}"), slope, -eta.min(0.5), 0.05));
        series.push((format!("eta = {eta}"), ns.iter().copied().zip(sds).collect()));
        series.push((format!("oracle, eta = {eta}"), ns.iter().copied().zip(oracle).collect()));
    }
    let plot = Plot {
        title: "ABC posterior sd".into(),
        x_label: "n".into(),
        y_label: "posterior sd".into(),
        log_x: true,
        log_y: true,
        series,
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
