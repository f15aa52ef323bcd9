//! `n × posterior variance` against `I⁻¹` (`ε = o(1/√n)`) and `Ĩ⁻¹`
//! (Gaussian kernel, `ε = c/√n`).

use super::*;
use crate::asymptotics::{numeric_d0, predict_posterior};
use crate::metrics::{bandwidth, BandwidthSchedule};
use crate::par;
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "limits",
    description: "limiting posterior variances in the fast and boundary bandwidth regimes",
    defaults: "model = linear:2
n_grid = 100, 10000, 1000000
eta = 0.7
a = 1
c = 1
accept_fraction = 0.1
rounds = 8
draws = 100000
sampler = ais
",
    run,
};

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let model = model_of(cfg)?;
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let fast = BandwidthSchedule::explicit(cfg.get("a")?, cfg.get("eta")?)?;
    let c: f64 = cfg.get("c")?;
    let seed = seed_of(cfg)?;
    let d0 = numeric_d0(&model, &model.true_theta)?;
    let a0 = model.noise_cov(&model.true_theta);
    let kernels = [KernelSpec::uniform(), KernelSpec::gaussian()];
    let info_inv = predict_posterior(&d0, &a0, &kernels[0], 0.0)?.cov_t[(0, 0)];
    let tilde_inv = predict_posterior(&d0, &a0, &kernels[1], c)?.cov_t[(0, 0)];

    let cells = par::try_map_indexed(Exec::default(), 2 * grid.len(), |k| -> Result<(f64, f64)> {
        let (arm, i) = (k / grid.len(), k % grid.len());
        let n = grid[i];
        let eps = if arm == 0 { bandwidth(&fast, n)? } else { c / (n as f64).sqrt() };
        let obs = observe(&model, n, seed, &[i as u64]);
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernels[arm]).with_exec(INNER);
        let out = run_ais(&setup, cfg, Some(eps), sub_seed(seed, &[arm as u64, i as u64]))?;
        let var = stats::weighted_variance(&out.report.theta_column(0), &out.report.weights());
        Ok((eps, n as f64 * var))
    })?;

    let mut rows = vec![Row::global("info_inverse", info_inv), Row::global("info_tilde_inverse", tilde_inv)];
    for (i, &n) in grid.iter().enumerate() {
        rows.push(Row::at(n, cells[i].0, "n_var_uniform_fast", cells[i].1));
        rows.push(Row::at(n, cells[grid.len() + i].0, "n_var_gaussian_boundary", cells[grid.len() + i].1));
    }
    let last = grid.len() - 1;
    let verdicts = vec![
        Verdict::within_rel("fast_regime_vs_info_inverse", cells[last].1, info_inv, 0.1),
        Verdict::within_rel("boundary_regime_vs_info_tilde_inverse", cells[grid.len() + last].1, tilde_inv, 0.1),
    ];
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let plot = Plot {
        title: "n x ABC posterior variance".into(),
        x_label: "n".into(),
        y_label: "n var".into(),
        log_x: true,
        log_y: false,
        series: vec![
            (
                "uniform, eps = a n^-eta".into(),
                ns.iter().copied().zip(cells[..grid.len()].iter().map(|c| c.1)).collect(),
            ),
            (
                "gaussian, eps = c / sqrt(n)".into(),
                ns.iter().copied().zip(cells[grid.len()..].iter().map(|c| c.1)).collect(),
            ),
            ("I^-1".into(), ns.iter().map(|&x| (x, info_inv)).collect()),
            ("I-tilde^-1".into(), ns.iter().map(|&x| (x, tilde_inv)).collect()),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
