//! Regression adjustment recovers the efficient limit when `ε` shrinks
//! slower than `1/√n`.

use super::*;
use crate::adjust::{adjust_draws, fit_regression};
use crate::asymptotics::{numeric_d0, predict_posterior};
use crate::metrics::{bandwidth, BandwidthSchedule};
use crate::par;
use crate::samplers::AcceptedDraw;
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "regression",
    description: "adjusted and unadjusted n var with eps = a n^-eta, eta = 1/3",
    defaults: "model = linear:2
n_grid = 100, 1000, 10000, 100000, 1000000
a = 1
eta = 0.3333333333333333
accept_fraction = 0.1
rounds = 8
draws = 200000
kernel = uniform
sampler = ais
",
    run,
};

struct Cell {
    eps: f64,
    unadjusted: f64,
    adjusted: f64,
    b_hat: f64,
    acceptance: f64,
    proposals: usize,
    draws: Vec<AcceptedDraw>,
    s_obs: Vec<f64>,
}

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let model = model_of(cfg)?;
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let sched = BandwidthSchedule::explicit(cfg.get("a")?, cfg.get("eta")?)?;
    let kernel = kernel_of(cfg)?;
    let seed = seed_of(cfg)?;
    let d0 = numeric_d0(&model, &model.true_theta)?;
    let info_inv = predict_posterior(&d0, &model.noise_cov(&model.true_theta), &kernel, 0.0)?.cov_t[(0, 0)];
    let b_expected = 1.0 / d0[(0, 0)];
    let last = grid.len() - 1;

    let cells = par::try_map_indexed(Exec::default(), grid.len(), |i| -> Result<Cell> {
        let n = grid[i];
        let eps = bandwidth(&sched, n)?;
        let obs = observe(&model, n, seed, &[i as u64]);
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernel).with_exec(INNER);
        let out = run_ais(&setup, cfg, Some(eps), sub_seed(seed, &[i as u64]))?;
        let rep = out.report;
        let fit = fit_regression(&rep.draws)?;
        let adj = adjust_draws(&rep.draws, &fit, &obs.s_obs)?;
        let ws = rep.weights();
        let nf = n as f64;
        let th: Vec<f64> = adj.iter().map(|d| d.theta[0]).collect();
        Ok(Cell {
            eps,
            unadjusted: nf * stats::weighted_variance(&rep.theta_column(0), &ws),
            adjusted: nf * stats::weighted_variance(&th, &ws),
            b_hat: fit.b_hat[(0, 0)],
            acceptance: rep.acceptance_rate,
            proposals: rep.n_proposed,
            draws: if i == last { rep.draws } else { Vec::new() },
            s_obs: obs.s_obs,
        })
    })?;

    let mut rows = vec![Row::global("info_inverse", info_inv), Row::global("inverse_binding_slope", b_expected)];
    for (c, &n) in cells.iter().zip(&grid) {
        rows.push(Row::at(n, c.eps, "n_var_unadjusted", c.unadjusted));
        rows.push(Row::at(n, c.eps, "n_var_adjusted", c.adjusted));
        rows.push(Row::at(n, c.eps, "b_hat", c.b_hat));
        rows.push(Row::at(n, c.eps, "acceptance_rate", c.acceptance));
    }
    for (w, n) in cells.windows(2).zip(grid.windows(2)) {
        rows.push(Row::at(n[1], w[1].eps, "unadjusted_growth", w[1].unadjusted / w[0].unadjusted));
        rows.push(Row::at(n[1], w[1].eps, "bandwidth_growth_prediction", (n[1] as f64 / n[0] as f64).cbrt()));
    }

    // Draws lying exactly on a hyperplane adjust to a single point.
    let lastc = &cells[last];
    let plane: Vec<AcceptedDraw> =
        lastc.draws.iter().map(|d| AcceptedDraw { theta: vec![0.3 + 0.5 * d.summary[0]], ..d.clone() }).collect();
    let plane_fit = fit_regression(&plane)?;
    let flat = adjust_draws(&plane, &plane_fit, &lastc.s_obs)?;
    let flat_th: Vec<f64> = flat.iter().map(|d| d.theta[0]).collect();
    let plane_var = stats::weighted_variance(&flat_th, &plane.iter().map(|d| d.weight).collect::<Vec<_>>());
    rows.push(Row::global("hyperplane_adjusted_variance", plane_var));

    let rates: Vec<f64> = cells.iter().map(|c| c.acceptance).collect();
    let slack: Vec<f64> =
        cells.iter().map(|c| 2.0 * (c.acceptance * (1.0 - c.acceptance) / c.proposals as f64).sqrt()).collect();
    let drops = count_drops(&rates, &slack);
    let verdicts = vec![
        Verdict::within_rel("adjusted_vs_info_inverse", lastc.adjusted, info_inv, 0.1),
        Verdict::at_least("unadjusted_over_info_inverse", lastc.unadjusted / info_inv, 2.0),
        Verdict::within_rel("b_hat_vs_inverse_slope", lastc.b_hat, b_expected, 0.05),
        Verdict::holds(
            "acceptance_nondecreasing",
            drops == 0,
            drops as f64,
            0.0,
            "no drop beyond 2 binomial standard errors",
        ),
        Verdict::below("hyperplane_adjusted_variance", plane_var, 1e-20),
    ];
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let plot = Plot {
        title: "n x posterior variance, eps = a n^-1/3".into(),
        x_label: "n".into(),
        y_label: "n var".into(),
        log_x: true,
        log_y: true,
        series: vec![
            ("unadjusted".into(), ns.iter().copied().zip(cells.iter().map(|c| c.unadjusted)).collect()),
            ("adjusted".into(), ns.iter().copied().zip(cells.iter().map(|c| c.adjusted)).collect()),
            ("I^-1".into(), ns.iter().map(|&x| (x, info_inv)).collect()),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
