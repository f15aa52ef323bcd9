//! Accepted distances under a misspecified model stay bounded away from 0.

use super::*;
use crate::models::resolve_model;
use crate::par;
use crate::samplers::posterior_mean;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "model_error",
    description: "mean accepted distance and posterior mean, misspecified versus well-specified",
    defaults: "n_grid = 100, 1000, 10000, 100000, 1000000
accept_fraction = 0.05
rounds = 8
draws = 20000
kernel = uniform
sampler = ais
",
    run,
};

/// Brute-force minimiser of `‖b*(θ₀) − b(θ)‖` over a fine grid of the prior.
pub fn pseudo_true(model: &SyntheticModel) -> (f64, f64) {
    let target = model.misspecified_binding(&model.true_theta).unwrap_or_else(|| model.binding(&model.true_theta));
    let (lo, hi) = (model.prior.lo()[0], model.prior.hi()[0]);
    let points = 2_000_001;
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let t = lo + step * i as f64;
            let b = model.binding(&[t]);
            let d = b.iter().zip(&target).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            (t, d)
        })
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let kernel = kernel_of(cfg)?;
    let seed = seed_of(cfg)?;
    let arms = [resolve_model("misspec")?, resolve_model("misspec-control")?];
    let (theta_tilde, d_pseudo) = pseudo_true(&arms[0].abc);

    let cells = par::try_map_indexed(Exec::default(), 2 * grid.len(), |k| -> Result<(f64, f64)> {
        let (arm, i) = (k / grid.len(), k % grid.len());
        let n = grid[i];
        let pair = &arms[arm];
        let obs = observe(&pair.data, n, seed, &[arm as u64, i as u64]);
        let setup = AbcSetup::new(&pair.abc, &obs.s_obs, n, &kernel).with_exec(INNER);
        let out = run_ais(&setup, cfg, None, sub_seed(seed, &[arm as u64, i as u64]))?;
        Ok((out.report.mean_distance(), posterior_mean(&out.report)?[0]))
    })?;
    let (mis, ctrl) = cells.split_at(grid.len());

    let mut rows = vec![Row::global("pseudo_true_theta", theta_tilde), Row::global("pseudo_true_distance", d_pseudo)];
    for (i, &n) in grid.iter().enumerate() {
        rows.push(Row::new(Some(n), None, None, "misspecified_mean_distance", mis[i].0));
        rows.push(Row::new(Some(n), None, None, "misspecified_posterior_mean", mis[i].1));
        rows.push(Row::new(Some(n), None, None, "control_mean_distance", ctrl[i].0));
        rows.push(Row::new(Some(n), None, None, "control_posterior_mean", ctrl[i].1));
    }

    let last = grid.len() - 1;
    let prev = last.saturating_sub(1);
    let plateau = ((mis[last].0 - mis[prev].0) / mis[prev].0).abs();
    let ctrl_d: Vec<f64> = ctrl.iter().map(|c| c.0).collect();
    let decreasing = ctrl_d.windows(2).all(|w| w[1] < w[0]);
    let fall = ctrl_d[0] / ctrl_d[last];
    let verdicts = vec![
        Verdict::holds("misspecified_distance_plateau", plateau <= 0.2, plateau, 0.0, "last two n within 20%"),
        Verdict::at_least("misspecified_over_control", mis[last].0 / ctrl_d[last], 5.0),
        Verdict::within_rel("misspecified_distance_vs_pseudo_true", mis[last].0, d_pseudo, 0.2),
        Verdict::holds(
            "control_distance_to_zero",
            decreasing && fall >= 5.0,
            fall,
            5.0,
            "strictly decreasing, first/last >= 5",
        ),
        Verdict::within_abs("posterior_mean_vs_pseudo_true", mis[last].1, theta_tilde, 0.05),
    ];
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let plot = Plot {
        title: "Mean accepted distance".into(),
        x_label: "n".into(),
        y_label: "distance".into(),
        log_x: true,
        log_y: true,
        series: vec![
            ("misspecified".into(), ns.iter().copied().zip(mis.iter().map(|c| c.0)).collect()),
            ("well specified".into(), ns.iter().copied().zip(ctrl_d).collect()),
            ("pseudo-true distance".into(), ns.iter().map(|&x| (x, d_pseudo)).collect()),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
