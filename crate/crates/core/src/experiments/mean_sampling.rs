//! Sampling distribution of the ABC posterior mean over repeated data.

use super::*;
use crate::asymptotics::{numeric_d0, predict_posterior, project_summaries, AsymptoticPrediction};
use crate::metrics::DistanceSpec;
use crate::models::{make_linear_gaussian, make_multi_summary};
use crate::par;
use crate::samplers::posterior_mean;
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "mean_sampling",
    description: "n var(posterior mean) and n E[posterior var] against the boundary-regime predictions",
    defaults: "n_grid = 10000
c = 1
c_multi = 10
accept_fraction = 0.1
rounds = 6
draws = 5000
replicates = 1000
kernel = gaussian
sampler = ais
",
    run,
};

struct Arm {
    label: &'static str,
    model: SyntheticModel,
    kernel: KernelSpec,
    c: f64,
    prediction: AsymptoticPrediction,
}

fn arm(label: &'static str, model: SyntheticModel, kernel: KernelSpec, c: f64) -> Result<Arm> {
    let d0 = numeric_d0(&model, &model.true_theta)?;
    let a0 = model.noise_cov(&model.true_theta);
    let prediction = predict_posterior(&d0, &a0, &kernel, c)?;
    Ok(Arm { label, model, kernel, c, prediction })
}

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let n: u64 = cfg.get_list::<u64>("n_grid")?[0];
    let c: f64 = cfg.get("c")?;
    let c_multi: f64 = cfg.get("c_multi")?;
    let reps: usize = cfg.get("replicates")?;
    let seed = seed_of(cfg)?;
    let kind = kernel_of(cfg)?.kind;
    let base = KernelSpec { kind, distance: DistanceSpec::Euclidean };

    let multi = make_multi_summary(2)?;
    let d0 = numeric_d0(&multi, &multi.true_theta)?;
    let a0 = multi.noise_cov(&multi.true_theta);
    let multi_info_inv = predict_posterior(&d0, &a0, &base, 0.0)?.cov_t[(0, 0)];
    let projected = multi.project(project_summaries(&d0, &a0)?)?;
    let maha = base.clone().with_distance(DistanceSpec::mahalanobis(a0.inverse_spd()?)?);
    let arms = [
        arm("scalar", make_linear_gaussian(2.0)?, base.clone(), c)?,
        arm("euclidean", multi.clone(), base.clone(), c_multi)?,
        arm("mahalanobis", multi, maha, c_multi)?,
        arm("projected", projected, base, c)?,
    ];

    let cells = par::try_map_indexed(Exec::default(), arms.len() * reps, |k| -> Result<(f64, f64)> {
        let (a, r) = (k / reps, k % reps);
        let arm = &arms[a];
        let obs = observe(&arm.model, n, seed, &[a as u64, r as u64]);
        let setup = AbcSetup::new(&arm.model, &obs.s_obs, n, &arm.kernel).with_exec(INNER);
        let eps = arm.c / (n as f64).sqrt();
        let out = run_ais(&setup, cfg, Some(eps), sub_seed(seed, &[a as u64, r as u64]))?;
        let mean = posterior_mean(&out.report)?[0];
        let var = stats::weighted_variance(&out.report.theta_column(0), &out.report.weights());
        Ok((mean, var))
    })?;

    let nf = n as f64;
    let mut rows = vec![Row::global("multi_info_inverse", multi_info_inv)];
    // (n var(means), n mean(posterior var)) per arm
    let mut observed = Vec::new();
    for (a, arm) in arms.iter().enumerate() {
        let block = &cells[a * reps..(a + 1) * reps];
        let eps = arm.c / nf.sqrt();
        for (r, (m, v)) in block.iter().enumerate() {
            rows.push(Row::new(Some(n), Some(eps), Some(r), format!("{}_posterior_mean", arm.label), *m));
            rows.push(Row::new(Some(n), Some(eps), Some(r), format!("{}_posterior_var", arm.label), *v));
        }
        let means: Vec<f64> = block.iter().map(|c| c.0).collect();
        let msc = if reps > 1 { nf * stats::variance(&means) } else { f64::NAN };
        let post = nf * block.iter().map(|c| c.1).sum::<f64>() / reps as f64;
        rows.push(Row::at(n, eps, format!("{}_n_var_of_means", arm.label), msc));
        rows.push(Row::at(n, eps, format!("{}_n_mean_posterior_var", arm.label), post));
        rows.push(Row::at(
            n,
            eps,
            format!("{}_predicted_mean_sampling_cov", arm.label),
            arm.prediction.mean_sampling_cov[(0, 0)],
        ));
        rows.push(Row::at(n, eps, format!("{}_predicted_cov_t", arm.label), arm.prediction.cov_t[(0, 0)]));
        observed.push((msc, post));
    }

    let scalar = &arms[0].prediction;
    let scalar_info_inv = scalar.info.inverse_spd()?[(0, 0)];
    let over_bound = 0.85 * scalar.cov_t[(0, 0)] / scalar_info_inv;
    let mut verdicts = vec![
        Verdict::within_rel("scalar_mean_sampling_vs_info_inverse", observed[0].0, scalar_info_inv, 0.15),
        Verdict::within_rel("scalar_posterior_var_vs_info_tilde_inverse", observed[0].1, scalar.cov_t[(0, 0)], 0.15),
        Verdict::at_least("scalar_over_estimation_ratio", observed[0].1 / observed[0].0, over_bound),
        Verdict::within_rel("mahalanobis_mean_sampling_vs_info_inverse", observed[2].0, multi_info_inv, 0.15),
        Verdict::at_least("euclidean_mean_sampling_excess", observed[1].0 / multi_info_inv, 1.2),
        Verdict::within_rel(
            "euclidean_mean_sampling_vs_prediction",
            observed[1].0,
            arms[1].prediction.mean_sampling_cov[(0, 0)],
            0.15,
        ),
        Verdict::within_rel("projected_mean_sampling_vs_info_inverse", observed[3].0, multi_info_inv, 0.15),
    ];
    for (a, arm) in arms.iter().enumerate().skip(1) {
        verdicts.push(Verdict::at_least(
            &format!("{}_over_estimation_ratio", arm.label),
            observed[a].1 / observed[a].0,
            1.0,
        ));
    }
    let plot = Plot {
        title: "n var(posterior mean): observed vs predicted".into(),
        x_label: "arm (0 scalar, 1 euclidean, 2 mahalanobis, 3 projected)".into(),
        y_label: "n var".into(),
        log_x: false,
        log_y: false,
        series: vec![
            ("observed".into(), observed.iter().enumerate().map(|(i, o)| (i as f64, o.0)).collect()),
            (
                "predicted".into(),
                arms.iter().enumerate().map(|(i, a)| (i as f64, a.prediction.mean_sampling_cov[(0, 0)])).collect(),
            ),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
