//! Uniform versus Gaussian kernel at matched acceptance fractions.

use super::*;
use crate::metrics::KernelKind;
use crate::par;
use crate::samplers::posterior_mean;
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "kernel_sweep",
    description: "posterior-mean sampling variance for uniform and Gaussian kernels",
    defaults: "model = linear:2
n_grid = 10000
accept_fraction = 0.1
rounds = 6
draws = 5000
replicates = 1000
sampler = ais
",
    run,
};

const KINDS: [KernelKind; 2] = [KernelKind::Uniform, KernelKind::Gaussian];

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let model = model_of(cfg)?;
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let reps: usize = cfg.get("replicates")?;
    let seed = seed_of(cfg)?;
    let per_n = KINDS.len() * reps;

    let cells = par::try_map_indexed(Exec::default(), grid.len() * per_n, |k| -> Result<(f64, f64, f64)> {
        let (i, rest) = (k / per_n, k % per_n);
        let (kk, r) = (rest / reps, rest % reps);
        let n = grid[i];
        // Both kernels see the same data in replicate `r`.
        let obs = observe(&model, n, seed, &[i as u64, r as u64]);
        let kernel = KernelSpec { kind: KINDS[kk], distance: crate::metrics::DistanceSpec::Euclidean };
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernel).with_exec(INNER);
        let out = run_ais(&setup, cfg, None, sub_seed(seed, &[i as u64, kk as u64, r as u64]))?;
        let rep = out.report;
        let kurt = stats::excess_kurtosis(&rep.theta_column(0), &rep.weights());
        Ok((posterior_mean(&rep)?[0], kurt, rep.eps_used))
    })?;

    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for (i, &n) in grid.iter().enumerate() {
        let mut msc = [0.0; 2];
        for (kk, kind) in KINDS.iter().enumerate() {
            let block = &cells[i * per_n + kk * reps..i * per_n + (kk + 1) * reps];
            let means: Vec<f64> = block.iter().map(|c| c.0).collect();
            msc[kk] = n as f64 * if reps > 1 { stats::variance(&means) } else { f64::NAN };
            let eps = block.iter().map(|c| c.2).sum::<f64>() / reps as f64;
            for (r, c) in block.iter().enumerate() {
                rows.push(Row::new(Some(n), Some(c.2), Some(r), format!("{kind}_posterior_mean"), c.0));
                rows.push(Row::new(Some(n), Some(c.2), Some(r), format!("{kind}_excess_kurtosis"), c.1));
            }
            let kurt = block.iter().map(|c| c.1).sum::<f64>() / reps as f64;
            rows.push(Row::at(n, eps, format!("{kind}_n_var_of_means"), msc[kk]));
            rows.push(Row::at(n, eps, format!("{kind}_excess_kurtosis"), kurt));
        }
        let ratio = msc[0] / msc[1];
        rows.push(Row::new(Some(n), None, None, "uniform_over_gaussian_ratio", ratio));
        ratios.push(ratio);
    }
    let verdicts = vec![Verdict::in_range("uniform_over_gaussian_ratio", ratios[ratios.len() - 1], 0.8, 1.25)];
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let plot = Plot {
        title: "Mean-sampling variance ratio, uniform / gaussian".into(),
        x_label: "n".into(),
        y_label: "ratio".into(),
        log_x: true,
        log_y: false,
        series: vec![("ratio".into(), ns.into_iter().zip(ratios).collect())],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
