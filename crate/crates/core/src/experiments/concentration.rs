//! Posterior mass near `θ₀` as `n` grows, with shrinking and fixed `ε`.

use super::*;
use crate::asymptotics::{concentration_mass, oracle_abc_posterior_auto};
use crate::metrics::{bandwidth, BandwidthSchedule};
use crate::par;
use crate::samplers::rejection_abc_until;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "concentration",
    description: "mass within delta of theta0 for eps = a n^-eta versus a fixed eps",
    defaults: "model = linear
n_grid = 100, 1000, 10000, 100000
a = 1
eta = 0.5
eps_fixed = 0.5
delta = 0.05, 0.1, 0.2
draws = 4000
replicates = 1
kernel = uniform
sampler = rejection
",
    run,
};

const MAX_PROPOSALS: usize = 400_000_000;
const BATCH: usize = 1 << 16;

struct Cell {
    masses: Vec<f64>,
    oracle: Vec<f64>,
    accepted: usize,
}

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let model = model_of(cfg)?;
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let sched = BandwidthSchedule::explicit(cfg.get("a")?, cfg.get("eta")?)?;
    let eps_fixed: f64 = cfg.get("eps_fixed")?;
    let deltas: Vec<f64> = cfg.get_list("delta")?;
    let draws: usize = cfg.get("draws")?;
    let reps: usize = cfg.get("replicates")?;
    let kernel = kernel_of(cfg)?;
    let seed = seed_of(cfg)?;
    let theta0 = model.true_theta[0];

    let cells_per_arm = grid.len() * reps;
    let cells = par::try_map_indexed(Exec::default(), 2 * cells_per_arm, |k| -> Result<Cell> {
        let (arm, rest) = (k / cells_per_arm, k % cells_per_arm);
        let (i, r) = (rest / reps, rest % reps);
        let n = grid[i];
        let eps = if arm == 0 { bandwidth(&sched, n)? } else { eps_fixed };
        let obs = observe(&model, n, seed, &[arm as u64, i as u64, r as u64]);
        let setup = AbcSetup::new(&model, &obs.s_obs, n, &kernel).with_exec(INNER);
        let rep = rejection_abc_until(
            &setup,
            eps,
            draws,
            MAX_PROPOSALS,
            BATCH,
            sub_seed(seed, &[arm as u64, i as u64, r as u64]),
        )?;
        let ws = rep.weights();
        let total: f64 = ws.iter().sum();
        let masses = deltas
            .iter()
            .map(|d| {
                rep.draws.iter().filter(|x| (x.theta[0] - theta0).abs() < *d).map(|x| x.weight).sum::<f64>() / total
            })
            .collect();
        let table = oracle_abc_posterior_auto(&model, &obs.s_obs, n, &kernel, eps)?;
        let oracle = deltas.iter().map(|d| concentration_mass(&table, theta0, *d)).collect();
        Ok(Cell { masses, oracle, accepted: rep.ess.round() as usize })
    })?;

    let mut rows = Vec::new();
    let primary = deltas.iter().position(|d| (d - 0.1).abs() < 1e-12).unwrap_or(0);
    // [arm][n] -> (mean empirical, mean oracle, standard error) for the primary delta
    let mut summary = vec![vec![(0.0, 0.0, 0.0); grid.len()]; 2];
    for arm in 0..2 {
        let prefix = if arm == 0 { "" } else { "fixed_" };
        for (i, &n) in grid.iter().enumerate() {
            let eps = if arm == 0 { bandwidth(&sched, n)? } else { eps_fixed };
            let block = &cells[arm * cells_per_arm + i * reps..arm * cells_per_arm + (i + 1) * reps];
            for (j, d) in deltas.iter().enumerate() {
                for (r, c) in block.iter().enumerate() {
                    rows.push(Row::new(Some(n), Some(eps), Some(r), format!("{prefix}mass_delta_{d}"), c.masses[j]));
                    rows.push(Row::new(
                        Some(n),
                        Some(eps),
                        Some(r),
                        format!("{prefix}oracle_mass_delta_{d}"),
                        c.oracle[j],
                    ));
                }
                let emp = block.iter().map(|c| c.masses[j]).sum::<f64>() / reps as f64;
                let orc = block.iter().map(|c| c.oracle[j]).sum::<f64>() / reps as f64;
                rows.push(Row::at(n, eps, format!("{prefix}mass_delta_{d}"), emp));
                rows.push(Row::at(n, eps, format!("{prefix}oracle_mass_delta_{d}"), orc));
                if j == primary {
                    let count: usize = block.iter().map(|c| c.accepted).sum();
                    let se = (orc * (1.0 - orc) / count as f64).sqrt().max(1.0 / count as f64);
                    summary[arm][i] = (emp, orc, se);
                }
            }
        }
    }

    let d = deltas[primary];
    let masses: Vec<f64> = summary[0].iter().map(|s| s.0).collect();
    let slack: Vec<f64> = summary[0].iter().map(|s| 3.0 * s.2).collect();
    let inversions = count_drops(&masses, &vec![0.0; masses.len()]);
    let large = count_drops(&masses, &slack);
    let last = grid.len() - 1;
    let worst_z = summary.iter().flatten().map(|(e, o, se)| (e - o).abs() / se).fold(0.0_f64, f64::max);
    let verdicts = vec![
        Verdict::holds(
            &format!("mass_delta_{d}_nondecreasing"),
            large == 0 && inversions <= 1,
            inversions as f64,
            1.0,
            "at most one inversion, none beyond 3 standard errors",
        ),
        Verdict::at_least(&format!("mass_delta_{d}_at_largest_n"), masses[last], 0.99),
        Verdict::below(&format!("fixed_eps_mass_delta_{d}_at_largest_n"), summary[1][last].0, 0.9),
        Verdict::holds(
            "oracle_agreement",
            worst_z <= 4.0,
            worst_z,
            0.0,
            "max |empirical - oracle| <= 4 standard errors",
        ),
    ];
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let series = |arm: usize, pick: fn(&(f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
        ns.iter().zip(&summary[arm]).map(|(x, s)| (*x, pick(s))).collect()
    };
    let plot = Plot {
        title: format!("ABC posterior mass within {d} of theta0"),
        x_label: "n".into(),
        y_label: "mass".into(),
        log_x: true,
        log_y: false,
        series: vec![
            ("eps = a n^-eta".into(), series(0, |s| s.0)),
            ("oracle, eps = a n^-eta".into(), series(0, |s| s.1)),
            ("fixed eps".into(), series(1, |s| s.0)),
            ("oracle, fixed eps".into(), series(1, |s| s.1)),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
