//! How the shape of the binding function shapes the ABC posterior.

use super::*;
use crate::asymptotics::oracle_abc_posterior_auto;
use crate::models::{make_bimodal_binding, make_flat_binding, make_linear_gaussian};
use crate::par;
use crate::samplers::{rejection_abc_until, SamplerReport};
use crate::stats;

pub(super) const DEF: ExperimentDef = ExperimentDef {
    name: "binding",
    description: "steep vs shallow linear binding, a two-to-one binding and a flat binding",
    defaults: "n_grid = 10000, 100000
eps_fixed = 0.01
delta = 0.05
draws = 4000
kernel = uniform
sampler = rejection
",
    run,
};

const STEEP: f64 = 3.0;
const SHALLOW: f64 = 0.3;
const MODE_SEPARATION: f64 = 0.2;

fn run(cfg: &Config) -> Result<ExperimentResult> {
    let grid: Vec<u64> = cfg.get_list("n_grid")?;
    let eps: f64 = cfg.get("eps_fixed")?;
    let delta: f64 = cfg.get_list::<f64>("delta")?[0];
    let draws: usize = cfg.get("draws")?;
    let kernel = kernel_of(cfg)?;
    let seed = seed_of(cfg)?;
    let (n_main, n_flat) = (grid[0], grid[grid.len() - 1]);

    let models =
        [make_linear_gaussian(STEEP)?, make_linear_gaussian(SHALLOW)?, make_bimodal_binding(), make_flat_binding()];
    let sizes = [n_main, n_main, n_main, n_flat];
    let runs = par::try_map_indexed(Exec::default(), models.len(), |k| -> Result<(SamplerReport, Vec<f64>)> {
        let (m, n) = (&models[k], sizes[k]);
        let obs = observe(m, n, seed, &[k as u64]);
        let setup = AbcSetup::new(m, &obs.s_obs, n, &kernel).with_exec(INNER);
        let rep = rejection_abc_until(&setup, eps, draws, 400_000_000, 1 << 16, sub_seed(seed, &[k as u64]))?;
        Ok((rep, obs.s_obs))
    })?;

    let sd = |r: &SamplerReport| stats::weighted_variance(&r.theta_column(0), &r.weights()).sqrt();
    let oracle = |k: usize| oracle_abc_posterior_auto(&models[k], &runs[k].1, sizes[k], &kernel, eps);
    let (sd_steep, sd_shallow) = (sd(&runs[0].0), sd(&runs[1].0));
    let ratio = sd_shallow / sd_steep;
    let oracle_ratio = oracle(1)?.sd() / oracle(0)?.sd();

    let bimodal = &runs[2].0;
    let modes = stats::kde_modes(&bimodal.theta_column(0), &bimodal.weights(), MODE_SEPARATION);
    let mode_error = if modes.len() == 2 { (modes[0] - 0.0).abs().max((modes[1] - 2.0).abs()) } else { f64::INFINITY };

    let flat = &runs[3].0;
    let total: f64 = flat.weights().iter().sum();
    let (lo, hi) = (-delta, 1.0 + delta);
    let flat_mass =
        flat.draws.iter().filter(|d| d.theta[0] > lo && d.theta[0] < hi).map(|d| d.weight).sum::<f64>() / total;
    let flat_oracle = oracle(3)?.mass_between(lo, hi);

    let mut rows = vec![
        Row::at(n_main, eps, format!("posterior_sd_slope_{STEEP}"), sd_steep),
        Row::at(n_main, eps, format!("posterior_sd_slope_{SHALLOW}"), sd_shallow),
        Row::at(n_main, eps, "sd_ratio", ratio),
        Row::at(n_main, eps, "oracle_sd_ratio", oracle_ratio),
        Row::at(n_main, eps, "bimodal_mode_count", modes.len() as f64),
    ];
    rows.extend(modes.iter().enumerate().map(|(i, m)| Row::at(n_main, eps, format!("bimodal_mode_{}", i + 1), *m)));
    rows.push(Row::at(n_flat, eps, "flat_mass", flat_mass));
    rows.push(Row::at(n_flat, eps, "flat_oracle_mass", flat_oracle));
    for (k, (r, _)) in runs.iter().enumerate() {
        rows.push(Row::at(
            sizes[k],
            eps,
            format!("acceptance_rate_{}", ["steep", "shallow", "bimodal", "flat"][k]),
            r.acceptance_rate,
        ));
    }

    let verdicts = vec![
        Verdict::within_abs("sd_ratio", ratio, SHALLOW.recip() * STEEP, 2.0),
        Verdict::holds("bimodal_two_modes", modes.len() == 2, modes.len() as f64, 2.0, "exactly"),
        Verdict::holds("bimodal_mode_locations", mode_error <= 0.1, mode_error, 0.0, "modes at 0 and 2 within 0.1"),
        Verdict::at_least("flat_mass", flat_mass, 0.95),
    ];

    let hist = |r: &SamplerReport, lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let bins = 80;
        let width = (hi - lo) / bins as f64;
        let total: f64 = r.weights().iter().sum();
        let mut h = vec![0.0; bins];
        for d in &r.draws {
            let b = ((d.theta[0] - lo) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                h[b as usize] += d.weight / (total * width);
            }
        }
        h.into_iter().enumerate().map(|(i, v)| (lo + (i as f64 + 0.5) * width, v)).collect()
    };
    let plot = Plot {
        title: "ABC posterior histograms".into(),
        x_label: "theta".into(),
        y_label: "density".into(),
        log_x: false,
        log_y: false,
        series: vec![
            ("bimodal binding".into(), hist(bimodal, -0.5, 2.5)),
            ("flat binding".into(), hist(flat, -0.5, 1.5)),
        ],
    };
    Ok(ExperimentResult::new(DEF.name, rows, verdicts, plot))
}
