//! Scripted, seeded studies of ABC's large-sample behaviour.
//!
//! Each experiment is a pure function of its resolved [`Config`] (seed
//! included) and returns tidy rows plus pass/fail verdicts against analytic
//! or oracle predictions.

mod binding;
mod concentration;
mod kernel_sweep;
mod limits;
mod mc_error;
mod mean_sampling;
mod model_error;
mod output;
mod rate;
mod regression;
pub mod svg;

pub use output::{write_outputs, OutputPaths};

use crate::config::Config;
use crate::error::{AbcError, Result};
use crate::metrics::KernelSpec;
use crate::models::{ObservedData, SyntheticModel};
use crate::numerics::stream_id;
use crate::par::Exec;
use crate::samplers::{adaptive_importance_abc_with, AbcSetup, AdaptiveConfig, AdaptiveReport, Seed};

/// Every configuration key any experiment understands, with its meaning.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("model", "model registry name"),
    ("n_grid", "comma-separated, strictly increasing data sizes"),
    ("a", "bandwidth scale in eps = a * n^-eta"),
    ("eta", "bandwidth exponent(s) in eps = a * n^-eta"),
    ("eps_fixed", "bandwidth of the fixed-eps arm"),
    ("c", "boundary constant: eps = c / sqrt(n)"),
    ("c_multi", "boundary constant for the multi-summary arms"),
    ("accept_fraction", "quantile acceptance fraction of adaptive rounds"),
    ("rounds", "adaptive importance-sampling rounds"),
    ("draws", "draws per run (accepted target for rejection, proposals per round for adaptive)"),
    ("proposals", "comma-separated proposal counts for the Monte Carlo error study"),
    ("replicates", "independent replicates"),
    ("delta", "comma-separated half-widths of concentration windows"),
    ("kernel", "uniform | gaussian"),
    ("sampler", "sampler used by the experiment (informational)"),
    ("seed", "64-bit master seed"),
];

pub fn config_keys() -> Vec<&'static str> {
    CONFIG_KEYS.iter().map(|(k, _)| *k).collect()
}

pub struct ExperimentDef {
    pub name: &'static str,
    pub description: &'static str,
    defaults: &'static str,
    run: fn(&Config) -> Result<ExperimentResult>,
}

pub const EXPERIMENTS: &[ExperimentDef] = &[
    concentration::DEF,
    rate::DEF,
    binding::DEF,
    model_error::DEF,
    limits::DEF,
    mean_sampling::DEF,
    mc_error::DEF,
    regression::DEF,
    kernel_sweep::DEF,
];

pub fn find_experiment(name: &str) -> Result<&'static ExperimentDef> {
    EXPERIMENTS
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| AbcError::InvalidArgument(format!("unknown experiment '{name}'")))
}

impl ExperimentDef {
    /// Defaults for this experiment, without a seed.
    pub fn defaults(&self) -> Config {
        Config::parse(self.defaults).expect("built-in defaults parse")
    }

    /// Resolves `overrides` on top of the defaults and runs the experiment.
    pub fn run(&self, overrides: &Config) -> Result<ExperimentResult> {
        overrides.check_keys(&config_keys())?;
        let mut cfg = self.defaults();
        cfg.merge(overrides);
        if !cfg.contains("seed") {
            return Err(AbcError::Config("experiments need an explicit seed".into()));
        }
        cfg.get::<u64>("seed")?;
        if cfg.contains("n_grid") {
            let grid: Vec<u64> = cfg.get_list("n_grid")?;
            if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] == 0 {
                return Err(AbcError::Config("n_grid must be positive and strictly increasing".into()));
            }
        }
        if cfg.contains("replicates") && cfg.get::<usize>("replicates")? == 0 {
            return Err(AbcError::Config("replicates must be at least 1".into()));
        }
        let mut result = (self.run)(&cfg)?;
        result.config = cfg;
        Ok(result)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: Option<u64>,
    pub eps: Option<f64>,
    /// `None` for rows aggregated over replicates.
    pub replicate: Option<usize>,
    pub statistic: String,
    pub value: f64,
}

impl Row {
    pub fn new(
        n: Option<u64>,
        eps: Option<f64>,
        replicate: Option<usize>,
        statistic: impl Into<String>,
        value: f64,
    ) -> Self {
        Row { n, eps, replicate, statistic: statistic.into(), value }
    }

    /// Aggregate row at a given `(n, eps)`.
    pub fn at(n: u64, eps: f64, statistic: impl Into<String>, value: f64) -> Self {
        Row::new(Some(n), Some(eps), None, statistic, value)
    }

    /// Aggregate row not tied to a particular `n`.
    pub fn global(statistic: impl Into<String>, value: f64) -> Self {
        Row::new(None, None, None, statistic, value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: String,
}

impl Verdict {
    pub fn within_abs(check: &str, observed: f64, expected: f64, tol: f64) -> Self {
        Verdict {
            check: check.into(),
            pass: (observed - expected).abs() <= tol,
            observed,
            expected,
            tolerance: format!("abs {tol}"),
        }
    }

    pub fn within_rel(check: &str, observed: f64, expected: f64, tol: f64) -> Self {
        Verdict {
            check: check.into(),
            pass: ((observed - expected) / expected).abs() <= tol,
            observed,
            expected,
            tolerance: format!("rel {tol}"),
        }
    }

    pub fn at_least(check: &str, observed: f64, bound: f64) -> Self {
        Verdict { check: check.into(), pass: observed >= bound, observed, expected: bound, tolerance: ">=".into() }
    }

    pub fn below(check: &str, observed: f64, bound: f64) -> Self {
        Verdict { check: check.into(), pass: observed < bound, observed, expected: bound, tolerance: "<".into() }
    }

    pub fn in_range(check: &str, observed: f64, lo: f64, hi: f64) -> Self {
        Verdict {
            check: check.into(),
            pass: (lo..=hi).contains(&observed),
            observed,
            expected: 0.5 * (lo + hi),
            tolerance: format!("range [{lo}, {hi}]"),
        }
    }

    /// Boolean property; `observed` carries a diagnostic number.
    pub fn holds(check: &str, pass: bool, observed: f64, expected: f64, tolerance: &str) -> Self {
        Verdict { check: check.into(), pass, observed, expected, tolerance: tolerance.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    pub config: Config,
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
    pub plot: Plot,
}

impl ExperimentResult {
    fn new(name: &str, rows: Vec<Row>, verdicts: Vec<Verdict>, plot: Plot) -> Self {
        ExperimentResult { name: name.into(), config: Config::new(), rows, verdicts, plot }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, check: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }

    /// First aggregate row with this statistic at `n` (any `n` if `None`).
    pub fn value(&self, statistic: &str, n: Option<u64>) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.statistic == statistic && r.replicate.is_none() && (n.is_none() || r.n == n))
            .map(|r| r.value)
    }
}

// ---- shared helpers -------------------------------------------------------

fn seed_of(cfg: &Config) -> Result<u64> {
    cfg.get("seed")
}

/// Seed for an independent sub-study identified by `path`.
fn sub_seed(seed: u64, path: &[u64]) -> Seed {
    path.iter().fold(Seed::new(seed), |s, &p| s.child(p))
}

/// Observed data for replicate `path` of a study.
fn observe(model: &SyntheticModel, n: u64, seed: u64, path: &[u64]) -> ObservedData {
    let mut full = vec![seed];
    full.extend_from_slice(path);
    ObservedData::generate(model, n, stream_id(&full))
}

fn kernel_of(cfg: &Config) -> Result<KernelSpec> {
    let kind = cfg.get_str("kernel")?.parse()?;
    Ok(KernelSpec { kind, distance: crate::metrics::DistanceSpec::Euclidean })
}

fn model_of(cfg: &Config) -> Result<SyntheticModel> {
    Ok(crate::models::resolve_model(cfg.get_str("model")?)?.abc)
}

/// Adaptive importance sampling, optionally finished at a target bandwidth.
fn run_ais(setup: &AbcSetup<'_>, cfg: &Config, final_eps: Option<f64>, seed: Seed) -> Result<AdaptiveReport> {
    let mut ais = AdaptiveConfig::new(cfg.get("accept_fraction")?, cfg.get("rounds")?, cfg.get("draws")?);
    ais.final_eps = final_eps;
    adaptive_importance_abc_with(setup, &ais, seed)
}

/// Inner samplers run sequentially when the outer loop is parallel.
const INNER: Exec = Exec::Sequential;

/// Least-squares slope of `log y` on `log x`.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    crate::stats::ols_line(&lx, &ly).0
}

/// Nondecreasing apart from at most `allowed` steps that drop by more than
/// `slack`.
fn count_drops(values: &[f64], slack: &[f64]) -> usize {
    values.windows(2).zip(slack.windows(2)).filter(|(v, s)| v[1] < v[0] - s[0].max(s[1])).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_key_is_registered() {
        let keys = config_keys();
        for e in EXPERIMENTS {
            e.defaults().check_keys(&keys).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn seed_is_mandatory() {
        let e = find_experiment("concentration").unwrap();
        assert!(matches!(e.run(&Config::new()), Err(AbcError::Config(_))));
        let mut bad = Config::new();
        bad.set("seed", "1");
        bad.set("bogus", "1");
        assert!(e.run(&bad).is_err());
        let mut grid = Config::new();
        grid.set("seed", "1");
        grid.set("n_grid", "100, 10");
        assert!(e.run(&grid).is_err());
    }

    #[test]
    fn drop_counting() {
        assert_eq!(count_drops(&[1.0, 2.0, 1.95, 3.0], &[0.1; 4]), 0);
        assert_eq!(count_drops(&[1.0, 2.0, 1.5, 3.0], &[0.1; 4]), 1);
        assert!((log_log_slope(&[1.0, 10.0, 100.0], &[1.0, 0.1, 0.01]) + 1.0).abs() < 1e-12);
    }
}
