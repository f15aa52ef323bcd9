//! ABC samplers: rejection, importance (fixed and adaptive proposals) and
//! ABC-MCMC, all producing weighted [`AcceptedDraw`]s.
//!
//! Every proposal owns an RNG stream addressed by `(seed, tag, round, index)`,
//! so a run is a pure function of its inputs and the [`Seed`] regardless of
//! thread count.

mod importance;
mod mcmc;
mod rejection;

pub use importance::{
    adaptive_importance_abc, adaptive_importance_abc_with, importance_abc, AdaptiveConfig, AdaptiveReport, Proposal,
    RoundSummary, COV_INFLATION,
};
pub use mcmc::{mcmc_abc, BURN_IN_FRACTION};
pub use rejection::{rejection_abc, rejection_abc_until};

use crate::error::{AbcError, Result};
use crate::metrics::{quantile_bandwidth, KernelSpec, WEIGHT_FLOOR};
use crate::models::SyntheticModel;
use crate::numerics::{stream_id, Mat, RngStream};
use crate::par::{self, Exec};
use crate::stats;

/// One accepted `(θ, s)` pair with its weight and distance to `s_obs`.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptedDraw {
    pub theta: Vec<f64>,
    pub summary: Vec<f64>,
    pub weight: f64,
    pub distance: f64,
}

/// Output of a sampler run.
///
/// For rejection and importance runs `ess = (Σw)²/Σw²`. For ABC-MCMC the
/// draws are the post-burn-in chain states, `n_accepted` counts accepted
/// moves and `ess` is the autocorrelation-based effective size of the first
/// coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerReport {
    pub draws: Vec<AcceptedDraw>,
    pub n_proposed: usize,
    pub n_accepted: usize,
    pub acceptance_rate: f64,
    pub eps_used: f64,
    pub ess: f64,
}

impl SamplerReport {
    fn from_draws(draws: Vec<AcceptedDraw>, n_proposed: usize, eps_used: f64) -> Self {
        let n_accepted = draws.len();
        let ws: Vec<f64> = draws.iter().map(|d| d.weight).collect();
        SamplerReport {
            ess: stats::effective_sample_size(&ws),
            acceptance_rate: if n_proposed > 0 { n_accepted as f64 / n_proposed as f64 } else { 0.0 },
            draws,
            n_proposed,
            n_accepted,
            eps_used,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.weight).collect()
    }

    /// Coordinate `j` of every accepted θ.
    pub fn theta_column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d.theta[j]).collect()
    }

    /// Weighted mean of the accepted distances.
    pub fn mean_distance(&self) -> f64 {
        let ds: Vec<f64> = self.draws.iter().map(|d| d.distance).collect();
        stats::weighted_mean(&ds, &self.weights())
    }
}

/// Weighted posterior mean `Σ w θ / Σ w`.
pub fn posterior_mean(report: &SamplerReport) -> Result<Vec<f64>> {
    let total: f64 = report.draws.iter().map(|d| d.weight).sum();
    if report.draws.is_empty() || !(total > 0.0) {
        return Err(AbcError::EmptyReport);
    }
    let p = report.draws[0].theta.len();
    let mut m = vec![0.0; p];
    for d in &report.draws {
        for (mj, tj) in m.iter_mut().zip(&d.theta) {
            *mj += d.weight * tj;
        }
    }
    m.iter_mut().for_each(|x| *x /= total);
    Ok(m)
}

/// Weighted posterior covariance of θ.
pub fn posterior_cov(report: &SamplerReport) -> Result<Mat> {
    if report.draws.is_empty() {
        return Err(AbcError::EmptyReport);
    }
    let p = report.draws[0].theta.len();
    let pts: Vec<&[f64]> = report.draws.iter().map(|d| d.theta.as_slice()).collect();
    Ok(stats::weighted_mean_cov(&pts, &report.weights(), p).1)
}

/// An ABC target: model, observed summary, data size and kernel.
#[derive(Clone, Copy, Debug)]
pub struct AbcSetup<'a> {
    pub model: &'a SyntheticModel,
    pub s_obs: &'a [f64],
    pub n: u64,
    pub kernel: &'a KernelSpec,
    pub exec: Exec,
}

impl<'a> AbcSetup<'a> {
    pub fn new(model: &'a SyntheticModel, s_obs: &'a [f64], n: u64, kernel: &'a KernelSpec) -> Self {
        AbcSetup { model, s_obs, n, kernel, exec: Exec::default() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.s_obs.len() != self.model.d() {
            return Err(AbcError::DimensionMismatch { expected: self.model.d(), got: self.s_obs.len() });
        }
        if let crate::metrics::DistanceSpec::Mahalanobis { gamma } = &self.kernel.distance {
            if gamma.rows() != self.model.d() {
                return Err(AbcError::DimensionMismatch { expected: self.model.d(), got: gamma.rows() });
            }
        }
        Ok(())
    }

    fn distance_to_obs(&self, s: &[f64]) -> f64 {
        let diff: Vec<f64> = self.s_obs.iter().zip(s).map(|(a, b)| a - b).collect();
        self.kernel.distance.norm_sq(&diff).sqrt()
    }
}

/// Root of the RNG stream tree for one sampler run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Seed {
    pub seed: u64,
    pub tag: u64,
}

impl Seed {
    pub fn new(seed: u64) -> Self {
        Seed { seed, tag: 0 }
    }

    /// Independent sub-tree, e.g. one per replicate.
    pub fn child(self, index: u64) -> Seed {
        Seed { seed: self.seed, tag: stream_id(&[self.tag, index]) }
    }

    pub fn stream(&self, round: u64, index: u64) -> RngStream {
        RngStream::at(self.seed, &[self.tag, round, index])
    }
}

/// How a round decides acceptance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// Fixed bandwidth `ε` (may be `+∞`).
    Fixed(f64),
    /// `ε` is the given quantile of the round's realized distances.
    Quantile(f64),
}

impl Tolerance {
    fn validate(&self) -> Result<()> {
        match *self {
            Tolerance::Fixed(e) if !(e > 0.0) => {
                Err(AbcError::InvalidArgument(format!("bandwidth must be positive, got {e}")))
            }
            Tolerance::Quantile(q) if !(q > 0.0 && q <= 1.0) => {
                Err(AbcError::InvalidSchedule(format!("accept fraction must lie in (0, 1], got {q}")))
            }
            _ => Ok(()),
        }
    }
}

/// A simulated proposal before the acceptance decision.
#[derive(Clone, Debug)]
struct Candidate {
    theta: Vec<f64>,
    summary: Vec<f64>,
    distance: f64,
    /// `log π(θ) − log q(θ)`; `−∞` outside the prior box.
    log_ratio: f64,
}

impl Candidate {
    fn into_draw(self, kernel: &KernelSpec, eps: f64) -> Option<AcceptedDraw> {
        if !self.log_ratio.is_finite() {
            return None;
        }
        let k = kernel.weight_at(self.distance, eps);
        let w = k * self.log_ratio.exp();
        if k > WEIGHT_FLOOR && w > 0.0 && w.is_finite() {
            Some(AcceptedDraw { theta: self.theta, summary: self.summary, weight: w, distance: self.distance })
        } else {
            None
        }
    }
}

const CHUNK: usize = 4096;

/// Simulates proposals `start..start+len` of `round` and keeps the ones
/// accepted at a fixed bandwidth.
fn accept_fixed(
    setup: &AbcSetup<'_>,
    proposal: &Proposal,
    eps: f64,
    round: u64,
    start: usize,
    len: usize,
    seed: Seed,
) -> Vec<(usize, AcceptedDraw)> {
    par::flat_map_chunks(setup.exec, start, len, CHUNK, |range| {
        range
            .filter_map(|i| {
                let c = propose(setup, proposal, &mut seed.stream(round, i as u64));
                c.into_draw(setup.kernel, eps).map(|d| (i, d))
            })
            .collect()
    })
}

/// Runs one round of `n_proposals` under `tol`. In quantile mode the realized
/// bandwidth is never allowed below `eps_floor`.
fn run_round(
    setup: &AbcSetup<'_>,
    proposal: &Proposal,
    tol: Tolerance,
    eps_floor: f64,
    n_proposals: usize,
    round: u64,
    seed: Seed,
) -> Result<SamplerReport> {
    setup.validate()?;
    tol.validate()?;
    if n_proposals == 0 {
        return Err(AbcError::InvalidArgument("need at least one proposal".into()));
    }
    match tol {
        Tolerance::Fixed(eps) => {
            let draws =
                accept_fixed(setup, proposal, eps, round, 0, n_proposals, seed).into_iter().map(|(_, d)| d).collect();
            Ok(SamplerReport::from_draws(draws, n_proposals, eps))
        }
        Tolerance::Quantile(q) => {
            let cands: Vec<Candidate> = par::flat_map_chunks(setup.exec, 0, n_proposals, CHUNK, |range| {
                range.map(|i| propose(setup, proposal, &mut seed.stream(round, i as u64))).collect()
            });
            let dists: Vec<f64> = cands.iter().map(|c| c.distance).collect();
            let eps_q = quantile_bandwidth(&dists, q).ok_or(AbcError::NoAcceptances { round: None })?.max(eps_floor);
            let draws: Vec<AcceptedDraw> = match setup.kernel.kind {
                crate::metrics::KernelKind::Uniform => cands
                    .into_iter()
                    .filter(|c| c.distance <= eps_q && c.log_ratio.is_finite())
                    .map(|c| AcceptedDraw {
                        weight: c.log_ratio.exp(),
                        theta: c.theta,
                        summary: c.summary,
                        distance: c.distance,
                    })
                    .collect(),
                crate::metrics::KernelKind::Gaussian => {
                    cands.into_iter().filter_map(|c| c.into_draw(setup.kernel, eps_q)).collect()
                }
            };
            Ok(SamplerReport::from_draws(draws, n_proposals, eps_q))
        }
    }
}

fn propose(setup: &AbcSetup<'_>, proposal: &Proposal, rng: &mut RngStream) -> Candidate {
    let prior = &setup.model.prior;
    let (theta, log_ratio) = match proposal {
        Proposal::Prior => (prior.sample(rng), 0.0),
        Proposal::Gaussian { .. } => {
            let theta = proposal.sample(rng, prior);
            let lp = prior.log_density(&theta);
            let lr = if lp.is_finite() { lp - proposal.log_density(&theta) } else { f64::NEG_INFINITY };
            (theta, lr)
        }
    };
    if !log_ratio.is_finite() {
        return Candidate { summary: Vec::new(), theta, distance: f64::INFINITY, log_ratio };
    }
    let summary = setup.model.simulate(&theta, setup.n, rng);
    let distance = setup.distance_to_obs(&summary);
    Candidate { theta, summary, distance, log_ratio }
}

fn require_acceptances(report: SamplerReport, round: Option<usize>) -> Result<SamplerReport> {
    if report.n_accepted == 0 {
        Err(AbcError::NoAcceptances { round })
    } else {
        Ok(report)
    }
}
