use super::{require_acceptances, run_round, AbcSetup, SamplerReport, Seed, Tolerance};
use crate::error::{AbcError, Result};
use crate::metrics::BandwidthSchedule;
use crate::models::BoxPrior;
use crate::numerics::{log_det_from_cholesky, normal_draw, Mat, RngStream};
use crate::stats;

/// Covariance inflation applied to each fitted adaptive proposal.
pub const COV_INFLATION: f64 = 2.0;

/// Proposal distribution for importance ABC. Gaussian proposals are
/// implicitly truncated to the prior box: draws outside it get weight 0.
#[derive(Clone, Debug, PartialEq)]
pub enum Proposal {
    Prior,
    Gaussian { mean: Vec<f64>, cov: Mat, chol: Mat },
}

impl Proposal {
    pub fn gaussian(mean: Vec<f64>, cov: Mat) -> Result<Self> {
        if cov.rows() != mean.len() {
            return Err(AbcError::DimensionMismatch { expected: mean.len(), got: cov.rows() });
        }
        let chol = cov.cholesky()?;
        Ok(Proposal::Gaussian { mean, cov, chol })
    }

    pub(super) fn sample(&self, rng: &mut RngStream, prior: &BoxPrior) -> Vec<f64> {
        match self {
            Proposal::Prior => prior.sample(rng),
            Proposal::Gaussian { mean, chol, .. } => normal_draw(rng, mean, chol),
        }
    }

    /// Log density of the (untruncated) Gaussian; unused for the prior.
    pub(super) fn log_density(&self, theta: &[f64]) -> f64 {
        let Proposal::Gaussian { mean, chol, .. } = self else {
            return 0.0;
        };
        let p = mean.len();
        let mut z = vec![0.0; p];
        for i in 0..p {
            let mut s = theta[i] - mean[i];
            for k in 0..i {
                s -= chol[(i, k)] * z[k];
            }
            z[i] = s / chol[(i, i)];
        }
        let q: f64 = z.iter().map(|v| v * v).sum();
        -0.5 * q - 0.5 * log_det_from_cholesky(chol) - 0.5 * p as f64 * (2.0 * std::f64::consts::PI).ln()
    }

    /// Per-coordinate standard deviation of the proposal.
    pub fn sd(&self, prior: &BoxPrior) -> Vec<f64> {
        match self {
            Proposal::Prior => prior.lo().iter().zip(prior.hi()).map(|(l, h)| (h - l) / 12f64.sqrt()).collect(),
            Proposal::Gaussian { cov, .. } => cov.diagonal().iter().map(|v| v.sqrt()).collect(),
        }
    }

    pub fn mean(&self, prior: &BoxPrior) -> Vec<f64> {
        match self {
            Proposal::Prior => prior.midpoint(),
            Proposal::Gaussian { mean, .. } => mean.clone(),
        }
    }

    /// Weighted mean and inflated weighted covariance of a report's draws.
    pub fn fit(report: &SamplerReport, inflation: f64) -> Result<Self> {
        if report.draws.is_empty() {
            return Err(AbcError::EmptyReport);
        }
        let p = report.draws[0].theta.len();
        let pts: Vec<&[f64]> = report.draws.iter().map(|d| d.theta.as_slice()).collect();
        let (mu, cov) = stats::weighted_mean_cov(&pts, &report.weights(), p);
        Proposal::gaussian(mu, cov.scale(inflation))
    }
}

/// Importance-sampling ABC: `θ ~ q`, weight `π(θ)/q(θ) · K`.
pub fn importance_abc(
    setup: &AbcSetup<'_>,
    tol: Tolerance,
    n_proposals: usize,
    proposal: &Proposal,
    seed: Seed,
) -> Result<SamplerReport> {
    let report = require_acceptances(run_round(setup, proposal, tol, 0.0, n_proposals, 0, seed)?, None)?;
    check_ess(&report)?;
    Ok(report)
}

fn check_ess(report: &SamplerReport) -> Result<()> {
    if report.ess < 2.0 {
        Err(AbcError::DegenerateWeights { ess: report.ess })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveConfig {
    pub accept_fraction: f64,
    pub rounds: usize,
    pub draws_per_round: usize,
    /// Target bandwidth. When set, adaptive rounds never shrink `ε` below it
    /// and one extra round is run at exactly this `ε` with the last fitted
    /// proposal.
    pub final_eps: Option<f64>,
    pub inflation: f64,
}

impl AdaptiveConfig {
    pub fn new(accept_fraction: f64, rounds: usize, draws_per_round: usize) -> Self {
        AdaptiveConfig { accept_fraction, rounds, draws_per_round, final_eps: None, inflation: COV_INFLATION }
    }

    pub fn with_final_eps(mut self, eps: f64) -> Self {
        self.final_eps = Some(eps);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundSummary {
    pub round: usize,
    pub eps: f64,
    pub acceptance_rate: f64,
    pub ess: f64,
    pub proposal_mean: Vec<f64>,
    pub proposal_sd: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveReport {
    /// Report of the last round.
    pub report: SamplerReport,
    pub rounds: Vec<RoundSummary>,
    /// Proposal used in the last round.
    pub proposal: Proposal,
}

/// Adaptive importance ABC with a quantile bandwidth schedule.
pub fn adaptive_importance_abc(
    setup: &AbcSetup<'_>,
    sched: &BandwidthSchedule,
    draws_per_round: usize,
    rounds: usize,
    seed: Seed,
) -> Result<AdaptiveReport> {
    let BandwidthSchedule::Quantile { accept_fraction } = *sched else {
        return Err(AbcError::InvalidSchedule("adaptive sampling needs a quantile schedule".into()));
    };
    adaptive_importance_abc_with(setup, &AdaptiveConfig::new(accept_fraction, rounds, draws_per_round), seed)
}

pub fn adaptive_importance_abc_with(setup: &AbcSetup<'_>, cfg: &AdaptiveConfig, seed: Seed) -> Result<AdaptiveReport> {
    if cfg.rounds < 2 {
        return Err(AbcError::InvalidArgument(format!("need at least 2 rounds, got {}", cfg.rounds)));
    }
    if let Some(e) = cfg.final_eps {
        Tolerance::Fixed(e).validate()?;
    }
    let prior = &setup.model.prior;
    let floor = cfg.final_eps.unwrap_or(0.0);
    let mut proposal = Proposal::Prior;
    let mut summaries = Vec::new();
    let mut last: Option<SamplerReport> = None;
    let total = cfg.rounds + usize::from(cfg.final_eps.is_some());
    for round in 1..=total {
        if let Some(prev) = &last {
            proposal = Proposal::fit(prev, cfg.inflation)?;
        }
        let tol = match cfg.final_eps {
            Some(e) if round > cfg.rounds => Tolerance::Fixed(e),
            _ => Tolerance::Quantile(cfg.accept_fraction),
        };
        let report =
            run_round(setup, &proposal, tol, floor, cfg.draws_per_round, round as u64, seed).map_err(|e| match e {
                AbcError::NoAcceptances { .. } => AbcError::NoAcceptances { round: Some(round) },
                other => other,
            })?;
        let report = require_acceptances(report, Some(round))?;
        check_ess(&report)?;
        summaries.push(RoundSummary {
            round,
            eps: report.eps_used,
            acceptance_rate: report.acceptance_rate,
            ess: report.ess,
            proposal_mean: proposal.mean(prior),
            proposal_sd: proposal.sd(prior),
        });
        last = Some(report);
    }
    Ok(AdaptiveReport { report: last.expect("at least two rounds"), rounds: summaries, proposal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::KernelSpec;
    use crate::models::make_linear_gaussian;
    use crate::samplers::{posterior_mean, rejection_abc};

    #[test]
    fn gaussian_log_density_matches_closed_form() {
        let q = Proposal::gaussian(vec![1.0], Mat::scalar(4.0)).unwrap();
        let expect = -0.5 * 0.25 - 0.5 * (2.0 * std::f64::consts::PI * 4.0).ln();
        assert!((q.log_density(&[2.0]) - expect).abs() < 1e-12);
    }

    #[test]
    fn prior_proposal_gives_constant_weights() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 100, &k);
        let r = importance_abc(&setup, Tolerance::Fixed(0.3), 5000, &Proposal::Prior, Seed::new(2)).unwrap();
        assert!(r.draws.iter().all(|d| d.weight == 1.0));
    }

    #[test]
    fn centred_proposal_beats_prior_acceptance() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let n = 1_000_000u64;
        let rn = (n as f64).sqrt();
        let setup = AbcSetup::new(&m, &[1.0], n, &k);
        let q = Proposal::gaussian(vec![1.0], Mat::scalar((5.0 / rn).powi(2))).unwrap();
        let is = importance_abc(&setup, Tolerance::Fixed(1.0 / rn), 20_000, &q, Seed::new(5)).unwrap();
        assert!(is.acceptance_rate > 0.05, "{}", is.acceptance_rate);
        let rej = rejection_abc(&setup, Tolerance::Fixed(1.0 / rn), 20_000, Seed::new(5));
        let rate = rej.map(|r| r.acceptance_rate).unwrap_or(0.0);
        assert!(rate < 0.005, "{rate}");
    }

    #[test]
    fn is_and_rejection_agree() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.02], 100, &k);
        let eps = 0.1;
        let rej = rejection_abc(&setup, Tolerance::Fixed(eps), 400_000, Seed::new(7)).unwrap();
        let q = Proposal::gaussian(vec![0.8], Mat::scalar(0.09)).unwrap();
        let is = importance_abc(&setup, Tolerance::Fixed(eps), 40_000, &q, Seed::new(8)).unwrap();
        let se = |r: &SamplerReport| {
            let th = r.theta_column(0);
            (stats::weighted_variance(&th, &r.weights()) / r.ess).sqrt()
        };
        let diff = posterior_mean(&rej).unwrap()[0] - posterior_mean(&is).unwrap()[0];
        assert!(diff.abs() < 3.0 * se(&rej).hypot(se(&is)), "diff {diff}");
    }

    #[test]
    fn adaptive_proposal_shrinks() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 10_000, &k);
        let sched = BandwidthSchedule::quantile(0.1).unwrap();
        let out = adaptive_importance_abc(&setup, &sched, 5000, 5, Seed::new(11)).unwrap();
        let sds: Vec<f64> = out.rounds.iter().map(|r| r.proposal_sd[0]).collect();
        assert!(sds.windows(2).all(|w| w[1] < w[0]), "{sds:?}");
        assert!(sds[0] / sds[sds.len() - 1] >= 2.0);
        assert!(out.report.acceptance_rate >= 0.1);
    }

    #[test]
    fn full_fraction_fits_prior_draws() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 100, &k);
        let sched = BandwidthSchedule::quantile(1.0).unwrap();
        let out = adaptive_importance_abc(&setup, &sched, 4000, 2, Seed::new(1)).unwrap();
        let sd = out.rounds[1].proposal_sd[0];
        let expect = (COV_INFLATION * 400.0 / 12.0).sqrt();
        assert!((sd / expect - 1.0).abs() < 0.05, "{sd} vs {expect}");
    }

    #[test]
    fn final_eps_round_hits_target() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 10_000, &k);
        let cfg = AdaptiveConfig::new(0.1, 6, 4000).with_final_eps(0.01);
        let out = adaptive_importance_abc_with(&setup, &cfg, Seed::new(3)).unwrap();
        assert_eq!(out.rounds.len(), 7);
        assert_eq!(out.report.eps_used, 0.01);
        assert!(out.rounds.iter().all(|r| r.eps >= 0.01));
    }

    #[test]
    fn explicit_schedule_rejected() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 100, &k);
        let sched = BandwidthSchedule::explicit(1.0, 0.5).unwrap();
        assert!(adaptive_importance_abc(&setup, &sched, 100, 3, Seed::new(1)).is_err());
    }
}
