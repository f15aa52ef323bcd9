use super::{AbcSetup, AcceptedDraw, SamplerReport, Seed};
use crate::error::{AbcError, Result};
use crate::numerics::{normal_draw, Mat};

/// Leading fraction of the chain discarded as burn-in.
pub const BURN_IN_FRACTION: f64 = 0.2;

/// Marjoram-style ABC-MCMC with a Gaussian random walk of covariance
/// `step_cov`. A zero `step_cov` is allowed and freezes the chain.
pub fn mcmc_abc(
    setup: &AbcSetup<'_>,
    eps: f64,
    iterations: usize,
    step_cov: &Mat,
    init: &[f64],
    seed: Seed,
) -> Result<SamplerReport> {
    setup.validate()?;
    super::Tolerance::Fixed(eps).validate()?;
    let prior = &setup.model.prior;
    if init.len() != prior.dim() {
        return Err(AbcError::DimensionMismatch { expected: prior.dim(), got: init.len() });
    }
    if !prior.contains(init) {
        return Err(AbcError::InitOutsidePrior);
    }
    let p = init.len();
    let step_chol = if step_cov.as_slice().iter().all(|v| *v == 0.0) && step_cov.rows() == p {
        Mat::zeros(p, p)
    } else {
        step_cov.cholesky()?
    };
    let kernel = setup.kernel;
    let mut rng = seed.stream(0, 0);
    let mut theta = init.to_vec();
    let mut summary = setup.model.simulate(&theta, setup.n, &mut rng);
    let mut distance = setup.distance_to_obs(&summary);
    let mut k_cur = kernel.weight_at(distance, eps);
    let mut lp_cur = prior.log_density(&theta);

    let burn_in = (iterations as f64 * BURN_IN_FRACTION) as usize;
    let mut draws = Vec::with_capacity(iterations - burn_in.min(iterations));
    let mut moves = 0usize;
    for t in 0..iterations {
        let prop = normal_draw(&mut rng, &theta, &step_chol);
        let mut accepted = false;
        if prior.contains(&prop) {
            let s = setup.model.simulate(&prop, setup.n, &mut rng);
            let dist = setup.distance_to_obs(&s);
            let k = kernel.weight_at(dist, eps);
            let lp = prior.log_density(&prop);
            let u = rng.uniform();
            if k > crate::metrics::WEIGHT_FLOOR {
                let ratio = if k_cur > 0.0 { (lp - lp_cur).exp() * k / k_cur } else { f64::INFINITY };
                if u <= ratio {
                    theta = prop;
                    summary = s;
                    distance = dist;
                    k_cur = k;
                    lp_cur = lp;
                    accepted = true;
                }
            }
        }
        if t >= burn_in {
            moves += usize::from(accepted);
            draws.push(AcceptedDraw { theta: theta.clone(), summary: summary.clone(), weight: 1.0, distance });
        }
    }
    let kept = draws.len();
    if moves == 0 {
        return Err(AbcError::ChainStuck);
    }
    let first: Vec<f64> = draws.iter().map(|d| d.theta[0]).collect();
    Ok(SamplerReport {
        ess: autocorrelation_ess(&first),
        draws,
        n_proposed: kept,
        n_accepted: moves,
        acceptance_rate: moves as f64 / kept as f64,
        eps_used: eps,
    })
}

/// `N / (1 + 2 Σ ρ_k)` truncated at the first non-positive pair sum.
fn autocorrelation_ess(xs: &[f64]) -> f64 {
    let n = xs.len();
    let m = crate::stats::mean(xs);
    let c0: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if !(c0 > 0.0) {
        return 1.0;
    }
    let rho = |k: usize| -> f64 {
        xs[..n - k].iter().zip(&xs[k..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / (n as f64 * c0)
    };
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    (n as f64 / tau.max(1.0)).min(n as f64)
}
