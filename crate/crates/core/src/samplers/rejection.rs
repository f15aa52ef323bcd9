use super::{accept_fixed, require_acceptances, run_round, AbcSetup, Proposal, SamplerReport, Seed, Tolerance};
use crate::error::{AbcError, Result};

/// Plain rejection ABC with `n_proposals` prior draws.
pub fn rejection_abc(setup: &AbcSetup<'_>, tol: Tolerance, n_proposals: usize, seed: Seed) -> Result<SamplerReport> {
    let report = run_round(setup, &Proposal::Prior, tol, 0.0, n_proposals, 0, seed)?;
    require_acceptances(report, None)
}

/// Rejection ABC at fixed `eps` that stops once `target` draws are accepted.
///
/// Proposals are simulated in batches, but the result is truncated at the
/// exact proposal index where the `target`-th acceptance occurred, so it does
/// not depend on `batch`. Gives up with `NoAcceptances` (or returns fewer
/// draws, if any were found) after `max_proposals`.
pub fn rejection_abc_until(
    setup: &AbcSetup<'_>,
    eps: f64,
    target: usize,
    max_proposals: usize,
    batch: usize,
    seed: Seed,
) -> Result<SamplerReport> {
    setup.validate()?;
    Tolerance::Fixed(eps).validate()?;
    if target == 0 || batch == 0 {
        return Err(AbcError::InvalidArgument("target and batch must be positive".into()));
    }
    let mut accepted = Vec::with_capacity(target);
    let mut done = 0usize;
    while done < max_proposals {
        let len = batch.min(max_proposals - done);
        let found = accept_fixed(setup, &Proposal::Prior, eps, 0, done, len, seed);
        for (i, d) in found {
            accepted.push(d);
            if accepted.len() == target {
                let report = SamplerReport::from_draws(accepted, i + 1, eps);
                return Ok(report);
            }
        }
        done += len;
    }
    require_acceptances(SamplerReport::from_draws(accepted, done, eps), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::KernelSpec;
    use crate::models::make_linear_gaussian;
    use crate::par::Exec;
    use crate::stats;

    #[test]
    fn infinite_eps_reproduces_prior() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 100, &k);
        let r = rejection_abc(&setup, Tolerance::Fixed(f64::INFINITY), 10_000, Seed::new(3)).unwrap();
        assert_eq!(r.n_accepted, 10_000);
        let ks = stats::ks_statistic(&r.theta_column(0), |x| ((x + 10.0) / 20.0).clamp(0.0, 1.0));
        assert!(ks < 0.02, "ks = {ks}");
    }

    #[test]
    fn uniform_draws_respect_eps() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 10_000, &k);
        let r = rejection_abc(&setup, Tolerance::Fixed(0.05), 20_000, Seed::new(1)).unwrap();
        assert!(r.draws.iter().all(|d| d.weight == 1.0 && d.distance < 0.05));
        assert_eq!(r.acceptance_rate, r.n_accepted as f64 / r.n_proposed as f64);
    }

    #[test]
    fn deterministic_and_policy_independent() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::gaussian();
        let setup = AbcSetup::new(&m, &[1.0], 10_000, &k);
        let a = rejection_abc(&setup, Tolerance::Fixed(0.1), 5000, Seed::new(9)).unwrap();
        let b = rejection_abc(&setup.with_exec(Exec::Sequential), Tolerance::Fixed(0.1), 5000, Seed::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn until_is_batch_independent() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1.0], 10_000, &k);
        let a = rejection_abc_until(&setup, 0.05, 200, 1_000_000, 1000, Seed::new(4)).unwrap();
        let b = rejection_abc_until(&setup, 0.05, 200, 1_000_000, 77_777, Seed::new(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_accepted, 200);
    }

    #[test]
    fn no_acceptances_is_an_error() {
        let m = make_linear_gaussian(1.0).unwrap();
        let k = KernelSpec::uniform();
        let setup = AbcSetup::new(&m, &[1000.0], 10_000, &k);
        let r = rejection_abc(&setup, Tolerance::Fixed(0.01), 100, Seed::new(1));
        assert_eq!(r.unwrap_err(), AbcError::NoAcceptances { round: None });
    }
}
