use crate::error::{AbcError, Result};
use crate::metrics::{KernelKind, KernelSpec};
use crate::models::SyntheticModel;
use crate::numerics::{cholesky, cholesky_solve, log_det_from_cholesky};

pub const DEFAULT_GRID_POINTS: usize = 4001;

/// Mass below which an interval is ignored by the grid-resolution check.
const NEGLIGIBLE_MASS: f64 = 1e-6;
const MAX_ADJACENT_RATIO: f64 = 10.0;

/// Normalised density on an increasing grid, integrated by the trapezoid
/// rule with linear interpolation between nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    pub theta: Vec<f64>,
    pub density: Vec<f64>,
}

impl DensityTable {
    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.theta
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] * f(t[0]) + d[1] * f(t[1])))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|t| t)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|t| (t - m) * (t - m))
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Integral of the density over `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        (self.cdf(hi) - self.cdf(lo)).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = &self.theta;
        let f = &self.density;
        if x <= t[0] {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..t.len() - 1 {
            let (a, b) = (t[i], t[i + 1]);
            if x >= b {
                acc += 0.5 * (b - a) * (f[i] + f[i + 1]);
            } else {
                let fx = f[i] + (f[i + 1] - f[i]) * (x - a) / (b - a);
                return acc + 0.5 * (x - a) * (f[i] + fx);
            }
        }
        acc
    }

    /// Density value at `x` by linear interpolation (0 off the grid).
    pub fn density_at(&self, x: f64) -> f64 {
        let t = &self.theta;
        if x < t[0] || x > t[t.len() - 1] {
            return 0.0;
        }
        let i = t.partition_point(|v| *v <= x).clamp(1, t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        self.density[i - 1] + (self.density[i] - self.density[i - 1]) * (x - a) / (b - a)
    }
}

/// `points` evenly spaced nodes over `[lo, hi]`.
pub fn default_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect()
}

/// `PrABC(|θ − θ₀| < δ)` from a normalised table.
pub fn concentration_mass(table: &DensityTable, theta0: f64, delta: f64) -> f64 {
    table.mass_between(theta0 - delta, theta0 + delta)
}

/// `log Φ(u) − Φ(l)` for `l < u`, evaluated on the side that avoids
/// cancellation.
fn log_normal_interval(l: f64, u: f64) -> f64 {
    use std::f64::consts::FRAC_1_SQRT_2 as R;
    let p = if l > 0.0 {
        0.5 * (libm::erfc(l * R) - libm::erfc(u * R))
    } else if u < 0.0 {
        0.5 * (libm::erfc(-u * R) - libm::erfc(-l * R))
    } else {
        1.0 - 0.5 * libm::erfc(u * R) - 0.5 * libm::erfc(-l * R)
    };
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn log_abc_likelihood(
    model: &SyntheticModel,
    s_obs: &[f64],
    n: u64,
    kernel: &KernelSpec,
    eps: f64,
    theta: f64,
) -> Result<f64> {
    let th = [theta];
    let lp = model.prior.log_density(&th);
    if !lp.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    if eps.is_infinite() {
        return Ok(lp);
    }
    let (b, cov) = model.summary_law(&th, n);
    let d = b.len();
    match kernel.kind {
        KernelKind::Uniform => {
            if d != 1 {
                return Err(AbcError::Unsupported("uniform-kernel oracle needs a scalar summary".into()));
            }
            let scale = match &kernel.distance {
                crate::metrics::DistanceSpec::Euclidean => 1.0,
                crate::metrics::DistanceSpec::Mahalanobis { gamma } => gamma[(0, 0)].sqrt(),
            };
            let half = eps / scale;
            let sd = cov[(0, 0)].sqrt();
            Ok(lp + log_normal_interval((s_obs[0] - half - b[0]) / sd, (s_obs[0] + half - b[0]) / sd))
        }
        KernelKind::Gaussian => {
            let total = cov.add(&kernel.kernel_cov(d)?.scale(eps * eps))?;
            let l = cholesky(&total)?;
            let r: Vec<f64> = s_obs.iter().zip(&b).map(|(a, c)| a - c).collect();
            let x = cholesky_solve(&l, &r);
            let q: f64 = r.iter().zip(&x).map(|(a, c)| a * c).sum();
            Ok(lp - 0.5 * q - 0.5 * log_det_from_cholesky(&l))
        }
    }
}

fn log_densities(
    model: &SyntheticModel,
    s_obs: &[f64],
    n: u64,
    kernel: &KernelSpec,
    eps: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if model.p() != 1 {
        return Err(AbcError::Unsupported("the grid oracle is one-dimensional".into()));
    }
    if s_obs.len() != model.d() {
        return Err(AbcError::DimensionMismatch { expected: model.d(), got: s_obs.len() });
    }
    if !(eps > 0.0) {
        return Err(AbcError::InvalidArgument(format!("bandwidth must be positive, got {eps}")));
    }
    grid.iter().map(|&t| log_abc_likelihood(model, s_obs, n, kernel, eps, t)).collect()
}

fn normalise(grid: &[f64], logd: &[f64]) -> Result<DensityTable> {
    let top = logd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(AbcError::InvalidArgument("oracle density vanishes on the whole grid".into()));
    }
    let raw: Vec<f64> = logd.iter().map(|l| (l - top).exp()).collect();
    let mut table = DensityTable { theta: grid.to_vec(), density: raw };
    let z = table.integrate(|_| 1.0);
    table.density.iter_mut().for_each(|v| *v /= z);
    check_resolution(&table)?;
    Ok(table)
}

fn check_resolution(table: &DensityTable) -> Result<()> {
    for i in 0..table.theta.len() - 1 {
        let (a, b) = (table.density[i], table.density[i + 1]);
        let mass = 0.5 * (table.theta[i + 1] - table.theta[i]) * (a + b);
        if mass > NEGLIGIBLE_MASS {
            let ratio = a.max(b) / a.min(b);
            if ratio > MAX_ADJACENT_RATIO {
                return Err(AbcError::GridTooCoarse { theta: table.theta[i], ratio });
            }
        }
    }
    Ok(())
}

/// ABC posterior of a scalar parameter on `grid`, from the exact Gaussian law
/// of the shortcut simulator convolved with the kernel.
pub fn oracle_abc_posterior_1d(
    model: &SyntheticModel,
    s_obs: &[f64],
    n: u64,
    kernel: &KernelSpec,
    eps: f64,
    grid: &[f64],
) -> Result<DensityTable> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AbcError::InvalidArgument("grid must be strictly increasing with ≥ 2 points".into()));
    }
    let logd = log_densities(model, s_obs, n, kernel, eps, grid)?;
    normalise(grid, &logd)
}

/// As [`oracle_abc_posterior_1d`], but zooms the grid onto the region holding
/// the mass until it stops shrinking.
pub fn oracle_abc_posterior_auto(
    model: &SyntheticModel,
    s_obs: &[f64],
    n: u64,
    kernel: &KernelSpec,
    eps: f64,
) -> Result<DensityTable> {
    // e^-40 relative density never matters at the reported precision.
    const CUTOFF: f64 = 40.0;
    let (plo, phi) = (model.prior.lo()[0], model.prior.hi()[0]);
    let mut grid = default_grid(plo, phi, DEFAULT_GRID_POINTS);
    for _ in 0..10 {
        let logd = log_densities(model, s_obs, n, kernel, eps, &grid)?;
        let top = logd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(AbcError::InvalidArgument("oracle density vanishes on the whole grid".into()));
        }
        let keep: Vec<usize> = (0..grid.len()).filter(|&i| logd[i] > top - CUTOFF).collect();
        let i0 = keep[0].saturating_sub(1);
        let i1 = (keep[keep.len() - 1] + 1).min(grid.len() - 1);
        if i1 - i0 + 1 >= grid.len() / 4 {
            return normalise(&grid, &logd);
        }
        grid = default_grid(grid[i0], grid[i1], DEFAULT_GRID_POINTS);
    }
    let logd = log_densities(model, s_obs, n, kernel, eps, &grid)?;
    normalise(&grid, &logd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_bimodal_binding, make_linear_gaussian};

    #[test]
    fn infinite_eps_is_the_prior() {
        let m = make_linear_gaussian(1.0).unwrap();
        let g = default_grid(-10.0, 10.0, 401);
        let t = oracle_abc_posterior_1d(&m, &[1.0], 100, &KernelSpec::uniform(), f64::INFINITY, &g).unwrap();
        assert!(t.density.iter().all(|v| (v - 0.05).abs() < 1e-12));
    }

    #[test]
    fn gaussian_kernel_matches_conjugate_form() {
        let (slope, n, eps) = (2.0, 400u64, 0.05);
        let m = make_linear_gaussian(slope).unwrap();
        let s_obs = [slope * 1.0];
        let var = (1.0 / n as f64 + eps * eps) / (slope * slope);
        let g = default_grid(0.5, 1.5, 4001);
        let t = oracle_abc_posterior_1d(&m, &s_obs, n, &KernelSpec::gaussian(), eps, &g).unwrap();
        for (th, d) in t.theta.iter().zip(&t.density) {
            let expect = (-(th - 1.0).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
            assert!((d - expect).abs() < 1e-6 * expect.max(1.0), "{th}: {d} vs {expect}");
        }
    }

    #[test]
    fn uniform_kernel_variance() {
        let m = make_linear_gaussian(1.0).unwrap();
        let (n, eps) = (10_000u64, 0.02);
        let t = oracle_abc_posterior_auto(&m, &[1.0], n, &KernelSpec::uniform(), eps).unwrap();
        let expect = 1.0 / n as f64 + eps * eps / 3.0;
        assert!((t.variance() / expect - 1.0).abs() < 1e-4, "{}", t.variance());
        assert!((t.mean() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bimodal_has_equal_modes() {
        let m = make_bimodal_binding();
        let t = oracle_abc_posterior_auto(&m, &[1.0], 10_000, &KernelSpec::uniform(), 0.01).unwrap();
        let left = t.mass_between(-2.0, 1.0);
        assert!((left - 0.5).abs() < 1e-3, "{left}");
        let peak_l = t.density_at(0.0);
        let peak_r = t.density_at(2.0);
        assert!(peak_l > 0.0 && (peak_l / peak_r - 1.0).abs() < 0.05);
    }

    #[test]
    fn concentration_examples() {
        let m = make_linear_gaussian(1.0).unwrap();
        let n = 10_000u64;
        let t = oracle_abc_posterior_auto(&m, &[1.0], n, &KernelSpec::uniform(), 0.01).unwrap();
        assert!(concentration_mass(&t, 1.0, 0.1) > 0.99);
        assert_eq!(concentration_mass(&t, 1.0, 0.0), 0.0);
        let g = default_grid(-10.0, 10.0, 4001);
        let wide = oracle_abc_posterior_1d(&m, &[1.0], 1, &KernelSpec::uniform(), 5.0, &g).unwrap();
        assert!((concentration_mass(&wide, 0.0, 10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_detected() {
        let m = make_linear_gaussian(1.0).unwrap();
        let g = default_grid(-10.0, 10.0, 101);
        let r = oracle_abc_posterior_1d(&m, &[1.0], 1_000_000, &KernelSpec::gaussian(), 0.001, &g);
        assert!(matches!(r, Err(AbcError::GridTooCoarse { .. })));
    }
}
