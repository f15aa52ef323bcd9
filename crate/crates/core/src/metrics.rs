//! Acceptance geometry: distances, kernels and bandwidth schedules.

use crate::error::{AbcError, Result};
use crate::models::SyntheticModel;
use crate::numerics::{Mat, RngStream};

/// Gaussian-kernel weights at or below this count as rejections.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum DistanceSpec {
    Euclidean,
    /// `‖x‖² = xᵀ Γ x` with `Γ` symmetric positive definite.
    Mahalanobis {
        gamma: Mat,
    },
}

impl DistanceSpec {
    pub fn mahalanobis(gamma: Mat) -> Result<Self> {
        gamma.cholesky()?;
        Ok(DistanceSpec::Mahalanobis { gamma })
    }

    /// Weight matrix `Γ` for a summary dimension `d`.
    pub fn gamma(&self, d: usize) -> Mat {
        match self {
            DistanceSpec::Euclidean => Mat::identity(d),
            DistanceSpec::Mahalanobis { gamma } => gamma.clone(),
        }
    }

    /// Squared norm of `x` under this distance.
    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        match self {
            DistanceSpec::Euclidean => x.iter().map(|v| v * v).sum(),
            DistanceSpec::Mahalanobis { gamma } => gamma.quad_form(x).max(0.0),
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if let DistanceSpec::Mahalanobis { gamma } = self {
            if gamma.rows() != d {
                return Err(AbcError::DimensionMismatch { expected: gamma.rows(), got: d });
            }
        }
        Ok(())
    }
}

pub fn distance(spec: &DistanceSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(AbcError::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    spec.check_dim(x.len())?;
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(spec.norm_sq(&diff).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Uniform,
    Gaussian,
}

impl std::str::FromStr for KernelKind {
    type Err = AbcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(KernelKind::Uniform),
            "gaussian" => Ok(KernelKind::Gaussian),
            other => Err(AbcError::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Uniform => "uniform",
            KernelKind::Gaussian => "gaussian",
        })
    }
}

/// Kernel with its distance. For the Gaussian kernel the distance weight is
/// the inverse kernel covariance, `Γ = Σ⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub distance: DistanceSpec,
}

impl KernelSpec {
    pub fn uniform() -> Self {
        KernelSpec { kind: KernelKind::Uniform, distance: DistanceSpec::Euclidean }
    }

    pub fn gaussian() -> Self {
        KernelSpec { kind: KernelKind::Gaussian, distance: DistanceSpec::Euclidean }
    }

    pub fn with_distance(mut self, distance: DistanceSpec) -> Self {
        self.distance = distance;
        self
    }

    /// `K(·)` evaluated at a distance already divided by the bandwidth.
    pub fn profile(&self, scaled_dist: f64) -> f64 {
        match self.kind {
            KernelKind::Uniform => {
                if scaled_dist < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::Gaussian => (-0.5 * scaled_dist * scaled_dist).exp(),
        }
    }

    /// Kernel weight for a distance `dist` at bandwidth `eps`.
    pub fn weight_at(&self, dist: f64, eps: f64) -> f64 {
        if eps.is_infinite() {
            return 1.0;
        }
        self.profile(dist / eps)
    }

    /// Kernel covariance `Σ = Γ⁻¹` for a Gaussian kernel on `d` summaries.
    pub fn kernel_cov(&self, d: usize) -> Result<Mat> {
        match &self.distance {
            DistanceSpec::Euclidean => Ok(Mat::identity(d)),
            DistanceSpec::Mahalanobis { gamma } => gamma.inverse_spd(),
        }
    }
}

/// `K(x / eps)` under the kernel's distance.
pub fn kernel_weight(spec: &KernelSpec, x: &[f64], eps: f64) -> f64 {
    spec.weight_at(spec.distance.norm_sq(x).sqrt(), eps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandwidthSchedule {
    /// `ε_n = a · n^(−η)`.
    Explicit { a: f64, eta: f64 },
    /// `ε` is the `accept_fraction` quantile of realized distances.
    Quantile { accept_fraction: f64 },
}

impl BandwidthSchedule {
    pub fn explicit(a: f64, eta: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(AbcError::InvalidSchedule(format!("scale must be positive, got {a}")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(AbcError::InvalidSchedule(format!("exponent must lie in [0, 1], got {eta}")));
        }
        Ok(BandwidthSchedule::Explicit { a, eta })
    }

    pub fn quantile(accept_fraction: f64) -> Result<Self> {
        if !(accept_fraction > 0.0 && accept_fraction <= 1.0) {
            return Err(AbcError::InvalidSchedule(format!(
                "accept fraction must lie in (0, 1], got {accept_fraction}"
            )));
        }
        Ok(BandwidthSchedule::Quantile { accept_fraction })
    }
}

pub fn bandwidth(sched: &BandwidthSchedule, n: u64) -> Result<f64> {
    match *sched {
        BandwidthSchedule::Explicit { a, eta } => Ok(a * (n.max(1) as f64).powf(-eta)),
        BandwidthSchedule::Quantile { .. } => Err(AbcError::QuantileModeRequiresDistances),
    }
}

/// Smallest realized distance `e` such that at least
/// `ceil(accept_fraction · len)` of the finite distances are `≤ e`.
pub fn quantile_bandwidth(distances: &[f64], accept_fraction: f64) -> Option<f64> {
    let mut finite: Vec<f64> = distances.iter().copied().filter(|d| d.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    let k = ((accept_fraction * distances.len() as f64).ceil() as usize).clamp(1, finite.len());
    let (_, kth, _) = finite.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Some(*kth)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PilotCovariance {
    Diagonal,
    Full,
}

/// Mahalanobis distance whose weight estimates `A(θ_ref)⁻¹` from `pilot`
/// simulations at the prior midpoint.
pub fn estimated_variance_distance(
    model: &SyntheticModel,
    n: u64,
    pilot: usize,
    form: PilotCovariance,
    seed: u64,
) -> Result<DistanceSpec> {
    let reference = model.prior.midpoint();
    let d = model.d();
    let sims: Vec<Vec<f64>> =
        (0..pilot).map(|i| model.simulate(&reference, n, &mut RngStream::at(seed, &[0x9170, i as u64]))).collect();
    let cov = crate::stats::sample_covariance(&sims, d).scale(n as f64);
    let gamma = match form {
        PilotCovariance::Diagonal => Mat::diag(&cov.diagonal().iter().map(|v| 1.0 / v).collect::<Vec<_>>()),
        PilotCovariance::Full => cov.inverse_spd()?,
    };
    DistanceSpec::mahalanobis(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_examples() {
        assert_eq!(distance(&DistanceSpec::Euclidean, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(distance(&DistanceSpec::Euclidean, &[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
    }

    #[test]
    fn mahalanobis_example() {
        let spec = DistanceSpec::mahalanobis(Mat::diag(&[1.0, 0.25])).unwrap();
        assert_eq!(distance(&spec, &[0.0, 2.0], &[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn distance_errors() {
        assert!(matches!(
            distance(&DistanceSpec::Euclidean, &[1.0], &[1.0, 2.0]),
            Err(AbcError::DimensionMismatch { .. })
        ));
        let spec = DistanceSpec::mahalanobis(Mat::identity(3)).unwrap();
        assert!(distance(&spec, &[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(DistanceSpec::mahalanobis(Mat::diag(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn bandwidth_examples() {
        let b = |a, eta, n| bandwidth(&BandwidthSchedule::explicit(a, eta).unwrap(), n).unwrap();
        assert!((b(1.0, 0.5, 100) - 0.1).abs() < 1e-15);
        assert!((b(2.0, 1.0 / 3.0, 8) - 1.0).abs() < 1e-12);
        let ratio = b(1.0, 0.3, 1_000_000) / b(1.0, 0.5, 1_000_000);
        assert!((ratio - 10f64.powf(1.2)).abs() < 1e-9);
        assert!((ratio - 15.85).abs() < 0.01);
    }

    #[test]
    fn quantile_mode_needs_distances() {
        let q = BandwidthSchedule::quantile(0.1).unwrap();
        assert_eq!(bandwidth(&q, 10), Err(AbcError::QuantileModeRequiresDistances));
        assert!(BandwidthSchedule::quantile(0.0).is_err());
        assert!(BandwidthSchedule::quantile(1.0).is_ok());
        assert!(BandwidthSchedule::explicit(-1.0, 0.5).is_err());
    }

    #[test]
    fn kernel_examples() {
        let u = KernelSpec::uniform();
        assert_eq!(kernel_weight(&u, &[0.5], 1.0), 1.0);
        assert_eq!(kernel_weight(&u, &[1.5], 1.0), 0.0);
        let g = KernelSpec::gaussian();
        assert!((kernel_weight(&g, &[2.0], 2.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((kernel_weight(&g, &[2.0], 2.0) - 0.6065).abs() < 1e-4);
        assert_eq!(kernel_weight(&u, &[1e9], f64::INFINITY), 1.0);
    }

    #[test]
    fn quantile_selection() {
        let d = [5.0, 1.0, 3.0, 2.0, 4.0, f64::INFINITY];
        assert_eq!(quantile_bandwidth(&d, 0.5), Some(3.0));
        assert_eq!(quantile_bandwidth(&d, 1.0), Some(5.0));
        assert_eq!(quantile_bandwidth(&d, 0.01), Some(1.0));
        assert_eq!(quantile_bandwidth(&[f64::INFINITY], 0.5), None);
    }

    #[test]
    fn pilot_distance_estimates_inverse_noise() {
        let m = crate::models::make_multi_summary(2).unwrap();
        let spec = estimated_variance_distance(&m, 1000, 1000, PilotCovariance::Diagonal, 1).unwrap();
        let g = spec.gamma(2);
        assert!((g[(0, 0)] - 1.0).abs() < 0.15);
        assert!((g[(1, 1)] - 0.25).abs() < 0.04);
        assert_eq!(g[(0, 1)], 0.0);
    }
}
