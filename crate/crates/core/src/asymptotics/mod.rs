//! Closed-form large-sample predictions and exact 1-d oracles.

mod oracle;

pub use oracle::{
    concentration_mass, default_grid, oracle_abc_posterior_1d, oracle_abc_posterior_auto, DensityTable,
    DEFAULT_GRID_POINTS,
};

use crate::error::{AbcError, Result};
use crate::metrics::{KernelKind, KernelSpec};
use crate::models::SyntheticModel;
use crate::numerics::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `√n ε → ∞`
    Slower,
    /// `√n ε → c > 0`
    Boundary,
    /// `√n ε → 0`
    Faster,
}

/// Limiting law of `t = √n (θ − θ₀)` under the ABC posterior.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticPrediction {
    pub regime: Regime,
    pub c: f64,
    /// `I = D₀ᵀ A⁻¹ D₀`
    pub info: Mat,
    /// `Ĩ = D₀ᵀ (A + c²Σ)⁻¹ D₀`; equals `I` when `c = 0`.
    pub info_tilde: Mat,
    /// Coefficient of `s̃_obs` in the limiting posterior mean of `t`.
    pub mean_map: Mat,
    /// Limiting posterior covariance of `t`.
    pub cov_t: Mat,
    /// Asymptotic covariance of the posterior mean of `t` over repeated data.
    pub mean_sampling_cov: Mat,
}

/// Central finite-difference Jacobian of the binding function (`d × p`).
pub fn numeric_d0(model: &SyntheticModel, theta0: &[f64]) -> Result<Mat> {
    let p = model.p();
    if theta0.len() != p {
        return Err(AbcError::DimensionMismatch { expected: p, got: theta0.len() });
    }
    let d = model.d();
    let mut jac = Mat::zeros(d, p);
    for j in 0..p {
        let h = 1e-5 * theta0[j].abs().max(1.0);
        let mut up = theta0.to_vec();
        let mut down = theta0.to_vec();
        up[j] += h;
        down[j] -= h;
        let (bu, bd) = (model.binding(&up), model.binding(&down));
        if bu.iter().chain(&bd).any(|v| !v.is_finite()) {
            let theta = if bu.iter().any(|v| !v.is_finite()) { up } else { down };
            return Err(AbcError::NonFiniteBinding { theta });
        }
        for i in 0..d {
            jac[(i, j)] = (bu[i] - bd[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `(D₀ᵀ W D₀)⁻¹ D₀ᵀ W` and `(D₀ᵀ W D₀)⁻¹` for `W = cov⁻¹`.
fn gls_map(d0: &Mat, cov: &Mat) -> Result<(Mat, Mat, Mat)> {
    let w = cov.inverse_spd()?;
    let dtw = d0.transpose().matmul(&w)?;
    let info = dtw.matmul(d0)?;
    let info_inv = info.inverse_spd()?;
    Ok((info_inv.matmul(&dtw)?, info, info_inv))
}

fn check_inputs(d0: &Mat, a0: &Mat) -> Result<()> {
    if a0.rows() != d0.rows() || !a0.is_square() {
        return Err(AbcError::DimensionMismatch { expected: d0.rows(), got: a0.rows() });
    }
    if !d0.has_full_column_rank() {
        return Err(AbcError::RankDeficient);
    }
    a0.cholesky()?;
    Ok(())
}

pub fn predict_posterior(d0: &Mat, a0: &Mat, kernel: &KernelSpec, c: f64) -> Result<AsymptoticPrediction> {
    check_inputs(d0, a0)?;
    if !(c >= 0.0) || !c.is_finite() {
        return Err(AbcError::NoClosedForm);
    }
    let (mean_map0, info, info_inv) = gls_map(d0, a0)?;
    if c == 0.0 {
        return Ok(AsymptoticPrediction {
            regime: Regime::Faster,
            c,
            info_tilde: info.clone(),
            info,
            mean_map: mean_map0,
            cov_t: info_inv.clone(),
            mean_sampling_cov: info_inv,
        });
    }
    if kernel.kind == KernelKind::Uniform {
        return Err(AbcError::NoClosedForm);
    }
    let sigma = kernel.kernel_cov(d0.rows())?;
    let inflated = a0.add(&sigma.scale(c * c))?;
    let (mean_map, info_tilde, cov_t) = gls_map(d0, &inflated)?;
    let mean_sampling_cov = mean_map.matmul(a0)?.matmul(&mean_map.transpose())?;
    Ok(AsymptoticPrediction { regime: Regime::Boundary, c, info, info_tilde, mean_map, cov_t, mean_sampling_cov })
}

/// Optimal linear projection `P = D₀ᵀ A⁻¹` of the summaries (`p × d`).
pub fn project_summaries(d0: &Mat, a0: &Mat) -> Result<Mat> {
    check_inputs(d0, a0)?;
    d0.transpose().matmul(&a0.inverse_spd()?)
}
