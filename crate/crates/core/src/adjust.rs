//! Linear regression adjustment of accepted draws.

use crate::error::{AbcError, Result};
use crate::numerics::{cholesky, cholesky_solve, Mat};
use crate::samplers::AcceptedDraw;

/// Tolerance for the weighted normal-equation residual check.
pub const LS_TOL: f64 = 1e-8;
const RIDGE: f64 = 1e-10;

/// `θ ≈ α̂ + B̂ s` fitted by weighted least squares.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionFit {
    pub alpha_hat: Vec<f64>,
    /// `p × d`
    pub b_hat: Mat,
    pub residual_var: Vec<f64>,
}

pub fn fit_regression(draws: &[AcceptedDraw]) -> Result<RegressionFit> {
    let Some(first) = draws.first() else {
        return Err(AbcError::TooFewDraws { needed: 3, got: 0 });
    };
    let (p, d) = (first.theta.len(), first.summary.len());
    if draws.len() < d + 2 {
        return Err(AbcError::TooFewDraws { needed: d + 2, got: draws.len() });
    }
    for x in draws {
        if x.summary.len() != d {
            return Err(AbcError::DimensionMismatch { expected: d, got: x.summary.len() });
        }
        if x.theta.len() != p {
            return Err(AbcError::DimensionMismatch { expected: p, got: x.theta.len() });
        }
    }
    let total: f64 = draws.iter().map(|x| x.weight).sum();
    let w: Vec<f64> = draws.iter().map(|x| x.weight / total).collect();

    let mut s_bar = vec![0.0; d];
    let mut t_bar = vec![0.0; p];
    for (x, wk) in draws.iter().zip(&w) {
        for j in 0..d {
            s_bar[j] += wk * x.summary[j];
        }
        for i in 0..p {
            t_bar[i] += wk * x.theta[i];
        }
    }
    // Standardized columns keep the normal equations well scaled.
    let mut scale = vec![0.0; d];
    for (x, wk) in draws.iter().zip(&w) {
        for j in 0..d {
            scale[j] += wk * (x.summary[j] - s_bar[j]).powi(2);
        }
    }
    let spread: f64 = s_bar.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if scale.iter().any(|v| !(v.sqrt() > 1e-14 * spread)) {
        return Err(AbcError::RankDeficientDesign);
    }
    scale.iter_mut().for_each(|v| *v = v.sqrt());

    let z = |x: &AcceptedDraw, j: usize| (x.summary[j] - s_bar[j]) / scale[j];
    let mut xtwx = Mat::zeros(d, d);
    let mut xtwy = Mat::zeros(d, p);
    for (x, wk) in draws.iter().zip(&w) {
        for a in 0..d {
            let za = z(x, a);
            for b in 0..d {
                xtwx[(a, b)] += wk * za * z(x, b);
            }
            for i in 0..p {
                xtwy[(a, i)] += wk * za * (x.theta[i] - t_bar[i]);
            }
        }
    }
    cholesky(&xtwx).map_err(|_| AbcError::RankDeficientDesign)?;
    let ridge = RIDGE * xtwx.trace();
    let mut reg = xtwx.clone();
    for a in 0..d {
        reg[(a, a)] += ridge;
    }
    let l = cholesky(&reg).map_err(|_| AbcError::RankDeficientDesign)?;

    let mut b_hat = Mat::zeros(p, d);
    let mut alpha_hat = t_bar.clone();
    for i in 0..p {
        let rhs: Vec<f64> = (0..d).map(|a| xtwy[(a, i)]).collect();
        let mut beta = cholesky_solve(&l, &rhs);
        // Iterative refinement removes the ridge bias: each step shrinks it
        // by a factor of order `RIDGE`.
        for _ in 0..2 {
            let resid: Vec<f64> =
                (0..d).map(|a| rhs[a] - (0..d).map(|b| xtwx[(a, b)] * beta[b]).sum::<f64>()).collect();
            let step = cholesky_solve(&l, &resid);
            beta.iter_mut().zip(&step).for_each(|(b, s)| *b += s);
        }
        for j in 0..d {
            b_hat[(i, j)] = beta[j] / scale[j];
            alpha_hat[i] -= b_hat[(i, j)] * s_bar[j];
        }
    }
    let mut residual_var = vec![0.0; p];
    for (x, wk) in draws.iter().zip(&w) {
        for i in 0..p {
            let fit: f64 = alpha_hat[i] + (0..d).map(|j| b_hat[(i, j)] * x.summary[j]).sum::<f64>();
            residual_var[i] += wk * (x.theta[i] - fit).powi(2);
        }
    }
    Ok(RegressionFit { alpha_hat, b_hat, residual_var })
}

/// `θ̃ = θ − B̂ (s − s_obs)` for every draw; weights and summaries are kept.
pub fn adjust_draws(draws: &[AcceptedDraw], fit: &RegressionFit, s_obs: &[f64]) -> Result<Vec<AcceptedDraw>> {
    let (p, d) = (fit.b_hat.rows(), fit.b_hat.cols());
    if s_obs.len() != d {
        return Err(AbcError::DimensionMismatch { expected: d, got: s_obs.len() });
    }
    draws
        .iter()
        .map(|x| {
            if x.summary.len() != d {
                return Err(AbcError::DimensionMismatch { expected: d, got: x.summary.len() });
            }
            if x.theta.len() != p {
                return Err(AbcError::DimensionMismatch { expected: p, got: x.theta.len() });
            }
            let resid: Vec<f64> = x.summary.iter().zip(s_obs).map(|(a, b)| a - b).collect();
            let shift = fit.b_hat.mul_vec(&resid)?;
            let theta = x.theta.iter().zip(&shift).map(|(t, s)| t - s).collect();
            Ok(AcceptedDraw { theta, ..x.clone() })
        })
        .collect()
}

/// Largest `|Xᵀ W r|` entry of a fit, with `X = (1, s − s̄)` and weights
/// normalised to one.
pub fn normal_equation_residual(draws: &[AcceptedDraw], fit: &RegressionFit) -> f64 {
    let (p, d) = (fit.b_hat.rows(), fit.b_hat.cols());
    let total: f64 = draws.iter().map(|x| x.weight).sum();
    let mut worst = 0.0_f64;
    for i in 0..p {
        let mut g = vec![0.0; d + 1];
        for x in draws {
            let w = x.weight / total;
            let r = x.theta[i] - fit.alpha_hat[i] - (0..d).map(|j| fit.b_hat[(i, j)] * x.summary[j]).sum::<f64>();
            g[0] += w * r;
            for j in 0..d {
                g[j + 1] += w * r * x.summary[j];
            }
        }
        worst = g.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    worst
}
