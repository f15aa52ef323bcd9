//! Synthetic data-generating models with analytically known binding
//! functions and CLT covariances.
//!
//! In the default shortcut mode a model simulates its summary directly from
//! the large-sample law `b(θ) + chol(A(θ)) z / √n`. The mean/variance model
//! additionally offers a raw-data mode that draws `n` Gaussian observations
//! and computes the summaries from them.

use crate::error::{AbcError, Result};
use crate::numerics::{Mat, RngStream};

/// Stream index reserved for generating observed data.
const DATA_STREAM: u64 = 0xDA7A;

/// Axis-aligned uniform prior.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxPrior {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxPrior {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(AbcError::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(AbcError::InvalidArgument("prior bounds must satisfy lo < hi".into()));
        }
        Ok(BoxPrior { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        BoxPrior::new(vec![lo], vec![hi]).expect("valid interval")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta.iter().zip(self.lo.iter().zip(&self.hi)).all(|(t, (a, b))| *t >= *a && *t <= *b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn density(&self, theta: &[f64]) -> f64 {
        if self.contains(theta) {
            1.0 / self.volume()
        } else {
            0.0
        }
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        if self.contains(theta) {
            -self.volume().ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| rng.uniform_in(a, b)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimulationMode {
    Shortcut,
    RawData,
}

#[derive(Clone, Debug)]
pub enum ModelKind {
    /// `b(θ) = slope·θ`, `A = 1`.
    Linear { slope: f64 },
    /// `b(θ) = (θ − 1)²`, `A = 1`.
    Bimodal,
    /// `b` is flat on `[0, 1]` and has unit slope elsewhere.
    Flat,
    /// Gaussian data with mean `θ` and variance `θ² + extra_var`; summaries
    /// are the sample mean and variance.
    MeanVariance { extra_var: f64 },
    /// `b(θ) = (θ, θ/2, …, θ/d)`, `A = diag(1, 4, …, d²)`.
    MultiSummary { d: usize },
    /// Linear projection `P s` of another model's summary.
    Projected { inner: Box<SyntheticModel>, proj: Mat },
}

#[derive(Clone, Debug)]
pub struct SyntheticModel {
    pub name: String,
    pub kind: ModelKind,
    pub prior: BoxPrior,
    pub true_theta: Vec<f64>,
    pub mode: SimulationMode,
    /// `b(θ) = b(θ₀)` only at `θ = θ₀` on the prior box.
    pub identifiable: bool,
    /// Extra variance of the real data-generating process when it differs
    /// from this model's assumption.
    pub misspecified_extra_var: Option<f64>,
}

impl SyntheticModel {
    pub fn p(&self) -> usize {
        self.prior.dim()
    }

    pub fn d(&self) -> usize {
        match &self.kind {
            ModelKind::Linear { .. } | ModelKind::Bimodal | ModelKind::Flat => 1,
            ModelKind::MeanVariance { .. } => 2,
            ModelKind::MultiSummary { d } => *d,
            ModelKind::Projected { proj, .. } => proj.rows(),
        }
    }

    pub fn is_misspecified(&self) -> bool {
        self.misspecified_extra_var.is_some()
    }

    pub fn binding(&self, theta: &[f64]) -> Vec<f64> {
        let t = theta[0];
        match &self.kind {
            ModelKind::Linear { slope } => vec![slope * t],
            ModelKind::Bimodal => vec![(t - 1.0) * (t - 1.0)],
            ModelKind::Flat => vec![if t < 0.0 {
                t
            } else if t <= 1.0 {
                0.0
            } else {
                t - 1.0
            }],
            ModelKind::MeanVariance { extra_var } => vec![t, t * t + extra_var],
            ModelKind::MultiSummary { d } => (1..=*d).map(|j| t / j as f64).collect(),
            ModelKind::Projected { inner, proj } => proj.mul_vec(&inner.binding(theta)).expect("projection dimensions"),
        }
    }

    /// Binding of the true data-generating process for a misspecified model.
    pub fn misspecified_binding(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let extra = self.misspecified_extra_var?;
        let t = theta[0];
        Some(vec![t, t * t + extra])
    }

    /// CLT covariance `A(θ)` of `√n (S − b(θ))`.
    pub fn noise_cov(&self, theta: &[f64]) -> Mat {
        match &self.kind {
            ModelKind::Linear { .. } | ModelKind::Bimodal | ModelKind::Flat => Mat::scalar(1.0),
            ModelKind::MeanVariance { extra_var } => {
                let v = theta[0] * theta[0] + extra_var;
                Mat::diag(&[v, 2.0 * v * v])
            }
            ModelKind::MultiSummary { d } => Mat::diag(&(1..=*d).map(|j| (j * j) as f64).collect::<Vec<_>>()),
            ModelKind::Projected { inner, proj } => {
                let a = inner.noise_cov(theta);
                proj.matmul(&a).and_then(|pa| pa.matmul(&proj.transpose())).expect("projection dimensions")
            }
        }
    }

    /// Cholesky factor of `A(θ)`, with closed forms for the diagonal models.
    fn noise_chol(&self, theta: &[f64]) -> Mat {
        match &self.kind {
            ModelKind::Linear { .. } | ModelKind::Bimodal | ModelKind::Flat => Mat::scalar(1.0),
            ModelKind::MeanVariance { extra_var } => {
                let v = theta[0] * theta[0] + extra_var;
                Mat::diag(&[v.sqrt(), std::f64::consts::SQRT_2 * v])
            }
            ModelKind::MultiSummary { d } => Mat::diag(&(1..=*d).map(|j| j as f64).collect::<Vec<_>>()),
            ModelKind::Projected { .. } => self.noise_cov(theta).cholesky().expect("SPD noise"),
        }
    }

    /// Draws one summary statistic at parameter `theta` and sample size `n`.
    pub fn simulate(&self, theta: &[f64], n: u64, rng: &mut RngStream) -> Vec<f64> {
        if let ModelKind::Projected { inner, proj } = &self.kind {
            let s = inner.simulate(theta, n, rng);
            return proj.mul_vec(&s).expect("projection dimensions");
        }
        match self.mode {
            SimulationMode::RawData => self.simulate_raw(theta, n, rng),
            SimulationMode::Shortcut => {
                let mut s = self.binding(theta);
                let scale = 1.0 / (n as f64).sqrt();
                match &self.kind {
                    // scalar fast path
                    ModelKind::Linear { .. } | ModelKind::Bimodal | ModelKind::Flat => {
                        s[0] += scale * rng.standard_normal();
                    }
                    _ => {
                        let l = self.noise_chol(theta);
                        let z = rng.standard_normals(s.len());
                        for (i, si) in s.iter_mut().enumerate() {
                            let row = l.row(i);
                            *si += scale * row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                }
                s
            }
        }
    }

    fn simulate_raw(&self, theta: &[f64], n: u64, rng: &mut RngStream) -> Vec<f64> {
        let ModelKind::MeanVariance { extra_var } = &self.kind else {
            unreachable!("raw mode is validated at construction");
        };
        let t = theta[0];
        let sd = (t * t + extra_var).sqrt();
        // Welford
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for k in 1..=n {
            let x = t + sd * rng.standard_normal();
            let delta = x - mean;
            mean += delta / k as f64;
            m2 += delta * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        vec![mean, var]
    }

    /// Exact Gaussian law `N(b(θ), A(θ)/n)` of the shortcut simulator.
    pub fn summary_law(&self, theta: &[f64], n: u64) -> (Vec<f64>, Mat) {
        (self.binding(theta), self.noise_cov(theta).scale(1.0 / n as f64))
    }

    pub fn with_mode(mut self, mode: SimulationMode) -> Result<Self> {
        if mode == SimulationMode::RawData && !matches!(self.kind, ModelKind::MeanVariance { .. }) {
            return Err(AbcError::Unsupported(format!("raw-data mode for model '{}'", self.name)));
        }
        self.mode = mode;
        Ok(self)
    }

    pub fn with_true_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        if !self.prior.contains(&theta) {
            return Err(AbcError::InvalidArgument("true theta outside the prior box".into()));
        }
        self.true_theta = theta;
        Ok(self)
    }

    /// The model whose summary is `proj · s`.
    pub fn project(&self, proj: Mat) -> Result<SyntheticModel> {
        if proj.cols() != self.d() {
            return Err(AbcError::DimensionMismatch { expected: self.d(), got: proj.cols() });
        }
        Ok(SyntheticModel {
            name: format!("{}-projected", self.name),
            kind: ModelKind::Projected { inner: Box::new(self.clone()), proj },
            prior: self.prior.clone(),
            true_theta: self.true_theta.clone(),
            mode: self.mode,
            identifiable: self.identifiable,
            misspecified_extra_var: None,
        })
    }
}

fn base(name: &str, kind: ModelKind, prior: BoxPrior, true_theta: f64, identifiable: bool) -> SyntheticModel {
    SyntheticModel {
        name: name.to_string(),
        kind,
        prior,
        true_theta: vec![true_theta],
        mode: SimulationMode::Shortcut,
        identifiable,
        misspecified_extra_var: None,
    }
}

pub fn make_linear_gaussian(slope: f64) -> Result<SyntheticModel> {
    if slope == 0.0 || !slope.is_finite() {
        return Err(AbcError::ZeroSlope);
    }
    let name = if slope == 1.0 { "linear".to_string() } else { format!("linear:{slope}") };
    Ok(base(&name, ModelKind::Linear { slope }, BoxPrior::interval(-10.0, 10.0), 1.0, true))
}

pub fn make_bimodal_binding() -> SyntheticModel {
    base("bimodal", ModelKind::Bimodal, BoxPrior::interval(-2.0, 4.0), 0.0, false)
}

pub fn make_flat_binding() -> SyntheticModel {
    base("flat", ModelKind::Flat, BoxPrior::interval(-2.0, 3.0), 0.5, false)
}

/// `(assumed, true_dgp)`: data have variance `θ² + 2` but the model assumes
/// `θ² + 1`.
pub fn make_misspecified_pair() -> (SyntheticModel, SyntheticModel) {
    let prior = BoxPrior::interval(-5.0, 5.0);
    let mut assumed = base("misspec", ModelKind::MeanVariance { extra_var: 1.0 }, prior.clone(), 1.0, true);
    assumed.misspecified_extra_var = Some(2.0);
    let truth = base("misspec-truth", ModelKind::MeanVariance { extra_var: 2.0 }, prior, 1.0, true);
    (assumed, truth)
}

pub fn make_multi_summary(d: usize) -> Result<SyntheticModel> {
    if d < 2 {
        return Err(AbcError::InvalidArgument(format!("multi-summary model needs d >= 2, got {d}")));
    }
    Ok(base(&format!("multi:{d}"), ModelKind::MultiSummary { d }, BoxPrior::interval(-10.0, 10.0), 1.0, true))
}

/// Observed summary together with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedData {
    pub s_obs: Vec<f64>,
    pub n: u64,
    pub source_model: String,
    pub data_seed: u64,
}

impl ObservedData {
    /// One simulation of `model` at its true parameter.
    pub fn generate(model: &SyntheticModel, n: u64, data_seed: u64) -> Self {
        let mut rng = RngStream::at(data_seed, &[DATA_STREAM]);
        let s_obs = model.simulate(&model.true_theta, n, &mut rng);
        ObservedData { s_obs, n, source_model: model.name.clone(), data_seed }
    }
}

/// Model used inside ABC plus the model that produces the observed data.
#[derive(Clone, Debug)]
pub struct ModelPair {
    pub abc: SyntheticModel,
    pub data: SyntheticModel,
}

impl ModelPair {
    fn same(m: SyntheticModel) -> Self {
        ModelPair { abc: m.clone(), data: m }
    }
}

/// Registry lookup: `linear[:slope]`, `bimodal`, `flat`, `misspec`,
/// `misspec-control`, `multi:d`.
pub fn resolve_model(spec: &str) -> Result<ModelPair> {
    let spec = spec.trim();
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let bad = || AbcError::UnknownModel(spec.to_string());
    match (head, arg) {
        ("linear", None) => Ok(ModelPair::same(make_linear_gaussian(1.0)?)),
        ("linear", Some(a)) => {
            let slope: f64 = a.parse().map_err(|_| bad())?;
            Ok(ModelPair::same(make_linear_gaussian(slope)?))
        }
        ("bimodal", None) => Ok(ModelPair::same(make_bimodal_binding())),
        ("flat", None) => Ok(ModelPair::same(make_flat_binding())),
        ("misspec", None) => {
            let (abc, data) = make_misspecified_pair();
            Ok(ModelPair { abc, data })
        }
        ("misspec-control", None) => {
            let (mut abc, _) = make_misspecified_pair();
            abc.misspecified_extra_var = None;
            abc.name = "misspec-control".into();
            Ok(ModelPair::same(abc))
        }
        ("multi", Some(a)) => {
            let d: usize = a.parse().map_err(|_| bad())?;
            Ok(ModelPair::same(make_multi_summary(d)?))
        }
        _ => Err(bad()),
    }
}

pub const MODEL_REGISTRY: &[(&str, &str)] = &[
    ("linear[:slope]", "b(θ) = slope·θ, A = 1, prior U(-10, 10), θ₀ = 1"),
    ("bimodal", "b(θ) = (θ-1)², A = 1, prior U(-2, 4), θ₀ = 0"),
    ("flat", "b flat on [0, 1], unit slope elsewhere, prior U(-2, 3), θ₀ = 0.5"),
    ("misspec", "mean/variance summaries; data variance θ²+2, model assumes θ²+1"),
    ("misspec-control", "mean/variance summaries, well specified (θ²+1 on both sides)"),
    ("multi:d", "b(θ) = (θ, θ/2, …, θ/d), A = diag(1, 4, …, d²), prior U(-10, 10), θ₀ = 1"),
];
