use thiserror::Error;

/// Every failure the laboratory can report.
///
/// Variant names double as the stable error identifiers printed by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbcError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("binding slope must be non-zero")]
    ZeroSlope,
    #[error("bandwidth in quantile mode needs realized distances")]
    QuantileModeRequiresDistances,
    #[error("invalid bandwidth schedule: {0}")]
    InvalidSchedule(String),
    #[error("sampler accepted no draws{}", round.map(|r| format!(" in round {r}")).unwrap_or_default())]
    NoAcceptances { round: Option<usize> },
    #[error("importance weights are degenerate (ess = {ess})")]
    DegenerateWeights { ess: f64 },
    #[error("initial chain state lies outside the prior support")]
    InitOutsidePrior,
    #[error("chain never accepted a proposal after burn-in")]
    ChainStuck,
    #[error("sampler report holds no weighted draws")]
    EmptyReport,
    #[error("regression design is rank deficient")]
    RankDeficientDesign,
    #[error("need at least {needed} draws for the regression, got {got}")]
    TooFewDraws { needed: usize, got: usize },
    #[error("binding function is not finite near {theta:?}")]
    NonFiniteBinding { theta: Vec<f64> },
    #[error("no closed-form limit for this kernel at c > 0")]
    NoClosedForm,
    #[error("matrix does not have full column rank")]
    RankDeficient,
    #[error("grid too coarse: adjacent density ratio {ratio} near theta = {theta}")]
    GridTooCoarse { theta: f64, ratio: f64 },
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl AbcError {
    /// Stable identifier, e.g. `NoAcceptances`.
    pub fn name(&self) -> &'static str {
        match self {
            AbcError::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            AbcError::NotSymmetric { .. } => "NotSymmetric",
            AbcError::DimensionMismatch { .. } => "DimensionMismatch",
            AbcError::ZeroSlope => "ZeroSlope",
            AbcError::QuantileModeRequiresDistances => "QuantileModeRequiresDistances",
            AbcError::InvalidSchedule(_) => "InvalidSchedule",
            AbcError::NoAcceptances { .. } => "NoAcceptances",
            AbcError::DegenerateWeights { .. } => "DegenerateWeights",
            AbcError::InitOutsidePrior => "InitOutsidePrior",
            AbcError::ChainStuck => "ChainStuck",
            AbcError::EmptyReport => "EmptyReport",
            AbcError::RankDeficientDesign => "RankDeficientDesign",
            AbcError::TooFewDraws { .. } => "TooFewDraws",
            AbcError::NonFiniteBinding { .. } => "NonFiniteBinding",
            AbcError::NoClosedForm => "NoClosedForm",
            AbcError::RankDeficient => "RankDeficient",
            AbcError::GridTooCoarse { .. } => "GridTooCoarse",
            AbcError::UnknownModel(_) => "UnknownModel",
            AbcError::Unsupported(_) => "Unsupported",
            AbcError::InvalidArgument(_) => "InvalidArgument",
            AbcError::Config(_) => "Config",
            AbcError::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for AbcError {
    fn from(e: std::io::Error) -> Self {
        AbcError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AbcError>;
