use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("actor index ({i}, {j}) out of range for network of {n} actors")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("a network needs at least 2 actors, got {0}")]
    TooFewActors(usize),
    #[error("self-tie at ({0}, {0})")]
    SelfTie(usize),
    #[error("tie matrix has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("covariate `{name}`: {reason}")]
    Covariate { name: String, reason: String },
    #[error("panel: {0}")]
    Panel(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("selection function is not unimodal in the alter value (theta1 + theta2 = {0} >= 0)")]
    NotUnimodal(f64),
    #[error("social norm undefined: |theta2| = {theta2:e} is below tolerance; behavior is pure linear aspiration with slope theta3 = {theta3}")]
    NormUndefined { theta2: f64, theta3: f64 },
    #[error("attraction weights undefined: theta1 + theta2 = 0")]
    DegenerateWeights,
    #[error("covariance entry ({0}, {1}) required but not supplied")]
    MissingCovariance(usize, usize),
    #[error("invalid selection input: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EffectError {
    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),
    #[error("effect `{effect}` requires a covariate")]
    MissingCovariate { effect: String },
    #[error("effect `{effect}` does not take a covariate (got `{covariate}`)")]
    UnexpectedCovariate { effect: String, covariate: String },
    #[error("gwesp decay alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("unknown effect name `{0}`")]
    UnknownEffect(String),
    #[error("parameter vector has {betas} coefficients for {effects} effects")]
    LengthMismatch { effects: usize, betas: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("rate parameter must be nonnegative and finite, got {0}")]
    InvalidRate(f64),
    #[error("invalid simulation options: {0}")]
    InvalidOptions(String),
    #[error("expected {expected} rate parameters, got {got}")]
    RateCount { expected: usize, got: usize },
    #[error(transparent)]
    Effect(#[from] EffectError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("derivative matrix is singular; unidentifiable or collinear statistics: {}", .statistics.join(", "))]
    SingularDerivative { statistics: Vec<String> },
    #[error("covariance submatrix for parameters {indices:?} is singular")]
    SingularCovariance { indices: Vec<usize> },
    #[error("standard error of parameter {0} is zero; test undefined")]
    ZeroStandardError(usize),
    #[error("linear combination has non-positive variance {0}")]
    DegenerateVariance(f64),
    #[error("parameter index {index} out of range ({len} parameters)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid estimation input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Effect(#[from] EffectError),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Effect(#[from] EffectError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}
