use thiserror::Error;

/// Errors produced by fitting, inference and simulation routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue:e} below cutoff {cutoff:e})")]
    NotPsd { eigenvalue: f64, cutoff: f64 },
    #[error("matrix is not symmetric positive definite (pivot {pivot:e} at index {index})")]
    NotSpd { pivot: f64, index: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "MLE appears unbounded: fitted-logit energy {metric:.3} exceeds tau = {tau}; \
         the data may be separable or more observations are needed"
    )]
    Unbounded { metric: f64, tau: f64 },
    #[error("Newton solver did not converge within {max_iter} iterations (gradient sup-norm {grad_norm:e})")]
    MaxIterations { max_iter: usize, grad_norm: f64 },
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),
    #[error("predicted probability underflow (min {min_prob:e}); low-rank backend refused")]
    DegenerateProbabilities { min_prob: f64 },
    #[error("feature index {index} out of range for p = {p}")]
    IndexOutOfRange { index: usize, p: usize },
    #[error("empirical Fisher block is singular")]
    SingularFisher,
    #[error("empty input")]
    Empty,
    #[error("too many failed repetitions: {failed} of {attempted}")]
    TooManyFailures { failed: usize, attempted: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
