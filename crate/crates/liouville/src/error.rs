use thiserror::Error;

/// Errors surfaced by the numerical operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A developing function violates its structural constraints
    /// (degenerate Möbius determinant, unit-norm violation, ...).
    #[error("invalid developing function: {0}")]
    InvalidFunction(String),

    /// Derivative requested exactly at a pole of the function.
    #[error("derivative evaluated at a pole (z = {re} + {im}i)")]
    DerivativeAtPole { re: f64, im: f64 },

    /// Adaptive quadrature hit the subdivision cap before meeting tolerance.
    /// Carries the best value and error estimate reached.
    #[error("quadrature tolerance not met: best {best} with error estimate {estimate}")]
    ToleranceNotMet { best: f64, estimate: f64 },

    /// An improper integral kept growing under truncation doubling.
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    /// Point handed to the grid search lies outside the grid box.
    #[error("point ({x}, {y}) lies outside the grid box")]
    OutsideGrid { x: f64, y: f64 },

    /// A bound construction's hypotheses failed numerically.
    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),

    /// A certificate's numerical verification failed at a sample.
    #[error("certificate verification failed: {0}")]
    CertificateFailed(String),

    /// No sign change of 1 + r u'(r) found in the bracket.
    #[error("no critical radius found in ({lo}, {hi})")]
    NoCriticalRadius { lo: f64, hi: f64 },

    /// A tabulated profile is not usable as a C^2 function.
    #[error("profile needs smoothing: {0}")]
    NeedsSmoothing(String),

    /// A radially symmetric domain with overlapping or unsorted pieces.
    #[error("invalid radial domain: {0}")]
    InvalidDomain(String),

    /// Level-set location exceeded the crossing-count cap.
    #[error("level-set resolution exceeded: {0}")]
    ResolutionExceeded(String),

    /// An operation's precondition was violated.
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    /// Escape bound could not be certified; reports the best value found.
    #[error("inconclusive bound (best value found: {best})")]
    Inconclusive { best: f64 },

    /// Configuration or descriptor problem, with the failing field named.
    #[error("invalid configuration: field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
