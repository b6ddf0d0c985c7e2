use crate::lattice::MultiIndex;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by lattice, matrix, engine, Floquet, and model
/// operations.
///
/// The variants split into three families that front ends map to distinct
/// exit codes: malformed input ([`Error::Document`]), violated mathematical
/// preconditions (most of the rest), and [`Error::RootExtractionUnsupported`]
/// for the one case the theory leaves open.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("axis {axis} out of range for {m} axes")]
    AxisOutOfRange { axis: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is numerically singular (|det| = {det_abs:.3e} below the scaled cutoff {cutoff:.3e})")]
    SingularMatrix { det_abs: f64, cutoff: f64 },

    #[error("coefficient for axis {axis} at t = {at} is singular")]
    SingularCoefficient { axis: usize, at: MultiIndex },

    #[error("eigensolver did not converge after {sweeps} QR sweeps (n = {n})")]
    EigenNonConvergence { n: usize, sweeps: usize },

    #[error("matrix dimension {n} exceeds the supported eigensolver cap {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("matrix is diagonalizable; the scalar-plus-nilpotent root form only applies to defective matrices")]
    NotDefective,

    #[error("matrices do not commute: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NonCommuting { residual: f64, tol: f64 },

    #[error("coefficients are incompatible: {violations} violation(s) on the test box, worst residual {worst:.3e}")]
    Incompatible { violations: usize, worst: f64 },

    #[error("point {t} is outside the system domain: {reason}")]
    OutsideDomain { t: MultiIndex, reason: String },

    #[error("points {s} and {t} are not ordered componentwise; transition requires s <= t")]
    NotOrdered { s: MultiIndex, t: MultiIndex },

    #[error("system is not periodic with the declared periods: A_{axis}(t) differs at t = {at} by {residual:.3e}")]
    PeriodicityViolation {
        axis: usize,
        at: MultiIndex,
        residual: f64,
    },

    #[error(
        "no algorithm is known that guarantees commuting k-th roots of a defective commuting \
         family in dimension {n} >= 3; whether such roots always exist is an open question"
    )]
    RootExtractionUnsupported { n: usize },

    #[error("decomposition invariant failed: {invariant} (residual {residual:.3e}, tolerance {tol:.3e})")]
    DecompositionInvariant {
        invariant: String,
        residual: f64,
        tol: f64,
    },

    #[error("simultaneous diagonalization failed after {retries} seeded attempts: {reason}")]
    SimultaneousDiagonalizationFailed { retries: usize, reason: String },

    #[error("malformed document: {0}")]
    Document(String),
}

impl Error {
    /// Classifies the error for process exit codes: `1` malformed input,
    /// `2` violated mathematical precondition, `3` unsupported case.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Document(_) => 1,
            Error::RootExtractionUnsupported { .. } => 3,
            _ => 2,
        }
    }
}
