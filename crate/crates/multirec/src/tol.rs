//! Numerical tolerances used across the crate.
//!
//! Every comparison against zero is scale aware: a raw residual is measured
//! relative to `max(1, magnitude of the operands)` so that systems with large
//! entries are not punished and systems with tiny entries are not forgiven.
//! The constants below are the single source of truth; operations accept
//! overrides where the contract allows one.

/// Relative tolerance for the coefficient compatibility check.
///
/// A pair `(alpha, beta)` at a point `t` is flagged when
/// `max|L - R| > TOL_COMPAT * max(1, |L|, |R|)` where `L` and `R` are the two
/// products of the compatibility condition. The same bound gates commutation
/// checks on monodromy families.
pub const TOL_COMPAT: f64 = 1e-9;

/// Relative eigendecomposition residual `|M V - V diag(lambda)|`.
pub const TOL_EIG: f64 = 1e-8;

/// Relative residual allowed for matrix root reconstruction `|Q^k - P|` and
/// for the invariants of a Floquet decomposition.
pub const TOL_ROOT_RESIDUAL: f64 = 1e-8;

/// Relative gap under which two roots of a quadratic are treated as a double
/// root (selects the confluent closed-form power formula).
pub const TOL_ROOT_GAP: f64 = 1e-10;

/// Base factor of the determinant invertibility test.
///
/// A matrix `M` of dimension `n` counts as invertible when
/// `|det M| > TOL_DET_BASE * max(1, |M|_max)^n`. The power of `n` keeps the
/// bound commensurate with the determinant's degree in the entries.
pub const TOL_DET_BASE: f64 = 1e-12;

/// Relative entry tolerance for structural predicates (Hermitian test,
/// identity test, table equality during periodicity verification).
pub const TOL_STRUCT: f64 = 1e-9;

/// Cutoff for the diagonalizability decision.
///
/// The eigenvector matrix has unit columns, so its determinant lies in
/// `[0, 1]` in modulus and measures the conditioning of the eigenbasis. A
/// defective matrix yields numerically split eigenvalues at the scale of
/// `sqrt(machine epsilon)`, hence an eigenvector determinant of roughly
/// `1e-8`; the cutoff sits well above that and well below the `O(1)`
/// determinant of a healthy basis.
pub const DIAG_DET_CUTOFF: f64 = 1e-6;

/// Eigenvalue gap under which a 2x2 matrix is treated as having a double
/// eigenvalue for the Jordan root formula.
///
/// A Jordan block perturbed by `eps` splits its double eigenvalue by
/// `O(sqrt(eps))`, so near-defective matrices show gaps far above machine
/// epsilon; the cutoff sits at the same `sqrt(eps)`-ish scale as
/// [`DIAG_DET_CUTOFF`]. Matrices under it are routed to the explicit
/// scalar-plus-nilpotent root, whose error is the gap itself, instead of to
/// an eigenbasis that is collapsing.
pub const JORDAN_GAP_CUTOFF: f64 = 1e-6;

/// Maximum matrix dimension accepted by the eigensolver and everything that
/// relies on it. The crate targets small dense problems.
pub const MAX_EIGEN_DIM: usize = 8;

/// QR sweeps allowed per eigenvalue before the eigensolver reports
/// non-convergence.
pub const EIGEN_MAX_SWEEPS_PER_EIGENVALUE: usize = 40;

/// Retries of the random-combination simultaneous diagonalization before
/// giving up on a commuting family.
pub const ROOT_RETRY_CAP: usize = 16;

/// Scale helper: `max(1, m)` for a non-negative magnitude `m`.
#[inline]
pub fn scale_floor(m: f64) -> f64 {
    if m > 1.0 {
        m
    } else {
        1.0
    }
}
