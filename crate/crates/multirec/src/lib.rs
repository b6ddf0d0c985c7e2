//! Linear recurrences in several discrete time variables.
//!
//! A system on the lattice `Z^m` evolves a state vector `x(t)` of dimension
//! `n` by one matrix per lattice axis:
//!
//! ```text
//! x(t + 1_alpha) = A_alpha(t) x(t),    alpha = 1..m,
//! ```
//!
//! where `1_alpha` is the unit step along axis `alpha`. Such a system admits
//! a well defined solution through every initial point exactly when the
//! coefficients satisfy the compatibility condition
//!
//! ```text
//! A_alpha(t + 1_beta) A_beta(t) = A_beta(t + 1_alpha) A_alpha(t)
//! ```
//!
//! for every axis pair, which makes the propagation path independent. The
//! crate builds transition matrices from ordered coefficient products,
//! extracts monodromy operators of periodic systems, factors periodic systems
//! into Floquet normal form `x(t) = P(t) B_1^{t^1} ... B_m^{t^m} y`, and ships
//! the discrete multitime Samuelson-Hicks accelerator model as a worked
//! application.
//!
//! Module map:
//!
//! * [`lattice`]: multi-indices, the componentwise order, period vectors.
//! * [`matrix`]: dense complex matrices and scalar root/quadratic helpers.
//! * [`eigen`]: complex Schur form and eigendecomposition.
//! * [`engine`]: coefficient systems, compatibility checks, transition
//!   matrices, solving, synthesis of compatible systems.
//! * [`floquet`]: monodromy, commuting matrix roots, Floquet decompositions,
//!   multipliers.
//! * [`hicks`]: the multitime Samuelson-Hicks model, constant and periodic.
//! * [`doc`]: JSON document schemas for systems, models, and decompositions.

pub mod doc;
pub mod eigen;
pub mod engine;
mod error;
pub mod floquet;
pub mod hicks;
pub mod lattice;
pub mod matrix;
pub mod tol;

pub use eigen::{eigendecompose, Eigen};
pub use num_complex::Complex64;
pub use engine::{
    synthesize_compatible, CoefficientSystem, CompatibilityReport, CompatibilityViolation,
    OffsetTable, PeriodicTable,
};
pub use error::{Error, Result};
pub use floquet::{
    commuting_roots, decompose_multi, decompose_periodic, floquet_multipliers, monodromy_multi,
    monodromy_periodic, root_2x2_jordan, FloquetDecomposition, MonodromySet,
    PeriodicDecomposition, DEFAULT_SEED,
};
pub use hicks::{
    power_closed_form, HicksConstantParams, HicksMultipliers, HicksPeriodicParams, HicksState,
    Regime,
};
pub use lattice::{BoxIter, MultiIndex, PeriodVector};
pub use matrix::{principal_kth_root, quadratic_roots, CMatrix};
