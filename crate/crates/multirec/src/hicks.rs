//! The discrete multitime Samuelson-Hicks model.
//!
//! National income `Y` and consumption `C` evolve on `N^m` by the same rule
//! along every axis: consumption follows income with marginal propensity
//! `gamma`, and investment reacts to the change of income through the
//! accelerator-type coefficient `alpha`. In matrix form the state
//! `x = (Y, C)` obeys `x(t + 1_beta) = A x(t)` with
//!
//! ```text
//! A = [ gamma + alpha   -alpha / gamma ]
//!     [ gamma            0             ]
//! ```
//!
//! in the constant-parameter model. Because every axis carries the same
//! coefficient, a solution depends on `t` only through the level
//! `|t| = t^1 + ... + t^m`, and `x(t) = A^{|t|} x0`; powers of `A` have a
//! closed form in the roots of `r^2 - (gamma + alpha) r + alpha = 0`.
//!
//! The periodic variant lets both parameters vary along the level:
//! `gamma(t) = f(|t|)` and `alpha(t) = g(|t|)` with `f(k + T) = f(k)` and
//! `g(k + T) = g(k)` for `k >= 0`, which is exactly the shape compatibility
//! forces on a level-dependent model. The axis coefficient becomes
//!
//! ```text
//! A(k) = [ f(k) + g(k)   -g(k) / f(k-1) ]
//!        [ f(k)           0             ],
//! ```
//!
//! the solution collapses to the single-index recurrence
//! `z(k+1) = A(k) z(k)` with `x(t) = z(|t|)`, products
//! `C_p(k) = A(k+p-1) ... A(k)` propagate it, and the monodromy
//! `C~ = C_T(0)` carries the Floquet multipliers. The determinant identity
//! `det C~ = (f(T-1) / f(-1)) * g(0) ... g(T-1)` follows from
//! `det A(k) = f(k) g(k) / f(k-1)` telescoping, and gives an independent
//! check on the computed monodromy.
//!
//! `f(-1)` enters only through `A(0)` and is stored as its own datum: the
//! periodicity statement covers `k >= 0`, so nothing forces
//! `f(-1) = f(T-1)`. [`HicksPeriodicParams::fully_periodic`] opts into that
//! identification when the caller wants a genuinely periodic coefficient
//! field.

use crate::engine::CoefficientSystem;
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;
use crate::matrix::{quadratic_roots, CMatrix};
use crate::tol;
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Constant model parameters, both nonzero. Complex values are allowed;
/// the economic reading assumes `0 < gamma < 1` and positive `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct HicksConstantParams {
    gamma: Complex64,
    alpha: Complex64,
}

/// Informational classification of a real positive accelerator coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `0 < alpha < 1`.
    Decelerator,
    /// `alpha = 1`.
    Keeper,
    /// `alpha > 1`.
    Accelerator,
}

/// One model state: national income and consumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HicksState {
    pub income: Complex64,
    pub consumption: Complex64,
}

impl HicksState {
    /// True when both components are real and non-negative at roundoff
    /// scale. The model's economic reading assumes this; it is reported,
    /// never enforced.
    pub fn non_negative(&self) -> bool {
        let scale = tol::scale_floor(self.income.norm().max(self.consumption.norm()));
        let eps = tol::TOL_STRUCT * scale;
        self.income.im.abs() <= eps
            && self.consumption.im.abs() <= eps
            && self.income.re >= -eps
            && self.consumption.re >= -eps
    }
}

impl HicksConstantParams {
    pub fn new(gamma: Complex64, alpha: Complex64) -> Result<Self> {
        if gamma.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "the marginal propensity to consume must be nonzero".into(),
            ));
        }
        if alpha.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "the accelerator coefficient must be nonzero".into(),
            ));
        }
        Ok(HicksConstantParams { gamma, alpha })
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// The coefficient matrix `A` of the double recurrence.
    pub fn matrix(&self) -> CMatrix {
        let zero = Complex64::new(0.0, 0.0);
        CMatrix::from_rows(vec![
            vec![self.gamma + self.alpha, -self.alpha / self.gamma],
            vec![self.gamma, zero],
        ])
        .expect("2x2 shape")
    }

    /// Roots of the characteristic polynomial
    /// `r^2 - (gamma + alpha) r + alpha`, which are the eigenvalues of the
    /// coefficient matrix.
    pub fn characteristic_roots(&self) -> (Complex64, Complex64) {
        quadratic_roots(self.gamma + self.alpha, self.alpha)
    }

    /// Regime of a real positive accelerator; `None` when the coefficient
    /// is complex or non-positive. Informational only.
    pub fn regime(&self) -> Option<Regime> {
        if self.alpha.im != 0.0 || self.alpha.re <= 0.0 {
            return None;
        }
        Some(if self.alpha.re < 1.0 {
            Regime::Decelerator
        } else if self.alpha.re == 1.0 {
            Regime::Keeper
        } else {
            Regime::Accelerator
        })
    }

    /// Solution `x(t) = A^{|t|} x0` for `t >= 0`; the state depends on `t`
    /// only through the level.
    pub fn solve(&self, income0: Complex64, consumption0: Complex64, t: &MultiIndex) -> Result<HicksState> {
        if t.coords().iter().any(|&c| c < 0) {
            return Err(Error::OutsideDomain {
                t: t.clone(),
                reason: "the model domain is t >= 0".into(),
            });
        }
        let k = u32::try_from(t.total())
            .map_err(|_| Error::InvalidParameter(format!("level |t| = {} too large", t.total())))?;
        let power = power_closed_form(&self.matrix(), k)?;
        let x = power.mul_vector(&[income0, consumption0])?;
        Ok(HicksState {
            income: x[0],
            consumption: x[1],
        })
    }
}

/// Closed-form power of a 2x2 matrix through its characteristic roots.
///
/// With distinct roots `r1 != r2` of `r^2 - (tr A) r + det A`,
///
/// ```text
/// A^k = (r2^k - r1^k) / (r2 - r1) * A + (r2 r1^k - r1 r2^k) / (r2 - r1) * I,
/// ```
///
/// and in the confluent case `r1 = r2 = r`,
///
/// ```text
/// A^k = k r^{k-1} A - (k-1) r^k I.
/// ```
///
/// The branch switches on `|r1 - r2| <= TOL_ROOT_GAP * max(1, |r1|, |r2|)`;
/// near-degenerate root pairs route to the confluent formula with the mean
/// root, where the distinct-root expression loses precision to
/// cancellation.
pub fn power_closed_form(a: &CMatrix, k: u32) -> Result<CMatrix> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "the closed-form power applies to 2x2 matrices, got dimension {}",
            a.dim()
        )));
    }
    if k == 0 {
        return CMatrix::identity(2);
    }
    let (r1, r2) = quadratic_roots(a.trace(), a.determinant());
    let scale = tol::scale_floor(r1.norm().max(r2.norm()));
    let id = CMatrix::identity(2)?;
    if (r1 - r2).norm() <= tol::TOL_ROOT_GAP * scale {
        let r = (r1 + r2).unscale(2.0);
        let kc = Complex64::new(f64::from(k), 0.0);
        let coeff_a = kc * r.powu(k - 1);
        let coeff_i = (kc - ONE) * r.powu(k);
        Ok(a.scale(coeff_a).sub(&id.scale(coeff_i)))
    } else {
        let denom = r2 - r1;
        let coeff_a = (r2.powu(k) - r1.powu(k)) / denom;
        let coeff_i = (r2 * r1.powu(k) - r1 * r2.powu(k)) / denom;
        Ok(a.scale(coeff_a).add(&id.scale(coeff_i)))
    }
}

/// Level-periodic model parameters: `f` carries the marginal propensity to
/// consume along the level, `g` the accelerator coefficient, both with
/// period `T = f.len()` for levels `k >= 0`, plus the separate datum
/// `f(-1)` feeding `A(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HicksPeriodicParams {
    f_minus1: Complex64,
    f: Vec<Complex64>,
    g: Vec<Complex64>,
}

impl HicksPeriodicParams {
    /// Validates `|f| > 0` everywhere (including `f(-1)`) and
    /// `f(k) + g(k)` away from `0` and `1`, the degenerate parameter sets
    /// of the model.
    pub fn new(f_minus1: Complex64, f: Vec<Complex64>, g: Vec<Complex64>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidParameter(
                "the parameter sequences need at least one entry".into(),
            ));
        }
        if f.len() != g.len() {
            return Err(Error::InvalidParameter(format!(
                "parameter sequences of different lengths: {} and {}",
                f.len(),
                g.len()
            )));
        }
        if f_minus1.norm() == 0.0 {
            return Err(Error::InvalidParameter("f(-1) must be nonzero".into()));
        }
        for (k, value) in f.iter().enumerate() {
            if value.norm() == 0.0 {
                return Err(Error::InvalidParameter(format!("f({k}) must be nonzero")));
            }
        }
        for (k, (fk, gk)) in f.iter().zip(&g).enumerate() {
            let sum = fk + gk;
            if sum.norm() == 0.0 || (sum - ONE).norm() == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "f({k}) + g({k}) must avoid 0 and 1, got {sum}"
                )));
            }
        }
        Ok(HicksPeriodicParams { f_minus1, f, g })
    }

    /// Constant parameters as a one-periodic sequence, `f(-1) = gamma`.
    pub fn constant(p: &HicksConstantParams) -> Self {
        HicksPeriodicParams {
            f_minus1: p.gamma(),
            f: vec![p.gamma()],
            g: vec![p.alpha()],
        }
    }

    /// The fully periodic extension: `f(-1) = f(T-1)`, so the coefficient
    /// field is genuinely `T`-periodic on the whole level range.
    pub fn fully_periodic(f: Vec<Complex64>, g: Vec<Complex64>) -> Result<Self> {
        let last = *f
            .last()
            .ok_or_else(|| Error::InvalidParameter("the parameter sequences need at least one entry".into()))?;
        Self::new(last, f, g)
    }

    pub fn period(&self) -> usize {
        self.f.len()
    }

    /// `f(k)` for `k >= -1`; levels `k >= 0` wrap modulo the period.
    pub fn f(&self, k: i64) -> Complex64 {
        assert!(k >= -1, "f is defined on k >= -1");
        if k == -1 {
            self.f_minus1
        } else {
            self.f[(k as usize) % self.f.len()]
        }
    }

    /// `g(k)` for `k >= 0`, wrapping modulo the period.
    pub fn g(&self, k: i64) -> Complex64 {
        assert!(k >= 0, "g is defined on k >= 0");
        self.g[(k as usize) % self.g.len()]
    }

    /// True when `f(-1) = f(T-1)`, i.e. the stored data describe a
    /// coefficient field that is `T`-periodic without the initial seam.
    pub fn is_fully_periodic(&self) -> bool {
        let last = self.f[self.f.len() - 1];
        (self.f_minus1 - last).norm()
            <= tol::TOL_STRUCT * tol::scale_floor(last.norm().max(self.f_minus1.norm()))
    }

    /// The level coefficient
    /// `A(k) = [[f(k) + g(k), -g(k)/f(k-1)], [f(k), 0]]`; every axis of the
    /// multitime system evaluates to `A(|t|)`.
    pub fn matrix_at(&self, k: i64) -> Result<CMatrix> {
        if k < 0 {
            return Err(Error::InvalidParameter(format!(
                "the level coefficient is defined for k >= 0, got {k}"
            )));
        }
        let fk = self.f(k);
        let gk = self.g(k);
        let f_prev = self.f(k - 1);
        let zero = Complex64::new(0.0, 0.0);
        CMatrix::from_rows(vec![vec![fk + gk, -gk / f_prev], vec![fk, zero]])
    }

    /// The multitime system with `A_beta(t) = A(|t|)` on every axis and
    /// `t0 = 0`. Compatible by construction: both crossed products equal
    /// `A(|t| + 1) A(|t|)`.
    pub fn system(&self, m: usize) -> Result<CoefficientSystem> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "the system needs at least one axis".into(),
            ));
        }
        CoefficientSystem::hicks(self.clone(), m)
    }

    /// Ordered product `C_p(k) = A(k+p-1) ... A(k+1) A(k)`; `C_0(k) = I`.
    /// `z(k) = C_k(0) z0` solves the level recurrence.
    pub fn c_product(&self, p: u32, k: i64) -> Result<CMatrix> {
        if k < 0 {
            return Err(Error::InvalidParameter(format!(
                "the level products start at k >= 0, got {k}"
            )));
        }
        let mut acc = CMatrix::identity(2)?;
        for i in 0..i64::from(p) {
            acc = &self.matrix_at(k + i)? * &acc;
        }
        Ok(acc)
    }

    /// Solution `x(t) = z(|t|) = C_{|t|}(0) x0` for `t >= 0`: the multitime
    /// evolution collapses onto the diagonal level recurrence.
    pub fn solve(&self, x0: (Complex64, Complex64), t: &MultiIndex) -> Result<HicksState> {
        if t.coords().iter().any(|&c| c < 0) {
            return Err(Error::OutsideDomain {
                t: t.clone(),
                reason: "the model domain is t >= 0".into(),
            });
        }
        let level = u32::try_from(t.total())
            .map_err(|_| Error::InvalidParameter(format!("level |t| = {} too large", t.total())))?;
        let x = self.c_product(level, 0)?.mul_vector(&[x0.0, x0.1])?;
        Ok(HicksState {
            income: x[0],
            consumption: x[1],
        })
    }

    /// The monodromy `C~ = C_T(0) = A(T-1) ... A(0)` over one level period.
    /// Requires every `A(k)` invertible, i.e. `g(k) != 0`.
    pub fn monodromy(&self) -> Result<CMatrix> {
        for (k, gk) in self.g.iter().enumerate() {
            if gk.norm() == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "A({k}) is singular: the monodromy needs g({k}) != 0"
                )));
            }
        }
        let mono = self.c_product(self.period() as u32, 0)?;
        if !mono.is_invertible() {
            return Err(Error::SingularMatrix {
                det_abs: mono.determinant().norm(),
                cutoff: mono.singularity_cutoff(),
            });
        }
        Ok(mono)
    }

    /// Determinant of the monodromy by the telescoping identity
    /// `det C~ = (f(T-1) / f(-1)) * g(0) ... g(T-1)`.
    pub fn monodromy_determinant_identity(&self) -> Complex64 {
        let t = self.period() as i64;
        let mut det = self.f(t - 1) / self.f_minus1;
        for gk in &self.g {
            det *= gk;
        }
        det
    }

    /// Floquet multipliers: the roots of
    /// `lambda^2 - (tr C~) lambda + det C~ = 0`, with the determinant
    /// cross-checked against the closed-form identity.
    pub fn multipliers(&self) -> Result<HicksMultipliers> {
        let mono = self.monodromy()?;
        let trace = mono.trace();
        let det = mono.determinant();
        let (lambda1, lambda2) = quadratic_roots(trace, det);
        let det_identity = self.monodromy_determinant_identity();
        let residual = (det - det_identity).norm() / tol::scale_floor(det.norm());
        Ok(HicksMultipliers {
            lambda1,
            lambda2,
            trace_monodromy: trace,
            det_monodromy: det,
            det_identity,
            det_identity_residual: residual,
        })
    }
}

/// Floquet multipliers of the periodic model with the determinant
/// cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct HicksMultipliers {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub trace_monodromy: Complex64,
    pub det_monodromy: Complex64,
    /// `(f(T-1) / f(-1)) * g(0) ... g(T-1)`.
    pub det_identity: Complex64,
    /// `|det C~ - identity| / max(1, |det C~|)`.
    pub det_identity_residual: f64,
}
