//! Floquet theory for periodic recurrences on the lattice.
//!
//! For a compatible system whose coefficients repeat along the axes,
//! `A_alpha(t + T_beta 1_beta) = A_alpha(t)` for every axis `beta` with
//! `T_beta >= 1`, the fundamental solution `Phi(t) = chi(t, t0)` factors as
//!
//! ```text
//! Phi(t) = P(t) B_1^{t^1} B_2^{t^2} ... B_m^{t^m},
//! ```
//!
//! with constant pairwise-commuting factors `B_alpha` and a factor `P(t)`
//! that repeats with the same periods. The substitution `x(t) = P(t) y(t)`
//! then turns the original recurrence into the constant-coefficient one
//! `y(t + 1_alpha) = B_alpha y(t)`: all growth information lives in the
//! `B_alpha`, all shape information in `P`.
//!
//! The factors come from the monodromies `C_alpha = C_{alpha, T_alpha}(t0)`,
//! the products of one full period of coefficients along each axis. Each
//! `B_alpha` is a `T_alpha`-th root of `C_alpha`, and the whole construction
//! stands or falls with one question: can the roots be chosen to commute?
//! [`commuting_roots`] answers it for the two cases where an answer is
//! known, simultaneously diagonalizable families (common eigenbasis, take
//! principal eigenvalue roots) and arbitrary commuting families of 2x2
//! matrices (a defective member forces the form `z I + w P_1` on the whole
//! family, which has explicit commuting roots). For a defective family in
//! dimension three or more, no general construction is known; that case is
//! reported as [`Error::RootExtractionUnsupported`] rather than guessed at.
//!
//! Axes with `T_alpha = 0` carry no periodicity claim. Their factor is
//! fixed to `B_alpha = I`, so `P` absorbs the full variation along them and
//! is stored only over a finite depth of such axes.
//!
//! A coarser factorization needs just one period vector `T` with
//! `A_alpha(t + T) = A_alpha(t)`: then `Phi(t) = P(t) B^{|t|}` with a single
//! factor `B` satisfying `B^{|T|} = chi(t0 + T, t0)` and `P` periodic under
//! the shift by `T`. This is the form that matches level-driven models,
//! where the coefficients depend on `t` only through `|t|`.
//!
//! The Floquet multipliers, the eigenvalues of a monodromy, are exposed by
//! [`floquet_multipliers`]; for 2x2 monodromies they are computed exactly
//! from the trace and determinant.

use crate::eigen::eigendecompose;
use crate::engine::{CoefficientSystem, OffsetTable};
use crate::error::{Error, Result};
use crate::lattice::{BoxIter, MultiIndex, PeriodVector};
use crate::matrix::{principal_kth_root, quadratic_roots, rel_scale2, CMatrix};
use crate::tol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed of the random-combination eigenbasis search when the caller does
/// not supply one. Any fixed value works; fixing it makes decompositions
/// reproducible run to run.
pub const DEFAULT_SEED: u64 = 0x6d75_6c74_6972_6563;

/// How many values of `P` are stored along an axis without a period claim.
const FREE_AXIS_DEPTH: usize = 2;

/// The per-axis monodromies `C_alpha = C_{alpha, T_alpha}(t0)` of a
/// multi-periodic system; axes without a period claim hold the identity.
#[derive(Debug, Clone)]
pub struct MonodromySet {
    t0: MultiIndex,
    periods: PeriodVector,
    matrices: Vec<CMatrix>,
    commutation_residual: f64,
}

impl MonodromySet {
    pub fn base_point(&self) -> &MultiIndex {
        &self.t0
    }

    pub fn periods(&self) -> &PeriodVector {
        &self.periods
    }

    /// Monodromy along `axis` (0-based); identity for free axes.
    pub fn matrix(&self, axis: usize) -> &CMatrix {
        &self.matrices[axis]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// Worst pairwise commutator norm observed during verification.
    pub fn commutation_residual(&self) -> f64 {
        self.commutation_residual
    }
}

/// Largest pairwise commutator among `mats`, after failing on any pair
/// whose commutator exceeds `tol` at the pair's scale.
fn check_pairwise_commutation(mats: &[CMatrix], tol: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, left) in mats.iter().enumerate() {
        for right in mats.iter().skip(a + 1) {
            let residual = left.commutator_norm(right);
            let scale = rel_scale2(left, right);
            let bound = tol * scale * scale;
            if residual > bound {
                return Err(Error::NonCommuting {
                    residual,
                    tol: bound,
                });
            }
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

/// Checks `A_alpha(t + T_beta 1_beta) = A_alpha(t)` for every claimed
/// period over one fundamental box anchored at the base point.
fn verify_axis_periods(sys: &CoefficientSystem, periods: &PeriodVector) -> Result<()> {
    let t0 = sys.base_point();
    let extents: Vec<i64> = periods.extents().iter().map(|&e| e as i64).collect();
    for offset in BoxIter::new(&extents)? {
        let t = t0.add(&MultiIndex::new(offset)?)?;
        for beta in periods.periodic_axes() {
            let shifted = t.step(beta, i64::from(periods.get(beta)))?;
            for alpha in 0..sys.num_axes() {
                let here = sys.coefficient(alpha, &t)?;
                let there = sys.coefficient(alpha, &shifted)?;
                let residual = here.max_diff(&there);
                if residual > tol::TOL_COMPAT * rel_scale2(&here, &there) {
                    return Err(Error::PeriodicityViolation {
                        axis: beta,
                        at: t,
                        residual,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Locates a singular coefficient along one axis period starting at `t0`,
/// for a sharper error than "the product is singular".
fn singular_coefficient_along(
    sys: &CoefficientSystem,
    axis: usize,
    steps: u32,
    product: &CMatrix,
) -> Error {
    let t0 = sys.base_point();
    for i in 0..i64::from(steps) {
        if let Ok(t) = t0.step(axis, i) {
            if let Ok(a) = sys.coefficient(axis, &t) {
                if !a.is_invertible() {
                    return Error::SingularCoefficient { axis, at: t };
                }
            }
        }
    }
    Error::SingularMatrix {
        det_abs: product.determinant().norm(),
        cutoff: product.singularity_cutoff(),
    }
}

/// Per-axis monodromies of a multi-periodic system.
///
/// Verifies the claimed periods on a fundamental box, forms each
/// `C_alpha = C_{alpha, T_alpha}(t0)` (identity on free axes), and checks
/// that the results are invertible and pairwise commute; on a compatible
/// multi-periodic system the commutation is automatic, so a failure here
/// almost always means the periods do not match the coefficients.
pub fn monodromy_multi(sys: &CoefficientSystem, periods: &PeriodVector) -> Result<MonodromySet> {
    if periods.dim() != sys.num_axes() {
        return Err(Error::DimensionMismatch(format!(
            "system with {} axes, period vector with {}",
            sys.num_axes(),
            periods.dim()
        )));
    }
    verify_axis_periods(sys, periods)?;

    let t0 = sys.base_point().clone();
    let n = sys.state_dim();
    let mut matrices = Vec::with_capacity(periods.dim());
    for axis in 0..periods.dim() {
        let steps = periods.get(axis);
        let mono = if steps == 0 {
            CMatrix::identity(n)?
        } else {
            sys.c_product(axis, steps, &t0)?
        };
        if !mono.is_invertible() {
            return Err(singular_coefficient_along(sys, axis, steps, &mono));
        }
        matrices.push(mono);
    }
    let commutation_residual = check_pairwise_commutation(&matrices, tol::TOL_COMPAT)?;
    Ok(MonodromySet {
        t0,
        periods: periods.clone(),
        matrices,
        commutation_residual,
    })
}

/// The double eigenvalue and nilpotent part of a defective 2x2 matrix.
fn defective_2x2(p: &CMatrix) -> Option<(Complex64, CMatrix)> {
    debug_assert_eq!(p.dim(), 2);
    let (r1, r2) = quadratic_roots(p.trace(), p.determinant());
    if (r1 - r2).norm() > tol::JORDAN_GAP_CUTOFF * tol::scale_floor(r1.norm().max(r2.norm())) {
        return None;
    }
    let lambda = (r1 + r2).unscale(2.0);
    let id = CMatrix::identity(2).ok()?;
    let nilpotent = p.sub(&id.scale(lambda));
    if nilpotent.max_norm() <= tol::TOL_STRUCT * tol::scale_floor(p.max_norm()) {
        return None;
    }
    Some((lambda, nilpotent))
}

/// k-th root of a defective (non-diagonalizable) invertible 2x2 matrix.
///
/// Writing `P = lambda I + S` with `S^2 = 0`, the matrix
/// `Q = u I + v S` with `u^k = lambda` and `v = 1 / (k u^{k-1})` satisfies
/// `Q^k = u^k I + k u^{k-1} v S = P`; `u` is taken on the principal branch.
pub fn root_2x2_jordan(p: &CMatrix, k: u32) -> Result<CMatrix> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "the Jordan root formula applies to 2x2 matrices, got dimension {}",
            p.dim()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("root exponent must be positive".into()));
    }
    if !p.is_invertible() {
        return Err(Error::SingularMatrix {
            det_abs: p.determinant().norm(),
            cutoff: p.singularity_cutoff(),
        });
    }
    let (lambda, nilpotent) = defective_2x2(p).ok_or(Error::NotDefective)?;
    let u = principal_kth_root(lambda, k);
    let v = Complex64::new(1.0, 0.0) / (Complex64::new(f64::from(k), 0.0) * u.powu(k - 1));
    Ok(CMatrix::identity(2)?.scale(u).add(&nilpotent.scale(v)))
}

/// Unit-magnitude random coefficient, scaled down by the member's norm so
/// no single matrix dominates the combination.
fn combination_weight(rng: &mut ChaCha8Rng, member: &CMatrix) -> Complex64 {
    let angle = std::f64::consts::TAU * rng.gen::<f64>();
    Complex64::from_polar(1.0, angle).unscale(tol::scale_floor(member.max_norm()))
}

/// Common eigenbasis of a commuting family, found through a random linear
/// combination: for generic weights the combination has the family's joint
/// eigenspaces as its own, so its eigenbasis diagonalizes every member.
/// Unlucky draws are retried with fresh weights.
fn simultaneous_eigenbasis(family: &[CMatrix], seed: u64) -> Result<CMatrix> {
    if family.len() == 1 {
        let e = eigendecompose(&family[0])?;
        if e.is_diagonalizable {
            return Ok(e.vectors);
        }
        return Err(Error::SimultaneousDiagonalizationFailed {
            retries: 0,
            reason: "the matrix is defective".into(),
        });
    }
    let n = family[0].dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reason = String::new();
    for _ in 0..tol::ROOT_RETRY_CAP {
        let mut combo = CMatrix::zeros(n)?;
        for member in family {
            combo = combo.add(&member.scale(combination_weight(&mut rng, member)));
        }
        let eig = match eigendecompose(&combo) {
            Ok(e) => e,
            Err(err) => {
                reason = format!("eigendecomposition of the combination failed: {err}");
                continue;
            }
        };
        if !eig.is_diagonalizable {
            reason = "the random combination came out defective".into();
            continue;
        }
        let v = eig.vectors;
        let vinv = match v.inverse() {
            Ok(inv) => inv,
            Err(err) => {
                reason = format!("combination eigenbasis is numerically singular: {err}");
                continue;
            }
        };
        let mut basis_works = true;
        for (idx, member) in family.iter().enumerate() {
            let d = &(&vinv * member) * &v;
            let mut off = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off = off.max(d.get(i, j).norm());
                    }
                }
            }
            if off > tol::TOL_EIG * tol::scale_floor(member.max_norm()) {
                reason = format!(
                    "combination eigenbasis leaves member {} non-diagonal (off-diagonal {off:.3e})",
                    idx + 1
                );
                basis_works = false;
                break;
            }
        }
        if basis_works {
            return Ok(v);
        }
    }
    Err(Error::SimultaneousDiagonalizationFailed {
        retries: tol::ROOT_RETRY_CAP,
        reason,
    })
}

/// Roots of a simultaneously diagonalizable family: map everything to the
/// common eigenbasis, take principal roots on the diagonal, map back.
/// Members with exponent 1 are returned unchanged.
fn diagonalizable_roots(family: &[CMatrix], k: &[u32], seed: u64) -> Result<Vec<CMatrix>> {
    let v = simultaneous_eigenbasis(family, seed)?;
    let vinv = v.inverse()?;
    let n = family[0].dim();
    family
        .iter()
        .zip(k)
        .map(|(p, &exponent)| {
            if exponent == 1 {
                return Ok(p.clone());
            }
            let d = &(&vinv * p) * &v;
            let root_diag = CMatrix::from_fn(n, |i, j| {
                if i == j {
                    principal_kth_root(d.get(i, i), exponent)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })?;
            Ok(&(&v * &root_diag) * &vinv)
        })
        .collect()
}

/// Roots of a commuting 2x2 family containing a defective member: every
/// member is then `mu I + c S` for the pivot's nilpotent part `S`, and
/// `Q = u I + (c / (k u^{k-1})) S` with `u^k = mu` is a k-th root. Roots of
/// this form commute among themselves by construction.
fn jordan_family_roots(family: &[CMatrix], k: &[u32], pivot: usize) -> Result<Vec<CMatrix>> {
    let (_, s) = defective_2x2(&family[pivot]).expect("pivot was classified defective");
    let (mut si, mut sj, mut s_max) = (0usize, 0usize, 0.0f64);
    for i in 0..2 {
        for j in 0..2 {
            if s.get(i, j).norm() > s_max {
                s_max = s.get(i, j).norm();
                (si, sj) = (i, j);
            }
        }
    }
    let id = CMatrix::identity(2)?;
    family
        .iter()
        .zip(k)
        .map(|(p, &exponent)| {
            if exponent == 1 {
                return Ok(p.clone());
            }
            let mu = p.trace().unscale(2.0);
            let rest = p.sub(&id.scale(mu));
            let c = rest.get(si, sj) / s.get(si, sj);
            let residual = rest.sub(&s.scale(c)).max_norm();
            let bound = tol::TOL_COMPAT * tol::scale_floor(p.max_norm().max(s.max_norm()));
            if residual > bound {
                return Err(Error::DecompositionInvariant {
                    invariant: "a 2x2 matrix commuting with a defective one is scalar plus a multiple of its nilpotent part".into(),
                    residual,
                    tol: bound,
                });
            }
            let u = principal_kth_root(mu, exponent);
            let v = c / (Complex64::new(f64::from(exponent), 0.0) * u.powu(exponent - 1));
            Ok(id.scale(u).add(&s.scale(v)))
        })
        .collect()
}

/// Pairwise-commuting `k_alpha`-th roots `Q_alpha` of a pairwise-commuting
/// invertible family `P_alpha`.
///
/// Three routes, checked in order:
/// exponent-1 members are returned bit-identical; a simultaneously
/// diagonalizable family goes through a common eigenbasis with principal
/// eigenvalue roots; a 2x2 family with a defective member uses the explicit
/// scalar-plus-nilpotent formula. A defective family in dimension >= 3 is
/// refused with [`Error::RootExtractionUnsupported`]: no construction is
/// known there, and whether commuting roots always exist is open.
///
/// The returned roots are verified (`Q_alpha^{k_alpha} = P_alpha` and
/// pairwise commutation) before being handed back; `seed` drives only the
/// random eigenbasis search, so equal seeds give identical results.
pub fn commuting_roots(family: &[CMatrix], k: &[u32], seed: u64) -> Result<Vec<CMatrix>> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty matrix family".into()));
    }
    if family.len() != k.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices but {} root exponents",
            family.len(),
            k.len()
        )));
    }
    if k.iter().any(|&exp| exp == 0) {
        return Err(Error::InvalidParameter("root exponents must be positive".into()));
    }
    let n = family[0].dim();
    if family.iter().any(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch(
            "family members have different dimensions".into(),
        ));
    }
    for p in family {
        if !p.is_invertible() {
            return Err(Error::SingularMatrix {
                det_abs: p.determinant().norm(),
                cutoff: p.singularity_cutoff(),
            });
        }
    }
    check_pairwise_commutation(family, tol::TOL_COMPAT)?;

    let roots = if k.iter().all(|&exp| exp == 1) {
        family.to_vec()
    } else if n == 2 {
        match family.iter().position(|p| defective_2x2(p).is_some()) {
            Some(pivot) => jordan_family_roots(family, k, pivot)?,
            None => diagonalizable_roots(family, k, seed)?,
        }
    } else {
        for p in family {
            if !eigendecompose(p)?.is_diagonalizable {
                return Err(Error::RootExtractionUnsupported { n });
            }
        }
        diagonalizable_roots(family, k, seed)?
    };

    for ((p, q), &exponent) in family.iter().zip(&roots).zip(k) {
        let residual = q.power(i64::from(exponent))?.max_diff(p);
        let bound = tol::TOL_ROOT_RESIDUAL * tol::scale_floor(p.max_norm());
        if residual > bound {
            return Err(Error::DecompositionInvariant {
                invariant: "Q^k = P".into(),
                residual,
                tol: bound,
            });
        }
    }
    check_pairwise_commutation(&roots, tol::TOL_ROOT_RESIDUAL)?;
    Ok(roots)
}

/// The Floquet factorization `Phi(t) = P(t) B_1^{t^1} ... B_m^{t^m}` of a
/// multi-periodic system.
///
/// `P` is tabulated over a verification box of two periods per axis
/// (anchored at the base point) and extended by periodicity on demand;
/// along free axes only [`FREE_AXIS_DEPTH`] extra values exist, since no
/// periodicity claim covers them.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    t0: MultiIndex,
    periods: PeriodVector,
    b: Vec<CMatrix>,
    p_box: OffsetTable,
}

impl FloquetDecomposition {
    pub fn base_point(&self) -> &MultiIndex {
        &self.t0
    }

    pub fn periods(&self) -> &PeriodVector {
        &self.periods
    }

    /// The constant factors `B_alpha`, identity on free axes.
    pub fn factors(&self) -> &[CMatrix] {
        &self.b
    }

    /// Raw stored values of `P` (verification box included), offsets
    /// relative to the base point.
    pub fn p_stored(&self) -> &OffsetTable {
        &self.p_box
    }

    /// `P(t)`, reducing periodic axes modulo their period. Free-axis
    /// offsets beyond the stored depth are refused: nothing determines `P`
    /// there.
    pub fn p_at(&self, t: &MultiIndex) -> Result<CMatrix> {
        let rel = t.sub(&self.t0)?;
        let mut offsets = Vec::with_capacity(rel.dim());
        for axis in 0..rel.dim() {
            let o = rel.get(axis);
            if o < 0 {
                return Err(Error::OutsideDomain {
                    t: t.clone(),
                    reason: "the decomposition lives on t >= t0".into(),
                });
            }
            let period = i64::from(self.periods.get(axis));
            if period >= 1 {
                offsets.push((o % period) as usize);
            } else {
                let depth = self.p_box.extents()[axis] - 1;
                if o as usize > depth {
                    return Err(Error::OutsideDomain {
                        t: t.clone(),
                        reason: format!(
                            "axis {} carries no period; P is stored up to offset {depth} there",
                            axis + 1
                        ),
                    });
                }
                offsets.push(o as usize);
            }
        }
        Ok(self.p_box.get(&offsets).clone())
    }

    /// `B_1^{t^1} ... B_m^{t^m}` at the absolute coordinates of `t`.
    pub fn factor_power(&self, t: &MultiIndex) -> Result<CMatrix> {
        if t.dim() != self.t0.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {}, decomposition of dimension {}",
                t.dim(),
                self.t0.dim()
            )));
        }
        let mut acc = CMatrix::identity(self.p_box.matrix_dim())?;
        for (axis, factor) in self.b.iter().enumerate() {
            acc = &acc * &factor.power(t.get(axis))?;
        }
        Ok(acc)
    }

    /// The fundamental solution `Phi(t) = P(t) B_1^{t^1} ... B_m^{t^m}`.
    pub fn reconstruct(&self, t: &MultiIndex) -> Result<CMatrix> {
        Ok(&self.p_at(t)? * &self.factor_power(t)?)
    }

    /// Substitution `x(t) = P(t) y(t)`: maps a solution of the constant
    /// system `y(t + 1_alpha) = B_alpha y(t)` to one of the original.
    pub fn lift(&self, y: &[Complex64], t: &MultiIndex) -> Result<Vec<Complex64>> {
        self.p_at(t)?.mul_vector(y)
    }

    /// Inverse substitution `y(t) = P(t)^{-1} x(t)`.
    pub fn reduce(&self, x: &[Complex64], t: &MultiIndex) -> Result<Vec<Complex64>> {
        self.p_at(t)?.inverse()?.mul_vector(x)
    }
}

/// Applies the factorization invariants to freshly computed data and
/// reports the first violation.
fn verify_periodic_table(
    p_values: &OffsetTable,
    pairs: impl Iterator<Item = (Vec<usize>, Vec<usize>)>,
    invariant: &str,
) -> Result<()> {
    for (at, shifted) in pairs {
        let here = p_values.get(&at);
        let there = p_values.get(&shifted);
        let residual = here.max_diff(there);
        let bound = tol::TOL_ROOT_RESIDUAL * rel_scale2(here, there);
        if residual > bound {
            return Err(Error::DecompositionInvariant {
                invariant: invariant.into(),
                residual,
                tol: bound,
            });
        }
    }
    Ok(())
}

fn verify_invertible_table(p_values: &OffsetTable) -> Result<()> {
    for (_, value) in p_values.iter() {
        if !value.is_invertible() {
            return Err(Error::DecompositionInvariant {
                invariant: "every P(t) is invertible".into(),
                residual: value.determinant().norm(),
                tol: value.singularity_cutoff(),
            });
        }
    }
    Ok(())
}

/// Floquet decomposition of a multi-periodic system.
///
/// Computes the monodromies, extracts commuting `T_alpha`-th roots
/// `B_alpha` (identity on free axes), tabulates
/// `P(t) = Phi(t) B_m^{-t^m} ... B_1^{-t^1}` over a two-period
/// verification box, and checks every claimed invariant on that box:
/// `B_alpha^{T_alpha} = C_alpha`, periodicity of `P`, invertibility of
/// every `P(t)`, and the reconstruction `Phi(t) = P(t) prod B^{t^alpha}`.
/// Failures abort with the violated invariant rather than returning a
/// decomposition that does not decompose.
pub fn decompose_multi(
    sys: &CoefficientSystem,
    periods: &PeriodVector,
    seed: u64,
) -> Result<FloquetDecomposition> {
    let mono = monodromy_multi(sys, periods)?;
    let t0 = sys.base_point().clone();

    let periodic: Vec<usize> = periods.periodic_axes().collect();
    let family: Vec<CMatrix> = periodic.iter().map(|&a| mono.matrix(a).clone()).collect();
    let exponents: Vec<u32> = periodic.iter().map(|&a| periods.get(a)).collect();
    let roots = commuting_roots(&family, &exponents, seed)?;

    let n = sys.state_dim();
    let mut b = vec![CMatrix::identity(n)?; periods.dim()];
    for (slot, root) in periodic.iter().zip(roots) {
        b[*slot] = root;
    }

    // Two periods per periodic axis, a fixed depth along free axes.
    let counts: Vec<usize> = (0..periods.dim())
        .map(|axis| {
            let p = periods.get(axis) as usize;
            if p >= 1 {
                2 * p + 1
            } else {
                FREE_AXIS_DEPTH + 1
            }
        })
        .collect();

    let p_box = OffsetTable::from_fn(counts.clone(), |offset| {
        let rel: Vec<i64> = offset.iter().map(|&o| o as i64).collect();
        let t = t0.add(&MultiIndex::new(rel)?)?;
        let mut value = sys.transition(&t, &t0)?;
        for (axis, factor) in b.iter().enumerate() {
            value = &value * &factor.power(-t.get(axis))?;
        }
        Ok(value)
    })?;

    for (axis, &count) in counts.iter().enumerate() {
        let p = periods.get(axis) as usize;
        if p == 0 {
            continue;
        }
        let pairs = BoxIter::new(
            &counts
                .iter()
                .map(|&cnt| cnt as i64 - 1)
                .collect::<Vec<_>>(),
        )?
        .filter(move |offset| offset[axis] as usize + p < count)
        .map(move |offset| {
            let mut shifted: Vec<usize> = offset.iter().map(|&o| o as usize).collect();
            shifted[axis] += p;
            (offset.iter().map(|&o| o as usize).collect(), shifted)
        });
        verify_periodic_table(&p_box, pairs, "P(t + T_alpha 1_alpha) = P(t)")?;
    }
    verify_invertible_table(&p_box)?;

    for (axis, factor) in b.iter().enumerate() {
        let steps = periods.get(axis);
        if steps == 0 {
            continue;
        }
        let residual = factor.power(i64::from(steps))?.max_diff(mono.matrix(axis));
        let bound = tol::TOL_ROOT_RESIDUAL * tol::scale_floor(mono.matrix(axis).max_norm());
        if residual > bound {
            return Err(Error::DecompositionInvariant {
                invariant: "B_alpha^{T_alpha} equals the monodromy".into(),
                residual,
                tol: bound,
            });
        }
    }

    let dec = FloquetDecomposition {
        t0: t0.clone(),
        periods: periods.clone(),
        b,
        p_box,
    };
    for (offset, stored) in dec.p_box.iter() {
        let rel: Vec<i64> = offset.iter().map(|&o| o as i64).collect();
        let t = t0.add(&MultiIndex::new(rel)?)?;
        let phi = sys.transition(&t, &t0)?;
        let rebuilt = stored * &dec.factor_power(&t)?;
        let residual = rebuilt.max_diff(&phi);
        let bound = tol::TOL_ROOT_RESIDUAL * rel_scale2(&rebuilt, &phi);
        if residual > bound {
            return Err(Error::DecompositionInvariant {
                invariant: "Phi(t) = P(t) B_1^{t^1} ... B_m^{t^m}".into(),
                residual,
                tol: bound,
            });
        }
    }
    Ok(dec)
}

/// Transition matrix computed by stepping unit moves along a monotone
/// staircase, one axis after another. On a compatible system this equals
/// the staggered product used by the engine, through a different sequence
/// of multiplications, which makes it a genuine cross-check.
fn transition_by_steps(sys: &CoefficientSystem, t: &MultiIndex, s: &MultiIndex) -> Result<CMatrix> {
    let mut acc = CMatrix::identity(sys.state_dim())?;
    let mut at = s.clone();
    for axis in 0..sys.num_axes() {
        for _ in 0..(t.get(axis) - s.get(axis)) {
            acc = &sys.coefficient(axis, &at)? * &acc;
            at = at.step(axis, 1)?;
        }
    }
    Ok(acc)
}

/// Checks `A_alpha(t + T) = A_alpha(t)` for a single vector period over
/// the system's default box.
fn verify_vector_period(sys: &CoefficientSystem, period: &MultiIndex) -> Result<()> {
    let t0 = sys.base_point();
    let check_box = sys.default_check_box();
    for offset in BoxIter::new(check_box.coords())? {
        let t = t0.add(&MultiIndex::new(offset)?)?;
        let shifted = t.add(period)?;
        for alpha in 0..sys.num_axes() {
            let here = sys.coefficient(alpha, &t)?;
            let there = sys.coefficient(alpha, &shifted)?;
            let residual = here.max_diff(&there);
            if residual > tol::TOL_COMPAT * rel_scale2(&here, &there) {
                return Err(Error::PeriodicityViolation {
                    axis: alpha,
                    at: t,
                    residual,
                });
            }
        }
    }
    Ok(())
}

fn validate_vector_period(sys: &CoefficientSystem, period: &MultiIndex) -> Result<()> {
    if period.dim() != sys.num_axes() {
        return Err(Error::DimensionMismatch(format!(
            "system with {} axes, period of dimension {}",
            sys.num_axes(),
            period.dim()
        )));
    }
    if period.coords().iter().any(|&c| c < 0) || period.total() == 0 {
        return Err(Error::InvalidParameter(format!(
            "a vector period needs non-negative components and at least one positive, got {period}"
        )));
    }
    Ok(())
}

/// Monodromy `C(t0) = chi(t0 + T, t0)` of a system that repeats under the
/// single vector shift `T`.
///
/// The claimed period is verified on the default box, and the staggered
/// product is cross-checked against a stepwise path product before the
/// matrix is returned.
pub fn monodromy_periodic(sys: &CoefficientSystem, period: &MultiIndex) -> Result<CMatrix> {
    validate_vector_period(sys, period)?;
    verify_vector_period(sys, period)?;
    let t0 = sys.base_point();
    let end = t0.add(period)?;
    let mono = sys.transition(&end, t0)?;
    let stepped = transition_by_steps(sys, &end, t0)?;
    let residual = mono.max_diff(&stepped);
    let bound = tol::TOL_COMPAT * rel_scale2(&mono, &stepped);
    if residual > bound {
        return Err(Error::DecompositionInvariant {
            invariant: "staggered monodromy equals the stepped path product".into(),
            residual,
            tol: bound,
        });
    }
    if !mono.is_invertible() {
        return Err(Error::SingularMatrix {
            det_abs: mono.determinant().norm(),
            cutoff: mono.singularity_cutoff(),
        });
    }
    Ok(mono)
}

/// The level factorization `Phi(t) = P(t) B^{|t|}` of a system with one
/// vector period `T`: a single constant factor with `B^{|T|} = C(t0)` and
/// a factor `P` that repeats under the shift by `T`.
#[derive(Debug, Clone)]
pub struct PeriodicDecomposition {
    t0: MultiIndex,
    period: MultiIndex,
    b: CMatrix,
    p_box: OffsetTable,
}

impl PeriodicDecomposition {
    pub fn base_point(&self) -> &MultiIndex {
        &self.t0
    }

    pub fn period(&self) -> &MultiIndex {
        &self.period
    }

    /// The constant factor `B`.
    pub fn factor(&self) -> &CMatrix {
        &self.b
    }

    /// Raw stored values of `P`, offsets relative to the base point.
    pub fn p_stored(&self) -> &OffsetTable {
        &self.p_box
    }

    /// `P(t)`, reduced by as many full `T`-shifts as fit. The reduced
    /// offset must land in the stored box: the quotient of the lattice by
    /// one vector is infinite for m >= 2, so no finite table covers every
    /// point.
    pub fn p_at(&self, t: &MultiIndex) -> Result<CMatrix> {
        let rel = t.sub(&self.t0)?;
        if rel.coords().iter().any(|&c| c < 0) {
            return Err(Error::OutsideDomain {
                t: t.clone(),
                reason: "the decomposition lives on t >= t0".into(),
            });
        }
        let shifts = rel
            .coords()
            .iter()
            .zip(self.period.coords())
            .filter(|(_, &p)| p > 0)
            .map(|(&o, &p)| o / p)
            .min()
            .expect("period has a positive component");
        let mut offsets = Vec::with_capacity(rel.dim());
        for axis in 0..rel.dim() {
            let reduced = rel.get(axis) - shifts * self.period.get(axis);
            let extent = self.p_box.extents()[axis] - 1;
            if reduced as usize > extent {
                return Err(Error::OutsideDomain {
                    t: t.clone(),
                    reason: format!(
                        "offset {reduced} along axis {} after period reduction exceeds the stored box ({extent})",
                        axis + 1
                    ),
                });
            }
            offsets.push(reduced as usize);
        }
        Ok(self.p_box.get(&offsets).clone())
    }

    /// `B^{|t|}` at the absolute level of `t`.
    pub fn level_power(&self, t: &MultiIndex) -> Result<CMatrix> {
        if t.dim() != self.t0.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {}, decomposition of dimension {}",
                t.dim(),
                self.t0.dim()
            )));
        }
        self.b.power(t.total())
    }

    /// The fundamental solution `Phi(t) = P(t) B^{|t|}`.
    pub fn reconstruct(&self, t: &MultiIndex) -> Result<CMatrix> {
        Ok(&self.p_at(t)? * &self.level_power(t)?)
    }

    /// Substitution `x(t) = P(t) y(t)` from the constant system
    /// `y(t + 1_alpha) = B y(t)` to the original.
    pub fn lift(&self, y: &[Complex64], t: &MultiIndex) -> Result<Vec<Complex64>> {
        self.p_at(t)?.mul_vector(y)
    }

    /// Inverse substitution `y(t) = P(t)^{-1} x(t)`.
    pub fn reduce(&self, x: &[Complex64], t: &MultiIndex) -> Result<Vec<Complex64>> {
        self.p_at(t)?.inverse()?.mul_vector(x)
    }
}

/// Level factorization of a system with one vector period.
///
/// `B` is a `|T|`-th root of the monodromy (diagonalizable route or 2x2
/// Jordan route; defective monodromies in dimension >= 3 are refused),
/// `P(t) = Phi(t) B^{-|t|}` is tabulated over a two-period box, and the
/// periodicity of `P`, its invertibility, the root identity
/// `B^{|T|} = C(t0)`, and the reconstruction are all verified on the box.
pub fn decompose_periodic(
    sys: &CoefficientSystem,
    period: &MultiIndex,
    seed: u64,
) -> Result<PeriodicDecomposition> {
    let mono = monodromy_periodic(sys, period)?;
    let t0 = sys.base_point().clone();
    let total = u32::try_from(period.total())
        .map_err(|_| Error::InvalidParameter(format!("period level |T| = {} too large", period.total())))?;
    let b = commuting_roots(std::slice::from_ref(&mono), &[total], seed)?
        .pop()
        .expect("one root for one matrix");

    let counts: Vec<usize> = period
        .coords()
        .iter()
        .map(|&p| 2 * (p.max(1) as usize) + 1)
        .collect();
    let p_box = OffsetTable::from_fn(counts.clone(), |offset| {
        let rel: Vec<i64> = offset.iter().map(|&o| o as i64).collect();
        let t = t0.add(&MultiIndex::new(rel)?)?;
        Ok(&sys.transition(&t, &t0)? * &b.power(-t.total())?)
    })?;

    let box_corner: Vec<i64> = counts.iter().map(|&cnt| cnt as i64 - 1).collect();
    let pairs = BoxIter::new(&box_corner)?
        .filter(|offset| {
            offset
                .iter()
                .zip(period.coords())
                .zip(&counts)
                .all(|((&o, &p), &cnt)| o + p < cnt as i64)
        })
        .map(|offset| {
            let shifted: Vec<usize> = offset
                .iter()
                .zip(period.coords())
                .map(|(&o, &p)| (o + p) as usize)
                .collect();
            (offset.iter().map(|&o| o as usize).collect(), shifted)
        });
    verify_periodic_table(&p_box, pairs, "P(t + T) = P(t)")?;
    verify_invertible_table(&p_box)?;

    let residual = b.power(i64::from(total))?.max_diff(&mono);
    let bound = tol::TOL_ROOT_RESIDUAL * tol::scale_floor(mono.max_norm());
    if residual > bound {
        return Err(Error::DecompositionInvariant {
            invariant: "B^{|T|} equals the monodromy".into(),
            residual,
            tol: bound,
        });
    }

    let dec = PeriodicDecomposition {
        t0: t0.clone(),
        period: period.clone(),
        b,
        p_box,
    };
    for (offset, stored) in dec.p_box.iter() {
        let rel: Vec<i64> = offset.iter().map(|&o| o as i64).collect();
        let t = t0.add(&MultiIndex::new(rel)?)?;
        let phi = sys.transition(&t, &t0)?;
        let rebuilt = stored * &dec.level_power(&t)?;
        let residual = rebuilt.max_diff(&phi);
        let bound = tol::TOL_ROOT_RESIDUAL * rel_scale2(&rebuilt, &phi);
        if residual > bound {
            return Err(Error::DecompositionInvariant {
                invariant: "Phi(t) = P(t) B^{|t|}".into(),
                residual,
                tol: bound,
            });
        }
    }
    Ok(dec)
}

/// Floquet multipliers: the eigenvalues of a monodromy matrix, sorted by
/// real part then imaginary part. For 2x2 inputs they come from the exact
/// trace/determinant quadratic; larger inputs go through the
/// eigendecomposition. Invertibility of the input keeps them nonzero.
pub fn floquet_multipliers(mono: &CMatrix) -> Result<Vec<Complex64>> {
    if !mono.is_invertible() {
        return Err(Error::SingularMatrix {
            det_abs: mono.determinant().norm(),
            cutoff: mono.singularity_cutoff(),
        });
    }
    let mut values = match mono.dim() {
        1 => vec![mono.get(0, 0)],
        2 => {
            let (r1, r2) = quadratic_roots(mono.trace(), mono.determinant());
            vec![r1, r2]
        }
        _ => eigendecompose(mono)?.values,
    };
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}
