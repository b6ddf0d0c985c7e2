//! Coefficient systems and solution propagation.
//!
//! A system assigns to each axis `alpha` a coefficient field `A_alpha(t)` of
//! invertible-or-not `n x n` matrices on the domain `{t >= t0}`, driving the
//! recurrence `x(t + 1_alpha) = A_alpha(t) x(t)`. Solutions through every
//! initial value exist and are unique exactly when every axis pair commutes
//! in the crossed sense
//!
//! ```text
//! A_alpha(t + 1_beta) A_beta(t) = A_beta(t + 1_alpha) A_alpha(t),
//! ```
//!
//! which [`CoefficientSystem::check_compatibility`] tests pointwise on a
//! box. Propagation is organized through the ordered axis products
//!
//! ```text
//! C_{alpha,k}(t) = A_alpha(t + (k-1) 1_alpha) ... A_alpha(t + 1_alpha) A_alpha(t)
//! ```
//!
//! ([`CoefficientSystem::c_product`]; later factors sit at higher lattice
//! points, `C_{alpha,0} = I`) and the transition matrix
//!
//! ```text
//! chi(t, s) = C_{1,t^1-s^1}(s^1, t^2, ..., t^m)
//!             C_{2,t^2-s^2}(s^1, s^2, t^3, ..., t^m)
//!             ...
//!             C_{m,t^m-s^m}(s),
//! ```
//!
//! which walks each axis down in turn and satisfies `x(t) = chi(t, s) x(s)`
//! for every solution. Compatibility makes the factor order immaterial:
//! `chi` equals the product of unit steps along any monotone lattice path
//! from `s` to `t`.

use crate::error::{Error, Result};
use crate::hicks::HicksPeriodicParams;
use crate::lattice::{BoxIter, MultiIndex, PeriodVector};
use crate::matrix::{rel_scale2, CMatrix};
use crate::tol;
use num_complex::Complex64;

/// Dense table of matrices over the integer box `[0, extents)`, row major
/// with the first axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetTable {
    extents: Vec<usize>,
    data: Vec<CMatrix>,
}

impl OffsetTable {
    pub fn new(extents: Vec<usize>, data: Vec<CMatrix>) -> Result<Self> {
        if extents.is_empty() || extents.iter().any(|&e| e == 0) {
            return Err(Error::InvalidParameter(format!(
                "table extents must be positive, got {extents:?}"
            )));
        }
        let cells: usize = extents.iter().product();
        if data.len() != cells {
            return Err(Error::InvalidParameter(format!(
                "table over {extents:?} needs {cells} matrices, got {}",
                data.len()
            )));
        }
        let n = data[0].dim();
        if data.iter().any(|mat| mat.dim() != n) {
            return Err(Error::DimensionMismatch(
                "all table matrices must share one dimension".into(),
            ));
        }
        Ok(OffsetTable { extents, data })
    }

    /// Builds the table cell by cell in lexicographic offset order.
    pub fn from_fn(
        extents: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> Result<CMatrix>,
    ) -> Result<Self> {
        if extents.is_empty() || extents.iter().any(|&e| e == 0) {
            return Err(Error::InvalidParameter(format!(
                "table extents must be positive, got {extents:?}"
            )));
        }
        let corners: Vec<i64> = extents.iter().map(|&e| e as i64 - 1).collect();
        let mut data = Vec::new();
        for offset in BoxIter::new(&corners)? {
            let cell: Vec<usize> = offset.iter().map(|&o| o as usize).collect();
            data.push(f(&cell)?);
        }
        OffsetTable::new(extents, data)
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn matrix_dim(&self) -> usize {
        self.data[0].dim()
    }

    fn flat(&self, offsets: &[usize]) -> usize {
        debug_assert_eq!(offsets.len(), self.extents.len());
        let mut idx = 0;
        for (o, e) in offsets.iter().zip(&self.extents) {
            debug_assert!(o < e);
            idx = idx * e + o;
        }
        idx
    }

    pub fn get(&self, offsets: &[usize]) -> &CMatrix {
        &self.data[self.flat(offsets)]
    }

    /// Lexicographic `(offset, matrix)` walk over the whole table.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &CMatrix)> {
        let extents = self.extents.clone();
        self.data.iter().enumerate().map(move |(flat, mat)| {
            let mut offsets = vec![0usize; extents.len()];
            let mut rem = flat;
            for axis in (0..extents.len()).rev() {
                offsets[axis] = rem % extents[axis];
                rem /= extents[axis];
            }
            (offsets, mat)
        })
    }
}

/// A matrix field with per-axis periods: values are stored over one
/// fundamental domain (one slice along axes without a period) and looked up
/// modulo the periods.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTable {
    periods: PeriodVector,
    table: OffsetTable,
}

impl PeriodicTable {
    pub fn new(periods: PeriodVector, table: OffsetTable) -> Result<Self> {
        if table.extents() != periods.extents().as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "table extents {:?} do not match the fundamental domain {:?} of the periods",
                table.extents(),
                periods.extents()
            )));
        }
        Ok(PeriodicTable { periods, table })
    }

    pub fn periods(&self) -> &PeriodVector {
        &self.periods
    }

    pub fn table(&self) -> &OffsetTable {
        &self.table
    }

    pub fn matrix_dim(&self) -> usize {
        self.table.matrix_dim()
    }

    /// Reduces a relative offset into the fundamental domain. Offsets along
    /// axes without a period collapse onto the stored slice.
    pub fn wrap(&self, rel: &[i64]) -> Vec<usize> {
        rel.iter()
            .enumerate()
            .map(|(axis, &o)| {
                let t = self.periods.get(axis) as i64;
                if t == 0 {
                    0
                } else {
                    o.rem_euclid(t) as usize
                }
            })
            .collect()
    }

    /// Value at relative offset `rel` from the table base point.
    pub fn value_rel(&self, rel: &[i64]) -> &CMatrix {
        self.table.get(&self.wrap(rel))
    }
}

#[derive(Debug, Clone)]
enum Coefficients {
    Constant(Vec<CMatrix>),
    MultiPeriodic(Vec<PeriodicTable>),
    Window {
        extents: Vec<usize>,
        tables: Vec<OffsetTable>,
    },
    Hicks(HicksPeriodicParams),
}

/// A full recurrence system: dimensions, initial point, and one coefficient
/// field per axis.
#[derive(Debug, Clone)]
pub struct CoefficientSystem {
    m: usize,
    n: usize,
    t0: MultiIndex,
    coeffs: Coefficients,
}

/// One compatibility failure: the axis pair and point where the two crossed
/// products differ, with the absolute residual `max |L - R|` and the entry
/// scale it was measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityViolation {
    pub t: MultiIndex,
    pub axis_a: usize,
    pub axis_b: usize,
    pub residual: f64,
    pub scale: f64,
}

/// Outcome of a compatibility sweep over a box.
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub ok: bool,
    pub tol: f64,
    pub box_extents: Vec<i64>,
    pub points_checked: usize,
    pub violations: Vec<CompatibilityViolation>,
}

impl CompatibilityReport {
    /// Largest relative residual among the violations.
    pub fn worst(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.residual / v.scale)
            .fold(0.0, f64::max)
    }
}

impl CoefficientSystem {
    /// Constant coefficients, one matrix per axis.
    pub fn constant(t0: MultiIndex, matrices: Vec<CMatrix>) -> Result<Self> {
        let m = t0.dim();
        if matrices.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} axes need {m} coefficient matrices, got {}",
                matrices.len()
            )));
        }
        let n = matrices[0].dim();
        if matrices.iter().any(|a| a.dim() != n) {
            return Err(Error::DimensionMismatch(
                "all coefficients must share one dimension".into(),
            ));
        }
        Ok(CoefficientSystem {
            m,
            n,
            t0,
            coeffs: Coefficients::Constant(matrices),
        })
    }

    /// Multi-periodic coefficients stored over one fundamental domain per
    /// axis. All axis tables must share the period vector.
    pub fn multi_periodic(
        t0: MultiIndex,
        periods: PeriodVector,
        tables: Vec<OffsetTable>,
    ) -> Result<Self> {
        let m = t0.dim();
        if periods.dim() != m || tables.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} periods and {m} axis tables, got {} and {}",
                periods.dim(),
                tables.len()
            )));
        }
        let n = tables[0].matrix_dim();
        if tables.iter().any(|t| t.matrix_dim() != n) {
            return Err(Error::DimensionMismatch(
                "all coefficients must share one dimension".into(),
            ));
        }
        let tables = tables
            .into_iter()
            .map(|t| PeriodicTable::new(periods.clone(), t))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoefficientSystem {
            m,
            n,
            t0,
            coeffs: Coefficients::MultiPeriodic(tables),
        })
    }

    /// Coefficients tabulated over the finite window `[t0, t0 + extents)`;
    /// evaluation outside the window is a domain error. All axis tables
    /// share the window shape.
    pub fn window(t0: MultiIndex, tables: Vec<OffsetTable>) -> Result<Self> {
        let m = t0.dim();
        if tables.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} axes need {m} window tables, got {}",
                tables.len()
            )));
        }
        let extents = tables[0].extents().to_vec();
        if extents.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "window tables must have {m} axes, got {}",
                extents.len()
            )));
        }
        if tables.iter().any(|t| t.extents() != extents) {
            return Err(Error::DimensionMismatch(
                "all window tables must cover the same window".into(),
            ));
        }
        let n = tables[0].matrix_dim();
        if tables.iter().any(|t| t.matrix_dim() != n) {
            return Err(Error::DimensionMismatch(
                "all coefficients must share one dimension".into(),
            ));
        }
        Ok(CoefficientSystem {
            m,
            n,
            t0,
            coeffs: Coefficients::Window { extents, tables },
        })
    }

    /// The level-collapsed model system: every axis carries the same
    /// coefficient `A(|t|)` built from the model parameters, with `t0 = 0`.
    pub fn hicks(params: HicksPeriodicParams, m: usize) -> Result<Self> {
        let t0 = MultiIndex::zeros(m)?;
        Ok(CoefficientSystem {
            m,
            n: 2,
            t0,
            coeffs: Coefficients::Hicks(params),
        })
    }

    pub fn num_axes(&self) -> usize {
        self.m
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn base_point(&self) -> &MultiIndex {
        &self.t0
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.coeffs {
            Coefficients::Constant(_) => "constant",
            Coefficients::MultiPeriodic(_) => "multi_periodic_table",
            Coefficients::Window { .. } => "whole_lattice_table_window",
            Coefficients::Hicks(_) => "hicks",
        }
    }

    /// Declared periods for table-backed periodic systems; the level period
    /// on every axis for the model system.
    pub fn periods(&self) -> Option<PeriodVector> {
        match &self.coeffs {
            Coefficients::MultiPeriodic(tables) => Some(tables[0].periods().clone()),
            Coefficients::Hicks(params) => {
                PeriodVector::new(vec![params.period() as u32; self.m]).ok()
            }
            _ => None,
        }
    }

    pub fn window_extents(&self) -> Option<&[usize]> {
        match &self.coeffs {
            Coefficients::Window { extents, .. } => Some(extents),
            _ => None,
        }
    }

    pub fn hicks_params(&self) -> Option<&HicksPeriodicParams> {
        match &self.coeffs {
            Coefficients::Hicks(params) => Some(params),
            _ => None,
        }
    }

    /// Stored representation as `(axis, offset, matrix)` rows, for document
    /// serialization. Empty for the model-backed kind.
    pub fn coefficient_entries(&self) -> Vec<(usize, Vec<i64>, CMatrix)> {
        let mut out = Vec::new();
        match &self.coeffs {
            Coefficients::Constant(matrices) => {
                for (axis, mat) in matrices.iter().enumerate() {
                    out.push((axis, vec![0; self.m], mat.clone()));
                }
            }
            Coefficients::MultiPeriodic(tables) => {
                for (axis, table) in tables.iter().enumerate() {
                    for (offset, mat) in table.table().iter() {
                        out.push((axis, offset.iter().map(|&o| o as i64).collect(), mat.clone()));
                    }
                }
            }
            Coefficients::Window { tables, .. } => {
                for (axis, table) in tables.iter().enumerate() {
                    for (offset, mat) in table.iter() {
                        out.push((axis, offset.iter().map(|&o| o as i64).collect(), mat.clone()));
                    }
                }
            }
            Coefficients::Hicks(_) => {}
        }
        out
    }

    fn check_point(&self, t: &MultiIndex) -> Result<()> {
        if t.dim() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} in a system with {} axes",
                t.dim(),
                self.m
            )));
        }
        if !self.t0.leq(t)? {
            return Err(Error::OutsideDomain {
                t: t.clone(),
                reason: format!("below the initial point {}", self.t0),
            });
        }
        Ok(())
    }

    /// Coefficient `A_axis(t)` on the domain `{t >= t0}`.
    pub fn coefficient(&self, axis: usize, t: &MultiIndex) -> Result<CMatrix> {
        if axis >= self.m {
            return Err(Error::AxisOutOfRange { axis, m: self.m });
        }
        self.check_point(t)?;
        let rel = t.sub(&self.t0)?;
        match &self.coeffs {
            Coefficients::Constant(matrices) => Ok(matrices[axis].clone()),
            Coefficients::MultiPeriodic(tables) => Ok(tables[axis].value_rel(rel.coords()).clone()),
            Coefficients::Window { extents, tables } => {
                let mut offsets = Vec::with_capacity(self.m);
                for (o, &e) in rel.coords().iter().zip(extents) {
                    if *o < 0 || *o >= e as i64 {
                        return Err(Error::OutsideDomain {
                            t: t.clone(),
                            reason: format!("outside the stored window of extents {extents:?}"),
                        });
                    }
                    offsets.push(*o as usize);
                }
                Ok(tables[axis].get(&offsets).clone())
            }
            Coefficients::Hicks(params) => params.matrix_at(t.total()),
        }
    }

    /// Default box for the compatibility sweep: one full period per axis
    /// for periodic kinds, the largest window that keeps `t + 1_beta`
    /// evaluable for the window kind, one step for constant systems.
    pub fn default_check_box(&self) -> MultiIndex {
        let extents: Vec<i64> = match &self.coeffs {
            Coefficients::Constant(_) => vec![1; self.m],
            Coefficients::MultiPeriodic(tables) => tables[0]
                .periods()
                .extents()
                .iter()
                .map(|&e| e as i64)
                .collect(),
            Coefficients::Window { extents, .. } => extents
                .iter()
                .map(|&e| (e as i64 - 2).max(0))
                .collect(),
            Coefficients::Hicks(params) => vec![params.period() as i64; self.m],
        };
        MultiIndex::new(extents).expect("m >= 1")
    }

    /// Sweeps the crossed-product identity over `[t0, t0 + box]` at the
    /// default tolerance.
    pub fn check_compatibility(&self, box_extents: &MultiIndex) -> Result<CompatibilityReport> {
        self.check_compatibility_with(box_extents, tol::TOL_COMPAT)
    }

    /// Same sweep with an explicit relative tolerance.
    pub fn check_compatibility_with(
        &self,
        box_extents: &MultiIndex,
        tol: f64,
    ) -> Result<CompatibilityReport> {
        if box_extents.dim() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "box of dimension {} in a system with {} axes",
                box_extents.dim(),
                self.m
            )));
        }
        let mut violations = Vec::new();
        let mut points = 0usize;
        for offset in BoxIter::new(box_extents.coords())? {
            let t = self.t0.add(&MultiIndex::new(offset)?)?;
            points += 1;
            for a in 0..self.m {
                for b in a + 1..self.m {
                    let l = &self.coefficient(a, &t.step(b, 1)?)? * &self.coefficient(b, &t)?;
                    let r = &self.coefficient(b, &t.step(a, 1)?)? * &self.coefficient(a, &t)?;
                    let residual = l.max_diff(&r);
                    let scale = rel_scale2(&l, &r);
                    if residual > tol * scale {
                        violations.push(CompatibilityViolation {
                            t: t.clone(),
                            axis_a: a,
                            axis_b: b,
                            residual,
                            scale,
                        });
                    }
                }
            }
        }
        Ok(CompatibilityReport {
            ok: violations.is_empty(),
            tol,
            box_extents: box_extents.coords().to_vec(),
            points_checked: points,
            violations,
        })
    }

    /// Ordered product `C_{axis,k}(t)` of `k` coefficients walking up the
    /// axis; the factor at the highest lattice point multiplies from the
    /// left. `k = 0` yields the identity.
    pub fn c_product(&self, axis: usize, k: u32, t: &MultiIndex) -> Result<CMatrix> {
        if axis >= self.m {
            return Err(Error::AxisOutOfRange { axis, m: self.m });
        }
        let mut acc = CMatrix::identity(self.n)?;
        for i in 0..i64::from(k) {
            acc = &self.coefficient(axis, &t.step(axis, i)?)? * &acc;
        }
        Ok(acc)
    }

    /// Transition matrix `chi(t, s)` with `t0 <= s <= t`: propagates any
    /// solution from `s` to `t` via `x(t) = chi(t, s) x(s)`.
    pub fn transition(&self, t: &MultiIndex, s: &MultiIndex) -> Result<CMatrix> {
        self.check_point(s)?;
        self.check_point(t)?;
        if !s.leq(t)? {
            return Err(Error::NotOrdered {
                s: s.clone(),
                t: t.clone(),
            });
        }
        let mut result = CMatrix::identity(self.n)?;
        for axis in 0..self.m {
            // Axes up to and including `axis` sit at s, the rest still at t.
            let coords: Vec<i64> = (0..self.m)
                .map(|j| if j <= axis { s.get(j) } else { t.get(j) })
                .collect();
            let point = MultiIndex::new(coords)?;
            let k = u32::try_from(t.get(axis) - s.get(axis)).map_err(|_| {
                Error::InvalidParameter(format!(
                    "axis {axis} span {} too large for a transition product",
                    t.get(axis) - s.get(axis)
                ))
            })?;
            result = &result * &self.c_product(axis, k, &point)?;
        }
        Ok(result)
    }

    /// Solution value `x(t) = chi(t, t0) x0`.
    pub fn solve(&self, x0: &[Complex64], t: &MultiIndex) -> Result<Vec<Complex64>> {
        if x0.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "initial value of length {} in a system of dimension {}",
                x0.len(),
                self.n
            )));
        }
        let chi = self.transition(t, &self.t0.clone())?;
        chi.mul_vector(x0)
    }
}

/// Builds a compatible multi-periodic system from a periodic invertible
/// matrix field `P` and pairwise commuting invertible matrices `B_alpha`:
///
/// ```text
/// A_alpha(t) = P(t + 1_alpha) B_alpha P(t)^-1.
/// ```
///
/// The crossed products then reduce to `P(t + 1_alpha + 1_beta) B_alpha
/// B_beta P(t)^-1` on both sides, so the result is compatible by
/// construction and has `P(t) B_1^{t^1} ... B_m^{t^m}` as its solution
/// through the identity. This is both a test-corpus generator and the
/// inverse direction of the Floquet decomposition.
pub fn synthesize_compatible(
    p: &PeriodicTable,
    b: &[CMatrix],
    t0: &MultiIndex,
) -> Result<CoefficientSystem> {
    let m = p.periods().dim();
    if b.len() != m || t0.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "period table with {m} axes needs {m} factor matrices and an initial point of dimension {m}"
        )));
    }
    let n = p.matrix_dim();
    if b.iter().any(|mat| mat.dim() != n) {
        return Err(Error::DimensionMismatch(
            "factor matrices must match the dimension of the P values".into(),
        ));
    }
    for (a, ba) in b.iter().enumerate() {
        if !ba.is_invertible() {
            return Err(Error::InvalidParameter(format!(
                "factor matrix B_{} is singular",
                a + 1
            )));
        }
        for other in b.iter().skip(a + 1) {
            let residual = ba.commutator_norm(other);
            let scale = rel_scale2(ba, other) * rel_scale2(ba, other);
            if residual > tol::TOL_COMPAT * scale {
                return Err(Error::NonCommuting {
                    residual,
                    tol: tol::TOL_COMPAT * scale,
                });
            }
        }
    }

    // Precompute the inverse of every stored P value.
    let extents = p.periods().extents();
    let inverses = OffsetTable::from_fn(extents.clone(), |offset| {
        p.table()
            .get(offset)
            .inverse()
            .map_err(|_| Error::InvalidParameter(format!("P value at offset {offset:?} is singular")))
    })?;

    let mut tables = Vec::with_capacity(m);
    for (axis, ba) in b.iter().enumerate() {
        let table = OffsetTable::from_fn(extents.clone(), |offset| {
            let rel: Vec<i64> = offset
                .iter()
                .enumerate()
                .map(|(j, &o)| o as i64 + i64::from(j == axis))
                .collect();
            let p_next = p.value_rel(&rel);
            Ok(&(p_next * ba) * inverses.get(offset))
        })?;
        tables.push(table);
    }
    CoefficientSystem::multi_periodic(t0.clone(), p.periods().clone(), tables)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::matrix::CMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mi(coords: &[i64]) -> MultiIndex {
        MultiIndex::new(coords.to_vec()).unwrap()
    }

    /// Planar rotation by `pi / half_turns`, block-extended to dimension n.
    pub(crate) fn rotation_q(half_turns: u32, n: usize) -> CMatrix {
        let theta = std::f64::consts::PI / f64::from(half_turns);
        CMatrix::from_fn(n, |r, cl| match (r, cl) {
            (0, 0) => c(theta.cos(), 0.0),
            (0, 1) => c(-theta.sin(), 0.0),
            (1, 0) => c(theta.sin(), 0.0),
            (1, 1) => c(theta.cos(), 0.0),
            _ if r == cl => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        })
        .unwrap()
    }

    /// The axis reflection diag(1, -1, 1, ..., 1).
    pub(crate) fn reflection_s(n: usize) -> CMatrix {
        CMatrix::from_fn(n, |r, cl| match (r, cl) {
            (1, 1) => c(-1.0, 0.0),
            _ if r == cl => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        })
        .unwrap()
    }

    /// Two-axis system with `A_1(t) = Q^{2 t^2} S` (period 1 along the first
    /// axis, `t2_period` along the second) and constant `A_2 = Q`. Its
    /// transition matrix has the closed form `Q^{t^2} S^{t^1 - s^1} Q^{-s^2}`.
    pub(crate) fn rotation_reflection_system(t2_period: u32, n: usize) -> CoefficientSystem {
        let q = rotation_q(t2_period, n);
        let s = reflection_s(n);
        let periods = PeriodVector::new(vec![1, t2_period]).unwrap();
        let a1 = OffsetTable::from_fn(vec![1, t2_period as usize], |offset| {
            Ok(&q.power(2 * offset[1] as i64).unwrap() * &s)
        })
        .unwrap();
        let a2 = OffsetTable::from_fn(vec![1, t2_period as usize], |_| Ok(q.clone())).unwrap();
        CoefficientSystem::multi_periodic(mi(&[0, 0]), periods, vec![a1, a2]).unwrap()
    }

    pub(crate) fn rotation_closed_form(t2_period: u32, n: usize, t: &[i64], s: &[i64]) -> CMatrix {
        let q = rotation_q(t2_period, n);
        let refl = reflection_s(n);
        let a = &q.power(t[1]).unwrap() * &refl.power(t[0] - s[0]).unwrap();
        &a * &q.power(-s[1]).unwrap()
    }

    #[test]
    fn constant_systems_are_compatible_when_coefficients_commute() {
        let a1 = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let a2 = CMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        let sys = CoefficientSystem::constant(mi(&[0, 0]), vec![a1, a2]).unwrap();
        let report = sys.check_compatibility(&sys.default_check_box()).unwrap();
        assert!(report.ok);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn rotation_reflection_system_is_compatible() {
        for t2 in [2u32, 3, 4] {
            let sys = rotation_reflection_system(t2, 2);
            let report = sys.check_compatibility(&mi(&[2, 2 * t2 as i64])).unwrap();
            assert!(report.ok, "T2 = {t2}: {:?}", report.violations);
        }
    }

    #[test]
    fn doubling_field_violates_compatibility() {
        // A_1(t) = [2^{t^2}] grows along the other axis while A_2 = [1]
        // does nothing to compensate, so the crossed products differ:
        // L = 2^{t^2 + 1}, R = 2^{t^2}.
        let a1 = OffsetTable::from_fn(vec![3, 3], |offset| {
            CMatrix::from_real_rows(&[&[2f64.powi(offset[1] as i32)]])
        })
        .unwrap();
        let a2 = OffsetTable::from_fn(vec![3, 3], |_| CMatrix::from_real_rows(&[&[1.0]])).unwrap();
        let sys = CoefficientSystem::window(mi(&[0, 0]), vec![a1, a2]).unwrap();
        let report = sys.check_compatibility(&mi(&[1, 1])).unwrap();
        assert!(!report.ok);
        let first = &report.violations[0];
        assert_eq!(first.t, mi(&[0, 0]));
        assert_eq!((first.axis_a, first.axis_b), (0, 1));
        assert!((first.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn window_evaluation_outside_errors() {
        let table = OffsetTable::from_fn(vec![2, 2], |_| CMatrix::identity(2)).unwrap();
        let sys = CoefficientSystem::window(mi(&[0, 0]), vec![table.clone(), table]).unwrap();
        assert!(sys.coefficient(0, &mi(&[1, 1])).is_ok());
        assert!(matches!(
            sys.coefficient(0, &mi(&[2, 0])),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn evaluation_below_base_point_errors() {
        let sys = rotation_reflection_system(2, 2);
        assert!(matches!(
            sys.coefficient(0, &mi(&[-1, 0])),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn periodic_lookup_wraps() {
        let sys = rotation_reflection_system(3, 2);
        let inside = sys.coefficient(0, &mi(&[0, 1])).unwrap();
        let wrapped = sys.coefficient(0, &mi(&[5, 4])).unwrap();
        assert_eq!(inside, wrapped);
    }

    #[test]
    fn axis_products_walk_upward() {
        // Constant system: C_{alpha,k} collapses to the k-th power.
        let a = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let sys = CoefficientSystem::constant(mi(&[0]), vec![a.clone()]).unwrap();
        let c3 = sys.c_product(0, 3, &mi(&[0])).unwrap();
        assert!(c3.approx_eq(&a.power(3).unwrap(), 1e-14));
        assert_eq!(
            sys.c_product(0, 0, &mi(&[5])).unwrap(),
            CMatrix::identity(2).unwrap()
        );

        // Rotation system, second axis: three steps of Q.
        let sys = rotation_reflection_system(2, 2);
        let q3 = sys.c_product(1, 3, &mi(&[0, 0])).unwrap();
        let expected = CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert!(q3.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn transition_at_equal_points_is_identity() {
        let sys = rotation_reflection_system(3, 3);
        let chi = sys.transition(&mi(&[2, 2]), &mi(&[2, 2])).unwrap();
        assert!(chi.is_identity(1e-15));
    }

    #[test]
    fn transition_matches_rotation_closed_form() {
        for t2 in [2u32, 3, 4] {
            for n in [2usize, 3] {
                let sys = rotation_reflection_system(t2, n);
                for (t, s) in [
                    ([2, 3], [0, 0]),
                    ([2, 3], [1, 1]),
                    ([5, 7], [2, 3]),
                    ([1, 0], [0, 0]),
                ] {
                    let chi = sys.transition(&mi(&t), &mi(&s)).unwrap();
                    let closed = rotation_closed_form(t2, n, &t, &s);
                    assert!(
                        chi.approx_eq(&closed, 1e-12),
                        "T2 = {t2}, n = {n}, t = {t:?}, s = {s:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn transition_spec_point_is_rotation_cube() {
        let sys = rotation_reflection_system(2, 2);
        let chi = sys.transition(&mi(&[2, 3]), &mi(&[0, 0])).unwrap();
        let expected = CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert!(chi.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn transition_rejects_unordered_points() {
        let sys = rotation_reflection_system(2, 2);
        assert!(matches!(
            sys.transition(&mi(&[1, 4]), &mi(&[2, 3])),
            Err(Error::NotOrdered { .. })
        ));
        assert!(matches!(
            sys.transition(&mi(&[1, 1]), &mi(&[-1, 0])),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn transition_equals_stepping_along_any_monotone_path() {
        let sys = rotation_reflection_system(3, 2);
        let s = mi(&[1, 0]);
        let t = mi(&[3, 4]);
        let chi = sys.transition(&t, &s).unwrap();
        // Two different monotone paths, one axis step at a time.
        for path in [
            vec![0, 0, 1, 1, 1, 1],
            vec![1, 0, 1, 1, 0, 1],
        ] {
            let mut acc = CMatrix::identity(2).unwrap();
            let mut at = s.clone();
            for axis in path {
                acc = &sys.coefficient(axis, &at).unwrap() * &acc;
                at = at.step(axis, 1).unwrap();
            }
            assert_eq!(at, t);
            assert!(chi.approx_eq(&acc, 1e-12));
        }
    }

    #[test]
    fn constant_transition_is_a_product_of_powers() {
        let a1 = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]).unwrap();
        let a2 = CMatrix::from_real_rows(&[&[5.0, 0.0], &[0.0, 7.0]]).unwrap();
        let sys = CoefficientSystem::constant(mi(&[1, 1]), vec![a1.clone(), a2.clone()]).unwrap();
        let chi = sys.transition(&mi(&[4, 3]), &mi(&[1, 1])).unwrap();
        let expected = &a1.power(3).unwrap() * &a2.power(2).unwrap();
        assert!(chi.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn solve_propagates_the_initial_value() {
        let sys = rotation_reflection_system(2, 2);
        let x = sys
            .solve(&[c(1.0, 0.0), c(0.0, 0.0)], &mi(&[1, 1]))
            .unwrap();
        assert!((x[0] - c(0.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn synthesis_from_identity_p_recovers_constant_factors() {
        let b1 = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]).unwrap();
        let b2 = CMatrix::from_real_rows(&[&[5.0, 0.0], &[0.0, 7.0]]).unwrap();
        let periods = PeriodVector::new(vec![2, 2]).unwrap();
        let p = PeriodicTable::new(
            periods,
            OffsetTable::from_fn(vec![2, 2], |_| CMatrix::identity(2)).unwrap(),
        )
        .unwrap();
        let sys = synthesize_compatible(&p, &[b1.clone(), b2.clone()], &mi(&[0, 0])).unwrap();
        assert!(sys
            .coefficient(0, &mi(&[1, 1]))
            .unwrap()
            .approx_eq(&b1, 1e-14));
        assert!(sys
            .coefficient(1, &mi(&[0, 1]))
            .unwrap()
            .approx_eq(&b2, 1e-14));
        assert!(sys.check_compatibility(&mi(&[2, 2])).unwrap().ok);
    }

    #[test]
    fn synthesis_parity_example() {
        // P(t) = diag(1, (-1)^{t^1}), B = I: the first axis coefficient is
        // the constant reflection, the second the identity.
        let periods = PeriodVector::new(vec![2, 1]).unwrap();
        let p = PeriodicTable::new(
            periods,
            OffsetTable::from_fn(vec![2, 1], |offset| {
                CMatrix::from_real_rows(&[
                    &[1.0, 0.0],
                    &[0.0, if offset[0] % 2 == 0 { 1.0 } else { -1.0 }],
                ])
            })
            .unwrap(),
        )
        .unwrap();
        let id = CMatrix::identity(2).unwrap();
        let sys = synthesize_compatible(&p, &[id.clone(), id], &mi(&[0, 0])).unwrap();
        let s = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        for t in [[0, 0], [1, 0], [0, 1], [1, 1]] {
            assert!(sys.coefficient(0, &mi(&t)).unwrap().approx_eq(&s, 1e-14));
            assert!(sys.coefficient(1, &mi(&t)).unwrap().is_identity(1e-14));
        }
    }

    #[test]
    fn synthesis_rejects_non_commuting_factors() {
        let periods = PeriodVector::new(vec![1, 1]).unwrap();
        let p = PeriodicTable::new(
            periods,
            OffsetTable::from_fn(vec![1, 1], |_| CMatrix::identity(2)).unwrap(),
        )
        .unwrap();
        let q = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let s = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(
            synthesize_compatible(&p, &[q, s], &mi(&[0, 0])),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn synthesized_transition_has_the_floquet_form() {
        // With P and commuting B the transition from t0 is
        // P(t) B_1^{o1} B_2^{o2} P(t0)^-1 for offsets o.
        let periods = PeriodVector::new(vec![2, 3]).unwrap();
        let p = PeriodicTable::new(
            periods,
            OffsetTable::from_fn(vec![2, 3], |offset| {
                // An invertible P value depending on the offset.
                CMatrix::from_rows(vec![
                    vec![c(1.0, 0.0), c(0.2 * offset[0] as f64, 0.1)],
                    vec![c(0.0, -0.3 * offset[1] as f64), c(1.0, 0.0)],
                ])
            })
            .unwrap(),
        )
        .unwrap();
        let b1 = CMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 2.0]]).unwrap();
        let b2 = CMatrix::from_real_rows(&[&[3.0, 0.0], &[0.0, 0.25]]).unwrap();
        let t0 = mi(&[1, -1]);
        let sys = synthesize_compatible(&p, &[b1.clone(), b2.clone()], &t0).unwrap();
        assert!(sys.check_compatibility(&mi(&[4, 6])).unwrap().ok);

        let t = mi(&[3, 3]);
        let chi = sys.transition(&t, &t0).unwrap();
        let rel = t.sub(&t0).unwrap();
        let expected = &(&(p.value_rel(rel.coords()) * &b1.power(rel.get(0)).unwrap())
            * &b2.power(rel.get(1)).unwrap())
            * &p.value_rel(&[0, 0]).inverse().unwrap();
        assert!(chi.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn offset_table_iteration_matches_layout() {
        let table = OffsetTable::from_fn(vec![2, 3], |offset| {
            CMatrix::from_real_rows(&[&[(offset[0] * 10 + offset[1]) as f64]])
        })
        .unwrap();
        let seen: Vec<(Vec<usize>, f64)> = table
            .iter()
            .map(|(o, mat)| (o, mat.get(0, 0).re))
            .collect();
        assert_eq!(seen[0], (vec![0, 0], 0.0));
        assert_eq!(seen[1], (vec![0, 1], 1.0));
        assert_eq!(seen[3], (vec![1, 0], 10.0));
        assert_eq!(seen[5], (vec![1, 2], 12.0));
        for (offset, mat) in table.iter() {
            assert_eq!(table.get(&offset), mat);
        }
    }
}
