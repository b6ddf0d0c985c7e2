//! JSON documents and CSV artifacts.
//!
//! Everything the CLI reads or writes goes through this module. The wire
//! conventions, shared by every document:
//!
//! - complex numbers are two-element arrays `[re, im]`;
//! - matrices are row-major nested arrays of such pairs;
//! - axes are 1-based (`alpha = 1..m`), matching the `t^1..t^m` notation,
//!   while the Rust APIs stay 0-based;
//! - JSON output is deterministic: keys sorted lexicographically, floats in
//!   their shortest round-trip form, two-space pretty printing, one trailing
//!   newline. Equal inputs give byte-equal artifacts, so golden-file tests
//!   mean something.
//!
//! Parse errors and schema violations surface as [`Error::Document`], which
//! the CLI maps to exit status 1; mathematical failures keep their own
//! variants and exit codes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{
    synthesize_compatible, CoefficientSystem, CompatibilityReport, OffsetTable, PeriodicTable,
};
use crate::error::{Error, Result};
use crate::floquet::{floquet_multipliers, FloquetDecomposition, PeriodicDecomposition};
use crate::hicks::{HicksConstantParams, HicksMultipliers, HicksPeriodicParams, HicksState};
use crate::lattice::{MultiIndex, PeriodVector};
use crate::matrix::CMatrix;

/// A complex number on the wire: `[re, im]`.
pub type ComplexPair = [f64; 2];

/// A matrix on the wire: row-major rows of complex pairs.
pub type MatrixDoc = Vec<Vec<ComplexPair>>;

pub fn complex_to_pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn complex_from_pair(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn matrix_to_doc(m: &CMatrix) -> MatrixDoc {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| complex_to_pair(m.get(i, j))).collect())
        .collect()
}

/// Parses a row-major matrix and checks it is square of dimension `n`.
pub fn matrix_from_doc(doc: &MatrixDoc, n: usize, what: &str) -> Result<CMatrix> {
    if doc.len() != n || doc.iter().any(|row| row.len() != n) {
        return Err(Error::Document(format!(
            "{what}: expected an {n}x{n} row-major matrix, got {} rows of lengths {:?}",
            doc.len(),
            doc.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    CMatrix::from_fn(n, |i, j| complex_from_pair(doc[i][j]))
}

/// One stored coefficient value: `A_alpha` at an offset of the fundamental
/// domain (or of the window, or the all-zero offset for constant systems).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    /// 1-based axis index.
    pub alpha: usize,
    pub offset: Vec<i64>,
    pub matrix: MatrixDoc,
}

/// The system specification document, the CLI's main input format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDocument {
    pub m: usize,
    pub n: usize,
    pub t0: Vec<i64>,
    /// One of `constant`, `multi_periodic_table`,
    /// `whole_lattice_table_window`, `hicks`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hicks: Option<HicksModelDocument>,
}

impl SystemDocument {
    pub fn from_system(sys: &CoefficientSystem) -> Self {
        let kind = sys.kind_name().to_string();
        let periods = if kind == "multi_periodic_table" {
            sys.periods().map(|p| p.as_slice().to_vec())
        } else {
            None
        };
        let hicks = sys.hicks_params().map(HicksModelDocument::from_periodic);
        let coefficients = sys
            .coefficient_entries()
            .into_iter()
            .map(|(axis, offset, matrix)| CoefficientEntry {
                alpha: axis + 1,
                offset,
                matrix: matrix_to_doc(&matrix),
            })
            .collect();
        SystemDocument {
            m: sys.num_axes(),
            n: sys.state_dim(),
            t0: sys.base_point().coords().to_vec(),
            kind,
            periods,
            coefficients,
            hicks,
        }
    }

    /// Validates the document and builds the system it describes.
    pub fn to_system(&self) -> Result<CoefficientSystem> {
        if self.m == 0 {
            return Err(Error::Document("m must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Document("n must be at least 1".into()));
        }
        if self.t0.len() != self.m {
            return Err(Error::Document(format!(
                "t0 has {} coordinates, m is {}",
                self.t0.len(),
                self.m
            )));
        }
        let t0 = MultiIndex::new(self.t0.clone()).map_err(doc_err)?;
        match self.kind.as_str() {
            "constant" => {
                let table = self.coefficient_map()?;
                // Constant systems carry one matrix per axis at offset zero.
                let mut matrices = Vec::with_capacity(self.m);
                for alpha in 0..self.m {
                    let key = (alpha, vec![0i64; self.m]);
                    let matrix = table.get(&key).ok_or_else(|| {
                        Error::Document(format!(
                            "constant system is missing the coefficient for alpha = {}",
                            alpha + 1
                        ))
                    })?;
                    matrices.push(matrix.clone());
                }
                if table.len() != self.m {
                    return Err(Error::Document(format!(
                        "constant system needs exactly {} coefficients at offset 0, got {}",
                        self.m,
                        table.len()
                    )));
                }
                CoefficientSystem::constant(t0, matrices).map_err(doc_err)
            }
            "multi_periodic_table" => {
                let periods = self.periods.clone().ok_or_else(|| {
                    Error::Document("multi_periodic_table systems need a `periods` field".into())
                })?;
                if periods.len() != self.m {
                    return Err(Error::Document(format!(
                        "periods has {} entries, m is {}",
                        periods.len(),
                        self.m
                    )));
                }
                let periods = PeriodVector::new(periods).map_err(doc_err)?;
                let extents = periods.extents();
                let tables = self.axis_tables(&extents)?;
                CoefficientSystem::multi_periodic(t0, periods, tables).map_err(doc_err)
            }
            "whole_lattice_table_window" => {
                let extents = self.window_extents()?;
                let tables = self.axis_tables(&extents)?;
                CoefficientSystem::window(t0, tables).map_err(doc_err)
            }
            "hicks" => {
                if !self.coefficients.is_empty() {
                    return Err(Error::Document(
                        "hicks systems carry their model in the `hicks` field, not in `coefficients`".into(),
                    ));
                }
                if self.n != 2 {
                    return Err(Error::Document(format!(
                        "the hicks model has state dimension 2, got n = {}",
                        self.n
                    )));
                }
                let model = self.hicks.as_ref().ok_or_else(|| {
                    Error::Document("hicks systems need a `hicks` model field".into())
                })?;
                let params = model.to_periodic_params()?;
                if self.t0.iter().any(|&c| c != 0) {
                    return Err(Error::Document(
                        "hicks systems are anchored at t0 = 0".into(),
                    ));
                }
                CoefficientSystem::hicks(params, self.m).map_err(doc_err)
            }
            other => Err(Error::Document(format!("unknown system kind `{other}`"))),
        }
    }

    /// All entries as a `(0-based axis, offset) -> matrix` map, rejecting
    /// duplicates, bad axis indices, and malformed matrices.
    fn coefficient_map(&self) -> Result<BTreeMap<(usize, Vec<i64>), CMatrix>> {
        let mut map = BTreeMap::new();
        for entry in &self.coefficients {
            if entry.alpha == 0 || entry.alpha > self.m {
                return Err(Error::Document(format!(
                    "alpha = {} is outside 1..={}",
                    entry.alpha, self.m
                )));
            }
            if entry.offset.len() != self.m {
                return Err(Error::Document(format!(
                    "offset {:?} has {} coordinates, m is {}",
                    entry.offset,
                    entry.offset.len(),
                    self.m
                )));
            }
            let matrix = matrix_from_doc(
                &entry.matrix,
                self.n,
                &format!("coefficient alpha = {} at offset {:?}", entry.alpha, entry.offset),
            )?;
            let key = (entry.alpha - 1, entry.offset.clone());
            if map.insert(key, matrix).is_some() {
                return Err(Error::Document(format!(
                    "duplicate coefficient for alpha = {} at offset {:?}",
                    entry.alpha, entry.offset
                )));
            }
        }
        Ok(map)
    }

    /// Per-axis offset tables covering exactly the box `prod extents`.
    fn axis_tables(&self, extents: &[usize]) -> Result<Vec<OffsetTable>> {
        let map = self.coefficient_map()?;
        let volume: usize = extents.iter().product();
        if map.len() != self.m * volume {
            return Err(Error::Document(format!(
                "expected {} coefficients ({} axes over a box of {} offsets), got {}",
                self.m * volume,
                self.m,
                volume,
                map.len()
            )));
        }
        (0..self.m)
            .map(|axis| {
                OffsetTable::from_fn(extents.to_vec(), |offset| {
                    let key = (axis, offset.iter().map(|&o| o as i64).collect::<Vec<_>>());
                    map.get(&key).cloned().ok_or_else(|| {
                        Error::Document(format!(
                            "missing coefficient for alpha = {} at offset {:?}",
                            axis + 1,
                            key.1
                        ))
                    })
                })
            })
            .collect()
    }

    /// Window shape inferred from the stored offsets: smallest box holding
    /// them all. Completeness is enforced by [`Self::axis_tables`].
    fn window_extents(&self) -> Result<Vec<usize>> {
        if self.coefficients.is_empty() {
            return Err(Error::Document(
                "window systems need at least one stored coefficient".into(),
            ));
        }
        let mut extents = vec![1usize; self.m];
        for entry in &self.coefficients {
            if entry.offset.len() != self.m {
                return Err(Error::Document(format!(
                    "offset {:?} has {} coordinates, m is {}",
                    entry.offset,
                    entry.offset.len(),
                    self.m
                )));
            }
            for (e, &o) in extents.iter_mut().zip(&entry.offset) {
                if o < 0 {
                    return Err(Error::Document(format!(
                        "window offsets are non-negative, got {:?}",
                        entry.offset
                    )));
                }
                *e = (*e).max(o as usize + 1);
            }
        }
        Ok(extents)
    }
}

/// The Hicks model document: constant parameters or one period of
/// coefficient functions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HicksModelDocument {
    Constant {
        gamma: ComplexPair,
        alpha: ComplexPair,
    },
    Periodic {
        #[serde(rename = "T")]
        period: u32,
        f_minus1: ComplexPair,
        f: Vec<ComplexPair>,
        g: Vec<ComplexPair>,
    },
}

/// A validated Hicks model, keeping the constant case distinct so the CLI
/// can use the closed-form solver for it.
#[derive(Debug, Clone)]
pub enum HicksModel {
    Constant(HicksConstantParams),
    Periodic(HicksPeriodicParams),
}

impl HicksModelDocument {
    pub fn from_constant(params: &HicksConstantParams) -> Self {
        HicksModelDocument::Constant {
            gamma: complex_to_pair(params.gamma()),
            alpha: complex_to_pair(params.alpha()),
        }
    }

    pub fn from_periodic(params: &HicksPeriodicParams) -> Self {
        let t = params.period();
        HicksModelDocument::Periodic {
            period: t as u32,
            f_minus1: complex_to_pair(params.f(-1)),
            f: (0..t as i64).map(|k| complex_to_pair(params.f(k))).collect(),
            g: (0..t as i64).map(|k| complex_to_pair(params.g(k))).collect(),
        }
    }

    pub fn to_model(&self) -> Result<HicksModel> {
        match self {
            HicksModelDocument::Constant { gamma, alpha } => {
                HicksConstantParams::new(complex_from_pair(*gamma), complex_from_pair(*alpha))
                    .map(HicksModel::Constant)
                    .map_err(doc_err)
            }
            HicksModelDocument::Periodic {
                period,
                f_minus1,
                f,
                g,
            } => {
                if f.len() != *period as usize || g.len() != *period as usize {
                    return Err(Error::Document(format!(
                        "T = {period} but f has {} values and g has {}",
                        f.len(),
                        g.len()
                    )));
                }
                HicksPeriodicParams::new(
                    complex_from_pair(*f_minus1),
                    f.iter().map(|&p| complex_from_pair(p)).collect(),
                    g.iter().map(|&p| complex_from_pair(p)).collect(),
                )
                .map(HicksModel::Periodic)
                .map_err(doc_err)
            }
        }
    }

    /// The model as periodic parameters; constant models become their T = 1
    /// periodic form.
    pub fn to_periodic_params(&self) -> Result<HicksPeriodicParams> {
        Ok(match self.to_model()? {
            HicksModel::Constant(p) => HicksPeriodicParams::constant(&p),
            HicksModel::Periodic(p) => p,
        })
    }
}

/// Compatibility sweep result as reported by the `check` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub t: Vec<i64>,
    /// 1-based axis pair.
    pub alpha: usize,
    pub beta: usize,
    pub residual: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckDocument {
    pub ok: bool,
    pub tol: f64,
    #[serde(rename = "box")]
    pub box_extents: Vec<i64>,
    pub points_checked: usize,
    /// Largest relative residual among the violations; 0 when ok.
    pub worst: f64,
    pub violations: Vec<ViolationEntry>,
}

impl CheckDocument {
    pub fn from_report(report: &CompatibilityReport) -> Self {
        CheckDocument {
            ok: report.ok,
            tol: report.tol,
            box_extents: report.box_extents.clone(),
            points_checked: report.points_checked,
            worst: report.worst(),
            violations: report
                .violations
                .iter()
                .map(|v| ViolationEntry {
                    t: v.t.coords().to_vec(),
                    alpha: v.axis_a + 1,
                    beta: v.axis_b + 1,
                    residual: v.residual,
                    scale: v.scale,
                })
                .collect(),
        }
    }
}

/// A single transition matrix, as emitted by the `transition` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionDocument {
    pub t: Vec<i64>,
    pub s: Vec<i64>,
    pub matrix: MatrixDoc,
}

/// Floquet decomposition export: the base point, the periods, the constant
/// factors, the stored `P` values keyed by comma-joined offsets, and the
/// multipliers of each monodromy (one list per factor).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionDocument {
    /// `multi` (per-axis periods, m factors) or `periodic` (one vector
    /// period, a single factor).
    pub mode: String,
    pub t0: Vec<i64>,
    #[serde(rename = "T")]
    pub period: Vec<i64>,
    #[serde(rename = "B")]
    pub b: Vec<MatrixDoc>,
    #[serde(rename = "P_table")]
    pub p_table: BTreeMap<String, MatrixDoc>,
    pub multipliers: Vec<Vec<ComplexPair>>,
}

fn offset_key(offset: &[usize]) -> String {
    offset
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn p_table_doc(table: &OffsetTable) -> BTreeMap<String, MatrixDoc> {
    table
        .iter()
        .map(|(offset, value)| (offset_key(&offset), matrix_to_doc(value)))
        .collect()
}

impl DecompositionDocument {
    pub fn from_multi(dec: &FloquetDecomposition) -> Result<Self> {
        let mut multipliers = Vec::with_capacity(dec.factors().len());
        for (axis, factor) in dec.factors().iter().enumerate() {
            let mono = factor.power(i64::from(dec.periods().get(axis)))?;
            multipliers.push(
                floquet_multipliers(&mono)?
                    .into_iter()
                    .map(complex_to_pair)
                    .collect(),
            );
        }
        Ok(DecompositionDocument {
            mode: "multi".into(),
            t0: dec.base_point().coords().to_vec(),
            period: dec.periods().as_slice().iter().map(|&p| i64::from(p)).collect(),
            b: dec.factors().iter().map(matrix_to_doc).collect(),
            p_table: p_table_doc(dec.p_stored()),
            multipliers,
        })
    }

    pub fn from_periodic(dec: &PeriodicDecomposition) -> Result<Self> {
        let mono = dec.factor().power(dec.period().total())?;
        let multipliers = vec![floquet_multipliers(&mono)?
            .into_iter()
            .map(complex_to_pair)
            .collect()];
        Ok(DecompositionDocument {
            mode: "periodic".into(),
            t0: dec.base_point().coords().to_vec(),
            period: dec.period().coords().to_vec(),
            b: vec![matrix_to_doc(dec.factor())],
            p_table: p_table_doc(dec.p_stored()),
            multipliers,
        })
    }
}

/// Multiplier list, with the determinant identity block present exactly
/// when the input was a Hicks model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultipliersDocument {
    pub multipliers: Vec<ComplexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<ComplexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<ComplexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_identity: Option<ComplexPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_identity_residual: Option<f64>,
}

impl MultipliersDocument {
    pub fn from_values(values: &[Complex64]) -> Self {
        MultipliersDocument {
            multipliers: values.iter().copied().map(complex_to_pair).collect(),
            trace: None,
            det: None,
            det_identity: None,
            det_identity_residual: None,
        }
    }

    pub fn from_hicks(m: &HicksMultipliers) -> Self {
        MultipliersDocument {
            multipliers: vec![complex_to_pair(m.lambda1), complex_to_pair(m.lambda2)],
            trace: Some(complex_to_pair(m.trace_monodromy)),
            det: Some(complex_to_pair(m.det_monodromy)),
            det_identity: Some(complex_to_pair(m.det_identity)),
            det_identity_residual: Some(m.det_identity_residual),
        }
    }
}

/// One stored `P` value of a synthesis request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PValueEntry {
    pub offset: Vec<i64>,
    pub matrix: MatrixDoc,
}

/// Input of the `synth` command: a periodic `P` table and commuting
/// factors, from which a compatible system is generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthDocument {
    pub m: usize,
    pub n: usize,
    pub t0: Vec<i64>,
    pub periods: Vec<u32>,
    pub p_values: Vec<PValueEntry>,
    #[serde(rename = "B")]
    pub b: Vec<MatrixDoc>,
}

impl SynthDocument {
    pub fn synthesize(&self) -> Result<CoefficientSystem> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Document("m and n must be at least 1".into()));
        }
        if self.t0.len() != self.m || self.periods.len() != self.m || self.b.len() != self.m {
            return Err(Error::Document(format!(
                "t0, periods and B must all have {} entries",
                self.m
            )));
        }
        let t0 = MultiIndex::new(self.t0.clone()).map_err(doc_err)?;
        let periods = PeriodVector::new(self.periods.clone()).map_err(doc_err)?;
        let extents = periods.extents();
        let volume: usize = extents.iter().product();
        let mut map = BTreeMap::new();
        for entry in &self.p_values {
            if entry.offset.len() != self.m {
                return Err(Error::Document(format!(
                    "P offset {:?} has {} coordinates, m is {}",
                    entry.offset,
                    entry.offset.len(),
                    self.m
                )));
            }
            let matrix = matrix_from_doc(
                &entry.matrix,
                self.n,
                &format!("P value at offset {:?}", entry.offset),
            )?;
            if map.insert(entry.offset.clone(), matrix).is_some() {
                return Err(Error::Document(format!(
                    "duplicate P value at offset {:?}",
                    entry.offset
                )));
            }
        }
        if map.len() != volume {
            return Err(Error::Document(format!(
                "expected {volume} P values over the fundamental domain, got {}",
                map.len()
            )));
        }
        let table = OffsetTable::from_fn(extents, |offset| {
            let key: Vec<i64> = offset.iter().map(|&o| o as i64).collect();
            map.get(&key).cloned().ok_or_else(|| {
                Error::Document(format!("missing P value at offset {key:?}"))
            })
        })?;
        let p = PeriodicTable::new(periods, table).map_err(doc_err)?;
        let b = self
            .b
            .iter()
            .enumerate()
            .map(|(axis, doc)| matrix_from_doc(doc, self.n, &format!("B_{}", axis + 1)))
            .collect::<Result<Vec<_>>>()?;
        synthesize_compatible(&p, &b, &t0)
    }
}

fn doc_err(e: Error) -> Error {
    match e {
        Error::Document(_) => e,
        other => Error::Document(other.to_string()),
    }
}

/// Serializes any document deterministically: keys sorted, two-space
/// indentation, shortest round-trip floats, trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    // Routing through Value sorts object keys (its map is ordered by key).
    let v = serde_json::to_value(value)
        .map_err(|e| Error::Document(format!("serialization failed: {e}")))?;
    let mut out = serde_json::to_string_pretty(&v)
        .map_err(|e| Error::Document(format!("serialization failed: {e}")))?;
    out.push('\n');
    Ok(out)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Document(format!("invalid document: {e}")))
}

fn push_float(out: &mut String, x: f64) {
    // `{}` on f64 is the shortest representation that round-trips.
    let _ = write!(out, "{x}");
}

fn csv_point_columns(out: &mut String, t: &MultiIndex) {
    for (i, &c) in t.coords().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{c}");
    }
}

/// Trajectory CSV for a general system: columns `t1..tm`, then
/// `Re_x1,Im_x1,..,Re_xn,Im_xn`, one row per box point in lexicographic
/// order.
pub fn trajectory_csv(m: usize, n: usize, rows: &[(MultiIndex, Vec<Complex64>)]) -> String {
    let mut out = String::new();
    for axis in 1..=m {
        if axis > 1 {
            out.push(',');
        }
        let _ = write!(out, "t{axis}");
    }
    for state in 1..=n {
        let _ = write!(out, ",Re_x{state},Im_x{state}");
    }
    out.push('\n');
    for (t, values) in rows {
        csv_point_columns(&mut out, t);
        for v in values {
            out.push(',');
            push_float(&mut out, v.re);
            out.push(',');
            push_float(&mut out, v.im);
        }
        out.push('\n');
    }
    out
}

/// Trajectory CSV for the Hicks model: columns `t1..tm`, then the income
/// and consumption components, fixed header names.
pub fn hicks_csv(m: usize, rows: &[(MultiIndex, HicksState)]) -> String {
    let mut out = String::new();
    for axis in 1..=m {
        if axis > 1 {
            out.push(',');
        }
        let _ = write!(out, "t{axis}");
    }
    out.push_str(",Re_Y,Im_Y,Re_C,Im_C\n");
    for (t, state) in rows {
        csv_point_columns(&mut out, t);
        for v in [state.income, state.consumption] {
            out.push(',');
            push_float(&mut out, v.re);
            out.push(',');
            push_float(&mut out, v.im);
        }
        out.push('\n');
    }
    out
}
