//! Dense square complex matrices and the scalar helpers the crate leans on.
//!
//! [`CMatrix`] wraps a dynamically sized `nalgebra` matrix over `Complex64`
//! and restricts it to the square shapes the recurrence theory uses.
//! Multiplication, LU-based determinants and inverses, and adjoints come
//! from `nalgebra`; powers, the scale-aware invertibility test, and the
//! structural predicates are thin layers on top.
//!
//! The scalar helpers fix the branch conventions used everywhere:
//! [`principal_kth_root`] takes the argument in `[0, 2*pi)` so the root of a
//! negative real sits in the upper half plane, and [`quadratic_roots`]
//! solves `x^2 - tr*x + det = 0` with the cancellation-free pairing.

use crate::error::{Error, Result};
use crate::tol;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::ops::Mul;

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<Complex64>,
}

impl CMatrix {
    /// Builds a matrix from rows. Rejects empty and non-square shapes.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "expected a square {n} x {n} matrix"
            )));
        }
        let inner = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        Ok(CMatrix { inner })
    }

    /// Builds a matrix from real entries, row major. Test and model helper.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        CMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        Ok(CMatrix {
            inner: DMatrix::from_fn(n, n, f),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| Complex64::new(0.0, 0.0))
    }

    /// Side length `n`.
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.inner[(row, col)] = value;
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.inner[(r, c)]).collect())
            .collect()
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim(), other.dim(), "matrix dimensions must agree");
        CMatrix {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim(), other.dim(), "matrix dimensions must agree");
        CMatrix {
            inner: &self.inner - &other.inner,
        }
    }

    pub fn scale(&self, factor: Complex64) -> CMatrix {
        CMatrix {
            inner: self.inner.map(|z| z * factor),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn determinant(&self) -> Complex64 {
        self.inner.determinant()
    }

    /// Matrix-vector product.
    pub fn mul_vector(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dimension {n} times vector of length {}",
                v.len()
            )));
        }
        Ok((0..n)
            .map(|r| (0..n).map(|c| self.inner[(r, c)] * v[c]).sum())
            .collect())
    }

    /// Largest entry modulus. Scale reference for relative comparisons.
    pub fn max_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Componentwise distance `max |a_ij - b_ij|`.
    pub fn max_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "matrix dimensions must agree");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Relative componentwise equality at tolerance `tol`.
    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.max_diff(other) <= tol * rel_scale2(self, other)
    }

    /// The scaled determinant cutoff below which this matrix is treated as
    /// singular: `TOL_DET_BASE * max(1, |M|_max)^n`.
    pub fn singularity_cutoff(&self) -> f64 {
        tol::TOL_DET_BASE * tol::scale_floor(self.max_norm()).powi(self.dim() as i32)
    }

    /// Determinant test against the scaled cutoff.
    pub fn is_invertible(&self) -> bool {
        self.determinant().norm() > self.singularity_cutoff()
    }

    /// LU inverse. Fails with the measured determinant when the matrix is
    /// numerically singular.
    pub fn inverse(&self) -> Result<CMatrix> {
        let det_abs = self.determinant().norm();
        let cutoff = self.singularity_cutoff();
        if det_abs <= cutoff {
            return Err(Error::SingularMatrix { det_abs, cutoff });
        }
        match self.inner.clone().try_inverse() {
            Some(inv) => Ok(CMatrix { inner: inv }),
            None => Err(Error::SingularMatrix { det_abs, cutoff }),
        }
    }

    /// Integer power by repeated squaring. Negative exponents invert first,
    /// so they fail on singular input. `power(M, 0)` is the identity.
    pub fn power(&self, k: i64) -> Result<CMatrix> {
        if k == 0 {
            return CMatrix::identity(self.dim());
        }
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut exp = k.unsigned_abs();
        let mut acc = CMatrix::identity(self.dim())?;
        let mut sq = base;
        loop {
            if exp & 1 == 1 {
                acc = &acc * &sq;
            }
            exp >>= 1;
            if exp == 0 {
                break;
            }
            sq = &sq * &sq;
        }
        Ok(acc)
    }

    /// Hermitian test at the structural tolerance, relative to the entry
    /// scale.
    pub fn is_hermitian(&self) -> bool {
        let scale = tol::scale_floor(self.max_norm());
        self.max_diff(&self.adjoint()) <= tol::TOL_STRUCT * scale
    }

    /// Distance to the identity, for structural checks.
    pub fn is_identity(&self, tol: f64) -> bool {
        let id = CMatrix::identity(self.dim()).expect("dim >= 1");
        self.max_diff(&id) <= tol * tol::scale_floor(self.max_norm())
    }

    /// `max |AB - BA|`, the commutation residual.
    pub fn commutator_norm(&self, other: &CMatrix) -> f64 {
        let ab = self * other;
        let ba = other * self;
        ab.max_diff(&ba)
    }

    pub(crate) fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    /// Wraps a matrix known to be square.
    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        CMatrix { inner }
    }
}

/// Shared scale `max(1, |A|_max, |B|_max)` for relative comparisons.
pub(crate) fn rel_scale2(a: &CMatrix, b: &CMatrix) -> f64 {
    tol::scale_floor(a.max_norm().max(b.max_norm()))
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on dimension mismatch; public entry points validate shapes at
    /// construction so interior products always agree.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix dimensions must agree");
        CMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim() {
            write!(f, "[")?;
            for c in 0..self.dim() {
                if c > 0 {
                    write!(f, ", ")?;
                }
                let z = self.inner[(r, c)];
                write!(f, "{:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Principal `k`-th root with the argument taken in `[0, 2*pi)`.
///
/// The root of `r e^(i theta)` is `r^(1/k) e^(i theta / k)`, so results land
/// in the sector `[0, 2*pi/k)`; in particular the root of a negative real
/// number lies in the upper half plane. `k = 1` returns the input unchanged.
pub fn principal_kth_root(z: Complex64, k: u32) -> Complex64 {
    assert!(k >= 1, "root order must be positive");
    if k == 1 {
        return z;
    }
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut theta = z.arg();
    if theta < 0.0 {
        theta += 2.0 * std::f64::consts::PI;
    }
    Complex64::from_polar(r.powf(1.0 / f64::from(k)), theta / f64::from(k))
}

/// Roots of `x^2 - tr*x + det = 0`, ordered by real part, then imaginary
/// part.
///
/// The larger-magnitude root is computed from the quadratic formula with the
/// sign that avoids cancellation; the other follows from the product of the
/// roots.
pub fn quadratic_roots(tr: Complex64, det: Complex64) -> (Complex64, Complex64) {
    let disc = tr * tr - det.scale(4.0);
    let mut s = disc.sqrt();
    if (tr.conj() * s).re < 0.0 {
        s = -s;
    }
    let big = (tr + s).unscale(2.0);
    let small = if big.norm() > 0.0 { det / big } else { big };
    order_pair(big, small)
}

fn order_pair(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    if (a.re, a.im) <= (b.re, b.im) {
        (a, b)
    } else {
        (b, a)
    }
}
