//! Complex Schur form and eigendecomposition for small dense matrices.
//!
//! The solver follows the classical dense path: a unitary Householder
//! reduction to upper Hessenberg form, then a single-shift QR iteration with
//! Wilkinson shifts and Givens rotations until the matrix deflates to upper
//! triangular Schur form `M = U T U^H`. Eigenvalues are the diagonal of `T`;
//! eigenvectors come from back-substitution on `(T - lambda I) y = 0` and a
//! rotation back through `U`.
//!
//! Repeated eigenvalues make the back-substitution denominators vanish; they
//! are floored at `eps * |T|`, which leaves eigenvectors of genuinely
//! diagonalizable matrices untouched and produces nearly parallel columns
//! for defective ones. The [`Eigen::is_diagonalizable`] flag is the
//! determinant of the unit-column eigenvector matrix measured against
//! [`tol::DIAG_DET_CUTOFF`]: a defective matrix splits its eigenvalues at
//! the square root of machine precision, so its eigenbasis determinant
//! lands around `1e-8`, orders of magnitude below the cutoff.

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::tol;
use nalgebra::DMatrix;
use num_complex::Complex64;

type M = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigendecomposition result. `vectors` holds unit-norm eigenvectors as
/// columns, in the order of `values`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
    /// Determinant test on the unit-column eigenvector matrix; `false`
    /// means the eigenbasis is too ill conditioned to trust, i.e. the
    /// matrix is numerically defective.
    pub is_diagonalizable: bool,
    /// `max_k |M v_k - lambda_k v_k|` relative to `max(1, |M|_max)`.
    pub residual: f64,
}

/// Full eigendecomposition of a square complex matrix of dimension at most
/// [`tol::MAX_EIGEN_DIM`].
pub fn eigendecompose(m: &CMatrix) -> Result<Eigen> {
    let n = m.dim();
    if n > tol::MAX_EIGEN_DIM {
        return Err(Error::DimensionCap {
            n,
            cap: tol::MAX_EIGEN_DIM,
        });
    }

    let mut t = m.as_inner().clone();
    let mut u = M::identity(n, n);
    hessenberg(&mut t, &mut u);
    schur(&mut t, &mut u)?;

    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let vectors = eigenvectors(&t, &u);

    let vmat = CMatrix::from_inner(vectors.clone());
    let is_diagonalizable = vmat.determinant().norm() > tol::DIAG_DET_CUTOFF;

    let scale = tol::scale_floor(m.max_norm());
    let mut residual = 0.0_f64;
    for k in 0..n {
        for r in 0..n {
            let mut mv = ZERO;
            for c in 0..n {
                mv += m.get(r, c) * vectors[(c, k)];
            }
            residual = residual.max((mv - values[k] * vectors[(r, k)]).norm());
        }
    }

    Ok(Eigen {
        values,
        vectors: vmat,
        is_diagonalizable,
        residual: residual / scale,
    })
}

/// Unitary reduction to upper Hessenberg form: `A <- P A P` with Householder
/// reflectors accumulated into `u`.
fn hessenberg(a: &mut M, u: &mut M) {
    let n = a.nrows();
    for col in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (col + 1..n).map(|r| a[(r, col)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            ONE
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sqr;

        // Left: rows col+1.., columns col.. of A.
        for j in col..n {
            let mut w = ZERO;
            for r in col + 1..n {
                w += v[r - col - 1].conj() * a[(r, j)];
            }
            w *= beta;
            for r in col + 1..n {
                let vr = v[r - col - 1];
                a[(r, j)] -= w * vr;
            }
        }
        // Right: columns col+1.., all rows, applied to both A and U.
        for mat in [&mut *a, &mut *u] {
            for r in 0..n {
                let mut w = ZERO;
                for j in col + 1..n {
                    w += mat[(r, j)] * v[j - col - 1];
                }
                w *= beta;
                for j in col + 1..n {
                    let vj = v[j - col - 1].conj();
                    mat[(r, j)] -= w * vj;
                }
            }
        }
        // The reflector maps the pivot column onto alpha * e1 exactly.
        a[(col + 1, col)] = alpha;
        for r in col + 2..n {
            a[(r, col)] = ZERO;
        }
    }
}

fn subdiag_negligible(h: &M, i: usize, hnorm: f64) -> bool {
    let mut s = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
    if s == 0.0 {
        s = hnorm;
    }
    if s == 0.0 {
        return true;
    }
    h[(i, i - 1)].norm() <= f64::EPSILON * s
}

/// Single-shift QR iteration driving a Hessenberg matrix to triangular
/// Schur form, unitary transforms accumulated into `u`.
fn schur(h: &mut M, u: &mut M) -> Result<()> {
    let n = h.nrows();
    if n <= 1 {
        return Ok(());
    }
    let hnorm = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cap = tol::EIGEN_MAX_SWEEPS_PER_EIGENVALUE * n;
    let mut hi = n - 1;
    let mut stall = 0usize;
    let mut total = 0usize;

    while hi > 0 {
        if subdiag_negligible(h, hi, hnorm) {
            h[(hi, hi - 1)] = ZERO;
            hi -= 1;
            stall = 0;
            continue;
        }
        let mut lo = hi;
        while lo > 0 && !subdiag_negligible(h, lo, hnorm) {
            lo -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = ZERO;
        }

        stall += 1;
        total += 1;
        if total > cap {
            return Err(Error::EigenNonConvergence { n, sweeps: total });
        }
        let shift = if stall % 12 == 0 {
            // Exceptional shift to break rare symmetric cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };
        qr_step(h, u, lo, hi, shift);
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block closest to the corner entry.
fn wilkinson_shift(h: &M, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let (r1, r2) = crate::matrix::quadratic_roots(a + d, a * d - b * c);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Givens parameters `(c, s)` with `conj(c) a + conj(s) b` real non-negative
/// and `-s a + c b = 0`.
fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (ONE, ZERO);
    }
    (a / r, b / r)
}

/// One explicit shifted QR step `H - sigma I = QR`, `H <- RQ + sigma I` on
/// the active window `[lo, hi]`, with coupling blocks updated for global
/// similarity.
fn qr_step(h: &mut M, u: &mut M, lo: usize, hi: usize, shift: Complex64) {
    let n = h.nrows();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        for j in i..n {
            let a = h[(i, j)];
            let b = h[(i + 1, j)];
            h[(i, j)] = c.conj() * a + s.conj() * b;
            h[(i + 1, j)] = -(s * a) + c * b;
        }
        rots.push((c, s));
    }
    for (k, (c, s)) in rots.iter().enumerate() {
        let i = lo + k;
        for r in 0..=i + 1 {
            let a = h[(r, i)];
            let b = h[(r, i + 1)];
            h[(r, i)] = a * c + b * s;
            h[(r, i + 1)] = -(a * s.conj()) + b * c.conj();
        }
        for r in 0..n {
            let a = u[(r, i)];
            let b = u[(r, i + 1)];
            u[(r, i)] = a * c + b * s;
            u[(r, i + 1)] = -(a * s.conj()) + b * c.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Eigenvectors of the original matrix from its Schur pair: solve the
/// triangular system `(T - lambda_k) y = 0` for each diagonal entry, then
/// map through `U`. Vanishing denominators (repeated eigenvalues) are
/// floored; the result is still meaningful for diagonalizable matrices and
/// degrades to nearly parallel columns for defective ones.
fn eigenvectors(t: &M, u: &M) -> M {
    let n = t.nrows();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smallnum = f64::EPSILON * tol::scale_floor(tnorm);
    let mut v = M::zeros(n, n);

    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![ZERO; n];
        y[k] = ONE;
        for i in (0..k).rev() {
            let mut num = ZERO;
            for j in i + 1..=k {
                num += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smallnum {
                d = Complex64::new(smallnum, 0.0);
            }
            y[i] = -num / d;
            // Keep the growth of nearly singular solves bounded.
            let ynorm = y[i].norm();
            if ynorm > 1e100 {
                for yj in y.iter_mut() {
                    *yj /= ynorm;
                }
            }
        }
        let mut w = vec![ZERO; n];
        for (j, &yj) in y.iter().enumerate().take(k + 1) {
            if yj == ZERO {
                continue;
            }
            for r in 0..n {
                w[r] += u[(r, j)] * yj;
            }
        }
        let wnorm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            v[(r, k)] = w[r] / wnorm;
        }
    }
    v
}
