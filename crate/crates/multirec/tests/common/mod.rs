//! Seeded generators and reference fixtures shared by the integration suites.
//!
//! Everything here is driven by an explicit ChaCha8 stream so that any failing
//! case can be replayed from its seed alone.

#![allow(dead_code)] // each test binary uses its own subset

use multirec::{
    synthesize_compatible, BoxIter, CMatrix, CoefficientSystem, Complex64, HicksConstantParams,
    HicksPeriodicParams, MultiIndex, OffsetTable, PeriodVector, PeriodicTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mi(coords: &[i64]) -> MultiIndex {
    MultiIndex::new(coords.to_vec()).unwrap()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// All lattice points of `t0 + [0, corners]`, corners inclusive.
pub fn box_points(t0: &MultiIndex, corners: &[i64]) -> Vec<MultiIndex> {
    BoxIter::new(corners)
        .unwrap()
        .map(|off| t0.add(&mi(&off)).unwrap())
        .collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| random_complex(rng)).unwrap()
}

/// Gram-Schmidt on a random complex square matrix. Retries the (measure zero)
/// draws whose columns come out nearly dependent.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..n)
            .map(|_| (0..n).map(|_| random_complex(rng)).collect())
            .collect();
        let mut ok = true;
        'columns: for j in 0..n {
            for k in 0..j {
                let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..n {
                    let base = cols[k][i];
                    cols[j][i] -= proj * base;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                ok = false;
                break 'columns;
            }
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
        if ok {
            return CMatrix::from_fn(n, |i, j| cols[j][i]).unwrap();
        }
    }
}

/// Eigenvalues drawn from an annulus away from the origin, resampled until
/// pairwise separated. Bounded spectra keep powers and inverses tame; the
/// separation keeps eigenbasis extraction well conditioned for every seed.
pub fn random_spectrum(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let d: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::from_polar(
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        if (0..n).all(|i| (0..i).all(|j| (d[i] - d[j]).norm() >= 0.05)) {
            return d;
        }
    }
}

/// An invertible commuting family sharing one random unitary eigenbasis.
pub fn random_commuting_family(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<CMatrix> {
    let v = random_unitary(rng, n);
    let v_inv = v.adjoint();
    (0..count)
        .map(|_| {
            let d = random_spectrum(rng, n);
            let dv = CMatrix::from_fn(n, |i, j| d[i] * v_inv.get(i, j)).unwrap();
            &v * &dv
        })
        .collect()
}

pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    random_commuting_family(rng, n, 1).pop().unwrap()
}

pub fn random_periods(rng: &mut ChaCha8Rng, m: usize) -> Vec<u32> {
    (0..m).map(|_| rng.gen_range(1..=3)).collect()
}

/// Synthesizes a compatible multi-periodic system from freely chosen Floquet
/// data: unitary values of `P` over the period box and a commuting invertible
/// family for the axis factors.
pub fn random_system(seed: u64, m: usize, n: usize, periods: &[u32]) -> CoefficientSystem {
    let mut r = rng(seed);
    let pv = PeriodVector::new(periods.to_vec()).unwrap();
    let extents = pv.extents();
    let volume: usize = extents.iter().product();
    let values: Vec<CMatrix> = (0..volume).map(|_| random_unitary(&mut r, n)).collect();
    let table = OffsetTable::new(extents, values).unwrap();
    let p = PeriodicTable::new(pv, table).unwrap();
    let b = random_commuting_family(&mut r, n, m);
    synthesize_compatible(&p, &b, &MultiIndex::zeros(m).unwrap()).unwrap()
}

/// The same system with a single table entry bumped. A local bump generically
/// breaks the crossed-product identity, which is what the compatibility
/// checker is supposed to catch.
pub fn perturbed_copy(sys: &CoefficientSystem, bump: f64) -> CoefficientSystem {
    let periods = sys.periods().expect("a table-backed system");
    let extents = periods.extents();
    let m = sys.num_axes();
    let mut map: BTreeMap<(usize, Vec<i64>), CMatrix> = sys
        .coefficient_entries()
        .into_iter()
        .map(|(axis, offset, mat)| ((axis, offset), mat))
        .collect();
    let first = map.keys().next().unwrap().clone();
    let entry = map.get_mut(&first).unwrap();
    let bumped = entry.get(0, 0) + Complex64::new(bump, 0.0);
    entry.set(0, 0, bumped);
    let tables: Vec<OffsetTable> = (0..m)
        .map(|axis| {
            OffsetTable::from_fn(extents.clone(), |offset| {
                let key: Vec<i64> = offset.iter().map(|&o| o as i64).collect();
                Ok(map[&(axis, key)].clone())
            })
            .unwrap()
        })
        .collect();
    CoefficientSystem::multi_periodic(sys.base_point().clone(), periods, tables).unwrap()
}

/// Left-multiplies coefficients along a uniformly random monotone staircase
/// from `s` up to `t`.
pub fn random_path_product(
    sys: &CoefficientSystem,
    t: &MultiIndex,
    s: &MultiIndex,
    rng: &mut ChaCha8Rng,
) -> CMatrix {
    let mut acc = CMatrix::identity(sys.state_dim()).unwrap();
    let mut at = s.clone();
    let mut remaining: Vec<i64> = (0..s.dim()).map(|a| t.get(a) - s.get(a)).collect();
    while remaining.iter().any(|&r| r > 0) {
        let live: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r > 0)
            .map(|(a, _)| a)
            .collect();
        let axis = live[rng.gen_range(0..live.len())];
        acc = &sys.coefficient(axis, &at).unwrap() * &acc;
        at = at.step(axis, 1).unwrap();
        remaining[axis] -= 1;
    }
    acc
}

/// Planar rotation by `pi / half_turns`, block-extended to dimension n.
pub fn rotation_q(half_turns: u32, n: usize) -> CMatrix {
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
pub fn reflection_s(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |r, cl| match (r, cl) {
        (1, 1) => c(-1.0, 0.0),
        _ if r == cl => c(1.0, 0.0),
        _ => c(0.0, 0.0),
    })
    .unwrap()
}

/// Two-axis system with `A_1(t) = Q^{2 t^2} S` (period 1 along the first axis,
/// `t2_period` along the second) and constant `A_2 = Q`, where `Q` rotates by
/// `pi / t2_period`. Its transition matrix has the closed form
/// `Q^{t^2} S^{t^1 - s^1} Q^{-s^2}`.
pub fn rotation_reflection_system(t2_period: u32, n: usize) -> CoefficientSystem {
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

pub fn rotation_closed_form(t2_period: u32, n: usize, t: &[i64], s: &[i64]) -> CMatrix {
    let q = rotation_q(t2_period, n);
    let refl = reflection_s(n);
    let a = &q.power(t[1]).unwrap() * &refl.power(t[0] - s[0]).unwrap();
    &a * &q.power(-s[1]).unwrap()
}

pub fn random_hicks_constant(rng: &mut ChaCha8Rng) -> HicksConstantParams {
    loop {
        let gamma = c(rng.gen_range(0.1..1.8), 0.0);
        let alpha = c(rng.gen_range(0.1..1.8), 0.0);
        if let Ok(p) = HicksConstantParams::new(gamma, alpha) {
            return p;
        }
    }
}

/// Periodic accelerator-multiplier draw. Rejects draws with any `f + g` within
/// 1e-6 of 0 or 1 and any coefficient that small in magnitude, which keeps the
/// construction away from its degenerate guard and the monodromy comparisons
/// well scaled.
pub fn random_hicks_periodic(rng: &mut ChaCha8Rng, period: usize) -> HicksPeriodicParams {
    loop {
        let f_minus1 = c(rng.gen_range(0.2..1.5), 0.0);
        let f: Vec<Complex64> = (0..period).map(|_| c(rng.gen_range(0.2..1.5), 0.0)).collect();
        let g: Vec<Complex64> = (0..period).map(|_| c(rng.gen_range(0.2..1.5), 0.0)).collect();
        let degenerate = f.iter().zip(&g).any(|(fv, gv)| {
            let s = fv + gv;
            s.norm() < 1e-6 || (s - c(1.0, 0.0)).norm() < 1e-6
        });
        if degenerate {
            continue;
        }
        if let Ok(p) = HicksPeriodicParams::new(f_minus1, f, g) {
            return p;
        }
    }
}

/// Like [`random_hicks_periodic`] but with `f(-1) = f(T-1)`, so the induced
/// coefficient field is genuinely shift-periodic (no seam at level 0).
pub fn random_hicks_fully_periodic(rng: &mut ChaCha8Rng, period: usize) -> HicksPeriodicParams {
    loop {
        let f: Vec<Complex64> = (0..period).map(|_| c(rng.gen_range(0.2..1.5), 0.0)).collect();
        let g: Vec<Complex64> = (0..period).map(|_| c(rng.gen_range(0.2..1.5), 0.0)).collect();
        let degenerate = f.iter().zip(&g).any(|(fv, gv)| {
            let s = fv + gv;
            s.norm() < 1e-6 || (s - c(1.0, 0.0)).norm() < 1e-6
        });
        if degenerate {
            continue;
        }
        if let Ok(p) = HicksPeriodicParams::fully_periodic(f, g) {
            return p;
        }
    }
}
