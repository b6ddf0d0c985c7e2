//! Property suites over seeded random inputs: lattice order laws, matrix
//! powers, eigendecomposition, the transition-matrix identities, Floquet
//! round trips, commuting roots, and the accelerator-multiplier model.

mod common;

use common::*;
use multirec::tol::TOL_ROOT_RESIDUAL;
use multirec::{
    commuting_roots, decompose_multi, decompose_periodic, eigendecompose, monodromy_periodic,
    power_closed_form, CMatrix, Complex64, PeriodVector,
};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_order_laws(
        coords in prop::collection::vec(-5i64..5, 1..4),
        deltas in prop::collection::vec((0i64..4, 0i64..4), 1..4),
    ) {
        let m = coords.len().min(deltas.len());
        let d1: Vec<i64> = deltas[..m].iter().map(|d| d.0).collect();
        let d2: Vec<i64> = deltas[..m].iter().map(|d| d.1).collect();
        let t = mi(&coords[..m]);
        let u = t.add(&mi(&d1)).unwrap();
        let v = u.add(&mi(&d2)).unwrap();

        prop_assert!(t.leq(&t).unwrap());
        prop_assert!(t.leq(&u).unwrap());
        prop_assert!(u.leq(&v).unwrap());
        prop_assert!(t.leq(&v).unwrap());
        if d1.iter().any(|&d| d > 0) {
            prop_assert!(!u.leq(&t).unwrap());
        }
        prop_assert_eq!(
            v.total(),
            t.total() + d1.iter().sum::<i64>() + d2.iter().sum::<i64>()
        );
        prop_assert_eq!(v.sub(&mi(&d2)).unwrap(), u);
    }

    #[test]
    fn step_adjusts_one_axis(
        coords in prop::collection::vec(-3i64..3, 1..4),
        axis_pick in 0usize..16,
        k in -3i64..4,
    ) {
        let t = mi(&coords);
        let axis = axis_pick % coords.len();
        let stepped = t.step(axis, k).unwrap();
        prop_assert_eq!(stepped.get(axis), t.get(axis) + k);
        prop_assert_eq!(stepped.total(), t.total() + k);
        for other in 0..coords.len() {
            if other != axis {
                prop_assert_eq!(stepped.get(other), t.get(other));
            }
        }
    }

    #[test]
    fn matrix_power_addition(seed in any::<u64>(), n in 1usize..=4, j in -3i64..=3, k in -3i64..=3) {
        let mut r = rng(seed);
        let a = random_invertible(&mut r, n);
        let joint = a.power(j + k).unwrap();
        let split = &a.power(j).unwrap() * &a.power(k).unwrap();
        prop_assert!(joint.max_diff(&split) <= 1e-9 * (1.0 + joint.max_norm()));
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let m = random_matrix(&mut r, n);
        let e = eigendecompose(&m).unwrap();
        let scale = 1.0 + m.max_norm();

        let tr: Complex64 = e.values.iter().sum();
        let det: Complex64 = e.values.iter().product();
        prop_assert!((tr - m.trace()).norm() <= 1e-7 * scale);
        prop_assert!((det - m.determinant()).norm() <= 1e-7 * scale.powi(n as i32));

        if e.is_diagonalizable {
            let v_inv = e.vectors.inverse().unwrap();
            let lam_vinv = CMatrix::from_fn(n, |i, j| e.values[i] * v_inv.get(i, j)).unwrap();
            let rebuilt = &e.vectors * &lam_vinv;
            // error amplified by the basis conditioning, so budget for it
            let cond = e.vectors.max_norm() * v_inv.max_norm();
            prop_assert!(m.max_diff(&rebuilt) <= 1e-7 * scale * (1.0 + cond));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transition_laws_hold_on_synthesized_systems(
        seed in any::<u64>(),
        m in 2usize..=3,
        n in 2usize..=3,
    ) {
        let mut r = rng(seed);
        let periods = random_periods(&mut r, m);
        let sys = random_system(seed ^ 0x5e5e, m, n, &periods);
        let t0 = sys.base_point().clone();

        let base: Vec<i64> = (0..m).map(|_| r.gen_range(0..=1)).collect();
        let d1: Vec<i64> = (0..m).map(|_| r.gen_range(0..=2)).collect();
        let d2: Vec<i64> = (0..m).map(|_| r.gen_range(0..=2)).collect();
        let r0 = t0.add(&mi(&base)).unwrap();
        let s = r0.add(&mi(&d1)).unwrap();
        let t = s.add(&mi(&d2)).unwrap();

        let chi_ts = sys.transition(&t, &s).unwrap();
        let chi_sr = sys.transition(&s, &r0).unwrap();
        let chi_tr = sys.transition(&t, &r0).unwrap();
        let scale = 1.0 + chi_tr.max_norm();

        // cocycle composition
        prop_assert!((&chi_ts * &chi_sr).max_diff(&chi_tr) <= 1e-9 * scale);

        // invertibility, and recovering a leg through the inverse
        prop_assert!(chi_sr.is_invertible());
        let recovered = &chi_tr * &chi_sr.inverse().unwrap();
        prop_assert!(recovered.max_diff(&chi_ts) <= 1e-8 * (1.0 + chi_ts.max_norm()));

        // shifting the target by k steps multiplies by a staggered product
        for axis in 0..m {
            for k in 1..=2u32 {
                let shifted = sys.transition(&t.step(axis, k.into()).unwrap(), &s).unwrap();
                let c = sys.c_product(axis, k, &t).unwrap();
                prop_assert!(
                    (&c * &chi_ts).max_diff(&shifted) <= 1e-9 * (1.0 + shifted.max_norm())
                );
            }
        }

        // crossed staggered products commute
        for a in 0..m {
            for b in (a + 1)..m {
                let ca_up = sys.c_product(a, 2, &t.step(b, 1).unwrap()).unwrap();
                let cb = sys.c_product(b, 1, &t).unwrap();
                let cb_up = sys.c_product(b, 1, &t.step(a, 2).unwrap()).unwrap();
                let ca = sys.c_product(a, 2, &t).unwrap();
                let left = &ca_up * &cb;
                let right = &cb_up * &ca;
                prop_assert!(left.max_diff(&right) <= 1e-9 * (1.0 + left.max_norm()));
            }
        }

        // every monotone staircase gives the same product
        for _ in 0..3 {
            let path = random_path_product(&sys, &t, &r0, &mut r);
            prop_assert!(path.max_diff(&chi_tr) <= 1e-9 * scale);
        }
    }

    #[test]
    fn periodicity_moves_nothing_and_monodromy_powers_iterate(
        seed in any::<u64>(),
        m in 2usize..=3,
        n in 2usize..=3,
    ) {
        let mut r = rng(seed);
        let periods = random_periods(&mut r, m);
        let sys = random_system(seed ^ 0x77aa, m, n, &periods);
        let t0 = sys.base_point().clone();
        let off: Vec<i64> = (0..m).map(|_| r.gen_range(0..=2)).collect();
        let t = t0.add(&mi(&off)).unwrap();

        // staggered products are invariant under a full period shift
        for alpha in 0..m {
            let c_here = sys.c_product(alpha, 2, &t).unwrap();
            for beta in 0..m {
                let moved = sys
                    .c_product(alpha, 2, &t.step(beta, periods[beta] as i64).unwrap())
                    .unwrap();
                prop_assert!(moved.max_diff(&c_here) <= 1e-9 * (1.0 + c_here.max_norm()));
            }
        }

        // chi(t0 + p T, t0) = C(t0)^p for the full vector period
        let t_vec = mi(&periods.iter().map(|&p| i64::from(p)).collect::<Vec<_>>());
        let mono = monodromy_periodic(&sys, &t_vec).unwrap();
        for p in 1..=3i64 {
            let target = t0
                .add(&mi(&periods.iter().map(|&q| p * i64::from(q)).collect::<Vec<_>>()))
                .unwrap();
            let chi = sys.transition(&target, &t0).unwrap();
            let pw = mono.power(p).unwrap();
            prop_assert!(chi.max_diff(&pw) <= 1e-8 * (1.0 + pw.max_norm()));
        }
    }

    #[test]
    fn floquet_reconstruction_and_lift(seed in any::<u64>(), m in 2usize..=3, n in 2usize..=3) {
        let mut r = rng(seed);
        let periods = random_periods(&mut r, m);
        let sys = random_system(seed ^ 0x0f10, m, n, &periods);
        let pv = PeriodVector::new(periods.clone()).unwrap();
        let dec = decompose_multi(&sys, &pv, seed).unwrap();
        let t0 = sys.base_point().clone();

        let off: Vec<i64> = (0..m).map(|_| r.gen_range(0..=3)).collect();
        let t = t0.add(&mi(&off)).unwrap();
        let phi = sys.transition(&t, &t0).unwrap();
        let rebuilt = dec.reconstruct(&t).unwrap();
        prop_assert!(rebuilt.max_diff(&phi) <= 1e-8 * (1.0 + phi.max_norm()));

        // reduce undoes lift
        let y: Vec<Complex64> = (0..n).map(|_| random_complex(&mut r)).collect();
        let x = dec.lift(&y, &t).unwrap();
        let back = dec.reduce(&x, &t).unwrap();
        for i in 0..n {
            prop_assert!((back[i] - y[i]).norm() <= 1e-8 * (1.0 + y[i].norm()));
        }

        // the substitution x = P y conjugates the system to its constant factors
        for axis in 0..m {
            let up = t.step(axis, 1).unwrap();
            let ax = sys.coefficient(axis, &t).unwrap().mul_vector(&x).unwrap();
            let y_up = dec.reduce(&ax, &up).unwrap();
            let by = dec.factors()[axis].mul_vector(&y).unwrap();
            for i in 0..n {
                prop_assert!((y_up[i] - by[i]).norm() <= 1e-8 * (1.0 + by[i].norm()));
            }
        }
    }

    #[test]
    fn level_decomposition_reconstructs(seed in any::<u64>(), m in 2usize..=3, n in 2usize..=3) {
        let mut r = rng(seed);
        let periods = random_periods(&mut r, m);
        let sys = random_system(seed ^ 0x3c3c, m, n, &periods);
        let t0 = sys.base_point().clone();
        let t_vec = mi(&periods.iter().map(|&p| i64::from(p)).collect::<Vec<_>>());
        let dec = decompose_periodic(&sys, &t_vec, seed).unwrap();

        // P is periodic along the single vector T, so it is representable only
        // at stored offsets plus whole multiples of T
        let p_mult = r.gen_range(0..=2i64);
        let off: Vec<i64> = periods
            .iter()
            .map(|&q| r.gen_range(0..=2 * i64::from(q)) + p_mult * i64::from(q))
            .collect();
        let t = t0.add(&mi(&off)).unwrap();
        let phi = sys.transition(&t, &t0).unwrap();
        let rebuilt = dec.reconstruct(&t).unwrap();
        prop_assert!(rebuilt.max_diff(&phi) <= 1e-8 * (1.0 + phi.max_norm()));
    }

    #[test]
    fn commuting_roots_contract(
        seed in any::<u64>(),
        n in 1usize..=4,
        count in 1usize..=2,
        k1 in 1u32..=5,
        k2 in 1u32..=5,
    ) {
        let mut r = rng(seed);
        let family = random_commuting_family(&mut r, n, count);
        let ks: Vec<u32> = [k1, k2][..count].to_vec();
        let roots = commuting_roots(&family, &ks, seed).unwrap();

        for (i, q) in roots.iter().enumerate() {
            let pw = q.power(i64::from(ks[i])).unwrap();
            prop_assert!(
                pw.max_diff(&family[i]) <= TOL_ROOT_RESIDUAL * (1.0 + family[i].max_norm())
            );
        }
        for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                let bound = 1e-7 * (1.0 + roots[i].max_norm() * roots[j].max_norm());
                prop_assert!(roots[i].commutator_norm(&roots[j]) <= bound);
            }
        }

        // the extraction is a pure function of (family, k, seed)
        let again = commuting_roots(&family, &ks, seed).unwrap();
        for (a, b) in roots.iter().zip(&again) {
            prop_assert!(a.max_diff(b) == 0.0);
        }
    }

    #[test]
    fn hicks_constant_power_closed_form(seed in any::<u64>(), k in 0u32..=12) {
        let mut r = rng(seed);
        let p = random_hicks_constant(&mut r);
        let a = p.matrix();
        let closed = power_closed_form(&a, k).unwrap();
        let iterated = a.power(i64::from(k)).unwrap();
        prop_assert!(closed.max_diff(&iterated) <= 1e-9 * (1.0 + iterated.max_norm()));

        let (l1, l2) = p.characteristic_roots();
        for l in [l1, l2] {
            let residual = l * l - a.trace() * l + a.determinant();
            prop_assert!(residual.norm() <= 1e-9 * (1.0 + l.norm_sqr()));
        }
    }

    #[test]
    fn hicks_periodic_invariants(seed in any::<u64>(), t_period in 1usize..=4) {
        let mut r = rng(seed);
        let params = random_hicks_periodic(&mut r, t_period);
        let sys = params.system(2).unwrap();

        let report = sys.check_compatibility(&sys.default_check_box()).unwrap();
        prop_assert!(report.ok, "worst residual {}", report.worst());

        // the solution only sees the level of t
        let x0 = (random_complex(&mut r), random_complex(&mut r));
        let a = params.solve(x0, &mi(&[2, 1])).unwrap();
        let b = params.solve(x0, &mi(&[1, 2])).unwrap();
        let c = params.solve(x0, &mi(&[3, 0])).unwrap();
        for other in [&b, &c] {
            prop_assert!((a.income - other.income).norm() <= 1e-12 * (1.0 + a.income.norm()));
            prop_assert!(
                (a.consumption - other.consumption).norm()
                    <= 1e-12 * (1.0 + a.consumption.norm())
            );
        }
        let via_system = sys.solve(&[x0.0, x0.1], &mi(&[2, 1])).unwrap();
        prop_assert!((via_system[0] - a.income).norm() <= 1e-10 * (1.0 + a.income.norm()));
        prop_assert!(
            (via_system[1] - a.consumption).norm() <= 1e-10 * (1.0 + a.consumption.norm())
        );

        // determinant identity and the multiplier quadratic
        let mono = params.monodromy().unwrap();
        let predicted = params.monodromy_determinant_identity();
        let det = mono.determinant();
        prop_assert!((det - predicted).norm() <= 1e-9 * (1.0 + predicted.norm()));

        let mult = params.multipliers().unwrap();
        let tr = mono.trace();
        prop_assert!((mult.lambda1 + mult.lambda2 - tr).norm() <= 1e-9 * (1.0 + tr.norm()));
        prop_assert!((mult.lambda1 * mult.lambda2 - det).norm() <= 1e-9 * (1.0 + det.norm()));
        prop_assert!(mult.det_identity_residual <= 1e-9 * (1.0 + det.norm()));
    }
}
