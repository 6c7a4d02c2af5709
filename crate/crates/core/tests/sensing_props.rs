use std::f64::consts::PI;

use proptest::prelude::*;

use aqsv_core::sensing::{
    analytic_probs, build_povm, estimate_angles, sensitivity_bounds, simulate_probs,
};
use aqsv_core::SensingScenario;

#[test]
fn probabilities_normalized_on_grid() {
    for n in 3..=6 {
        for i in 1..=50 {
            for j in 0..50 {
                let tp = PI * i as f64 / 50.0;
                let tm = -PI / 2.0 * (50 - j) as f64 / 50.0;
                for q0 in [0.01, 0.33, 0.99] {
                    let d = analytic_probs(n, q0, tp, tm).unwrap();
                    assert!((d.sum() - 1.0).abs() < 1e-12);
                    assert!(d.p.iter().all(|p| (0.0..=1.0).contains(p)), "{:?}", d.p);
                }
            }
        }
    }
}

#[test]
fn povm_complete_and_positive() {
    for n in 3..=4 {
        let povm = build_povm(n).unwrap();
        assert!(povm.orthonormality_defect() < 1e-12);
        assert!(povm.e4_min_eigenvalue() >= -1e-10);
        let dim = 1 << (2 * n);
        let mut sum = povm.element(0);
        for j in 1..4 {
            sum += povm.element(j);
        }
        for r in 0..dim {
            for c in 0..dim {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((sum[(r, c)].re - want).abs() < 1e-12 && sum[(r, c)].im.abs() < 1e-12);
            }
        }
    }
}

fn scenario() -> impl Strategy<Value = SensingScenario> {
    (3usize..=4, 0.02f64..0.98, 0.01f64..0.99, 0.0f64..1.0, 0.2f64..3.0).prop_flat_map(|(n, q0, a, b, t)| {
        let cap = PI / (2.0 * t);
        let wa = a * cap;
        let wb = wa + b.max(1e-3) * (cap - wa);
        let m = 2 * n;
        (1..=m, 1..m).prop_map(move |(t1, shift)| {
            let t2 = (t1 - 1 + shift) % m + 1;
            SensingScenario::new(n, q0, t1, t2, wa, wb.min(cap), t).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn simulation_matches_closed_form(s in scenario()) {
        let sim = simulate_probs(&s).unwrap();
        let ana = analytic_probs(s.n, s.q0, s.theta_plus(), s.theta_minus()).unwrap();
        prop_assert!(sim.max_distance(&ana) < 1e-12);
    }

    #[test]
    fn distribution_ignores_sensor_positions(s in scenario(), t1 in 1usize..=8, shift in 1usize..8) {
        let m = 2 * s.n;
        let t1 = (t1 - 1) % m + 1;
        let t2 = (t1 - 1 + 1 + shift % (m - 1)) % m + 1;
        let moved = s.with_positions(t1, t2).unwrap();
        let a = simulate_probs(&s).unwrap();
        let b = simulate_probs(&moved).unwrap();
        prop_assert!(a.max_distance(&b) < 1e-12);
    }

    #[test]
    fn estimator_inverts_probabilities(
        n in 3usize..=12,
        q0 in 0.01f64..0.99,
        tp in 0.01f64..(PI - 0.01),
        tm in (-PI / 2.0)..-0.01,
    ) {
        let d = analytic_probs(n, q0, tp, tm).unwrap();
        let (ep, em) = estimate_angles(d.p1(), d.p2(), d.p3(), n, q0).unwrap();
        prop_assert!((ep - tp).abs() < 1e-9, "{} vs {}", ep, tp);
        prop_assert!((em - tm.abs()).abs() < 1e-9, "{} vs {}", em, tm.abs());
    }

    #[test]
    fn bounds_finite_and_positive(
        n in 3usize..=50,
        q0 in 0.001f64..0.999,
        tp in 0.0f64..=PI,
        tm in (-PI / 2.0)..-1e-6,
    ) {
        let g = sensitivity_bounds(n, q0, tp, tm).unwrap();
        prop_assert!(g.g_plus.is_finite() && g.g_plus > 0.0);
        prop_assert!(g.g_minus.is_finite() && g.g_minus > 0.0);
        // the + angle only sees the GHZ weight
        prop_assert!((g.g_plus * q0 - 1.0).abs() < 1e-12);
    }
}
