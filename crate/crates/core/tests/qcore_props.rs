use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use aqsv_core::qcore::channel::{standard_channel, ChannelKind};
use aqsv_core::qcore::eigen::{dense_eigenvalues_desc, eig_top2, eig_top2_with, EigOptions};
use aqsv_core::qcore::measure::projective_measure;
use aqsv_core::qcore::state::{evolve_phases, make_target};
use aqsv_core::qcore::C64;
use aqsv_core::{DensityOperator, PureState, RngStream};
use rand::Rng;
use rand_distr::StandardNormal;

fn fixed(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x9e37_79b9),
        ..Config::default()
    }
}

fn channel_kind() -> impl Strategy<Value = ChannelKind> {
    prop_oneof![
        Just(ChannelKind::None),
        (0.0f64..=1.0).prop_map(ChannelKind::Dephase),
        (0.0f64..=1.0).prop_map(ChannelKind::Depolarize),
        (0.0f64..=1.0).prop_map(ChannelKind::CoherentMix),
    ]
}

proptest! {
    #[test]
    fn evolution_preserves_norm(
        seed in any::<u64>(),
        qubits in 1usize..=8,
        t in 0.0f64..10.0,
        scale in 0.0f64..5.0,
    ) {
        let mut rng = RngStream::new(seed).rng();
        let psi = PureState::random(qubits, &mut rng).unwrap();
        let omegas: Vec<f64> = (0..qubits).map(|_| scale * rng.random::<f64>()).collect();
        let out = evolve_phases(&psi, &omegas, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        // phases only: every |amplitude| is unchanged
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn channels_are_trace_preserving(kind in channel_kind(), n in 3usize..=4, q0 in 0.05f64..0.95) {
        let ch = standard_channel(kind, n, q0).unwrap();
        prop_assert!(ch.completeness_defect() < 1e-12);
        prop_assert_eq!(ch.qubits(), 2 * n);
    }
}

proptest! {
    #![proptest_config(fixed(8))]

    #[test]
    fn density_evolution_stays_physical(kind in channel_kind(), q0 in 0.1f64..0.9) {
        let ch = standard_channel(kind, 3, q0).unwrap();
        let rho = DensityOperator::from_pure(&make_target(3, q0).unwrap()).unwrap();
        let out = ch.apply_density(&rho).unwrap();
        out.validate().unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn top_two_match_dense_on_random_hermitian(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed).rng();
        let d = 64;
        let mut g = |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let a = DMatrix::from_fn(d, d, &mut g);
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let exact = dense_eigenvalues_desc(&h);
        let (l1, l2) = eig_top2(&h).unwrap();
        prop_assert!((l1 - exact[0]).abs() < 1e-10 && (l2 - exact[1]).abs() < 1e-10);
        let iterative = EigOptions { dense_limit: 0, ..EigOptions::default() };
        let (l1, l2) = eig_top2_with(&h, &iterative).unwrap();
        prop_assert!((l1 - exact[0]).abs() < 1e-10, "{} vs {}", l1, exact[0]);
        prop_assert!((l2 - exact[1]).abs() < 1e-10, "{} vs {}", l2, exact[1]);
    }
}

fn diagonal(mask: &[bool]) -> DMatrix<C64> {
    DMatrix::from_fn(mask.len(), mask.len(), |i, j| {
        C64::new(if i == j && mask[i] { 1.0 } else { 0.0 }, 0.0)
    })
}

#[test]
fn sampled_frequencies_follow_born_rule() {
    let shots = 100_000;
    for case in 0..6u64 {
        let mut rng = RngStream::new(0xb0a).substream(case).rng();
        let qubits = 3 + (case as usize % 2);
        let dim = 1 << qubits;
        let psi = PureState::random(qubits, &mut rng).unwrap();
        // random partition of the basis into 2..=4 diagonal projectors
        let parts = 2 + (case as usize % 3);
        let label: Vec<usize> = (0..dim).map(|_| rng.random_range(0..parts)).collect();
        let projectors: Vec<_> = (0..parts)
            .map(|k| diagonal(&label.iter().map(|&l| l == k).collect::<Vec<_>>()))
            .collect();
        let exact: Vec<f64> = (0..parts)
            .map(|k| {
                psi.amplitudes()
                    .iter()
                    .zip(&label)
                    .filter(|(_, &l)| l == k)
                    .map(|(a, _)| a.norm_sqr())
                    .sum()
            })
            .collect();
        let mut counts = vec![0usize; parts];
        for _ in 0..shots {
            counts[projective_measure(&psi, &projectors, &mut rng).unwrap().outcome] += 1;
        }
        for (c, p) in counts.iter().zip(&exact) {
            let freq = *c as f64 / shots as f64;
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * sigma, "case {case}: {freq} vs {p}");
        }
    }
}

#[test]
fn substreams_reproduce_and_differ() {
    let root = RngStream::new(42);
    let draw = |s: &RngStream| -> Vec<u64> {
        let mut r = s.rng();
        (0..8).map(|_| r.random()).collect()
    };
    assert_eq!(draw(&root.substream(3)), draw(&root.substream(3)));
    assert_ne!(draw(&root.substream(3)), draw(&root.substream(4)));
}
