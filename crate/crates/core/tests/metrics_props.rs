use proptest::prelude::*;
use qrecon_core::channels::{haar_unitary, noisy_gate, ChoiMatrix, NoiseKind, NoiseSpec, Superoperator};
use qrecon_core::linalg::{c, identity, trace_of_product};
use qrecon_core::metrics::{
    average_fidelity, average_fidelity_from_process, estimate_unitarity, gate_fidelity, process_fidelity,
    process_fidelity_with_unitary,
};
use qrecon_core::rng::rng_from_seed;

#[test]
fn process_fidelity_of_unitaries_is_squared_gate_fidelity() {
    let mut rng = rng_from_seed(41);
    for d in [2, 4] {
        for _ in 0..50 {
            let u = haar_unitary(d, &mut rng);
            let v = haar_unitary(d, &mut rng);
            let f_g = gate_fidelity(&u, &v).unwrap();
            let f_pro = process_fidelity(&ChoiMatrix::of_unitary(&u).unwrap(), &ChoiMatrix::of_unitary(&v).unwrap())
                .unwrap();
            assert!((f_pro - f_g * f_g).abs() < 1e-12);
            // Independent route: |Tr U†V|² / d² straight from the matrices.
            let direct = trace_of_product(&u.adjoint(), &v).norm_sqr() / (d * d) as f64;
            assert!((f_pro - direct).abs() < 1e-12);
        }
    }
}

#[test]
fn two_qubit_t1_unitarity_decreases_with_noise() {
    let h = qrecon_core::channels::scenario_hamiltonian(qrecon_core::Scenario::RandomHaar { seed: 7 }, 2)
        .unwrap()
        .h0;
    let values: Vec<f64> = [10.0, 3.0, 1.0]
        .iter()
        .map(|&t1| {
            let map = noisy_gate(&h, &[NoiseSpec::new(NoiseKind::T1, t1, vec![0, 1])], 2).unwrap();
            estimate_unitarity(&map.to_choi(), 1000, 3).unwrap()
        })
        .map(|u| {
            assert!(u.value > 0.0 && u.value < 1.0, "{u:?}");
            u.value
        })
        .collect();
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fidelities_are_symmetric_and_bounded(seed in any::<u64>(), d in prop_oneof![Just(2usize), Just(4)]) {
        let mut rng = rng_from_seed(seed);
        let u = haar_unitary(d, &mut rng);
        let v = haar_unitary(d, &mut rng);
        let a = ChoiMatrix::of_unitary(&u).unwrap();
        let b = ChoiMatrix::of_unitary(&v).unwrap();
        prop_assert!((gate_fidelity(&u, &v).unwrap() - gate_fidelity(&v, &u).unwrap()).abs() < 1e-14);
        let f_ab = process_fidelity(&a, &b).unwrap();
        prop_assert!((f_ab - process_fidelity(&b, &a).unwrap()).abs() < 1e-14);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f_ab));
        prop_assert!((process_fidelity_with_unitary(&v, &a).unwrap() - f_ab).abs() < 1e-12);
        let f_avg = average_fidelity(&a, &b).unwrap();
        prop_assert!((f_avg - (d as f64 * f_ab + 1.0) / (d as f64 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn average_fidelity_is_affine_and_monotone(f1 in 0.0f64..1.0, f2 in 0.0f64..1.0, d in 1usize..64) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        prop_assert!(average_fidelity_from_process(lo, d) <= average_fidelity_from_process(hi, d));
        let mid = average_fidelity_from_process(0.5 * (f1 + f2), d);
        let avg = 0.5 * (average_fidelity_from_process(f1, d) + average_fidelity_from_process(f2, d));
        prop_assert!((mid - avg).abs() < 1e-14);
        prop_assert!((average_fidelity_from_process(1.0, d) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_channel_has_zero_unitarity(seed in any::<u64>()) {
        let chi = ChoiMatrix::new(4, identity(16) / c(4.0, 0.0)).unwrap();
        let est = estimate_unitarity(&chi, 40, seed).unwrap();
        prop_assert_eq!(est.value, 0.0);
        prop_assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn identity_channel_unitarity_is_deterministic(seed in any::<u64>()) {
        let chi = Superoperator::identity(2).to_choi();
        let a = estimate_unitarity(&chi, 30, seed).unwrap();
        let b = estimate_unitarity(&chi, 30, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
