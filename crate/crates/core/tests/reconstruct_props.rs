mod common;

use common::{random_hermitian, random_matrix};
use proptest::prelude::*;
use qrecon_core::channels::{
    haar_unitary, noisy_gate, scenario_hamiltonian, NoiseKind, NoiseSpec, Scenario, Superoperator,
};
use qrecon_core::linalg::{c, C64, from_real_diagonal, identity, matrix_exp, max_abs, unitarity_defect, zeros, ComplexMatrix};
use qrecon_core::metrics::gate_fidelity;
use qrecon_core::reconstruct::{closest_unitary, reconstruct, Method, DEFAULT_DEG_TOL};
use qrecon_core::rng::rng_from_seed;

fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn operator_norm(a: &ComplexMatrix) -> f64 {
    qrecon_core::linalg::svd(a).unwrap().singular_values[0]
}

fn projector(d: usize, j: usize) -> ComplexMatrix {
    let mut p = zeros(d, d);
    p[(j, j)] = c(1.0, 0.0);
    p
}

#[test]
fn polar_factor_of_diag_2_1_beats_every_sampled_unitary() {
    let k = from_real_diagonal(&[2.0, 1.0]);
    let polar = closest_unitary(&k).unwrap();
    assert!(max_abs(&(&polar.unitary - identity(2))) < 1e-14);
    assert_eq!(polar.singular_values, vec![2.0, 1.0]);

    let best_f = frobenius(&(&k - &polar.unitary));
    let best_op = operator_norm(&(&k - &polar.unitary));
    assert!((best_f - 1.0).abs() < 1e-14);
    assert!((best_op - 1.0).abs() < 1e-14);

    let mut rng = rng_from_seed(31);
    for _ in 0..20_000 {
        let v = haar_unitary(2, &mut rng);
        let f = frobenius(&(&k - &v));
        assert!(f >= best_f - 1e-12);
        if max_abs(&(&v - identity(2))) > 1e-3 {
            assert!(f > best_f + 1e-8);
        }
        assert!(operator_norm(&(&k - &v)) >= best_op - 1e-12);
    }

    // In operator norm the minimiser is not unique: diag(1, e^{iθ}) with
    // |1 - e^{iθ}| <= 1 ties with the identity.
    let mut tied = identity(2);
    tied[(1, 1)] = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    assert!((operator_norm(&(&k - &tied)) - best_op).abs() < 1e-14);
    assert!(frobenius(&(&k - &tied)) > best_f + 0.1);
}

#[test]
fn unitary_channels_map_basis_projectors_like_the_target() {
    let mut rng = rng_from_seed(32);
    for d in [2, 4, 8] {
        for _ in 0..10 {
            let u0 = haar_unitary(d, &mut rng);
            let map = Superoperator::unitary(&u0).unwrap();
            for m in Method::ALL {
                let u = reconstruct(&map, m, DEFAULT_DEG_TOL).unwrap().unitary;
                for j in 0..d {
                    let p = projector(d, j);
                    let q0 = &u0 * &p * u0.adjoint();
                    let q = &u * &p * u.adjoint();
                    assert!(max_abs(&(q - q0)) < 1e-9, "d={d} {m} j={j}");
                }
            }
        }
    }
}

#[test]
fn noisy_reconstructions_are_unitary() {
    for seed in 0..5 {
        let scen = scenario_hamiltonian(Scenario::RandomHaar { seed }, 2).unwrap();
        for (kind, tc) in [(NoiseKind::T1, 0.5), (NoiseKind::T1, 5.0), (NoiseKind::T2, 1.0), (NoiseKind::T2, 30.0)] {
            let map = noisy_gate(&scen.h0, &[NoiseSpec::new(kind, tc, vec![0, 1])], 2).unwrap();
            for m in Method::ALL {
                if let Ok(r) = reconstruct(&map, m, DEFAULT_DEG_TOL) {
                    assert!(unitarity_defect(&r.unitary) <= 1e-8, "{m} {kind:?} {tc}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitary_channels_are_recovered_exactly(seed in any::<u64>(), d in prop_oneof![Just(2usize), Just(4), Just(8)]) {
        let mut rng = rng_from_seed(seed);
        let u0 = haar_unitary(d, &mut rng);
        let map = Superoperator::unitary(&u0).unwrap();
        let results: Vec<_> = Method::ALL
            .iter()
            .map(|&m| reconstruct(&map, m, DEFAULT_DEG_TOL).unwrap().unitary)
            .collect();
        for u in &results {
            prop_assert!(1.0 - gate_fidelity(&u0, u).unwrap() <= 1e-9);
        }
        prop_assert!(max_abs(&(&results[0] - &results[1])) < 1e-9);
        prop_assert!(max_abs(&(&results[0] - &results[2])) < 1e-9);
    }

    #[test]
    fn polar_factor_is_a_local_frobenius_minimum(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = rng_from_seed(seed);
        let k = random_matrix(d, &mut rng);
        let polar = closest_unitary(&k).unwrap();
        prop_assert!(unitarity_defect(&polar.unitary) < 1e-10);
        let best = frobenius(&(&k - &polar.unitary));
        for _ in 0..20 {
            let h = random_hermitian(d, &mut rng) * c(0.0, -0.05);
            let nearby = &polar.unitary * matrix_exp(&h).unwrap();
            prop_assert!(frobenius(&(&k - nearby)) >= best - 1e-12);
        }
    }
}
