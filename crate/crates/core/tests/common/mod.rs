#![allow(dead_code)]

use qrecon_core::channels::JumpTerm;
use qrecon_core::linalg::{c, ComplexMatrix};
use qrecon_core::rng::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Right-hand side of the master equation written directly in matrix form,
/// without any vectorization.
pub fn master_rhs(h: &ComplexMatrix, jumps: &[JumpTerm], rho: &ComplexMatrix) -> ComplexMatrix {
    let i = c(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for j in jumps {
        let l = &j.operator;
        let ldl = l.adjoint() * l;
        out += (l * rho * l.adjoint() - (&ldl * rho + rho * &ldl) * c(0.5, 0.0)) * c(j.rate, 0.0);
    }
    out
}

/// Classical fourth-order Runge-Kutta with `steps` uniform steps.
pub fn rk4(h: &ComplexMatrix, jumps: &[JumpTerm], rho0: &ComplexMatrix, t: f64, steps: usize) -> ComplexMatrix {
    let dt = t / steps as f64;
    let half = c(dt / 2.0, 0.0);
    let full = c(dt, 0.0);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = master_rhs(h, jumps, &rho);
        let k2 = master_rhs(h, jumps, &(&rho + &k1 * half));
        let k3 = master_rhs(h, jumps, &(&rho + &k2 * half));
        let k4 = master_rhs(h, jumps, &(&rho + &k3 * full));
        rho += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
    }
    rho
}

pub fn random_hermitian(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    (&g + g.adjoint()) * c(0.5, 0.0)
}

pub fn random_matrix(d: usize, rng: &mut Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}
