//! Quick invariant checks runnable from the command line.

use crate::channels::{
    noisy_gate, random_haar_unitary, scenario_hamiltonian, NoiseKind, NoiseSpec, Scenario, Superoperator,
};
use crate::error::Result;
use crate::harness::resources::{channel_uses, Regime, ResourceMethod, ResourceQuery};
use crate::linalg::{max_abs, unitarity_defect, ComplexMatrix};
use crate::metrics::{estimate_unitarity, gate_fidelity};
use crate::reconstruct::{reconstruct, Method, DEFAULT_DEG_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, check: Result<(bool, String)>) -> CheckOutcome {
    match check {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn unitary_exactness() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for seed in 0..5 {
            let u0 = random_haar_unitary(n, seed)?;
            let map = Superoperator::unitary(&u0)?;
            for m in Method::ALL {
                let r = reconstruct(&map, m, DEFAULT_DEG_TOL)?;
                worst = worst.max(1.0 - gate_fidelity(&u0, &r.unitary)?);
            }
        }
    }
    Ok((worst <= 1e-9, format!("max 1-F_G = {worst:.2e} over d = 2, 4, 8")))
}

fn noisy_outputs_are_unitary() -> Result<(bool, String)> {
    let scen = scenario_hamiltonian(Scenario::RandomHaar { seed: 1 }, 2)?;
    let mut worst: f64 = 0.0;
    for t1 in [0.3, 3.0, 30.0] {
        let map = noisy_gate(&scen.h0, &[NoiseSpec::new(NoiseKind::T1, t1, vec![0, 1])], 2)?;
        for m in Method::ALL {
            if let Ok(r) = reconstruct(&map, m, DEFAULT_DEG_TOL) {
                worst = worst.max(unitarity_defect(&r.unitary));
            }
        }
    }
    Ok((worst <= 1e-8, format!("max |U†U - I| = {worst:.2e}")))
}

fn representation_round_trip() -> Result<(bool, String)> {
    let scen = scenario_hamiltonian(Scenario::RandomHaar { seed: 2 }, 2)?;
    let map = noisy_gate(
        &scen.h0,
        &[
            NoiseSpec::new(NoiseKind::T1, 2.0, vec![0, 1]),
            NoiseSpec::new(NoiseKind::T2, 5.0, vec![1]),
        ],
        2,
    )?;
    let choi = map.to_choi();
    let kraus = choi.to_kraus()?;
    let back = kraus.to_superoperator();
    let err = max_abs(&(back.matrix() - map.matrix()));
    let completeness = kraus.completeness_defect();
    let min_eig = choi.min_eigenvalue()?;
    Ok((
        err <= 1e-7 && completeness <= 1e-8 && min_eig >= -1e-8,
        format!("round trip {err:.2e}, completeness {completeness:.2e}, min Choi eigenvalue {min_eig:.2e}"),
    ))
}

fn cnot_generator() -> Result<(bool, String)> {
    let scen = scenario_hamiltonian(Scenario::MultiControlNot, 2)?;
    let map = noisy_gate(&scen.h0, &[], 2)?;
    let expected = Superoperator::unitary(&scen.u0)?;
    let err = max_abs(&(map.matrix() - expected.matrix()));
    Ok((err <= 1e-10, format!("exp(L T_g) vs CNOT superoperator {err:.2e}")))
}

fn unitarity_limits() -> Result<(bool, String)> {
    let d = 4;
    let dep = crate::channels::ChoiMatrix::new(
        d,
        crate::linalg::identity(d * d) / crate::linalg::c(d as f64, 0.0),
    )?;
    let u_dep = estimate_unitarity(&dep, 200, 1)?;
    let v: ComplexMatrix = random_haar_unitary(2, 3)?;
    let u_unit = estimate_unitarity(&Superoperator::unitary(&v)?.to_choi(), 1000, 1)?;
    let ok = u_dep.value == 0.0 && (u_unit.value - 1.0).abs() <= 5.0 * u_unit.std_error;
    Ok((
        ok,
        format!(
            "depolarizing u = {}, unitary u = {:.3} ± {:.3}",
            u_dep.value, u_unit.value, u_unit.std_error
        ),
    ))
}

fn resource_ordering() -> Result<(bool, String)> {
    let mut ok = true;
    let mut ties = Vec::new();
    for n in 1..=6 {
        let uses = |method, regime| {
            channel_uses(&ResourceQuery {
                n_qubits: n,
                r_out: 1,
                method,
                regime,
            })
        };
        let pure = uses(ResourceMethod::Pure, Regime::NearUnitary)?;
        let mixed = uses(ResourceMethod::Mixed, Regime::NearUnitary)?;
        let choi = uses(ResourceMethod::Choi, Regime::NearUnitary)?;
        let sqpt = uses(ResourceMethod::Sqpt, Regime::General)?;
        ok &= pure < mixed && mixed == choi && choi <= sqpt;
        if choi == sqpt {
            ties.push(n);
        }
    }
    // N·16^N and 16^N coincide at N = 1.
    ok &= ties == [1];
    Ok((ok, "pure < mixed = choi < sqpt for N = 2..6, choi = sqpt = 16 at N = 1".into()))
}

/// Runs every check; never panics.
pub fn run_selftest() -> Vec<CheckOutcome> {
    vec![
        outcome("unitary-exactness", unitary_exactness()),
        outcome("output-unitarity", noisy_outputs_are_unitary()),
        outcome("representation-round-trip", representation_round_trip()),
        outcome("cnot-generator", cnot_generator()),
        outcome("unitarity-limits", unitarity_limits()),
        outcome("resource-ordering", resource_ordering()),
    ]
}
