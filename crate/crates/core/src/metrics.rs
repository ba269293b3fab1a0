//! Figures of merit and the Clifford-variance unitarity estimator.

use rand::Rng as _;
use rayon::prelude::*;

use crate::channels::{vectorize, ChoiMatrix, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{self, c, ensure_unitary, trace_of_product, ComplexMatrix, C64};
use crate::rng::{derive_seed, rng_from_seed};

pub const DEFAULT_CLIFFORD_WORD_LENGTH: usize = 100;
pub const DEFAULT_UNITARITY_SAMPLES: usize = 1000;
/// Number of batches behind the unitarity standard error.
pub const UNITARITY_BATCHES: usize = 10;
/// Imaginary part of `Tr(χ₀χ)/d²` tolerated before the result is rejected.
pub const NON_REAL_TOL: f64 = 1e-8;

/// `(1/d)|Tr(U₀† U)|`, clamped to `[0, 1]`.
pub fn gate_fidelity(u0: &ComplexMatrix, urc: &ComplexMatrix) -> Result<f64> {
    if u0.shape() != urc.shape() {
        return Err(Error::DimensionMismatch("gate fidelity of differently sized unitaries".into()));
    }
    ensure_unitary(u0)?;
    ensure_unitary(urc)?;
    let d = u0.nrows() as f64;
    Ok((trace_of_product(&u0.adjoint(), urc).norm() / d).min(1.0))
}

/// `(1/d²) Tr(χ₀ χ)`.
pub fn process_fidelity(chi0: &ChoiMatrix, chirc: &ChoiMatrix) -> Result<f64> {
    if chi0.dim() != chirc.dim() {
        return Err(Error::DimensionMismatch("process fidelity of differently sized channels".into()));
    }
    let d2 = (chi0.dim() * chi0.dim()) as f64;
    let f = trace_of_product(chi0.matrix(), chirc.matrix()) / d2;
    if f.im.abs() > NON_REAL_TOL {
        return Err(Error::NonRealResult(f.im));
    }
    Ok(f.re)
}

pub fn average_fidelity_from_process(f_pro: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * f_pro + 1.0) / (d + 1.0)
}

/// `(d F_pro + 1)/(d + 1)`.
pub fn average_fidelity(chi0: &ChoiMatrix, chirc: &ChoiMatrix) -> Result<f64> {
    Ok(average_fidelity_from_process(process_fidelity(chi0, chirc)?, chi0.dim()))
}

/// Process fidelity against the unitary channel of `u` without forming its
/// Choi matrix: `<vec U|χ|vec U> / d²`.
pub fn process_fidelity_with_unitary(u: &ComplexMatrix, chi: &ChoiMatrix) -> Result<f64> {
    let d = chi.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch("unitary and Choi matrix differ in dimension".into()));
    }
    let v = vectorize(u);
    let f = v.dotc(&(chi.matrix() * &v)) / (d * d) as f64;
    if f.im.abs() > NON_REAL_TOL {
        return Err(Error::NonRealResult(f.im));
    }
    Ok(f.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CliffordGate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
}

fn generator_set(n_qubits: usize) -> Vec<CliffordGate> {
    let mut gates: Vec<_> = (0..n_qubits).map(CliffordGate::H).collect();
    gates.extend((0..n_qubits).map(CliffordGate::S));
    for ctrl in 0..n_qubits {
        for tgt in (0..n_qubits).filter(|&t| t != ctrl) {
            gates.push(CliffordGate::Cnot(ctrl, tgt));
        }
    }
    gates
}

/// Left-multiplies `m` by the gate, qubit 0 being the most significant bit.
fn apply_gate(m: &mut ComplexMatrix, gate: CliffordGate, n_qubits: usize) {
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let d = m.nrows();
    match gate {
        CliffordGate::H(q) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for r in (0..d).filter(|r| r & bit(q) == 0) {
                let r1 = r | bit(q);
                for col in 0..m.ncols() {
                    let (a, b) = (m[(r, col)], m[(r1, col)]);
                    m[(r, col)] = (a + b) * s;
                    m[(r1, col)] = (a - b) * s;
                }
            }
        }
        CliffordGate::S(q) => {
            for r in (0..d).filter(|r| r & bit(q) != 0) {
                let mut row = m.row_mut(r);
                row *= C64::i();
            }
        }
        CliffordGate::Cnot(ctrl, tgt) => {
            for r in (0..d).filter(|r| r & bit(ctrl) != 0 && r & bit(tgt) == 0) {
                m.swap_rows(r, r | bit(tgt));
            }
        }
    }
}

/// Random Clifford as a uniformly drawn word of length `word_length` over
/// `{H_q, S_q, CNOT_{q,q'}}`.
pub fn sample_clifford_with_length(n_qubits: usize, seed: u64, word_length: usize) -> Result<ComplexMatrix> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "Clifford sampling supports 1..={MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let gates = generator_set(n_qubits);
    let mut rng = rng_from_seed(seed);
    let mut m = linalg::identity(1 << n_qubits);
    for _ in 0..word_length {
        let g = gates[rng.random_range(0..gates.len())];
        apply_gate(&mut m, g, n_qubits);
    }
    Ok(m)
}

pub fn sample_clifford(n_qubits: usize, seed: u64) -> Result<ComplexMatrix> {
    sample_clifford_with_length(n_qubits, seed, DEFAULT_CLIFFORD_WORD_LENGTH)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityEstimate {
    pub value: f64,
    pub n_samples: usize,
    pub std_error: f64,
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Samples whose spread is at the level of rounding in the fidelity
/// evaluation are treated as a constant sequence.
fn is_constant(xs: &[f64]) -> bool {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo <= 64.0 * f64::EPSILON * hi.abs().max(lo.abs())
}

pub fn estimate_unitarity(chi: &ChoiMatrix, n_samples: usize, seed: u64) -> Result<UnitarityEstimate> {
    estimate_unitarity_with_word_length(chi, n_samples, seed, DEFAULT_CLIFFORD_WORD_LENGTH)
}

/// `u(χ) = d²(d+1)² Var_k[F_avg(χ_CL^k, χ)]` over `n_samples` random
/// Cliffords, with an unbiased variance. Draw `k` uses the seed derived from
/// `(seed, k)`, so the estimate is independent of thread scheduling.
pub fn estimate_unitarity_with_word_length(
    chi: &ChoiMatrix,
    n_samples: usize,
    seed: u64,
    word_length: usize,
) -> Result<UnitarityEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("unitarity needs at least two Clifford samples".into()));
    }
    let d = chi.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidArgument(format!("unitarity needs a qubit register, got d = {d}")));
    }
    let n_qubits = d.trailing_zeros() as usize;
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let cl = sample_clifford_with_length(n_qubits, derive_seed(seed, &[k as u64]), word_length)?;
            Ok(average_fidelity_from_process(process_fidelity_with_unitary(&cl, chi)?, d))
        })
        .collect::<Result<Vec<f64>>>()?;

    let scale = ((d * d) * (d + 1) * (d + 1)) as f64;
    if is_constant(&samples) {
        return Ok(UnitarityEstimate {
            value: 0.0,
            n_samples,
            std_error: 0.0,
        });
    }
    let value = scale * sample_variance(&samples);

    let n_batches = UNITARITY_BATCHES.min(n_samples / 2);
    let std_error = if n_batches >= 2 {
        let size = n_samples / n_batches;
        let batch: Vec<f64> = samples
            .chunks_exact(size)
            .take(n_batches)
            .map(|b| scale * sample_variance(b))
            .collect();
        (sample_variance(&batch) / n_batches as f64).sqrt()
    } else {
        0.0
    };
    Ok(UnitarityEstimate {
        value,
        n_samples,
        std_error,
    })
}

/// Pauli matrices `I, X, Y, Z`.
pub fn pauli(index: usize) -> ComplexMatrix {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let entries = match index % 4 {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -i, i, o],
        _ => [l, o, o, -l],
    };
    ComplexMatrix::from_row_slice(2, 2, &entries)
}

/// `n`-qubit Pauli string with base-4 digits of `index`, most significant
/// digit on qubit 0.
pub fn pauli_string(index: usize, n_qubits: usize) -> ComplexMatrix {
    (0..n_qubits).fold(linalg::identity(1), |acc, q| {
        let digit = (index >> (2 * (n_qubits - 1 - q))) & 3;
        linalg::kron(&acc, &pauli(digit))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_haar_unitary, Superoperator};
    use crate::linalg::{from_real_diagonal, identity, kron, max_abs, unitarity_defect};

    fn depolarizing_choi(d: usize) -> ChoiMatrix {
        ChoiMatrix::new(d, identity(d * d) / c(d as f64, 0.0)).unwrap()
    }

    #[test]
    fn gate_fidelity_examples() {
        let i2 = identity(2);
        assert_eq!(gate_fidelity(&i2, &i2).unwrap(), 1.0);
        let phased = &i2 * C64::from_polar(1.0, 0.731);
        assert!((gate_fidelity(&i2, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gate_fidelity(&i2, &from_real_diagonal(&[1.0, -1.0])).unwrap(), 0.0);
        assert!(gate_fidelity(&i2, &identity(4)).is_err());
        assert!(gate_fidelity(&i2, &from_real_diagonal(&[1.0, 0.5])).is_err());
    }

    #[test]
    fn process_fidelity_examples() {
        let u = random_haar_unitary(1, 3).unwrap();
        let chi = ChoiMatrix::of_unitary(&u).unwrap();
        assert!((process_fidelity(&chi, &chi).unwrap() - 1.0).abs() < 1e-14);

        let chi_i = ChoiMatrix::of_unitary(&identity(2)).unwrap();
        let chi_x = ChoiMatrix::of_unitary(&pauli(1)).unwrap();
        assert_eq!(process_fidelity(&chi_i, &chi_x).unwrap(), 0.0);

        let dep = depolarizing_choi(2);
        assert_eq!(process_fidelity(&dep, &dep).unwrap(), 0.25);
    }

    #[test]
    fn average_fidelity_examples() {
        assert_eq!(average_fidelity_from_process(1.0, 2), 1.0);
        assert_eq!(average_fidelity_from_process(0.0, 2), 1.0 / 3.0);
        assert_eq!(average_fidelity_from_process(0.25, 2), 0.5);
        let dep = depolarizing_choi(2);
        assert_eq!(average_fidelity(&dep, &dep).unwrap(), 0.5);
    }

    #[test]
    fn unitary_shortcut_matches_full_trace() {
        let chi = Superoperator::unitary(&random_haar_unitary(2, 1).unwrap()).unwrap().to_choi();
        for seed in 0..10 {
            let v = random_haar_unitary(2, 100 + seed).unwrap();
            let full = process_fidelity(&ChoiMatrix::of_unitary(&v).unwrap(), &chi).unwrap();
            let fast = process_fidelity_with_unitary(&v, &chi).unwrap();
            assert!((full - fast).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_word_is_identity() {
        for n in 1..=3 {
            assert_eq!(sample_clifford_with_length(n, 5, 0).unwrap(), identity(1 << n));
        }
    }

    #[test]
    fn generators_match_their_matrices() {
        let h = ComplexMatrix::from_element(2, 2, c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let mut h = h;
        h[(1, 1)] = -h[(1, 1)];
        let s = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let mut m = identity(4);
        apply_gate(&mut m, CliffordGate::H(0), 2);
        assert!(max_abs(&(&m - kron(&h, &identity(2)))) < 1e-15);
        let mut m = identity(4);
        apply_gate(&mut m, CliffordGate::S(1), 2);
        assert_eq!(m, kron(&identity(2), &s));
        let mut m = identity(4);
        apply_gate(&mut m, CliffordGate::Cnot(0, 1), 2);
        let cnot = from_real_diagonal(&[1.0, 1.0, 0.0, 0.0]) + kron(&from_real_diagonal(&[0.0, 1.0]), &pauli(1));
        assert_eq!(m, cnot);
    }

    #[test]
    fn cliffords_normalize_the_pauli_group() {
        for n in 1..=3 {
            let d = 1 << n;
            for seed in 0..5 {
                let cl = sample_clifford(n, seed).unwrap();
                assert!(unitarity_defect(&cl) < 1e-10);
                for p in 0..(1 << (2 * n)) {
                    let img = &cl * pauli_string(p, n) * cl.adjoint();
                    for z in img.iter() {
                        let near = [0.0, 1.0, -1.0]
                            .iter()
                            .any(|&v| (z.re - v).abs() < 1e-9 && z.im.abs() < 1e-9 || (z.im - v).abs() < 1e-9 && z.re.abs() < 1e-9);
                        assert!(near, "n={n} seed={seed} entry {z}");
                    }
                    // Conjugated Paulis are Paulis up to sign: exactly one
                    // nonzero entry per row.
                    for r in 0..d {
                        assert_eq!(img.row(r).iter().filter(|z| z.norm() > 0.5).count(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn depolarizing_channel_has_zero_unitarity() {
        for d in [2, 4] {
            let est = estimate_unitarity(&depolarizing_choi(d), 200, 7).unwrap();
            assert_eq!(est.value, 0.0);
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn unitarity_is_deterministic() {
        let chi = Superoperator::unitary(&random_haar_unitary(2, 4).unwrap()).unwrap().to_choi();
        let a = estimate_unitarity(&chi, 300, 11).unwrap();
        let b = estimate_unitarity(&chi, 300, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, estimate_unitarity(&chi, 300, 12).unwrap());
        assert!(estimate_unitarity(&chi, 1, 11).is_err());
    }
}
