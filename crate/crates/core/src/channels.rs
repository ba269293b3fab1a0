//! States, dynamical maps and their representations.
//!
//! Operators are vectorized by column stacking: `vec(|i><j|) = |j> ⊗ |i>`,
//! which coincides with nalgebra's column-major storage. Under this
//! convention `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//!
//! Qubit 0 is the leftmost tensor factor (most significant bit of the basis
//! index).

use nalgebra::QR;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, eig_hermitian, ensure_square, hermitian_part, hermiticity_defect, identity, kron,
    matrix_exp, principal_log_unitary, trace, ComplexMatrix, ComplexVector, C64,
};
use crate::rng::{rng_from_seed, Rng};

pub const STATE_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-8;
/// Choi eigenvalues below `KRAUS_CUTOFF * d` are dropped as numerical noise.
pub const KRAUS_CUTOFF: f64 = 1e-10;
/// Largest register handled by the scenario generators.
pub const MAX_QUBITS: usize = 5;

/// Gate time. All time constants are expressed in units of it.
pub const GATE_TIME: f64 = 1.0;

/// A d×d Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix, "density matrix")?;
        linalg::ensure_finite(&matrix, "density matrix")?;
        let defect = hermiticity_defect(&matrix);
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {defect:.3e}")));
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let spec = eig_hermitian(&matrix)?;
        let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = psi / c(norm, 0.0);
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    /// Projector onto canonical basis vector `i`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut m = linalg::zeros(d, d);
        m[(i, i)] = c(1.0, 0.0);
        Self::from_trusted(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_trusted(identity(d) * c(1.0 / d as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr[rho²]`.
    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn vectorize(&self) -> ComplexVector {
        vectorize(&self.matrix)
    }
}

/// Column-stacking vectorization.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &ComplexVector, d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not a {d}x{d} operator",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Random full-rank state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density_matrix(d: usize, rng: &mut Rng) -> DensityMatrix {
    let g = ginibre(d, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::from_trusted(hermitian_part(&(m / c(tr, 0.0))))
}

/// Random pure state drawn uniformly from the unit sphere.
pub fn random_pure_state(d: usize, rng: &mut Rng) -> DensityMatrix {
    let psi = ComplexVector::from_fn(d, |_, _| gaussian_complex(rng));
    DensityMatrix::pure(&psi).expect("Gaussian vector is nonzero")
}

fn gaussian_complex(rng: &mut Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre(d: usize, rng: &mut Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| gaussian_complex(rng))
}

/// Dissipative term `rate · (L ρ L† − ½{L†L, ρ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub operator: ComplexMatrix,
    /// In units of `1 / T_g`.
    pub rate: f64,
}

impl JumpTerm {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Result<Self> {
        ensure_square(&operator, "jump operator")?;
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidArgument(format!("jump rate {rate} must be finite and >= 0")));
        }
        Ok(Self { operator, rate })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum NoiseKind {
    /// Amplitude damping, `L = σ⁻` at rate `1/T1`.
    T1,
    /// Pure dephasing, `L = σᶻ` at rate `1/T2`.
    T2,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::T1 => "T1",
            NoiseKind::T2 => "T2",
        }
    }

    /// Single-qubit jump operator in the `{|0>, |1>}` basis.
    pub fn qubit_operator(self) -> ComplexMatrix {
        match self {
            NoiseKind::T1 => sigma_minus(),
            NoiseKind::T2 => sigma_z(),
        }
    }
}

/// Relaxation of kind `kind` with time constant `time_constant` (units of
/// `T_g`) on each qubit in `targets`. An infinite time constant means no
/// dissipation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub time_constant: f64,
    pub targets: Vec<usize>,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, time_constant: f64, targets: Vec<usize>) -> Self {
        Self {
            kind,
            time_constant,
            targets,
        }
    }

    pub fn rate(&self) -> f64 {
        1.0 / self.time_constant
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.time_constant.is_nan() || self.time_constant <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "time constant {} must be positive",
                self.time_constant
            )));
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidArgument("noise targets must be nonempty".into()));
        }
        if let Some(&q) = self.targets.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "noise target {q} out of range for {n_qubits} qubits"
            )));
        }
        Ok(())
    }

    /// One jump term per target qubit: the single-qubit operator embedded
    /// with identities, the rate kept separate from the operator.
    pub fn jump_terms(&self, n_qubits: usize) -> Result<Vec<JumpTerm>> {
        self.validate(n_qubits)?;
        let op = self.kind.qubit_operator();
        self.targets
            .iter()
            .map(|&q| JumpTerm::new(embed_qubit_operator(&op, q, n_qubits), self.rate()))
            .collect()
    }
}

pub fn sigma_minus() -> ComplexMatrix {
    let mut m = linalg::zeros(2, 2);
    m[(0, 1)] = c(1.0, 0.0);
    m
}

pub fn sigma_z() -> ComplexMatrix {
    linalg::from_real_diagonal(&[1.0, -1.0])
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on qubit `qubit`.
pub fn embed_qubit_operator(op: &ComplexMatrix, qubit: usize, n_qubits: usize) -> ComplexMatrix {
    let left = identity(1 << qubit);
    let right = identity(1 << (n_qubits - qubit - 1));
    kron(&kron(&left, op), &right)
}

/// Generator of a Markovian master equation acting on `vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Time derivative `unvec(𝓛 vec ρ)`.
    pub fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.matrix * vectorize(rho);
        ComplexMatrix::from_column_slice(self.dim, self.dim, v.as_slice())
    }
}

/// Builds `𝓛 = −i(I⊗H − Hᵀ⊗I) + Σ γ [conj(L)⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I]`.
pub fn build_liouvillian(h0: &ComplexMatrix, jumps: &[JumpTerm]) -> Result<Liouvillian> {
    let d = ensure_square(h0, "Hamiltonian")?;
    let defect = hermiticity_defect(h0);
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let id = identity(d);
    let h = hermitian_part(h0);
    let mut gen = (kron(&id, &h) - kron(&h.transpose(), &id)) * c(0.0, -1.0);
    for jump in jumps {
        if jump.operator.nrows() != d {
            return Err(Error::DimensionMismatch(format!(
                "jump operator is {}x{}, Hamiltonian is {d}x{d}",
                jump.operator.nrows(),
                jump.operator.ncols()
            )));
        }
        if jump.rate == 0.0 {
            continue;
        }
        let l = &jump.operator;
        let ldl = l.adjoint() * l;
        let dissipator = kron(&l.conjugate(), l)
            - (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * c(0.5, 0.0);
        gen += dissipator * c(jump.rate, 0.0);
    }
    Ok(Liouvillian { dim: d, matrix: gen })
}

/// Linear map on `d×d` operators, acting on column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator for d = {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    /// `ρ ↦ U ρ U†`, i.e. `conj(U) ⊗ U`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        let d = ensure_square(u, "unitary")?;
        Ok(Self {
            dim: d,
            matrix: kron(&u.conjugate(), u),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Raw linear action on an arbitrary operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.matrix * vectorize(x);
        ComplexMatrix::from_column_slice(self.dim, self.dim, v.as_slice())
    }

    /// `D(ρ)`, re-symmetrized. Traces within [`TRACE_TOL`] of one are
    /// renormalized; anything further off signals a broken map.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for a map on dimension {}",
                rho.dim(),
                self.dim
            )));
        }
        let out = hermitian_part(&self.apply_operator(rho.matrix()));
        let tr = trace(&out).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceViolation(tr));
        }
        Ok(DensityMatrix::from_trusted(out / c(tr, 0.0)))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Superoperator) -> Result<Superoperator> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch("composing maps of different dimension".into()));
        }
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &first.matrix,
        })
    }

    /// `max |vec(I)† S − vec(I)†|`; zero for trace-preserving maps.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..d {
                s += self.matrix[(k + k * d, col)];
            }
            let (i, j) = (col % d, col / d);
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - c(expected, 0.0)).norm());
        }
        worst
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        to_choi(self)
    }
}

/// `D_t = exp(𝓛 t)`.
pub fn propagate(gen: &Liouvillian, t: f64) -> Result<Superoperator> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("propagation time {t} must be finite and >= 0")));
    }
    let matrix = matrix_exp(&(gen.matrix() * c(t, 0.0)))?;
    let map = Superoperator {
        dim: gen.dim(),
        matrix,
    };
    let defect = map.trace_preservation_defect();
    if defect > TRACE_TOL {
        return Err(Error::TraceViolation(1.0 + defect));
    }
    Ok(map)
}

/// `χ = Σ_ij |i><j| ⊗ D(|i><j|)`, a `d²×d²` matrix with trace `d` for
/// trace-preserving maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Checks shape, Hermiticity and trace. Positivity is checked where a
    /// spectrum is computed anyway (see [`ChoiMatrix::min_eigenvalue`]).
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for d = {dim} must be {0}x{0}",
                dim * dim
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = trace(&matrix).re;
        if (tr - dim as f64).abs() > TRACE_TOL {
            return Err(Error::TraceViolation(tr));
        }
        Ok(Self { dim, matrix })
    }

    /// Rank-one Choi matrix `|vec U><vec U|` of the channel `ρ ↦ U ρ U†`.
    pub fn of_unitary(u: &ComplexMatrix) -> Result<Self> {
        let d = ensure_square(u, "unitary")?;
        let v = vectorize(u);
        Ok(Self {
            dim: d,
            matrix: &v * v.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let spec = eig_hermitian(&self.matrix)?;
        Ok(spec.eigenvalues.last().copied().unwrap_or(0.0))
    }

    /// Inverse reshuffle back to the superoperator.
    pub fn to_superoperator(&self) -> Superoperator {
        let d = self.dim;
        let mut s = linalg::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        s[(a + b * d, i + j * d)] = self.matrix[(i * d + a, j * d + b)];
                    }
                }
            }
        }
        Superoperator { dim: d, matrix: s }
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        choi_to_kraus(self)
    }
}

/// Reshuffles a superoperator into its Choi matrix:
/// `χ[i·d + a, j·d + b] = D(|i><j|)[a, b] = S[a + b·d, i + j·d]`.
pub fn to_choi(map: &Superoperator) -> ChoiMatrix {
    let d = map.dim;
    let mut chi = linalg::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    chi[(i * d + a, j * d + b)] = map.matrix[(a + b * d, i + j * d)];
                }
            }
        }
    }
    ChoiMatrix { dim: d, matrix: chi }
}

/// Reshapes a Choi eigenvector into the matching `d×d` operator: block `i`
/// of the vector becomes column `i`.
pub fn unfold_choi_vector(v: &ComplexVector, d: usize) -> Result<ComplexMatrix> {
    unvectorize(v, d)
}

/// Kraus operators `{K_i}` with `D(ρ) = Σ K_i ρ K_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    /// Validates shapes and completeness `Σ K†K = I` within 1e-8.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?
            .nrows();
        if operators.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::DimensionMismatch("Kraus operators must be square and equal-sized".into()));
        }
        let set = Self { dim, operators };
        let defect = set.completeness_defect();
        if defect > TRACE_TOL {
            return Err(Error::TraceViolation(1.0 + defect));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `max |Σ K†K − I|`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(linalg::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs(&(sum - identity(self.dim)))
    }

    /// `Σ conj(K) ⊗ K`.
    pub fn to_superoperator(&self) -> Superoperator {
        let n = self.dim * self.dim;
        let matrix = self
            .operators
            .iter()
            .fold(linalg::zeros(n, n), |acc, k| acc + kron(&k.conjugate(), k));
        Superoperator { dim: self.dim, matrix }
    }
}

/// Kraus operators from the eigendecomposition of the Choi matrix:
/// `K_k = √μ_k · unfold(v_k)` for every eigenvalue `μ_k ≥ 1e-10·d`.
pub fn choi_to_kraus(choi: &ChoiMatrix) -> Result<KrausSet> {
    let d = choi.dim;
    let spec = eig_hermitian(&choi.matrix)?;
    let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let cutoff = KRAUS_CUTOFF * d as f64;
    let operators = spec
        .eigenvalues
        .iter()
        .enumerate()
        .take_while(|(_, &mu)| mu >= cutoff)
        .map(|(k, &mu)| unfold_choi_vector(&spec.vector(k), d).map(|m| m * c(mu.sqrt(), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    if operators.is_empty() {
        return Err(Error::NotPsd(spec.eigenvalues[0]));
    }
    Ok(KrausSet { dim: d, operators })
}

/// Haar-random `d×d` unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let z = ginibre(d, rng);
    let qr = QR::new(z);
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Haar-random unitary on `n_qubits` qubits, deterministic in `seed`.
pub fn random_haar_unitary(n_qubits: usize, seed: u64) -> Result<ComplexMatrix> {
    check_qubits(n_qubits, 1)?;
    let mut rng = rng_from_seed(seed);
    Ok(haar_unitary(1 << n_qubits, &mut rng))
}

fn check_qubits(n_qubits: usize, min: usize) -> Result<()> {
    if n_qubits < min || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n_qubits} outside [{min}, {MAX_QUBITS}]"
        )));
    }
    Ok(())
}

/// Target unitaries whose coherent generator drives the simulated channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Haar-random unitary drawn from `seed`.
    RandomHaar { seed: u64 },
    /// NOT on qubit 1 controlled by every other qubit (CNOT for two qubits).
    MultiControlNot,
}

#[derive(Debug, Clone)]
pub struct ScenarioHamiltonian {
    /// `H₀ = i log U₀` on the principal branch.
    pub h0: ComplexMatrix,
    pub u0: ComplexMatrix,
    /// `U₀` has an eigenvalue on the branch cut (e.g. the −1 of CNOT).
    pub branch_ambiguous: bool,
}

/// The multi-controlled NOT: flips qubit 1 iff all other qubits are `|1>`.
pub fn multi_control_not(n_qubits: usize) -> Result<ComplexMatrix> {
    check_qubits(n_qubits, 2)?;
    let d = 1usize << n_qubits;
    let target_bit = 1usize << (n_qubits - 2);
    let controls = (d - 1) & !target_bit;
    let mut u = linalg::zeros(d, d);
    for col in 0..d {
        let row = if col & controls == controls { col ^ target_bit } else { col };
        u[(row, col)] = c(1.0, 0.0);
    }
    Ok(u)
}

/// Coherent part `(H₀, U₀)` of a scenario, with `exp(−i H₀ T_g) = U₀`.
pub fn scenario_hamiltonian(kind: Scenario, n_qubits: usize) -> Result<ScenarioHamiltonian> {
    let u0 = match kind {
        Scenario::RandomHaar { seed } => random_haar_unitary(n_qubits, seed)?,
        Scenario::MultiControlNot => multi_control_not(n_qubits)?,
    };
    let log = principal_log_unitary(&u0)?;
    let h0 = log.hamiltonian() * c(1.0 / GATE_TIME, 0.0);
    Ok(ScenarioHamiltonian {
        h0,
        u0,
        branch_ambiguous: log.branch_ambiguous,
    })
}

/// The dynamical map at `t = T_g` of `H₀` with the given noise.
pub fn noisy_gate(h0: &ComplexMatrix, noise: &[NoiseSpec], n_qubits: usize) -> Result<Superoperator> {
    let mut jumps = Vec::new();
    for spec in noise {
        jumps.extend(spec.jump_terms(n_qubits)?);
    }
    let gen = build_liouvillian(h0, &jumps)?;
    propagate(&gen, GATE_TIME)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    fn pauli_x() -> ComplexMatrix {
        linalg::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap()
    }

    fn amplitude_damping(gamma_t: f64) -> Superoperator {
        let gen = build_liouvillian(&linalg::zeros(2, 2), &[JumpTerm::new(sigma_minus(), 1.0).unwrap()])
            .unwrap();
        propagate(&gen, gamma_t).unwrap()
    }

    #[test]
    fn vectorization_is_column_stacking() {
        // vec(|i><j|) = |j> ⊗ |i>
        let d = 3;
        for i in 0..d {
            for j in 0..d {
                let mut e = linalg::zeros(d, d);
                e[(i, j)] = c(1.0, 0.0);
                let v = vectorize(&e);
                let mut expected = ComplexVector::zeros(d * d);
                expected[j * d + i] = c(1.0, 0.0);
                assert_eq!(v, expected);
                assert_eq!(unvectorize(&v, d).unwrap(), e);
            }
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(linalg::from_real_diagonal(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::new(linalg::from_real_diagonal(&[0.6, 0.5])).is_err());
        assert!(DensityMatrix::new(linalg::from_real_diagonal(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new(pauli_x()).is_err());
    }

    #[test]
    fn zero_generator_propagates_to_identity() {
        let gen = build_liouvillian(&linalg::zeros(2, 2), &[]).unwrap();
        assert!(max_abs(gen.matrix()) == 0.0);
        let map = propagate(&gen, 3.0).unwrap();
        assert!(close(map.matrix(), &identity(4), 0.0));
        let map = propagate(&build_liouvillian(&pauli_x(), &[]).unwrap(), 0.0).unwrap();
        assert!(close(map.matrix(), &identity(4), 1e-15));
    }

    #[test]
    fn amplitude_damping_closed_form() {
        for &gt in &[0.1, 0.5, 1.0, 2.5] {
            let out = amplitude_damping(gt).apply(&DensityMatrix::basis(2, 1)).unwrap();
            let p = (-gt).exp();
            assert!(close(out.matrix(), &linalg::from_real_diagonal(&[1.0 - p, p]), 1e-12));
        }
        let out = amplitude_damping(std::f64::consts::LN_2)
            .apply(&DensityMatrix::basis(2, 1))
            .unwrap();
        assert!(close(out.matrix(), &linalg::from_real_diagonal(&[0.5, 0.5]), 1e-12));
    }

    #[test]
    fn dephasing_decays_coherence_at_twice_the_rate() {
        let gamma = 0.7;
        let t = 1.3;
        let gen = build_liouvillian(&linalg::zeros(2, 2), &[JumpTerm::new(sigma_z(), gamma).unwrap()])
            .unwrap();
        let plus = DensityMatrix::new(linalg::from_rows(&[vec![c(0.5, 0.), c(0.5, 0.)], vec![c(0.5, 0.), c(0.5, 0.)]]).unwrap()).unwrap();
        let out = propagate(&gen, t).unwrap().apply(&plus).unwrap();
        assert!((out.matrix()[(0, 1)].re - 0.5 * (-2.0 * gamma * t).exp()).abs() < 1e-12);
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unitary_map_flips_basis_state() {
        let map = Superoperator::unitary(&pauli_x()).unwrap();
        let out = map.apply(&DensityMatrix::basis(2, 0)).unwrap();
        assert!(close(out.matrix(), DensityMatrix::basis(2, 1).matrix(), 0.0));
        let id = Superoperator::identity(2);
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(id.apply(&rho).unwrap(), rho);
    }

    #[test]
    fn apply_rejects_non_trace_preserving_map() {
        let map = Superoperator::from_matrix(2, identity(4) * c(0.5, 0.0)).unwrap();
        assert!(matches!(map.apply(&DensityMatrix::basis(2, 0)), Err(Error::TraceViolation(_))));
    }

    #[test]
    fn choi_of_identity_is_rank_one_with_eigenvalue_d() {
        let chi = to_choi(&Superoperator::identity(2));
        let spec = eig_hermitian(chi.matrix()).unwrap();
        assert!((spec.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(spec.eigenvalues[1..].iter().all(|x| x.abs() < 1e-14));
        // Σ_ij |i><j| ⊗ |i><j| has ones at (i·d+i, j·d+j).
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(chi.matrix()[(i * 2 + i, j * 2 + j)], c(1.0, 0.0));
            }
        }
        let kraus = choi_to_kraus(&chi).unwrap();
        assert_eq!(kraus.len(), 1);
        let k = &kraus.operators()[0];
        let phase = k[(0, 0)] / k[(0, 0)].norm();
        assert!(close(&(k * phase.conj()), &identity(2), 1e-12));
    }

    #[test]
    fn choi_of_depolarizing_channel() {
        // ρ ↦ Tr(ρ) I/d, evaluated entrywise: D(|i><j|) = δ_ij I/2.
        let mut s = linalg::zeros(4, 4);
        for k in 0..2 {
            for m in 0..2 {
                s[(k + 2 * k, m + 2 * m)] = c(0.5, 0.0);
            }
        }
        let map = Superoperator::from_matrix(2, s).unwrap();
        let chi = to_choi(&map);
        assert!(close(chi.matrix(), &(identity(4) * c(0.5, 0.0)), 0.0));
    }

    #[test]
    fn choi_of_unitary_matches_rank_one_form() {
        let u = random_haar_unitary(2, 11).unwrap();
        let chi = to_choi(&Superoperator::unitary(&u).unwrap());
        assert!(close(chi.matrix(), ChoiMatrix::of_unitary(&u).unwrap().matrix(), 1e-14));
        let kraus = choi_to_kraus(&chi).unwrap();
        assert_eq!(kraus.len(), 1);
        let k = &kraus.operators()[0];
        let overlap = linalg::trace(&(u.adjoint() * k));
        assert!((overlap.norm() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn amplitude_damping_kraus_pair() {
        let map = amplitude_damping(std::f64::consts::LN_2);
        let kraus = choi_to_kraus(&map.to_choi()).unwrap();
        assert_eq!(kraus.len(), 2);
        assert!(kraus.completeness_defect() < 1e-10);
        assert!(close(kraus.to_superoperator().matrix(), map.matrix(), 1e-10));
        // Textbook pair: diag(1, √p) and √(1−p) σ⁻ with p = 1/2.
        let mut textbook = vec![linalg::from_real_diagonal(&[1.0, 0.5f64.sqrt()]), sigma_minus()];
        textbook[1] *= c(0.5f64.sqrt(), 0.0);
        let reference = KrausSet::new(textbook).unwrap().to_superoperator();
        assert!(close(reference.matrix(), map.matrix(), 1e-12));
    }

    #[test]
    fn choi_reshuffle_inverts() {
        let u = random_haar_unitary(1, 3).unwrap();
        let map = Superoperator::unitary(&u)
            .unwrap()
            .compose(&amplitude_damping(0.4))
            .unwrap();
        assert!(close(map.to_choi().to_superoperator().matrix(), map.matrix(), 0.0));
    }

    #[test]
    fn choi_to_kraus_rejects_non_psd() {
        let chi = ChoiMatrix::new(1, linalg::from_real_diagonal(&[1.0])).unwrap();
        assert!(choi_to_kraus(&chi).is_ok());
        let bad = ChoiMatrix::new(2, linalg::from_real_diagonal(&[1.5, 1.0, 0.0, -0.5])).unwrap();
        assert!(matches!(choi_to_kraus(&bad), Err(Error::NotPsd(_))));
    }

    #[test]
    fn haar_sampler_is_unitary_and_deterministic() {
        for seed in 0..10 {
            let u = random_haar_unitary(3, seed).unwrap();
            assert!(linalg::unitarity_defect(&u) <= 1e-10);
        }
        assert_eq!(random_haar_unitary(2, 5).unwrap(), random_haar_unitary(2, 5).unwrap());
        assert_ne!(random_haar_unitary(2, 5).unwrap(), random_haar_unitary(2, 6).unwrap());
        assert!(random_haar_unitary(6, 0).is_err());
    }

    #[test]
    fn cnot_scenario() {
        let s = scenario_hamiltonian(Scenario::MultiControlNot, 2).unwrap();
        let mut cnot = linalg::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            cnot[(r, col)] = c(1.0, 0.0);
        }
        assert_eq!(s.u0, cnot);
        assert!(s.branch_ambiguous);
        let spec = eig_hermitian(&s.h0).unwrap();
        // Principal branch: the −1 eigenvalue has phase +π, so H = i log U
        // carries −π.
        assert!(spec.eigenvalues[..3].iter().all(|x| x.abs() < 1e-12));
        assert!((spec.eigenvalues[3] + std::f64::consts::PI).abs() < 1e-12);
        let u = matrix_exp(&(&s.h0 * c(0.0, -1.0))).unwrap();
        assert!(close(&u, &cnot, 1e-10));
    }

    #[test]
    fn three_qubit_multi_control_not() {
        let u = multi_control_not(3).unwrap();
        assert!(close(&(&u * &u), &identity(8), 0.0));
        // |1 0 1> ↔ |1 1 1>, everything else fixed.
        for col in 0..8 {
            let row = (0..8).find(|&r| u[(r, col)].re == 1.0).unwrap();
            match col {
                0b101 => assert_eq!(row, 0b111),
                0b111 => assert_eq!(row, 0b101),
                _ => assert_eq!(row, col),
            }
        }
        assert!(multi_control_not(1).is_err());
    }

    #[test]
    fn random_scenario_round_trip() {
        let s = scenario_hamiltonian(Scenario::RandomHaar { seed: 42 }, 2).unwrap();
        let u = matrix_exp(&(&s.h0 * c(0.0, -1.0))).unwrap();
        assert!(close(&u, &s.u0, 1e-8));
        assert!(hermiticity_defect(&s.h0) < 1e-14);
    }

    #[test]
    fn jump_terms_embed_on_targets() {
        let spec = NoiseSpec::new(NoiseKind::T1, 4.0, vec![0, 1]);
        let jumps = spec.jump_terms(2).unwrap();
        assert_eq!(jumps.len(), 2);
        assert!(jumps.iter().all(|j| (j.rate - 0.25).abs() < 1e-15));
        assert_eq!(jumps[0].operator, kron(&sigma_minus(), &identity(2)));
        assert_eq!(jumps[1].operator, kron(&identity(2), &sigma_minus()));
        assert!(NoiseSpec::new(NoiseKind::T1, 1.0, vec![2]).jump_terms(2).is_err());
        assert!(NoiseSpec::new(NoiseKind::T1, 1.0, vec![]).jump_terms(2).is_err());
        assert!(NoiseSpec::new(NoiseKind::T2, -1.0, vec![0]).jump_terms(2).is_err());
        let free = NoiseSpec::new(NoiseKind::T1, f64::INFINITY, vec![0]).jump_terms(1).unwrap();
        assert_eq!(free[0].rate, 0.0);
    }

    #[test]
    fn build_liouvillian_rejects_bad_input() {
        assert!(matches!(
            build_liouvillian(&linalg::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap(), &[]),
            Err(Error::NotHermitian(_))
        ));
        let j = JumpTerm::new(identity(4), 1.0).unwrap();
        assert!(matches!(build_liouvillian(&identity(2), &[j]), Err(Error::DimensionMismatch(_))));
        assert!(JumpTerm::new(identity(2), -1.0).is_err());
    }
}
