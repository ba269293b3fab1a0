//! Reconstruction of the unitary part of a channel.
//!
//! Three routes:
//!
//! * **mixed**: two probes. The eigenbasis of `D(ρ_B)`, sorted by
//!   eigenvalue, fixes `U|k> ∝ |ψ_k>`; the image of the uniform superposition
//!   `ρ_P` fixes the relative phases `φ_k = arg(d <ψ_k|D(ρ_P)|ψ_1>)`.
//! * **pure**: `d + 1` probes. `|ψ_k>` is the dominant eigenvector of
//!   `D(|k><k|)`; the candidates are orthonormalized with modified
//!   Gram-Schmidt in index order before the same phase step.
//! * **choi**: the dominant eigenvector of the Choi matrix gives a Kraus
//!   operator `K_max = V D W†`, projected to the unitary `V W†`.
//!
//! For unitary channels all three are exact up to a global phase. For noisy
//! channels they are heuristics; no optimality is claimed.
//!
//! Every returned unitary has its global phase fixed so that the
//! largest-modulus entry of its first column is real and positive. For the
//! state-based routes this is the `φ_1 = 0` convention with `|ψ_1>`
//! normalized the same way.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::channels::{unfold_choi_vector, ChoiMatrix, DensityMatrix, KrausSet, Superoperator, TRACE_TOL};
use crate::error::{Error, Result, Warning};
use crate::linalg::{
    self, c, eig_hermitian, ensure_square, hermitian_part, svd, ComplexMatrix, ComplexVector, C64,
};
use crate::probes::{make_mixed_basis_probe, make_phase_probe, make_pure_basis_probes};

/// Default absolute spectral-gap tolerance for image eigenvalues.
pub const DEFAULT_DEG_TOL: f64 = 1e-6;
/// Below this overlap the phase of a column cannot be read off `D(ρ_P)`.
pub const PHASE_TOL: f64 = 1e-12;
/// Gram-Schmidt residual norm below which candidates are not a basis.
pub const GS_TOL: f64 = 1e-8;
/// Smallest singular value below which the polar factor is flagged.
pub const RANK_TOL: f64 = 1e-12;
/// Default unitarity below which results carry [`Warning::LowUnitarity`].
pub const DEFAULT_UNITARITY_THRESHOLD: f64 = 0.9;

/// Black-box access to a channel: submit a state, receive its image.
pub trait ChannelOracle {
    fn dim(&self) -> usize;
    fn image(&self, rho: &DensityMatrix) -> Result<DensityMatrix>;
}

impl ChannelOracle for Superoperator {
    fn dim(&self) -> usize {
        Superoperator::dim(self)
    }

    fn image(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply(rho)
    }
}

impl ChannelOracle for KrausSet {
    fn dim(&self) -> usize {
        KrausSet::dim(self)
    }

    fn image(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch("state and Kraus operators differ in dimension".into()));
        }
        let out = self
            .operators()
            .iter()
            .fold(linalg::zeros(rho.dim(), rho.dim()), |acc, k| acc + k * rho.matrix() * k.adjoint());
        let out = hermitian_part(&out);
        let tr = linalg::trace(&out).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceViolation(tr));
        }
        Ok(DensityMatrix::from_trusted(out / c(tr, 0.0)))
    }
}

impl<T: ChannelOracle + ?Sized> ChannelOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn image(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        (**self).image(rho)
    }
}

/// Wraps an oracle and counts how many states were submitted.
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicUsize,
}

impl<O: ChannelOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<O: ChannelOracle> ChannelOracle for CountingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn image(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.image(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mixed,
    Pure,
    Choi,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mixed, Method::Pure, Method::Choi];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mixed => "mixed",
            Method::Pure => "pure",
            Method::Choi => "choi",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mixed" => Ok(Method::Mixed),
            "pure" => Ok(Method::Pure),
            "choi" => Ok(Method::Choi),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// mixed: smallest adjacent gap of spec D(ρ_B); pure: smallest gap
    /// between the top two eigenvalues over all D(|i><i|); choi: gap between
    /// the two largest Choi eigenvalues.
    pub min_spectral_gap: f64,
    /// `Tr[D(|i><i|)²]` per probe, pure route only.
    pub image_purities: Vec<f64>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub unitary: ComplexMatrix,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl ReconstructionResult {
    pub fn warn(&mut self, w: Warning) {
        if !self.diagnostics.warnings.contains(&w) {
            self.diagnostics.warnings.push(w);
        }
    }

    /// Attaches [`Warning::LowUnitarity`] if the channel's unitarity is
    /// below `threshold`.
    pub fn flag_unitarity(&mut self, unitarity: f64, threshold: f64) {
        if unitarity < threshold {
            self.warn(Warning::LowUnitarity);
        }
    }
}

/// Rotates `v` so its largest-modulus entry is real and positive.
fn fix_phase(v: &mut ComplexVector) {
    let pivot = v
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 + 1e-14 { (i, z.norm()) } else { best });
    let z = v[pivot.0];
    if z.norm() > 0.0 {
        *v *= (z / z.norm()).conj();
    }
}

fn fix_global_phase(u: &mut ComplexMatrix) {
    let mut first = u.column(0).into_owned();
    let before = first.clone();
    fix_phase(&mut first);
    // Ratio of any nonzero entry gives the applied phase.
    if let Some(k) = (0..before.len()).max_by(|&a, &b| before[a].norm().total_cmp(&before[b].norm())) {
        if before[k].norm() > 0.0 {
            let phase = first[k] / before[k];
            *u *= phase / phase.norm();
        }
    }
}

/// `U = Σ_k e^{iφ_k} |ψ_k><k|` with `φ_1 = 0` and
/// `φ_k = arg(d <ψ_k|D(ρ_P)|ψ_1>)`.
fn assemble_with_phases(basis: &ComplexMatrix, phase_image: &DensityMatrix) -> Result<ComplexMatrix> {
    let d = basis.nrows();
    let img = phase_image.matrix();
    let psi1 = basis.column(0);
    let img_psi1 = img * psi1;
    let mut u = basis.clone();
    for k in 1..d {
        let overlap: C64 = basis.column(k).dotc(&img_psi1);
        if overlap.norm() < PHASE_TOL {
            return Err(Error::PhaseUndefined {
                column: k,
                overlap: overlap.norm(),
            });
        }
        let phase = (overlap * d as f64) / (overlap.norm() * d as f64);
        let mut col = u.column_mut(k);
        col *= phase;
    }
    Ok(u)
}

pub fn reconstruct_mixed(oracle: &impl ChannelOracle, deg_tol: f64) -> Result<ReconstructionResult> {
    let probe = make_mixed_basis_probe(oracle.dim())?;
    reconstruct_mixed_with_probe(oracle, &probe, deg_tol)
}

/// Mixed route with a caller-supplied diagonal, non-degenerate basis probe.
pub fn reconstruct_mixed_with_probe(
    oracle: &impl ChannelOracle,
    probe: &DensityMatrix,
    deg_tol: f64,
) -> Result<ReconstructionResult> {
    let d = oracle.dim();
    if probe.dim() != d {
        return Err(Error::DimensionMismatch("probe and channel differ in dimension".into()));
    }
    let weights: Vec<f64> = (0..d).map(|i| probe.matrix()[(i, i)].re).collect();
    let mut canonical_order: Vec<usize> = (0..d).collect();
    canonical_order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));

    let image = oracle.image(probe)?;
    let spec = eig_hermitian(image.matrix())?;
    let min_gap = spec
        .eigenvalues
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    if min_gap < deg_tol {
        return Err(Error::DegenerateImage { gap: min_gap });
    }

    // k-th largest image eigenvalue ↔ canonical state with k-th largest weight.
    let mut basis = linalg::zeros(d, d);
    for (k, &target) in canonical_order.iter().enumerate() {
        let mut v = spec.vector(k);
        fix_phase(&mut v);
        basis.set_column(target, &v);
    }

    let phase_image = oracle.image(&make_phase_probe(d)?)?;
    let unitary = assemble_with_phases(&basis, &phase_image)?;
    Ok(ReconstructionResult {
        unitary,
        method: Method::Mixed,
        diagnostics: Diagnostics {
            min_spectral_gap: min_gap,
            ..Diagnostics::default()
        },
    })
}

pub fn reconstruct_pure(oracle: &impl ChannelOracle, deg_tol: f64) -> Result<ReconstructionResult> {
    let d = oracle.dim();
    let probes = make_pure_basis_probes(d)?;
    let mut candidates = Vec::with_capacity(d);
    let mut purities = Vec::with_capacity(d);
    let mut min_gap = f64::INFINITY;
    for probe in &probes {
        let image = oracle.image(probe)?;
        purities.push(image.purity());
        let spec = eig_hermitian(image.matrix())?;
        let gap = spec.eigenvalues[0] - spec.eigenvalues[1];
        min_gap = min_gap.min(gap);
        if gap < deg_tol {
            return Err(Error::DegenerateImage { gap });
        }
        candidates.push(spec.vector(0));
    }

    let basis = modified_gram_schmidt(&candidates)?;
    let phase_image = oracle.image(&make_phase_probe(d)?)?;
    let unitary = assemble_with_phases(&basis, &phase_image)?;
    Ok(ReconstructionResult {
        unitary,
        method: Method::Pure,
        diagnostics: Diagnostics {
            min_spectral_gap: min_gap,
            image_purities: purities,
            warnings: Vec::new(),
        },
    })
}

/// Orthonormalizes the candidates in index order. Output columns carry the
/// canonical phase.
pub fn modified_gram_schmidt(candidates: &[ComplexVector]) -> Result<ComplexMatrix> {
    let d = candidates.len();
    let n = candidates.first().map_or(0, |v| v.len());
    let mut basis = linalg::zeros(n, d);
    for (i, cand) in candidates.iter().enumerate() {
        let mut v = cand / c(cand.norm(), 0.0);
        for j in 0..i {
            let q = basis.column(j);
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let residual = v.norm();
        if residual.is_nan() || residual < GS_TOL {
            return Err(Error::LinearDependence { index: i, residual });
        }
        v /= c(residual, 0.0);
        fix_phase(&mut v);
        basis.set_column(i, &v);
    }
    Ok(basis)
}

/// Unitary polar factor `V W†` of `k = V D W†`.
#[derive(Debug, Clone)]
pub struct ClosestUnitary {
    pub unitary: ComplexMatrix,
    pub singular_values: Vec<f64>,
}

impl ClosestUnitary {
    pub fn rank_deficient(&self) -> bool {
        self.singular_values.last().is_none_or(|&s| s < RANK_TOL)
    }
}

pub fn closest_unitary(k: &ComplexMatrix) -> Result<ClosestUnitary> {
    ensure_square(k, "closest_unitary input")?;
    let dec = svd(k)?;
    Ok(ClosestUnitary {
        unitary: &dec.u * dec.w.adjoint(),
        singular_values: dec.singular_values,
    })
}

/// Choi route. Never fails on spectral degeneracy; a near-degenerate top
/// eigenvalue yields [`Warning::NearDegenerate`].
pub fn reconstruct_choi(choi: &ChoiMatrix) -> Result<ReconstructionResult> {
    let d = choi.dim();
    let spec = eig_hermitian(choi.matrix())?;
    let mu_max = spec.eigenvalues[0];
    let gap = if spec.dim() > 1 {
        mu_max - spec.eigenvalues[1]
    } else {
        mu_max
    };
    let k_max = unfold_choi_vector(&spec.vector(0), d)? * c(mu_max.max(0.0).sqrt(), 0.0);
    let polar = closest_unitary(&k_max)?;
    let mut unitary = polar.unitary.clone();
    fix_global_phase(&mut unitary);

    let mut result = ReconstructionResult {
        unitary,
        method: Method::Choi,
        diagnostics: Diagnostics {
            min_spectral_gap: gap,
            ..Diagnostics::default()
        },
    };
    if gap < DEFAULT_DEG_TOL * d as f64 {
        result.warn(Warning::NearDegenerate);
    }
    if polar.rank_deficient() {
        result.warn(Warning::RankDeficient);
    }
    Ok(result)
}

/// Runs `method` against a full map. The Choi route builds the Choi matrix
/// from the map; the state routes only query their probes.
pub fn reconstruct(map: &Superoperator, method: Method, deg_tol: f64) -> Result<ReconstructionResult> {
    match method {
        Method::Mixed => reconstruct_mixed(map, deg_tol),
        Method::Pure => reconstruct_pure(map, deg_tol),
        Method::Choi => reconstruct_choi(&map.to_choi()),
    }
}
