//! Probe input states.
//!
//! Basis information comes either from one full-rank mixed state with a
//! non-degenerate, evenly spaced spectrum or from the `d` canonical basis
//! projectors. Relative phases come from the uniform superposition.

use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, c};

/// Smallest allowed separation between custom mixed-probe eigenvalues.
pub const MIN_CUSTOM_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BasisProbes {
    Mixed(DensityMatrix),
    Pure(Vec<DensityMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    pub dim: usize,
    pub basis: BasisProbes,
    pub phase_probe: DensityMatrix,
}

impl ProbeSet {
    pub fn mixed(d: usize) -> Result<Self> {
        Ok(Self {
            dim: d,
            basis: BasisProbes::Mixed(make_mixed_basis_probe(d)?),
            phase_probe: make_phase_probe(d)?,
        })
    }

    pub fn pure(d: usize) -> Result<Self> {
        Ok(Self {
            dim: d,
            basis: BasisProbes::Pure(make_pure_basis_probes(d)?),
            phase_probe: make_phase_probe(d)?,
        })
    }

    /// Number of distinct states sent through the channel.
    pub fn len(&self) -> usize {
        match &self.basis {
            BasisProbes::Mixed(_) => 2,
            BasisProbes::Pure(p) => p.len() + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("probe dimension {d} must be at least 2")));
    }
    Ok(())
}

/// Numerators of the mixed-probe eigenvalues over the common denominator
/// `d(d+1)`: `λ_i = 2i / (d(d+1))`, `i = 1..=d`.
pub fn mixed_probe_numerators(d: usize) -> (Vec<u64>, u64) {
    let num = (1..=d as u64).map(|i| 2 * i).collect();
    (num, (d as u64) * (d as u64 + 1))
}

/// Eigenvalues of the mixed basis probe, increasing along the canonical
/// basis. The smallest eigenvalue equals the common gap.
pub fn mixed_probe_eigenvalues(d: usize) -> Vec<f64> {
    let (num, den) = mixed_probe_numerators(d);
    num.into_iter().map(|n| n as f64 / den as f64).collect()
}

/// `ρ_B = diag(λ_1, …, λ_d)` with `λ_i = 2i / (d(d+1))`.
pub fn make_mixed_basis_probe(d: usize) -> Result<DensityMatrix> {
    check_dim(d)?;
    Ok(DensityMatrix::from_trusted(linalg::from_real_diagonal(
        &mixed_probe_eigenvalues(d),
    )))
}

/// Diagonal mixed probe with caller-chosen eigenvalues, e.g. biased towards
/// the subspace of a decaying qubit. Eigenvalues must be positive, pairwise
/// distinct and sum to one.
pub fn mixed_basis_probe_with(eigenvalues: &[f64]) -> Result<DensityMatrix> {
    check_dim(eigenvalues.len())?;
    if eigenvalues.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::InvalidArgument("probe eigenvalues must be positive".into()));
    }
    let sum: f64 = eigenvalues.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("probe eigenvalues sum to {sum}, not 1")));
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] < MIN_CUSTOM_GAP) {
        return Err(Error::InvalidArgument("probe eigenvalues must be pairwise distinct".into()));
    }
    Ok(DensityMatrix::from_trusted(linalg::from_real_diagonal(eigenvalues)))
}

/// `ρ_B^(i) = |i><i|` for `i = 0..d`.
pub fn make_pure_basis_probes(d: usize) -> Result<Vec<DensityMatrix>> {
    check_dim(d)?;
    Ok((0..d).map(|i| DensityMatrix::basis(d, i)).collect())
}

/// `ρ_P = (1/d) Σ_ij |i><j|`, the projector onto the uniform superposition.
pub fn make_phase_probe(d: usize) -> Result<DensityMatrix> {
    check_dim(d)?;
    Ok(DensityMatrix::from_trusted(linalg::ComplexMatrix::from_element(
        d,
        d,
        c(1.0 / d as f64, 0.0),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, identity, max_abs, trace};

    #[test]
    fn mixed_probe_values() {
        assert_eq!(mixed_probe_eigenvalues(2), vec![1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(mixed_probe_eigenvalues(4), vec![0.1, 0.2, 0.3, 0.4]);
        let rho = make_mixed_basis_probe(4).unwrap();
        assert_eq!(rho.matrix()[(3, 3)].re, 0.4);
    }

    #[test]
    fn mixed_probe_gaps_are_exactly_uniform() {
        for d in 2..=32 {
            let (num, den) = mixed_probe_numerators(d);
            assert_eq!(den, (d * (d + 1)) as u64);
            assert_eq!(num.iter().sum::<u64>(), den, "trace is exactly one");
            assert!(num.windows(2).all(|w| w[1] - w[0] == 2), "gap numerators all 2");
            assert_eq!(num[0], 2, "smallest eigenvalue equals the gap");

            let lam = mixed_probe_eigenvalues(d);
            let gap = 2.0 / (d * (d + 1)) as f64;
            assert!(lam.windows(2).all(|w| (w[1] - w[0] - gap).abs() < 1e-15));
            assert!((lam.iter().sum::<f64>() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn pure_probes() {
        let probes = make_pure_basis_probes(2).unwrap();
        assert_eq!(probes[0].matrix(), &linalg::from_real_diagonal(&[1.0, 0.0]));
        assert_eq!(probes[1].matrix(), &linalg::from_real_diagonal(&[0.0, 1.0]));
        let probes = make_pure_basis_probes(8).unwrap();
        let mut sum = linalg::zeros(8, 8);
        for p in &probes {
            assert_eq!(trace(p.matrix()).re, 1.0);
            assert_eq!(&(p.matrix() * p.matrix()), p.matrix());
            sum += p.matrix();
        }
        assert_eq!(sum, identity(8));
    }

    #[test]
    fn phase_probe_is_a_rank_one_projector() {
        let p = make_phase_probe(2).unwrap();
        assert!(p.matrix().iter().all(|z| *z == c(0.5, 0.0)));
        for d in [2, 4, 8] {
            let p = make_phase_probe(d).unwrap();
            assert!(max_abs(&(p.matrix() * p.matrix() - p.matrix())) < 1e-15);
            let spec = eig_hermitian(p.matrix()).unwrap();
            assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-14);
            assert!(spec.eigenvalues[1..].iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn all_probes_are_valid_states() {
        for d in [2, 3, 4, 8] {
            let set = ProbeSet::mixed(d).unwrap();
            if let BasisProbes::Mixed(rho) = &set.basis {
                DensityMatrix::new(rho.matrix().clone()).unwrap();
            }
            DensityMatrix::new(set.phase_probe.matrix().clone()).unwrap();
            assert_eq!(set.len(), 2);
            assert_eq!(ProbeSet::pure(d).unwrap().len(), d + 1);
        }
    }

    #[test]
    fn custom_mixed_probe_validation() {
        assert!(mixed_basis_probe_with(&[0.7, 0.2, 0.1]).is_ok());
        assert!(mixed_basis_probe_with(&[0.5, 0.5]).is_err());
        assert!(mixed_basis_probe_with(&[0.6, 0.6]).is_err());
        assert!(mixed_basis_probe_with(&[1.0, 0.0]).is_err());
        assert!(mixed_basis_probe_with(&[1.0]).is_err());
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(make_mixed_basis_probe(1).is_err());
        assert!(make_pure_basis_probes(0).is_err());
        assert!(make_phase_probe(1).is_err());
    }
}
