//! Dense complex linear algebra.
//!
//! Thin, checked wrappers over nalgebra's decompositions. Eigenvalues and
//! singular values come back sorted in descending order. The logarithm of a
//! unitary is taken on the principal branch `(-pi, pi]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix. Storage is column-major, so `as_slice()` is the
/// column-stacked vectorization used by superoperators.
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Hermiticity tolerance accepted (and symmetrized away) by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Unitarity tolerance for inputs that must be unitary.
pub const UNITARY_TOL: f64 = 1e-8;
/// Distance from `-pi` below which an eigenphase is reported as ambiguous.
pub const BRANCH_TOL: f64 = 1e-10;

const MAX_SWEEPS_PER_DIM: usize = 1000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Builds a matrix from row-major real/imaginary pairs.
pub fn from_rows(rows: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch("ragged or empty row list".into()));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn from_real_diagonal(diag: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        diag.len(),
        diag.iter().map(|&x| c(x, 0.0)),
    ))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Largest entry modulus.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// `max |U†U - I|` entrywise.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn ensure_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if a.is_square() {
        Ok(a.nrows())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

pub fn ensure_finite(a: &ComplexMatrix, what: &str) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(format!("{what} has non-finite entries")))
    }
}

pub fn ensure_unitary(u: &ComplexMatrix) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitary(defect))
    }
}

/// `(a + a†) / 2`.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Spectrum and eigenbasis of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigSystem {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, paired index-wise with
    /// `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> ComplexVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `V diag(λ) V†`.
    pub fn recompose(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let lam = from_real_diagonal(&self.eigenvalues);
        v * lam * v.adjoint()
    }
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized first; inputs further than [`HERMITIAN_TOL`]
/// from Hermitian are rejected.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigSystem> {
    let n = ensure_square(a, "eig_hermitian input")?;
    ensure_finite(a, "eig_hermitian input")?;
    let defect = hermiticity_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = hermitian_part(a);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS_PER_DIM * n.max(1))
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermitianEigSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular value decomposition `a = u · diag(s) · w†`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Non-negative, descending.
    pub singular_values: Vec<f64>,
    pub w: ComplexMatrix,
}

impl Svd {
    pub fn recompose(&self) -> ComplexMatrix {
        &self.u * from_real_diagonal(&self.singular_values) * self.w.adjoint()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(a, "svd input")?;
    let k = a.nrows().min(a.ncols());
    let mut dec = SVD::try_new(a.clone(), true, true, f64::EPSILON, MAX_SWEEPS_PER_DIM * k.max(1))
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    dec.sort_by_singular_values();
    let u = dec
        .u
        .ok_or_else(|| Error::NumericalFailure("SVD returned no left factor".into()))?;
    let w = dec
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD returned no right factor".into()))?
        .adjoint();
    Ok(Svd {
        u,
        singular_values: dec.singular_values.iter().copied().collect(),
        w,
    })
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a, "matrix_exp input")?;
    ensure_finite(a, "matrix_exp input")?;
    let e = a.exp();
    ensure_finite(&e, "matrix exponential")?;
    Ok(e)
}

/// Principal logarithm of a unitary.
#[derive(Debug, Clone)]
pub struct UnitaryLog {
    /// Anti-Hermitian `L` with `exp(L) = U`.
    pub generator: ComplexMatrix,
    /// Eigenphases of `U` in `(-pi, pi]`.
    pub phases: Vec<f64>,
    /// Some eigenphase lies within [`BRANCH_TOL`] of the branch cut.
    pub branch_ambiguous: bool,
}

impl UnitaryLog {
    /// The Hermitian generator `H = i L`, so that `exp(-i H) = U`.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        hermitian_part(&(&self.generator * c(0.0, 1.0)))
    }
}

/// Principal matrix logarithm of a unitary via its Schur form, which is
/// diagonal for normal matrices.
pub fn principal_log_unitary(u: &ComplexMatrix) -> Result<UnitaryLog> {
    let n = ensure_square(u, "principal_log_unitary input")?;
    ensure_unitary(u)?;
    let schur = Schur::try_new(u.clone(), f64::EPSILON, MAX_SWEEPS_PER_DIM * n.max(1))
        .ok_or_else(|| Error::NumericalFailure("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut off_diag: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            off_diag = off_diag.max(t[(i, j)].norm());
        }
    }
    if off_diag > 1e-8 {
        return Err(Error::NumericalFailure(format!(
            "Schur form of a unitary is not diagonal (off-diagonal {off_diag:.3e})"
        )));
    }

    let mut branch_ambiguous = false;
    let phases: Vec<f64> = (0..n)
        .map(|k| {
            let mut theta = t[(k, k)].arg();
            if theta <= -PI + BRANCH_TOL {
                theta += 2.0 * PI;
            }
            if theta >= PI - BRANCH_TOL {
                branch_ambiguous = true;
            }
            theta
        })
        .collect();

    let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        phases.iter().map(|&th| c(0.0, th)),
    ));
    let l = &q * diag * q.adjoint();
    // Project onto the anti-Hermitian matrices to strip roundoff.
    let generator = (&l - l.adjoint()) * c(0.5, 0.0);
    Ok(UnitaryLog {
        generator,
        phases,
        branch_ambiguous,
    })
}

/// Trace of a square matrix.
pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `Tr(a · b)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    debug_assert_eq!(b.ncols(), n);
    acc
}
