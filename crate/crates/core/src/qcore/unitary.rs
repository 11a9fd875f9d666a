use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, modulus, Real, C};

/// A `2^k × 2^k` unitary on a small subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseUnitary<R: Real> {
    matrix: DMatrix<C<R>>,
    qubits: usize,
}

/// Largest entry of `|M†M − I|`.
pub fn unitarity_defect<R: Real>(m: &DMatrix<C<R>>) -> f64 {
    let p = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { cone() } else { czero() };
            worst = worst.max(modulus(p[(i, j)] - target).as_f64());
        }
    }
    worst
}

/// Spectral decomposition `W = Q diag(λ) Q†` of a unitary matrix, read off
/// the Hermitian combination `Re W + c·Im W` for a few irrational `c`. The
/// first `c` whose eigenbasis diagonalizes `W` to within `1e3·UNITARY_TOL` is
/// used, so eigenvalues that only coincide under one combination are
/// still separated.
pub fn unitary_eigendecomposition<R: Real>(w: &DMatrix<C<R>>) -> Result<(DMatrix<C<R>>, Vec<C<R>>)> {
    let n = w.nrows();
    let half = C::new(R::lit(0.5), R::zero());
    let re = (w + w.adjoint()) * half;
    let im = (w - w.adjoint()) * C::new(R::zero(), R::lit(-0.5));
    let mut worst = f64::INFINITY;
    for c in [0.618_033_988_749_895, -1.732_050_807_568_877, 0.414_213_562_373_095, 2.718_281_828_459_045] {
        let h = &re + &im * C::new(R::lit(c), R::zero());
        let q = h.symmetric_eigen().eigenvectors;
        let t = q.adjoint() * w * &q;
        let mut off = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(modulus(t[(i, j)]).as_f64());
                }
            }
        }
        if off <= 1e3 * R::UNITARY_TOL {
            return Ok((q, (0..n).map(|i| t[(i, i)]).collect()));
        }
        worst = worst.min(off);
    }
    Err(Error::EigRootFailure(format!("no eigenbasis found (off-diagonal {worst:.2e})")))
}

fn log2_exact(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

impl<R: Real> DenseUnitary<R> {
    /// Validates shape (square, power-of-two dimension) and unitarity.
    pub fn new(matrix: DMatrix<C<R>>) -> Result<Self> {
        Self::with_tolerance(matrix, R::UNITARY_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<C<R>>, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let qubits = log2_exact(matrix.nrows())
            .ok_or(Error::DimensionMismatch { expected: matrix.nrows().next_power_of_two(), found: matrix.nrows() })?;
        let defect = unitarity_defect(&matrix);
        if !(defect <= tol) {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { matrix, qubits })
    }

    /// Skips the unitarity check. The caller vouches for it.
    pub fn new_unchecked(matrix: DMatrix<C<R>>) -> Self {
        let qubits = log2_exact(matrix.nrows()).expect("power-of-two dimension");
        Self { matrix, qubits }
    }

    pub fn identity(qubits: usize) -> Self {
        Self { matrix: DMatrix::identity(1 << qubits, 1 << qubits), qubits }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<C<R>> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C<R>> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), qubits: self.qubits }
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        Ok(Self { matrix: &self.matrix * &rhs.matrix, qubits: self.qubits })
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self { matrix: self.matrix.kronecker(&rhs.matrix), qubits: self.qubits + rhs.qubits }
    }

    pub fn scale_phase(&self, phase: C<R>) -> Self {
        Self { matrix: &self.matrix * phase, qubits: self.qubits }
    }

    pub fn apply(&self, v: &DVector<C<R>>) -> Result<DVector<C<R>>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(&self.matrix * v)
    }

    pub fn trace(&self) -> C<R> {
        self.matrix.trace()
    }

    /// `tr(self† · other)`.
    pub fn overlap(&self, other: &Self) -> Result<C<R>> {
        self.check_dim(other)?;
        let mut acc = czero();
        for (a, b) in self.matrix.iter().zip(other.matrix.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, p: u64) -> Self {
        let mut result = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.matrix.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self { matrix: result, qubits: self.qubits }
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}
