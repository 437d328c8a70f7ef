//! Propagation by full diagonalization; only practical for small systems and
//! used as a reference.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::spin::{SparseOperator, SpinState};
use crate::{Error, Result};

/// Largest dimension accepted by the dense solver.
pub const MAX_DENSE_DIM: usize = 1 << 10;

/// Eigendecomposition `H = U diag(E) U^dag` of a Hermitian operator.
pub struct DenseEvolution {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl DenseEvolution {
    pub fn new(h: &SparseOperator) -> Result<Self> {
        if h.dim() > MAX_DENSE_DIM {
            return Err(Error::InvalidInput(format!(
                "dense diagonalization limited to dimension {MAX_DENSE_DIM}, got {}",
                h.dim()
            )));
        }
        if !h.is_hermitian(1e-12) {
            return Err(Error::InvalidInput("dense propagation needs a Hermitian operator".into()));
        }
        let eig = SymmetricEigen::new(h.to_dense());
        Ok(Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors: eig.eigenvectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Sorted copy of the spectrum.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut e = self.eigenvalues.clone();
        e.sort_by(f64::total_cmp);
        e
    }

    /// `exp(-i H t) psi`.
    pub fn propagate(&self, psi: &SpinState, t: f64) -> Result<SpinState> {
        if psi.dim() != self.eigenvalues.len() {
            return Err(Error::DimensionMismatch { expected: self.eigenvalues.len(), found: psi.dim() });
        }
        let v = DVector::from_column_slice(psi.amplitudes());
        let mut c = self.eigenvectors.adjoint() * v;
        for (ci, e) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= C64::from_polar(1.0, -e * t);
        }
        let out = &self.eigenvectors * c;
        SpinState::new(psi.n_atoms(), out.iter().copied().collect())
    }
}
