use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::{hilbert_dim, SparseOperator, SpinState};
use crate::{Error, Result};

/// Dense density matrix over the product basis, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_atoms: usize,
    dim: usize,
    elements: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &SpinState) -> Self {
        let a = state.amplitudes();
        let dim = a.len();
        let mut elements = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                elements.push(a[r] * a[c].conj());
            }
        }
        Self { n_atoms: state.n_atoms(), dim, elements }
    }

    pub fn from_elements(n_atoms: usize, elements: Vec<C64>) -> Result<Self> {
        let dim = hilbert_dim(n_atoms)?;
        if elements.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: elements.len() });
        }
        Ok(Self { n_atoms, dim, elements })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[C64] {
        &self.elements
    }

    pub(crate) fn elements_mut(&mut self) -> &mut [C64] {
        &mut self.elements
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.elements[r * self.dim + c]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.elements.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.elements)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_dense();
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `tr(A rho)`.
    pub fn expect(&self, op: &SparseOperator) -> C64 {
        op.entries().map(|(r, c, v)| v * self.get(c, r)).sum()
    }

    /// `<S_j^+> = sum over b with site down of rho[b, b|j]`.
    pub fn site_raising(&self, site: usize) -> C64 {
        let mask = 1usize << site;
        (0..self.dim).filter(|b| b & mask == 0).map(|b| self.get(b, b | mask)).sum()
    }

    /// `A rho` as a dense row-major buffer.
    pub(crate) fn left_mul(op: &SparseOperator, rho: &[C64], dim: usize, out: &mut [C64]) {
        use rayon::prelude::*;
        out.par_chunks_mut(dim).enumerate().for_each(|(r, row)| {
            row.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (k, a) in op.row(r) {
                let src = &rho[k * dim..(k + 1) * dim];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += a * s;
                }
            }
        });
    }
}
