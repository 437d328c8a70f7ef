//! Compressed-row sparse complex matrices.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::LinearOperator;

/// Rows per rayon task in the matrix-vector product.
const ROW_CHUNK: usize = 2048;

/// A square sparse complex matrix.
///
/// Built from coordinate triplets (duplicates are summed, exact zeros are
/// dropped) and stored in compressed-row form, since every operator in this
/// crate is assembled once and applied many times.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        assert!(dim <= u32::MAX as usize, "dimension {dim} exceeds u32 column indices");
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc as usize == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c as u32);
            vals.push(v);
        }
        // drop entries that summed to exactly zero
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != C64::new(0.0, 0.0) {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols: keep_cols, vals: keep_vals }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Coordinate-format view, sorted by (row, col).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    /// Entries of one row as (col, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k] as usize, self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest |A_rc - A*_cr| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute row sum; an upper bound on the spectral norm.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<C64>, drop_below: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].norm() > drop_below {
                    trip.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), trip)
    }

    /// Bytes needed to hold a CSR matrix with the given shape.
    pub fn estimated_bytes(dim: usize, nnz: usize) -> u64 {
        (nnz as u64) * (std::mem::size_of::<C64>() as u64 + 4) + (dim as u64 + 1) * 8
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut trip: Vec<_> = self.entries().collect();
        trip.extend(other.entries().map(|(r, c, v)| (r, c, v * sign)));
        Self::from_triplets(self.dim, trip)
    }

    fn product(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut trip = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if acc[c] == C64::new(0.0, 0.0) {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
            }
            touched.clear();
        }
        Self::from_triplets(self.dim, trip)
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(chunk, ys)| {
            let base = chunk * ROW_CHUNK;
            for (i, yi) in ys.iter_mut().enumerate() {
                let r = base + i;
                let mut s = C64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    s += self.vals[k] * x[self.cols[k] as usize];
                }
                *yi = s;
            }
        });
    }
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: &SparseOperator) -> SparseOperator {
        self.product(rhs)
    }
}

impl Mul<C64> for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: C64) -> SparseOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: f64) -> SparseOperator {
        self.scale(C64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_are_merged_and_sorted() {
        let op = SparseOperator::from_triplets(
            3,
            vec![(2, 0, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (2, 0, c(0.5, 1.0)), (1, 1, c(0.0, 0.0))],
        );
        let e: Vec<_> = op.entries().collect();
        assert_eq!(e, vec![(0, 1, c(2.0, 0.0)), (2, 0, c(1.5, 1.0))]);
        assert_eq!(op.get(2, 0), c(1.5, 1.0));
        assert_eq!(op.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn cancelling_duplicates_disappear() {
        let op = SparseOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0))]);
        assert_eq!(op.nnz(), 0);
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseOperator::from_triplets(
            3,
            vec![(0, 0, c(1.0, 1.0)), (0, 2, c(2.0, 0.0)), (1, 1, c(0.0, 3.0)), (2, 0, c(-1.0, 0.0))],
        );
        let b = a.adjoint();
        let sparse = (&a * &b).to_dense();
        let dense = a.to_dense() * b.to_dense();
        assert!((sparse - dense).norm() < 1e-14);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = SparseOperator::from_triplets(
            4,
            vec![(0, 3, c(1.0, -1.0)), (1, 1, c(2.0, 0.0)), (3, 0, c(0.5, 0.5)), (2, 1, c(0.0, 1.0))],
        );
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 1.0)];
        let mut y = vec![C64::default(); 4];
        a.apply(&x, &mut y);
        let dense = a.to_dense() * nalgebra::DVector::from_vec(x);
        for i in 0..4 {
            assert!((y[i] - dense[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn hermiticity_check() {
        let h = SparseOperator::from_triplets(2, vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]);
        assert!(h.is_hermitian(1e-15));
        let nh = SparseOperator::from_triplets(2, vec![(0, 1, c(0.0, 1.0))]);
        assert!(!nh.is_hermitian(1e-3));
    }
}
