use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{hilbert_dim, inner, norm_sqr, LinearOperator};
use crate::{Error, Result};

/// Pure state of `n_atoms` spin-1/2 particles in the product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    n_atoms: usize,
    amplitudes: Vec<C64>,
}

impl SpinState {
    pub fn new(n_atoms: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = hilbert_dim(n_atoms)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        Ok(Self { n_atoms, amplitudes })
    }

    pub fn basis_state(n_atoms: usize, index: usize) -> Result<Self> {
        let dim = hilbert_dim(n_atoms)?;
        if index >= dim {
            return Err(Error::InvalidInput(format!("basis index {index} >= {dim}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { n_atoms, amplitudes })
    }

    pub fn all_down(n_atoms: usize) -> Result<Self> {
        Self::basis_state(n_atoms, 0)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `1 - |<self|other>|^2`.
    pub fn overlap_deficit(&self, other: &Self) -> f64 {
        1.0 - self.inner(other).norm_sqr()
    }

    pub fn apply<A: LinearOperator + ?Sized>(&self, op: &A) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        op.apply(&self.amplitudes, &mut out);
        out
    }

    pub fn expect<A: LinearOperator + ?Sized>(&self, op: &A) -> C64 {
        inner(&self.amplitudes, &self.apply(op))
    }

    /// `<S_j^+>` of one site.
    pub fn site_raising(&self, site: usize) -> C64 {
        let mask = 1usize << site;
        // <psi| S^+_j |psi> = sum over b with site down of conj(psi[b|j]) psi[b]
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & mask == 0)
            .map(|(b, a)| self.amplitudes[b | mask].conj() * a)
            .sum()
    }
}

/// N-fold tensor power of a normalized single-site vector `(down, up)`.
pub fn product_state(n_atoms: usize, single_site: [C64; 2]) -> Result<SpinState> {
    let dim = hilbert_dim(n_atoms)?;
    let norm = single_site[0].norm_sqr() + single_site[1].norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("single-site vector has squared norm {norm}")));
    }
    let amplitudes = (0..dim)
        .map(|b| {
            let ups = b.count_ones() as i32;
            single_site[1].powi(ups) * single_site[0].powi(n_atoms as i32 - ups)
        })
        .collect();
    SpinState::new(n_atoms, amplitudes)
}

/// `tr(rho_A^2)` for the reduced state on `subset`.
///
/// The amplitudes are reshaped into a matrix `M` (rows: subset
/// configurations, columns: complement configurations) and the purity is
/// `tr((M M^dag)^2)`, evaluated on whichever Gram matrix is smaller.
pub fn partial_trace_purity(state: &SpinState, subset: &[usize]) -> Result<f64> {
    let n = state.n_atoms();
    let mut in_subset = vec![false; n];
    for &s in subset {
        if s >= n {
            return Err(Error::SiteOutOfRange { site: s, n_atoms: n });
        }
        if in_subset[s] {
            return Err(Error::InvalidInput(format!("site {s} listed twice")));
        }
        in_subset[s] = true;
    }
    if subset.is_empty() || subset.len() == n {
        return Err(Error::InvalidInput("subset must be a nonempty proper subset of sites".into()));
    }
    let sub: Vec<usize> = (0..n).filter(|&s| in_subset[s]).collect();
    let comp: Vec<usize> = (0..n).filter(|&s| !in_subset[s]).collect();
    let rows = 1usize << sub.len();
    let cols = 1usize << comp.len();
    let scatter = |bits: &[usize], idx: usize| -> usize {
        bits.iter().enumerate().fold(0, |acc, (k, &site)| acc | ((idx >> k & 1) << site))
    };
    let row_part: Vec<usize> = (0..rows).map(|a| scatter(&sub, a)).collect();
    let col_part: Vec<usize> = (0..cols).map(|c| scatter(&comp, c)).collect();
    let amps = state.amplitudes();
    let m = DMatrix::from_fn(rows, cols, |a, c| amps[row_part[a] | col_part[c]]);
    let gram = if rows <= cols { &m * m.adjoint() } else { m.adjoint() * &m };
    // tr(G^2) = sum |G_ij|^2 for Hermitian G
    Ok(gram.iter().map(|v| v.norm_sqr()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{collective_operator, Axis};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn product_of_down() {
        let s = product_state(3, [c(1.0), c(0.0)]).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn product_of_plus_x() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = product_state(2, [c(h), c(h)]).unwrap();
        for a in s.amplitudes() {
            assert!((a - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn all_up_sz_n16() {
        let s = product_state(16, [c(0.0), c(1.0)]).unwrap();
        let sz = collective_operator(16, Axis::Z).unwrap();
        assert!((s.expect(&sz).re - 8.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_single_site_rejected() {
        assert!(product_state(2, [c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn singlet_purity_half() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = SpinState::new(2, vec![c(0.0), c(-h), c(h), c(0.0)]).unwrap();
        assert!((partial_trace_purity(&s, &[0]).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn purity_rejects_bad_subsets() {
        let s = SpinState::all_down(3).unwrap();
        assert!(partial_trace_purity(&s, &[]).is_err());
        assert!(partial_trace_purity(&s, &[0, 1, 2]).is_err());
        assert!(partial_trace_purity(&s, &[3]).is_err());
    }

    #[test]
    fn site_raising_of_plus_x() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = product_state(3, [c(h), c(h)]).unwrap();
        for j in 0..3 {
            // <S^+> = <S^x> + i<S^y> = 1/2
            assert!((s.site_raising(j) - c(0.5)).norm() < 1e-14);
        }
    }
}
