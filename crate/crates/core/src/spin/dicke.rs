use num_complex::Complex64 as C64;

use super::{hilbert_dim, SpinState};
use crate::analytics::binomial;
use crate::{Error, Result};

/// State in a fixed total-spin manifold `|S, m>`, `m = -S..=S`.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeState {
    two_s: usize,
    amplitudes: Vec<C64>,
}

impl DickeState {
    /// `amplitudes[k]` multiplies `|S, k - S>`; `two_s` is `2S`.
    pub fn new(two_s: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != two_s + 1 {
            return Err(Error::DimensionMismatch { expected: two_s + 1, found: amplitudes.len() });
        }
        Ok(Self { two_s, amplitudes })
    }

    /// The single basis state `|S, m>` with `m = two_m / 2`.
    pub fn basis(two_s: usize, two_m: i64) -> Result<Self> {
        let s = two_s as i64;
        if two_m.abs() > s || (two_m - s) % 2 != 0 {
            return Err(Error::InvalidInput(format!("m = {}/2 invalid for S = {}/2", two_m, two_s)));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); two_s + 1];
        amplitudes[((two_m + s) / 2) as usize] = C64::new(1.0, 0.0);
        Self::new(two_s, amplitudes)
    }

    pub fn total_spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Embeds a state of the `S = N/2` manifold into the symmetric subspace of
/// the product basis: `|N/2, m>` is the uniform superposition of all
/// `C(N, N/2 + m)` configurations with `N/2 + m` spins up.
pub fn dicke_expand(state: &DickeState, n_atoms: usize) -> Result<SpinState> {
    if state.two_s != n_atoms {
        return Err(Error::InvalidInput(format!(
            "total spin {} does not equal N/2 = {}",
            state.total_spin(),
            n_atoms as f64 / 2.0
        )));
    }
    let dim = hilbert_dim(n_atoms)?;
    let norms: Vec<f64> = (0..=n_atoms).map(|k| binomial(n_atoms as u64, k as u64).sqrt()).collect();
    let amplitudes = (0..dim)
        .map(|b| {
            let k = b.count_ones() as usize;
            state.amplitudes[k] / norms[k]
        })
        .collect();
    SpinState::new(n_atoms, amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_pair() {
        let s = dicke_expand(&DickeState::basis(2, 2).unwrap(), 2).unwrap();
        assert_eq!(s.amplitudes()[3], C64::new(1.0, 0.0));
        assert!(s.amplitudes()[..3].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn triplet_zero() {
        let s = dicke_expand(&DickeState::basis(2, 0).unwrap(), 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[1].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[2].re - h).abs() < 1e-15);
        assert_eq!(s.amplitudes()[0].norm(), 0.0);
    }

    #[test]
    fn six_atoms_m1_symmetrization_oracle() {
        // Oracle: explicitly symmetrize |up up up up down down> over all
        // 6! permutations of the sites and normalize.
        let n = 6;
        let seed = 0b001111usize;
        let mut acc = vec![0.0f64; 1 << n];
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, &mut |p| {
            let mut b = 0;
            for (src, &dst) in p.iter().enumerate() {
                b |= (seed >> src & 1) << dst;
            }
            acc[b] += 1.0;
        });
        let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        let got = dicke_expand(&DickeState::basis(6, 2).unwrap(), n).unwrap();
        let mut support = 0;
        for b in 0..1 << n {
            assert!((got.amplitudes()[b].re - acc[b] / norm).abs() < 1e-14);
            if acc[b] > 0.0 {
                support += 1;
                assert!((got.amplitudes()[b].re - 1.0 / 15f64.sqrt()).abs() < 1e-14);
            }
        }
        assert_eq!(support, 15);
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn wrong_manifold_rejected() {
        assert!(dicke_expand(&DickeState::basis(2, 0).unwrap(), 4).is_err());
    }
}
