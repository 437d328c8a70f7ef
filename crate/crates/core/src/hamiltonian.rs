//! Redshift-plus-exchange Hamiltonian, state-preparation unitaries and the
//! cavity coupling map.
//!
//! The interaction part of the Hamiltonian is collective, so every operator
//! here has the form `diag + c * sum_{i != j} S_i^+ S_j^-`. [`CgrOperator`]
//! stores exactly that and can be applied matrix-free or expanded into a
//! [`SparseOperator`].

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spin::{hilbert_dim, Axis, LinearOperator, SparseOperator, SpinState};
use crate::{Error, Result};

/// Default ceiling for assembled sparse operators.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Parameters of the collective-exchange Hamiltonian with a linear redshift
/// gradient, one atom per lattice site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgrParams {
    pub n_sites: usize,
    /// Exchange coupling (rad/s).
    pub j_perp: f64,
    /// Ising coupling (rad/s).
    pub j_z: f64,
    /// Nearest-neighbour redshift (rad/s).
    pub omega_grs: f64,
    /// Measure the gradient from the chain centre, `j - (Ns - 1)/2`.
    #[serde(default = "default_centered")]
    pub centered: bool,
}

fn default_centered() -> bool {
    true
}

impl CgrParams {
    /// Parameters from the dimensionless ratio `eta = omega_split / (N J_perp)`.
    pub fn from_eta(n_sites: usize, j_perp: f64, j_z: f64, eta: f64) -> Self {
        let omega_split = eta * n_sites as f64 * j_perp;
        Self { n_sites, j_perp, j_z, omega_grs: omega_split / (n_sites as f64 - 1.0), centered: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 sites, got {}", self.n_sites)));
        }
        hilbert_dim(self.n_sites)?;
        if ![self.j_perp, self.j_z, self.omega_grs].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("couplings must be finite".into()));
        }
        Ok(())
    }

    /// Maximum redshift across the array, `(Ns - 1) omega_GRS`.
    pub fn omega_split(&self) -> f64 {
        (self.n_sites as f64 - 1.0) * self.omega_grs
    }

    /// `omega_split / (N J_perp)`.
    pub fn eta(&self) -> f64 {
        self.omega_split() / (self.n_sites as f64 * self.j_perp)
    }

    /// Coordinate multiplying `omega_GRS` on site `j`.
    pub fn site_offset(&self, j: usize) -> f64 {
        if self.centered {
            j as f64 - (self.n_sites as f64 - 1.0) / 2.0
        } else {
            j as f64
        }
    }

    /// Bare precession frequency of site `j`.
    pub fn bare_frequency(&self, j: usize) -> f64 {
        self.omega_grs * self.site_offset(j)
    }
}

/// `diag + exchange * sum_{i != j} S_i^+ S_j^-` on the product basis.
#[derive(Clone, Debug)]
pub struct CgrOperator {
    n_atoms: usize,
    exchange: f64,
    diag: Vec<f64>,
}

impl CgrOperator {
    /// `J_perp S.S + (J_z - J_perp) S^z S^z + omega_GRS sum_j j S^z_j`.
    pub fn cgr(p: &CgrParams) -> Result<Self> {
        p.validate()?;
        let n = p.n_sites;
        let half = n as f64 / 2.0;
        let offsets: Vec<f64> = (0..n).map(|j| p.omega_grs * p.site_offset(j)).collect();
        // S.S = S_z^2 + N/2 + sum_{i != j} S_i^+ S_j^-
        let diag = (0..1usize << n)
            .map(|b| {
                let m = b.count_ones() as f64 - half;
                p.j_z * m * m + p.j_perp * half + gradient_term(&offsets, b)
            })
            .collect();
        Ok(Self { n_atoms: n, exchange: p.j_perp, diag })
    }

    /// `J_perp S^+ S^- + omega_GRS sum_j j S^z_j`: the bare cavity exchange
    /// (no dressing, `J_z` ignored) that enters the dissipative model.
    pub fn exchange_only(p: &CgrParams) -> Result<Self> {
        p.validate()?;
        let n = p.n_sites;
        let offsets: Vec<f64> = (0..n).map(|j| p.omega_grs * p.site_offset(j)).collect();
        // S^+ S^- = sum_i n_i + sum_{i != j} S_i^+ S_j^-
        let diag = (0..1usize << n)
            .map(|b| p.j_perp * b.count_ones() as f64 + gradient_term(&offsets, b))
            .collect();
        Ok(Self { n_atoms: n, exchange: p.j_perp, diag })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Number of stored entries of the CSR expansion.
    pub fn sparse_nnz(&self) -> usize {
        let n = self.n_atoms as u64;
        let dim = 1u64 << n;
        let offdiag = if self.exchange != 0.0 && n >= 2 { n * (n - 1) * (1u64 << (n - 2)) } else { 0 };
        (dim + offdiag) as usize
    }

    pub fn to_sparse(&self, memory_budget: u64) -> Result<SparseOperator> {
        let dim = self.diag.len();
        let required = SparseOperator::estimated_bytes(dim, self.sparse_nnz()) * 2;
        if required > memory_budget {
            return Err(Error::MemoryBudget { required, budget: memory_budget });
        }
        let n = self.n_atoms;
        let mut trip = Vec::with_capacity(self.sparse_nnz());
        for b in 0..dim {
            trip.push((b, b, C64::new(self.diag[b], 0.0)));
            if self.exchange == 0.0 {
                continue;
            }
            for j in (0..n).filter(|&j| b >> j & 1 == 1) {
                for i in (0..n).filter(|&i| b >> i & 1 == 0) {
                    trip.push((b ^ (1 << j) ^ (1 << i), b, C64::new(self.exchange, 0.0)));
                }
            }
        }
        Ok(SparseOperator::from_triplets(dim, trip))
    }

    /// Upper bound on the spectral radius (row-sum norm).
    pub fn norm_bound(&self) -> f64 {
        let n = self.n_atoms;
        self.diag
            .iter()
            .enumerate()
            .map(|(b, d)| {
                let k = b.count_ones() as usize;
                d.abs() + self.exchange.abs() * (k * (n - k)) as f64
            })
            .fold(0.0, f64::max)
    }
}

fn gradient_term(offsets: &[f64], b: usize) -> f64 {
    offsets
        .iter()
        .enumerate()
        .map(|(j, w)| if b >> j & 1 == 1 { 0.5 * w } else { -0.5 * w })
        .sum()
}

impl LinearOperator for CgrOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let dim = self.diag.len();
        assert_eq!(x.len(), dim);
        assert_eq!(y.len(), dim);
        const CHUNK: usize = 1024;
        if self.exchange == 0.0 {
            y.iter_mut().zip(x).zip(&self.diag).for_each(|((yi, xi), d)| *yi = xi * d);
            return;
        }
        // lowered[c] = (S^- x)[c] = sum over down sites j of c of x[c | j]
        let mut lowered = vec![C64::new(0.0, 0.0); dim];
        lowered.par_chunks_mut(CHUNK).enumerate().for_each(|(k, out)| {
            for (i, o) in out.iter_mut().enumerate() {
                let c = k * CHUNK + i;
                let mut s = C64::new(0.0, 0.0);
                let mut free = !c & (dim - 1);
                while free != 0 {
                    let bit = free & free.wrapping_neg();
                    s += x[c | bit];
                    free ^= bit;
                }
                *o = s;
            }
        });
        // y = diag x + exchange * (S^+ lowered - n_up x)
        let ex = self.exchange;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(k, out)| {
            for (i, o) in out.iter_mut().enumerate() {
                let r = k * CHUNK + i;
                let mut s = C64::new(0.0, 0.0);
                let mut ups = r;
                while ups != 0 {
                    let bit = ups & ups.wrapping_neg();
                    s += lowered[r ^ bit];
                    ups ^= bit;
                }
                let n_up = r.count_ones() as f64;
                *o = x[r] * (self.diag[r] - ex * n_up) + s * ex;
            }
        });
    }
}

/// Sparse `H_cGR` with the default memory budget.
pub fn build_hcgr(p: &CgrParams) -> Result<SparseOperator> {
    build_hcgr_with_budget(p, DEFAULT_MEMORY_BUDGET)
}

pub fn build_hcgr_with_budget(p: &CgrParams, memory_budget: u64) -> Result<SparseOperator> {
    CgrOperator::cgr(p)?.to_sparse(memory_budget)
}

/// Sign of the exponent of a rotation: `Minus` is `exp(-i angle S)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationSign {
    Minus,
    Plus,
}

/// One-axis twisting `exp(-i Q S^z S^z / N)`, a diagonal phase in the
/// product basis.
pub fn oat_unitary_apply(state: &SpinState, q: f64) -> SpinState {
    let n = state.n_atoms();
    let half = n as f64 / 2.0;
    let phases: Vec<C64> = (0..=n)
        .map(|k| {
            let m = k as f64 - half;
            C64::from_polar(1.0, -q * m * m / n as f64)
        })
        .collect();
    let mut out = state.clone();
    out.amplitudes_mut()
        .iter_mut()
        .enumerate()
        .for_each(|(b, a)| *a *= phases[b.count_ones() as usize]);
    out
}

/// Global rotation `exp(-/+ i angle S^axis)`, applied as a product of
/// single-site 2x2 rotations.
pub fn rotation_apply(state: &SpinState, axis: Axis, angle: f64, sign: RotationSign) -> Result<SpinState> {
    let phi = match sign {
        RotationSign::Minus => angle,
        RotationSign::Plus => -angle,
    };
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let zero = C64::new(0.0, 0.0);
    // cos(phi/2) I - 2i sin(phi/2) S^axis, basis order (down, up)
    let u = match axis {
        Axis::X => [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]],
        Axis::Y => [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]],
        Axis::Z => [[C64::new(c, s), zero], [zero, C64::new(c, -s)]],
        _ => return Err(Error::InvalidInput(format!("rotation axis must be x, y or z, got {axis:?}"))),
    };
    let mut out = state.clone();
    let amps = out.amplitudes_mut();
    for site in 0..state.n_atoms() {
        let mask = 1usize << site;
        for b in (0..amps.len()).filter(|b| b & mask == 0) {
            let (x0, x1) = (amps[b], amps[b | mask]);
            amps[b] = u[0][0] * x0 + u[0][1] * x1;
            amps[b | mask] = u[1][0] * x0 + u[1][1] * x1;
        }
    }
    Ok(out)
}

/// All atoms down followed by the `exp(i pi/2 S^y)` pulse: every spin along +x.
pub fn coherent_plus_x(n_atoms: usize) -> Result<SpinState> {
    rotation_apply(&SpinState::all_down(n_atoms)?, Axis::Y, std::f64::consts::FRAC_PI_2, RotationSign::Plus)
}

/// Homogeneous atom-cavity parameters (all angular frequencies, rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Half the single-photon Rabi frequency.
    pub g_c: f64,
    pub kappa: f64,
    pub delta_c: f64,
    pub n_atoms: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidInput(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.delta_c == 0.0 || !self.delta_c.is_finite() {
            return Err(Error::InvalidInput("cavity detuning must be finite and nonzero".into()));
        }
        if !(self.n_atoms > 0.0) {
            return Err(Error::InvalidInput("atom number must be positive".into()));
        }
        Ok(())
    }
}

/// Per-atom couplings from adiabatic elimination of the cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityCouplings {
    pub j_perp: f64,
    pub gamma: f64,
}

/// `J_perp = g^2 Delta / (Delta^2 + kappa^2/4)`, `Gamma = g^2 kappa / (Delta^2 + kappa^2/4)`.
pub fn cavity_to_couplings(p: &CavityParams) -> Result<CavityCouplings> {
    p.validate()?;
    let denom = p.delta_c * p.delta_c + p.kappa * p.kappa / 4.0;
    let g2 = p.g_c * p.g_c;
    Ok(CavityCouplings { j_perp: g2 * p.delta_c / denom, gamma: g2 * p.kappa / denom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::CollectiveMoments;
    use crate::spin::{collective_operator, total_spin_squared};
    use std::f64::consts::PI;

    fn params(n: usize, jp: f64, jz: f64, w: f64) -> CgrParams {
        CgrParams { n_sites: n, j_perp: jp, j_z: jz, omega_grs: w, centered: true }
    }

    #[test]
    fn two_site_gradient_diagonal() {
        let h = build_hcgr(&params(2, 0.0, 0.0, 1.0)).unwrap();
        // |up down>: site 0 up (offset -1/2), site 1 down (offset +1/2)
        assert!((h.get(0b01, 0b01).re + 0.5).abs() < 1e-15);
        assert!((h.get(0b10, 0b10).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_point_symmetries() {
        let p = params(5, 0.7, 0.7, 0.0);
        let h = build_hcgr(&p).unwrap();
        let sz = collective_operator(5, Axis::Z).unwrap();
        let s2 = total_spin_squared(5).unwrap();
        assert!(SparseOperator::commutator(&h, &sz).max_abs_diff(&SparseOperator::zeros(32)) < 1e-12);
        assert!(SparseOperator::commutator(&h, &s2).max_abs_diff(&SparseOperator::zeros(32)) < 1e-12);
    }

    #[test]
    fn matches_operator_algebra() {
        let p = CgrParams { n_sites: 5, j_perp: 0.8, j_z: -0.3, omega_grs: 0.45, centered: false };
        let h = build_hcgr(&p).unwrap();
        let s2 = total_spin_squared(5).unwrap();
        let sz = collective_operator(5, Axis::Z).unwrap();
        let mut want = &s2 * p.j_perp;
        want = &want + &(&(&sz * &sz) * (p.j_z - p.j_perp));
        for j in 0..5 {
            let szj = crate::spin::local_operator(5, j, Axis::Z).unwrap();
            want = &want + &(&szj * (p.omega_grs * j as f64));
        }
        assert!(h.max_abs_diff(&want) < 1e-12);
        assert!(h.is_hermitian(1e-14));
    }

    #[test]
    fn matrix_free_matches_sparse() {
        let p = params(7, 0.9, 0.2, 0.31);
        for op in [CgrOperator::cgr(&p).unwrap(), CgrOperator::exchange_only(&p).unwrap()] {
            let sparse = op.to_sparse(DEFAULT_MEMORY_BUDGET).unwrap();
            assert_eq!(sparse.nnz(), op.sparse_nnz());
            let x: Vec<C64> = (0..128).map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64).cos())).collect();
            let mut a = vec![C64::default(); 128];
            let mut b = vec![C64::default(); 128];
            op.apply(&x, &mut a);
            sparse.apply(&x, &mut b);
            for k in 0..128 {
                assert!((a[k] - b[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exchange_only_is_s_plus_s_minus() {
        let p = params(4, 1.3, 99.0, 0.0);
        let h = CgrOperator::exchange_only(&p).unwrap().to_sparse(DEFAULT_MEMORY_BUDGET).unwrap();
        let sp = collective_operator(4, Axis::Plus).unwrap();
        let want = &(&sp * &sp.adjoint()) * 1.3;
        assert!(h.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn centered_gradient_is_traceless() {
        let h = build_hcgr(&params(6, 0.0, 0.0, 2.5)).unwrap();
        assert!(h.trace().norm() < 1e-12);
    }

    #[test]
    fn memory_budget_reports_required_bytes() {
        let err = build_hcgr_with_budget(&params(10, 1.0, 1.0, 0.1), 1024).unwrap_err();
        match err {
            Error::MemoryBudget { required, budget } => {
                assert_eq!(budget, 1024);
                assert!(required > 1024);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn oat_identity_and_phase() {
        let s = coherent_plus_x(4).unwrap();
        assert_eq!(oat_unitary_apply(&s, 0.0), s);
        let up = SpinState::basis_state(2, 3).unwrap();
        let q = 0.9;
        let out = oat_unitary_apply(&up, q);
        assert!((out.amplitudes()[3] - C64::from_polar(1.0, -q / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn oat_mean_spin_closed_form() {
        let n = 16;
        let q = 2.0 * PI * 0.6;
        let s = oat_unitary_apply(&coherent_plus_x(n).unwrap(), q);
        let m = CollectiveMoments::of(&s);
        let want = n as f64 / 2.0 * (q / n as f64).cos().powi(n as i32 - 1);
        assert!((m.mean[0] - want).abs() < 1e-9);
    }

    #[test]
    fn pulse_gives_plus_x() {
        let s = coherent_plus_x(6).unwrap();
        let m = CollectiveMoments::of(&s);
        assert!((m.mean[0] - 3.0).abs() < 1e-12);
        assert!(m.mean[1].abs() < 1e-12 && m.mean[2].abs() < 1e-12);
    }

    #[test]
    fn full_turn_is_global_phase() {
        let s = oat_unitary_apply(&coherent_plus_x(5).unwrap(), 1.1);
        for axis in Axis::CARTESIAN {
            let r = rotation_apply(&s, axis, 2.0 * PI, RotationSign::Minus).unwrap();
            assert!(r.overlap_deficit(&s) < 1e-12);
            let (a, b) = (CollectiveMoments::of(&s), CollectiveMoments::of(&r));
            for i in 0..3 {
                assert!((a.mean[i] - b.mean[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pi_about_x_flips_all_up() {
        let n = 4;
        let up = SpinState::basis_state(n, 15).unwrap();
        let r = rotation_apply(&up, Axis::X, PI, RotationSign::Minus).unwrap();
        assert!((r.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_matches_sparse_exponential() {
        // exp(-i a S^x) on one site against the series of the sparse operator
        let n = 3;
        let s = oat_unitary_apply(&coherent_plus_x(n).unwrap(), 0.8);
        let sx = collective_operator(n, Axis::X).unwrap();
        let a = 0.37;
        let mut term = s.amplitudes().to_vec();
        let mut sum = term.clone();
        for k in 1..40 {
            let mut next = vec![C64::default(); term.len()];
            sx.apply(&term, &mut next);
            term = next.iter().map(|v| v * C64::new(0.0, -a) / k as f64).collect();
            sum.iter_mut().zip(&term).for_each(|(p, q)| *p += q);
        }
        let r = rotation_apply(&s, Axis::X, a, RotationSign::Minus).unwrap();
        for (p, q) in r.amplitudes().iter().zip(&sum) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn oat_commutes_with_z_rotation() {
        let s = rotation_apply(&coherent_plus_x(6).unwrap(), Axis::X, 0.4, RotationSign::Minus).unwrap();
        let a = rotation_apply(&oat_unitary_apply(&s, 1.7), Axis::Z, 0.9, RotationSign::Minus).unwrap();
        let b = oat_unitary_apply(&rotation_apply(&s, Axis::Z, 0.9, RotationSign::Minus).unwrap(), 1.7);
        for (p, q) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn cavity_map_reference_numbers() {
        let two_pi = 2.0 * PI;
        let p = CavityParams { g_c: two_pi * 4.0, kappa: two_pi * 160e3, delta_c: two_pi * 5e6, n_atoms: 1e5 };
        let c = cavity_to_couplings(&p).unwrap();
        assert!((p.n_atoms * c.j_perp / two_pi - 0.32).abs() / 0.32 < 0.03);
        assert!((p.n_atoms * c.gamma / two_pi - 0.01).abs() / 0.01 < 0.03);
        assert!((c.gamma / c.j_perp - p.kappa / p.delta_c).abs() < 1e-15);
    }

    #[test]
    fn dispersive_limit_kills_decay() {
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let delta = 10f64.powi(k);
            let p = CavityParams { g_c: delta.sqrt(), kappa: 1.0, delta_c: delta, n_atoms: 1.0 };
            let c = cavity_to_couplings(&p).unwrap();
            assert!(c.gamma < last);
            last = c.gamma;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn invalid_cavity_rejected() {
        let p = CavityParams { g_c: 1.0, kappa: 0.0, delta_c: 1.0, n_atoms: 1.0 };
        assert!(cavity_to_couplings(&p).is_err());
        let p = CavityParams { g_c: 1.0, kappa: 1.0, delta_c: 0.0, n_atoms: 1.0 };
        assert!(cavity_to_couplings(&p).is_err());
    }
}
