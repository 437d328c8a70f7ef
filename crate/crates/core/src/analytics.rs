//! Closed-form predictions: spin-wave frequencies, the two-large-spin
//! reduction, synchronization times and one-axis-twisted moments.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::CgrParams;
use crate::observables::{covariance_matrix, CollectiveMoments};
use crate::spin::SpinState;
use crate::{Error, Result};

/// Largest `N` accepted by the two-spin construction.
pub const MAX_TWO_SPIN_ATOMS: usize = 24;
/// Residual allowed in every identity checked by [`two_spin_reduction`].
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// Above this `omega_split / (N J_perp)` the spin-wave formula is unreliable.
pub const HP_ETA_WARNING: f64 = 0.3;

/// `C(n, k)` exactly in integers, then converted. Exact for `n <= 66`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Spin-wave prediction of the precession frequency of site `j` at time `t`
/// for an initial product state along +x.
pub fn hp_frequency(j: usize, t: f64, p: &CgrParams) -> f64 {
    if p.eta().abs() > HP_ETA_WARNING {
        log::warn!("spin-wave prediction used at eta = {:.3}, outside its small-gradient regime", p.eta());
    }
    let n = p.n_sites as f64;
    let centred = j as f64 - (n - 1.0) / 2.0;
    // an uncentred frame adds a uniform shift, which commutes with H
    let uniform = if p.centered { 0.0 } else { p.omega_grs * (n - 1.0) / 2.0 };
    p.omega_grs * sinc(n * p.j_perp * t) * centred + uniform
}

/// `t_syn` of the +x product state from `((N - 2) J_perp + 2 J_z) t_syn = pi`.
pub fn tsyn_general(n: usize, j_perp: f64, j_z: f64) -> Result<f64> {
    let rate = (n as f64 - 2.0) * j_perp + 2.0 * j_z;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "(N-2) J_perp + 2 J_z = {rate} is not positive: no synchronization predicted"
        )));
    }
    Ok(PI / rate)
}

/// `t_syn / t_syn,0 = 1 - (2/pi) atan[Cov(y,z) / ((N-1) <S^x>_0)]`.
pub fn tsyn_ratio_from(cov_yz: f64, sx0: f64, n: usize) -> Result<f64> {
    if sx0.abs() < 1e-12 {
        return Err(Error::VanishingSpin(sx0.abs()));
    }
    Ok(1.0 - 2.0 / PI * (cov_yz / ((n as f64 - 1.0) * sx0)).atan())
}

/// Synchronization-time ratio with `Cov(y,z)` taken on `psi_theta` and
/// `<S^x>` on the unrotated state `psi0`.
pub fn tsyn_ratio(psi0: &SpinState, psi_theta: &SpinState) -> Result<f64> {
    if psi0.n_atoms() != psi_theta.n_atoms() {
        return Err(Error::DimensionMismatch { expected: psi0.dim(), found: psi_theta.dim() });
    }
    let sx0 = CollectiveMoments::of(psi0).mean[0];
    let cov = covariance_matrix(psi_theta);
    tsyn_ratio_from(cov[1][2], sx0, psi0.n_atoms())
}

/// `Delta t_syn / t_syn,0 = (4/pi) atan[Cov_max / ((N-1) <S^x>)]`.
pub fn delta_tsyn_ratio(cov_max: f64, sx0: f64, n: usize) -> Result<f64> {
    if sx0.abs() < 1e-12 {
        return Err(Error::VanishingSpin(sx0.abs()));
    }
    Ok(4.0 / PI * (cov_max / ((n as f64 - 1.0) * sx0)).atan())
}

/// Moments of the one-axis-twisted coherent state `exp(-i Q S^z S^z / N)|+x>`.
pub mod oat {
    /// `<S^x> = (N/2) cos^{N-1}(Q/N)`.
    pub fn mean_sx(n: usize, q: f64) -> f64 {
        let nf = n as f64;
        nf / 2.0 * (q / nf).cos().powi(n as i32 - 1)
    }

    /// `<S^y S^z + S^z S^y> = (N(N-1)/2) sin(Q/N) cos^{N-2}(Q/N)`.
    pub fn cov_yz(n: usize, q: f64) -> f64 {
        let nf = n as f64;
        nf * (nf - 1.0) / 2.0 * (q / nf).sin() * (q / nf).cos().powi(n as i32 - 2)
    }

    /// `(Cov(y,y) - Cov(z,z)) / 2 = (N(N-1)/8)(1 - cos^{N-2}(2Q/N))`.
    pub fn half_var_difference(n: usize, q: f64) -> f64 {
        let nf = n as f64;
        nf * (nf - 1.0) / 8.0 * (1.0 - (2.0 * q / nf).cos().powi(n as i32 - 2))
    }

    /// `Cov(y,z)` after the rotation `exp(-i theta S^x)`.
    pub fn rotated_cov_yz(n: usize, q: f64, theta: f64) -> f64 {
        (2.0 * theta).cos() * cov_yz(n, q) + (2.0 * theta).sin() * half_var_difference(n, q)
    }

    /// Maximum of [`rotated_cov_yz`] over theta.
    pub fn cov_max(n: usize, q: f64) -> f64 {
        cov_yz(n, q).hypot(half_var_difference(n, q))
    }

    /// Angle in `[0, pi)` at which [`rotated_cov_yz`] is largest.
    pub fn theta_max(n: usize, q: f64) -> f64 {
        (0.5 * half_var_difference(n, q).atan2(cov_yz(n, q))).rem_euclid(std::f64::consts::PI)
    }
}

/// Two spins `S1 = S2 = N/4` with `H = 2 J_eff S1.S2 + (omega_eff/2)(S1^z - S2^z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSpinModel {
    pub n_total: usize,
    pub j_eff: f64,
    pub omega_eff: f64,
}

/// Dense spin-`s` operators in the basis `m = -s..=s`, indexed `m + s`.
struct SpinMatrices {
    z: DMatrix<f64>,
    plus: DMatrix<f64>,
}

impl SpinMatrices {
    fn new(two_s: usize) -> Self {
        let d = two_s + 1;
        let s = two_s as f64 / 2.0;
        let z = DMatrix::from_fn(d, d, |r, c| if r == c { r as f64 - s } else { 0.0 });
        let plus = DMatrix::from_fn(d, d, |r, c| {
            if r == c + 1 {
                let m = c as f64 - s;
                (s * (s + 1.0) - m * (m + 1.0)).sqrt()
            } else {
                0.0
            }
        });
        Self { z, plus }
    }
}

impl TwoSpinModel {
    pub fn validate(&self) -> Result<()> {
        validate_two_spin_n(self.n_total)?;
        if !(self.j_eff.is_finite() && self.omega_eff.is_finite()) {
            return Err(Error::InvalidInput("couplings must be finite".into()));
        }
        Ok(())
    }

    /// `(N/2 + 1)^2`.
    pub fn dim(&self) -> usize {
        (self.n_total / 2 + 1).pow(2)
    }

    /// Product-basis Hamiltonian, index `a * (N/2 + 1) + b` for
    /// `m1 = a - N/4`, `m2 = b - N/4`.
    pub fn hamiltonian(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let ops = TwoSpinOps::new(self.n_total);
        let dot = &ops.s1z * &ops.s2z
            + 0.5 * (&ops.s1p * ops.s2p.transpose() + ops.s1p.transpose() * &ops.s2p);
        Ok(2.0 * self.j_eff * dot + 0.5 * self.omega_eff * (&ops.s1z - &ops.s2z))
    }

    /// The Hamiltonian restricted to `{|N/2, m>, |N/2 - 1, m>}`, shifted so
    /// the spin-wave entry is zero.
    pub fn sector_matrix(&self, m: i64) -> [[f64; 2]; 2] {
        let n = self.n_total as f64;
        let mf = m as f64;
        let off = 0.5 * self.omega_eff * ladder_coefficient(self.n_total, mf);
        [[n * self.j_eff, off], [off, 0.0]]
    }
}

fn validate_two_spin_n(n: usize) -> Result<()> {
    if n == 0 || n % 4 != 0 || n > MAX_TWO_SPIN_ATOMS {
        return Err(Error::InvalidInput(format!(
            "two-spin reduction needs N divisible by 4 and at most {MAX_TWO_SPIN_ATOMS}, got {n}"
        )));
    }
    Ok(())
}

/// `sqrt((N/2 + m)(N/2 - m)/(N - 1))`.
pub fn ladder_coefficient(n: usize, m: f64) -> f64 {
    let h = n as f64 / 2.0;
    ((h + m) * (h - m) / (n as f64 - 1.0)).max(0.0).sqrt()
}

struct TwoSpinOps {
    side: usize,
    s1z: DMatrix<f64>,
    s2z: DMatrix<f64>,
    s1p: DMatrix<f64>,
    s2p: DMatrix<f64>,
}

impl TwoSpinOps {
    fn new(n: usize) -> Self {
        let side = n / 2 + 1;
        let single = SpinMatrices::new(n / 2);
        let id = DMatrix::<f64>::identity(side, side);
        Self {
            side,
            s1z: single.z.kronecker(&id),
            s2z: id.kronecker(&single.z),
            s1p: single.plus.kronecker(&id),
            s2p: id.kronecker(&single.plus),
        }
    }

    fn index(&self, m1: i64, m2: i64, quarter: i64) -> Option<usize> {
        let (a, b) = (m1 + quarter, m2 + quarter);
        let side = self.side as i64;
        ((0..side).contains(&a) && (0..side).contains(&b)).then(|| (a * side + b) as usize)
    }
}

/// Outcome of [`two_spin_reduction`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoSpinRecord {
    pub n_atoms: usize,
    /// Largest residual over all checked identities.
    pub max_residual: f64,
    /// `(m, coefficient)` of `(S1^z - S2^z)|N/2, m> = c |N/2 - 1, m>`.
    pub ladder: Vec<(i64, f64)>,
    pub checks: usize,
}

/// Builds the collective and spin-wave states of two `N/4` spins from the
/// binomial formulas and verifies norms, orthogonality, total spin, the
/// `S1^z - S2^z` ladder and the single-spin raising and lowering elements.
pub fn two_spin_reduction(n: usize) -> Result<TwoSpinRecord> {
    validate_two_spin_n(n)?;
    let ops = TwoSpinOps::new(n);
    let quarter = (n / 4) as i64;
    let half = (n / 2) as i64;
    let nf = n as f64;
    let hf = nf / 2.0;
    let dim = ops.side * ops.side;

    let c = |k: i64, top: i64| -> f64 {
        if k < 0 || k > top {
            0.0
        } else {
            binomial(top as u64, k as u64)
        }
    };
    // |N/2, m>
    let collective = |m: i64| -> Option<DMatrix<f64>> {
        if m.abs() > half {
            return None;
        }
        let mut v = DMatrix::zeros(dim, 1);
        for m1 in -quarter..=quarter {
            if let Some(i) = ops.index(m1, m - m1, quarter) {
                v[i] = (c(quarter + m1, half) * c(quarter + m - m1, half) / c(half + m, n as i64)).sqrt();
            }
        }
        Some(v)
    };
    // |N/2 - 1, m>
    let spin_wave = |m: i64| -> Option<DMatrix<f64>> {
        if m.abs() > half - 1 {
            return None;
        }
        let mut v = DMatrix::zeros(dim, 1);
        for m1 in -quarter..=quarter {
            if let Some(i) = ops.index(m1, m - m1, quarter) {
                let w = c(quarter + m1, half) * c(quarter + m - m1, half) / (nf * c(half - 1 + m, n as i64 - 2));
                v[i] = (2 * m1 - m) as f64 * w.sqrt();
            }
        }
        Some(v)
    };

    let total_sq = {
        let sz = &ops.s1z + &ops.s2z;
        let sp = &ops.s1p + &ops.s2p;
        &sz * &sz + 0.5 * (&sp * sp.transpose() + sp.transpose() * &sp)
    };
    let diff_z = &ops.s1z - &ops.s2z;
    let zero = DMatrix::<f64>::zeros(dim, 1);

    let mut max_residual = 0.0f64;
    let mut checks = 0usize;
    let mut ladder = Vec::new();
    let mut check = |m: i64, residual: f64| -> Result<()> {
        checks += 1;
        max_residual = max_residual.max(residual);
        if residual > IDENTITY_TOLERANCE || !residual.is_finite() {
            return Err(Error::IdentityViolation { m: m as f64, residual });
        }
        Ok(())
    };

    for m in -half..=half {
        let mf = m as f64;
        let sym = collective(m).expect("m within range");
        let wave = spin_wave(m);
        let sym_p = collective(m + 1);
        let sym_m = collective(m - 1);
        let wave_p = spin_wave(m + 1);
        let wave_m = spin_wave(m - 1);

        check(m, (sym.norm_squared() - 1.0).abs())?;
        check(m, (&total_sq * &sym - hf * (hf + 1.0) * &sym).amax())?;
        if let Some(w) = &wave {
            check(m, (w.norm_squared() - 1.0).abs())?;
            check(m, sym.dot(w).abs())?;
            check(m, (&total_sq * w - (hf - 1.0) * hf * w).amax())?;
        }

        let coeff = ladder_coefficient(n, mf);
        let lhs = &diff_z * &sym;
        let rhs = wave.as_ref().map_or(zero.clone(), |w| coeff * w);
        check(m, (&lhs - &rhs).amax())?;
        ladder.push((m, coeff));

        for (j, sp) in [(1i32, &ops.s1p), (2, &ops.s2p)] {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            // S_j^+ |N/2, m>
            let up = sp * &sym;
            let mut want = zero.clone();
            if let Some(v) = &sym_p {
                want += 0.5 * ((hf + mf + 1.0) * (hf - mf)).sqrt() * v;
            }
            if let Some(v) = &wave_p {
                want -= sign / 2.0 * ((hf - mf) * (hf - mf - 1.0) / (nf - 1.0)).sqrt() * v;
            }
            check(m, (&up - &want).amax())?;
            // S_j^- |N/2, m>
            let down = sp.transpose() * &sym;
            let mut want = zero.clone();
            if let Some(v) = &sym_m {
                want += 0.5 * ((hf - mf + 1.0) * (hf + mf)).sqrt() * v;
            }
            if let Some(v) = &wave_m {
                want += sign / 2.0 * ((hf + mf) * (hf + mf - 1.0) / (nf - 1.0)).sqrt() * v;
            }
            check(m, (&down - &want).amax())?;
        }
    }
    Ok(TwoSpinRecord { n_atoms: n, max_residual, ladder, checks })
}
