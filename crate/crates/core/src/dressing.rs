//! Dressed clock states: coefficients and energies, the tuned mass defect,
//! cavity couplings, magnetic-gradient discrimination and sensitivity to
//! Rabi-frequency inhomogeneity.

use serde::{Deserialize, Serialize};

use crate::clebsch::{clebsch_gordan, HalfInt};
use crate::{Error, Result};

/// Dressing laser on `|e, m_F> <-> |g, m_F - 1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressingConfig {
    /// Rabi frequency (rad/s).
    pub rabi: f64,
    /// Detuning (rad/s).
    pub detuning: f64,
    pub f: HalfInt,
    pub m_f: HalfInt,
}

impl DressingConfig {
    /// Sr-87 (F = 9/2) dressing at a given `delta / Omega`.
    pub fn sr87(rabi: f64, detuning_ratio: f64, m_f: HalfInt) -> Self {
        Self { rabi, detuning: detuning_ratio * rabi, f: HalfInt::from_twice(9), m_f }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi > 0.0 && self.rabi.is_finite()) {
            return Err(Error::InvalidInput(format!("Rabi frequency must be positive, got {}", self.rabi)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidInput("detuning must be finite".into()));
        }
        let lower = self.m_f - HalfInt::from_int(1);
        if self.f.twice() < 0 || self.m_f.abs() > self.f || lower.abs() > self.f || (self.f - self.m_f).twice() % 2 != 0 {
            return Err(Error::InvalidInput(format!("m_F = {} invalid for F = {}", self.m_f, self.f)));
        }
        Ok(())
    }

    pub fn detuning_ratio(&self) -> f64 {
        self.detuning / self.rabi
    }
}

/// Coefficients and energies of `|+> = C1|e> + C2|g'>`, `|-> = -C2|e> + C1|g'>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DressedState {
    pub c1: f64,
    pub c2: f64,
    /// Energies relative to the bare clock frequency (rad/s).
    pub e_plus: f64,
    pub e_minus: f64,
}

/// `(C1^2, C2^2)` without cancellation in either detuning limit.
pub fn dressed_weights(rabi: f64, detuning: f64) -> (f64, f64) {
    let w = rabi.hypot(detuning);
    let small = rabi * rabi / (2.0 * w * (w + detuning.abs()));
    let large = (w + detuning.abs()) / (2.0 * w);
    if detuning >= 0.0 {
        (small, large)
    } else {
        (large, small)
    }
}

pub fn dress(cfg: &DressingConfig) -> Result<DressedState> {
    cfg.validate()?;
    let (c1sq, c2sq) = dressed_weights(cfg.rabi, cfg.detuning);
    let w = cfg.rabi.hypot(cfg.detuning);
    Ok(DressedState {
        c1: c1sq.sqrt(),
        c2: c2sq.sqrt(),
        e_plus: 0.5 * cfg.detuning + 0.5 * w,
        e_minus: 0.5 * cfg.detuning - 0.5 * w,
    })
}

/// `Delta M / Delta M_0 = |C2|^2`, also the redshift scaling of the dressed clock.
pub fn mass_defect(cfg: &DressingConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(dressed_weights(cfg.rabi, cfg.detuning).1)
}

/// Exchange and Ising couplings of the dressed two-level system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DressedCouplings {
    pub j_perp: f64,
    pub j_z: f64,
}

/// `J_perp = chi (C^0_{m_F})^2 |C2|^2`, `J_z = chi (C^{+1}_{m_F-1})^2 |C1|^2 |C2|^2 / 2`.
pub fn cavity_couplings(cfg: &DressingConfig, chi: f64) -> Result<DressedCouplings> {
    cfg.validate()?;
    let (c1sq, c2sq) = dressed_weights(cfg.rabi, cfg.detuning);
    let pi_cg = clebsch_gordan(cfg.f, cfg.m_f, 0)?;
    let sigma_cg = clebsch_gordan(cfg.f, cfg.m_f - HalfInt::from_int(1), 1)?;
    Ok(DressedCouplings {
        j_perp: chi * pi_cg * pi_cg * c2sq,
        j_z: chi * sigma_cg * sigma_cg / 2.0 * c1sq * c2sq,
    })
}

/// `delta / Omega` at which `J_z = J_perp`, located by bisection.
pub fn heisenberg_point(f: HalfInt, m_f: HalfInt) -> Result<f64> {
    let ratio = |x: f64| -> Result<f64> {
        let c = cavity_couplings(&DressingConfig { rabi: 1.0, detuning: x, f, m_f }, 1.0)?;
        if c.j_perp == 0.0 {
            return Err(Error::InvalidInput(format!("J_perp vanishes identically for m_F = {m_f}")));
        }
        Ok(c.j_z / c.j_perp - 1.0)
    };
    // J_z / J_perp falls monotonically with delta/Omega (it is proportional to |C1|^2)
    let (mut lo, mut hi) = (-1e6, 1e6);
    let (flo, fhi) = (ratio(lo)?, ratio(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidInput(format!("no Heisenberg point for F = {f}, m_F = {m_f}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Linear Zeeman shifts along the gradient (rad/s per unit length).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeemanGradient {
    pub eta_e: f64,
    pub eta_g: f64,
    pub m_f: f64,
}

/// Position slopes of the dressed `|->` energy for one detuning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopePair {
    pub detuning_ratio: f64,
    pub c2_sq: f64,
    /// From the redshift: `grs_slope |C2|^2`.
    pub grs: f64,
    /// From a magnetic gradient: `|C2|^2 (eta_e - eta_g) m_F - |C1|^2 eta_g`.
    pub magnetic: f64,
}

pub fn gradient_discrimination(scan: &[DressingConfig], grs_slope: f64, zeeman: ZeemanGradient) -> Result<Vec<SlopePair>> {
    if scan.is_empty() {
        return Err(Error::InvalidInput("empty dressing scan".into()));
    }
    scan.iter()
        .map(|cfg| {
            cfg.validate()?;
            let (c1sq, c2sq) = dressed_weights(cfg.rabi, cfg.detuning);
            Ok(SlopePair {
                detuning_ratio: cfg.detuning_ratio(),
                c2_sq: c2sq,
                grs: grs_slope * c2sq,
                magnetic: c2sq * (zeeman.eta_e - zeeman.eta_g) * zeeman.m_f - c1sq * zeeman.eta_g,
            })
        })
        .collect()
}

/// The redshift slope is proportional to `|C2|^2`; the magnetic one has
/// intercept `-eta_g`. They can be told apart by scanning the detuning iff
/// `eta_g != 0`.
pub fn families_distinguishable(zeeman: &ZeemanGradient) -> bool {
    zeeman.eta_g != 0.0
}

/// First-order energy shifts from a Rabi-frequency error `delta_rabi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RabiShift {
    pub de_plus: f64,
    pub de_minus: f64,
    /// Change of the averaged transition `(E_+ + E_-)/2`.
    pub averaged: f64,
}

pub fn rabi_sensitivity(cfg: &DressingConfig, delta_rabi: f64) -> Result<RabiShift> {
    cfg.validate()?;
    let w = cfg.rabi.hypot(cfg.detuning);
    let d = cfg.rabi * delta_rabi / (2.0 * w);
    Ok(RabiShift { de_plus: d, de_minus: -d, averaged: 0.5 * (d - d) })
}

/// Largest `|Delta Omega| / Omega` keeping `|Delta E_-|` below `tolerance` (rad/s).
pub fn max_fractional_rabi_error(cfg: &DressingConfig, tolerance: f64) -> Result<f64> {
    cfg.validate()?;
    let w = cfg.rabi.hypot(cfg.detuning);
    Ok(2.0 * w * tolerance / (cfg.rabi * cfg.rabi))
}
