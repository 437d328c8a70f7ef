//! Order-of-magnitude budget of relativistic frequency shifts in a vertical
//! optical lattice clock, as fractional frequencies.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Sr-87 atomic mass in kg.
pub const SR87_MASS: f64 = 86.908_877_497_0 * ATOMIC_MASS_UNIT;
/// Sr magic wavelength (m).
pub const SR_MAGIC_WAVELENGTH: f64 = 813.4e-9;
/// Sr clock transition (rad/s).
pub const SR_CLOCK_FREQUENCY: f64 = 2.0 * std::f64::consts::PI * 429.228_004_229_873e12;
pub const STANDARD_GRAVITY: f64 = 9.80;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatticeClockParams {
    /// kg.
    pub atom_mass: f64,
    /// m.
    pub lattice_wavelength: f64,
    /// `V_X, V_Y, V_Z` in recoil energies.
    pub lattice_depths: [f64; 3],
    /// m/s^2.
    pub g_lo: f64,
    /// Vertical separation used for the potential terms (m).
    pub separation: f64,
    /// rad/s.
    pub clock_frequency: f64,
    /// m/s.
    pub c: f64,
    /// Energy scale of cavity-mediated interactions (rad/s).
    pub interaction_scale: f64,
}

impl Default for LatticeClockParams {
    fn default() -> Self {
        Self {
            atom_mass: SR87_MASS,
            lattice_wavelength: SR_MAGIC_WAVELENGTH,
            lattice_depths: [300.0; 3],
            g_lo: STANDARD_GRAVITY,
            separation: 0.01,
            clock_frequency: SR_CLOCK_FREQUENCY,
            c: SPEED_OF_LIGHT,
            interaction_scale: 2.0 * std::f64::consts::PI,
        }
    }
}

impl LatticeClockParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("atom_mass", self.atom_mass),
            ("lattice_wavelength", self.lattice_wavelength),
            ("separation", self.separation),
            ("clock_frequency", self.clock_frequency),
            ("c", self.c),
            ("interaction_scale", self.interaction_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.g_lo >= 0.0 && self.g_lo.is_finite()) {
            return Err(Error::InvalidInput(format!("g_lo must be nonnegative, got {}", self.g_lo)));
        }
        if let Some(v) = self.lattice_depths.iter().find(|v| !(**v >= 1.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("lattice depths must be at least one recoil, got {v}")));
        }
        Ok(())
    }

    pub fn wave_number(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lattice_wavelength
    }

    /// Lattice constant `a_L = lambda_L / 2`.
    pub fn lattice_constant(&self) -> f64 {
        self.lattice_wavelength / 2.0
    }

    /// Recoil energy `hbar^2 k^2 / 2M` (J).
    pub fn recoil_energy(&self) -> f64 {
        let k = self.wave_number();
        HBAR * HBAR * k * k / (2.0 * self.atom_mass)
    }

    /// Harmonic trap energies `hbar omega_a = 2 E_R sqrt(V_a)` (J).
    pub fn trap_quanta(&self) -> [f64; 3] {
        let er = self.recoil_energy();
        self.lattice_depths.map(|v| 2.0 * er * v.sqrt())
    }

    fn rest_energy(&self) -> f64 {
        self.atom_mass * self.c * self.c
    }

    fn clock_energy(&self) -> f64 {
        HBAR * self.clock_frequency
    }
}

/// Fractional redshift between neighbouring sites, `g a_L / c^2`.
pub fn grs_per_site(p: &LatticeClockParams) -> f64 {
    p.g_lo * p.lattice_constant() / (p.c * p.c)
}

/// Fractional redshift across a height difference `z`.
pub fn grs_over_height(p: &LatticeClockParams, z: f64) -> f64 {
    p.g_lo * z / (p.c * p.c)
}

/// Second-order Doppler shift of the band energy,
/// `-sum_a E_R (sqrt(V_a) - 1/4) / (2 M c^2)`.
pub fn sds_shift(p: &LatticeClockParams) -> f64 {
    let er = p.recoil_energy();
    let band: f64 = p.lattice_depths.iter().map(|v| er * (v.sqrt() - 0.25)).sum();
    -band / (2.0 * p.rest_energy())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetEntry {
    pub term: String,
    /// Fractional frequency; `None` for terms only bounded, not computed.
    pub fractional: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    pub entries: Vec<BudgetEntry>,
}

impl BudgetReport {
    pub fn get(&self, term: &str) -> Option<&BudgetEntry> {
        self.entries.iter().find(|e| e.term == term)
    }

    pub fn value(&self, term: &str) -> Option<f64> {
        self.get(term).and_then(|e| e.fractional)
    }

    /// `term,fractional_value` rows; bounded-only terms have an empty value.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("term,fractional_value\n");
        for e in &self.entries {
            match e.fractional {
                Some(v) => writeln!(s, "{},{:.16e}", e.term, v),
                None => writeln!(s, "{},", e.term),
            }
            .expect("writing to a String");
        }
        s
    }

    pub fn to_table(&self) -> String {
        let w = self.entries.iter().map(|e| e.term.len()).max().unwrap_or(4).max(4);
        let mut s = format!("{:<w$}  {:>12}  {}\n", "term", "fractional", "note");
        for e in &self.entries {
            let v = e.fractional.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
            writeln!(s, "{:<w$}  {:>12}  {}", e.term, v, e.note).expect("writing to a String");
        }
        s
    }
}

pub const TERM_GRS_SITE: &str = "grs_per_site";
pub const TERM_GRS_HEIGHT: &str = "grs_over_separation";
pub const TERM_SDS: &str = "second_order_doppler";
pub const TERM_P4: &str = "kinetic_p4";
pub const TERM_PHI2: &str = "potential_squared";
pub const TERM_P_PHI_P: &str = "momentum_potential_coupling";
pub const TERM_RONTGEN_FACTOR: &str = "rontgen_lattice_factor";
pub const TERM_RONTGEN_LATTICE: &str = "rontgen_lattice_shift";
pub const TERM_LATTICE_PHASE: &str = "lattice_gravity_correction";
pub const TERM_RONTGEN_CAVITY: &str = "rontgen_cavity_shift";
pub const TERM_CAVITY_MODE: &str = "cavity_mode_gravity_correction";
pub const TERM_DIRAC: &str = "curved_space_dirac";

/// Every correction to the point-particle clock Hamiltonian at order `1/c^2`
/// beyond the leading redshift, evaluated in the harmonic ground state.
pub fn other_corrections(p: &LatticeClockParams) -> Result<BudgetReport> {
    p.validate()?;
    let mc2 = p.rest_energy();
    let e0 = p.clock_energy();
    let c2 = p.c * p.c;
    let quanta = p.trap_quanta();
    let er = p.recoil_energy();
    let phi = p.g_lo * p.separation;

    // <P^4> of a 3D harmonic ground state
    let diag: f64 = quanta.iter().map(|w| w * w / 16.0).sum();
    let cross: f64 = quanta.iter().flat_map(|a| quanta.iter().map(move |b| a * b / 32.0)).sum();
    let p4 = (diag + cross) / (mc2 * e0);

    let phi2 = p.atom_mass * phi * phi / (2.0 * c2) / e0;
    // <P^2 / 2M> = sum hbar omega / 4 for the ground state
    let kinetic: f64 = quanta.iter().sum::<f64>() / 4.0;
    let p_phi_p = phi / c2 * 2.0 * kinetic / e0;

    let lattice_photon = HBAR * p.c * p.wave_number();
    let rontgen_factor = lattice_photon / mc2;
    let trap_depth = p.lattice_depths[2] * er;
    let rontgen_lattice = rontgen_factor * trap_depth / e0;
    let lattice_phase = phi / c2 * trap_depth / e0;

    let recoil_velocity_ratio = HBAR * p.wave_number() / (p.atom_mass * p.c);
    let interaction = HBAR * p.interaction_scale;
    let rontgen_cavity = recoil_velocity_ratio * interaction / e0;
    let cavity_mode = phi / c2 * interaction / e0;

    let entry = |term: &str, v: Option<f64>, note: &str| BudgetEntry {
        term: term.into(),
        fractional: v,
        note: note.into(),
    };
    Ok(BudgetReport {
        entries: vec![
            entry(TERM_GRS_SITE, Some(grs_per_site(p)), "g a_L / c^2 between neighbouring sites"),
            entry(TERM_GRS_HEIGHT, Some(grs_over_height(p, p.separation)), "g Z / c^2 across the separation"),
            entry(TERM_SDS, Some(sds_shift(p)), "-E_band / 2Mc^2, harmonic band with anharmonic 1/4"),
            entry(TERM_P4, Some(-p4), "-<P^4>/8M^3c^2 in the harmonic ground state"),
            entry(TERM_PHI2, Some(phi2), "M phi^2 / 2c^2 with phi = g Z"),
            entry(TERM_P_PHI_P, Some(p_phi_p), "<P.phi P>/Mc^2 with phi = g Z"),
            entry(TERM_RONTGEN_FACTOR, Some(rontgen_factor), "relative lattice-depth correction hbar omega_L / Mc^2"),
            entry(TERM_RONTGEN_LATTICE, Some(rontgen_lattice), "lattice Rontgen factor times V_Z E_R"),
            entry(TERM_LATTICE_PHASE, Some(lattice_phase), "phi / c^2 times V_Z E_R"),
            entry(TERM_RONTGEN_CAVITY, Some(rontgen_cavity), "hbar k / Mc times the interaction scale"),
            entry(TERM_CAVITY_MODE, Some(cavity_mode), "phi / c^2 times the interaction scale"),
            entry(TERM_DIRAC, None, "not computed; bounded below 1e-23"),
        ],
    })
}
