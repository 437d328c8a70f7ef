//! Fast experiments: dressing scans, the relativistic budget and the
//! closed-form cross-checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_sampling, CsvTable, OutputDir};
use crate::analytics::{tsyn_general, two_spin_reduction, TwoSpinRecord};
use crate::budget::{
    grs_over_height, other_corrections, LatticeClockParams, TERM_CAVITY_MODE, TERM_LATTICE_PHASE, TERM_PHI2, TERM_P_PHI_P,
};
use crate::clebsch::HalfInt;
use crate::dressing::{
    cavity_couplings, dress, families_distinguishable, gradient_discrimination, heisenberg_point, max_fractional_rabi_error,
    DressingConfig, ZeemanGradient,
};
use crate::evolve::{evolve_unitary, PropagatorConfig};
use crate::hamiltonian::{cavity_to_couplings, coherent_plus_x, CavityCouplings, CavityParams, CgrOperator, CgrParams};
use crate::observables::{sync_report, RecordOptions, SeriesRecorder};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressingScanConfig {
    /// rad/s.
    pub rabi: f64,
    pub detuning_ratio_min: f64,
    pub detuning_ratio_max: f64,
    pub points: usize,
    pub f: HalfInt,
    pub m_f: HalfInt,
    /// Overall cavity coupling scale; couplings are reported in its units.
    pub chi: f64,
    /// Redshift slope of the bare excited state (any consistent unit).
    pub grs_slope: f64,
    pub zeeman: ZeemanGradient,
    /// Allowed shift of a dressed level (rad/s) for the Rabi tolerance.
    pub rabi_tolerance: f64,
}

impl Default for DressingScanConfig {
    fn default() -> Self {
        Self {
            rabi: 2.0 * PI * 10.0,
            detuning_ratio_min: -5.0,
            detuning_ratio_max: 5.0,
            points: 201,
            f: HalfInt::from_twice(9),
            m_f: HalfInt::from_twice(3),
            chi: 1.0,
            grs_slope: 1.0,
            zeeman: ZeemanGradient { eta_e: 0.3, eta_g: 0.1, m_f: 1.5 },
            rabi_tolerance: 2.0 * PI * 1e-4,
        }
    }
}

impl DressingScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.detuning_ratio_max > self.detuning_ratio_min) {
            return Err(Error::InvalidInput("dressing scan needs at least two points over a nonempty range".into()));
        }
        if !(self.chi.is_finite() && self.grs_slope.is_finite() && self.rabi_tolerance > 0.0) {
            return Err(Error::InvalidInput("chi and grs_slope must be finite, rabi_tolerance positive".into()));
        }
        self.at(0.0).validate()
    }

    pub fn at(&self, ratio: f64) -> DressingConfig {
        DressingConfig { rabi: self.rabi, detuning: ratio * self.rabi, f: self.f, m_f: self.m_f }
    }

    pub fn ratios(&self) -> Vec<f64> {
        let step = (self.detuning_ratio_max - self.detuning_ratio_min) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.detuning_ratio_min + step * k as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DressingReport {
    pub heisenberg_detuning_ratio: Option<f64>,
    pub families_distinguishable: bool,
    pub mass_defect_at_resonance: f64,
    pub max_fractional_rabi_error_at_resonance: f64,
}

/// Writes `dressing.csv` and `dressing_report.json`.
pub fn run_dressing_scan(cfg: &DressingScanConfig, out: &mut OutputDir) -> Result<DressingReport> {
    cfg.validate()?;
    let ratios = cfg.ratios();
    let scan: Vec<DressingConfig> = ratios.iter().map(|&r| cfg.at(r)).collect();
    let slopes = gradient_discrimination(&scan, cfg.grs_slope, cfg.zeeman)?;
    let mut table = CsvTable::new([
        "delta_over_omega",
        "c1_sq",
        "c2_sq",
        "e_plus_rad_s",
        "e_minus_rad_s",
        "j_perp_over_chi",
        "j_z_over_chi",
        "grs_slope",
        "magnetic_slope",
    ]);
    for (d, s) in scan.iter().zip(&slopes) {
        let st = dress(d)?;
        let c = cavity_couplings(d, 1.0)?;
        table.push_values(&[
            d.detuning_ratio(),
            st.c1 * st.c1,
            st.c2 * st.c2,
            st.e_plus,
            st.e_minus,
            c.j_perp,
            c.j_z,
            s.grs,
            s.magnetic,
        ]);
    }
    out.write_csv("dressing.csv", &table)?;
    let resonant = cfg.at(0.0);
    let report = DressingReport {
        heisenberg_detuning_ratio: heisenberg_point(cfg.f, cfg.m_f).ok(),
        families_distinguishable: families_distinguishable(&cfg.zeeman),
        mass_defect_at_resonance: crate::dressing::mass_defect(&resonant)?,
        max_fractional_rabi_error_at_resonance: max_fractional_rabi_error(&resonant, cfg.rabi_tolerance)?,
    };
    out.write_json("dressing_report.json", &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrBudgetConfig {
    pub lattice: LatticeClockParams,
    /// Heights (m) at which the separation-dependent terms are tabulated.
    pub separations: Vec<f64>,
}

impl Default for GrBudgetConfig {
    fn default() -> Self {
        Self { lattice: LatticeClockParams::default(), separations: vec![1e-3, 1e-2, 1e-1, 1.0] }
    }
}

impl GrBudgetConfig {
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        if self.separations.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
            return Err(Error::InvalidInput("separations must be positive".into()));
        }
        Ok(())
    }
}

/// Writes `budget.csv`, `budget.txt` and `budget_vs_separation.csv`.
pub fn run_gr_budget(cfg: &GrBudgetConfig, out: &mut OutputDir) -> Result<crate::budget::BudgetReport> {
    cfg.validate()?;
    let report = other_corrections(&cfg.lattice)?;
    out.write_bytes("budget.csv", report.to_csv().as_bytes())?;
    out.write_bytes("budget.txt", report.to_table().as_bytes())?;
    let terms = [TERM_PHI2, TERM_P_PHI_P, TERM_LATTICE_PHASE, TERM_CAVITY_MODE];
    let mut header = vec!["separation_m".to_string(), "grs_over_separation".to_string()];
    header.extend(terms.iter().map(|t| t.to_string()));
    let mut table = CsvTable::new(header);
    for &z in &cfg.separations {
        let r = other_corrections(&LatticeClockParams { separation: z, ..cfg.lattice })?;
        let mut row = vec![Some(z), Some(grs_over_height(&cfg.lattice, z))];
        row.extend(terms.iter().map(|t| r.value(t)));
        table.push(row);
    }
    out.write_csv("budget_vs_separation.csv", &table)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsCheckConfig {
    pub two_spin_sizes: Vec<usize>,
    /// Atom numbers for the closed-form `t_syn` comparison.
    pub tsyn_sizes: Vec<usize>,
    /// `J_z / J_perp` values for the closed-form `t_syn` comparison.
    pub jz_ratios: Vec<f64>,
    /// Gradient `omega_split / N J_perp` used in those runs.
    pub eta: f64,
    pub j_perp: f64,
    /// Samples per `pi` of `N J_perp t`.
    pub samples_per_pi: usize,
    pub cavity: CavityParams,
}

impl Default for AnalyticsCheckConfig {
    fn default() -> Self {
        let two_pi = 2.0 * PI;
        Self {
            two_spin_sizes: vec![4, 8, 12, 16, 20],
            tsyn_sizes: vec![8, 12, 16],
            jz_ratios: vec![0.0, 1.0],
            eta: 0.1,
            j_perp: 2.0 * PI * 0.02,
            samples_per_pi: 200,
            cavity: CavityParams { g_c: two_pi * 4.0, kappa: two_pi * 160e3, delta_c: two_pi * 5e6, n_atoms: 1e5 },
        }
    }
}

impl AnalyticsCheckConfig {
    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        if !(self.j_perp > 0.0 && self.eta.is_finite() && self.samples_per_pi >= 10) {
            return Err(Error::InvalidInput("need J_perp > 0, finite eta and at least 10 samples per pi".into()));
        }
        for &n in &self.tsyn_sizes {
            for &r in &self.jz_ratios {
                tsyn_general(n, self.j_perp, r * self.j_perp)?;
                self.tsyn_params(n, r).validate()?;
            }
        }
        Ok(())
    }

    fn tsyn_params(&self, n: usize, jz_ratio: f64) -> CgrParams {
        CgrParams::from_eta(n, self.j_perp, jz_ratio * self.j_perp, self.eta)
    }
}

/// One closed-form synchronization-time comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TsynCheck {
    pub n_atoms: usize,
    pub jz_over_j_perp: f64,
    pub t_syn: Option<f64>,
    pub t_syn_predicted: f64,
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticsReport {
    pub two_spin: Vec<TwoSpinRecord>,
    pub tsyn: Vec<TsynCheck>,
    pub cavity: CavityCouplings,
    pub n_j_perp_over_2pi: f64,
    pub n_gamma_over_2pi: f64,
    pub gamma_over_j_perp: f64,
    pub kappa_over_delta_c: f64,
}

/// First variance minimum of `|+x>^N` under `p`, stopping once found.
pub fn first_sync_time(p: &CgrParams, samples_per_pi: usize) -> Result<Option<f64>> {
    let nj = p.n_sites as f64 * p.j_perp;
    let dt = PI / samples_per_pi as f64 / nj;
    check_sampling(p, dt)?;
    let op = CgrOperator::cgr(p)?;
    let opts = RecordOptions { moments: false, purity_every: 0, stop_at_first_minimum: true, stop_after: None };
    let mut rec = SeriesRecorder::new(p.n_sites, opts);
    evolve_unitary(&coherent_plus_x(p.n_sites)?, &op, &PropagatorConfig::new(dt, 4.0 * PI / nj), &mut rec)?;
    Ok(sync_report(rec.series())?.t_syn)
}

/// Writes `two_spin.csv`, `tsyn_closed_form.csv` and `analytics_report.json`.
/// A failed two-spin identity aborts the run with the offending `m`.
pub fn run_analytics_check(cfg: &AnalyticsCheckConfig, out: &mut OutputDir) -> Result<AnalyticsReport> {
    cfg.validate()?;
    let two_spin = cfg.two_spin_sizes.iter().map(|&n| two_spin_reduction(n)).collect::<Result<Vec<_>>>()?;
    let mut ts_table = CsvTable::new(["n_atoms", "max_residual", "checks"]);
    for r in &two_spin {
        ts_table.push_values(&[r.n_atoms as f64, r.max_residual, r.checks as f64]);
    }
    out.write_csv("two_spin.csv", &ts_table)?;

    let mut tsyn = Vec::new();
    for &n in &cfg.tsyn_sizes {
        for &r in &cfg.jz_ratios {
            let p = cfg.tsyn_params(n, r);
            let predicted = tsyn_general(n, p.j_perp, p.j_z)?;
            let t = first_sync_time(&p, cfg.samples_per_pi)?;
            tsyn.push(TsynCheck {
                n_atoms: n,
                jz_over_j_perp: r,
                t_syn: t,
                t_syn_predicted: predicted,
                relative_error: t.map(|t| (t - predicted).abs() / predicted),
            });
        }
    }
    let mut tsyn_table = CsvTable::new(["n_atoms", "jz_over_j_perp", "t_syn_s", "t_syn_predicted_s", "relative_error"]);
    for c in &tsyn {
        tsyn_table.push(vec![Some(c.n_atoms as f64), Some(c.jz_over_j_perp), c.t_syn, Some(c.t_syn_predicted), c.relative_error]);
    }
    out.write_csv("tsyn_closed_form.csv", &tsyn_table)?;

    let cc = cavity_to_couplings(&cfg.cavity)?;
    let report = AnalyticsReport {
        two_spin,
        tsyn,
        cavity: cc,
        n_j_perp_over_2pi: cfg.cavity.n_atoms * cc.j_perp / (2.0 * PI),
        n_gamma_over_2pi: cfg.cavity.n_atoms * cc.gamma / (2.0 * PI),
        gamma_over_j_perp: cc.gamma / cc.j_perp,
        kappa_over_delta_c: cfg.cavity.kappa / cfg.cavity.delta_c,
    };
    out.write_json("analytics_report.json", &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dressing_scan_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let r = run_dressing_scan(&DressingScanConfig::default(), &mut out).unwrap();
        assert!((r.mass_defect_at_resonance - 0.5).abs() < 1e-15);
        assert!(r.heisenberg_detuning_ratio.is_some());
        let csv = std::fs::read_to_string(dir.path().join("dressing.csv")).unwrap();
        assert_eq!(csv.lines().count(), 202);
    }

    #[test]
    fn budget_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        run_gr_budget(&GrBudgetConfig::default(), &mut out).unwrap();
        for f in ["budget.csv", "budget.txt", "budget_vs_separation.csv"] {
            assert!(dir.path().join(f).exists());
        }
    }

    #[test]
    fn analytics_small() {
        let cfg = AnalyticsCheckConfig { two_spin_sizes: vec![4, 8], tsyn_sizes: vec![6], ..Default::default() };
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let r = run_analytics_check(&cfg, &mut out).unwrap();
        assert_eq!(r.tsyn.len(), 2);
        assert!((r.gamma_over_j_perp - r.kappa_over_delta_c).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs() {
        let c = DressingScanConfig { points: 1, ..Default::default() };
        assert!(c.validate().is_err());
        let g = GrBudgetConfig { separations: vec![-1.0], ..Default::default() };
        assert!(g.validate().is_err());
        let a = AnalyticsCheckConfig { tsyn_sizes: vec![2], jz_ratios: vec![0.0], ..Default::default() };
        assert!(a.validate().is_err());
    }
}
