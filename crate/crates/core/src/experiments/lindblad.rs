//! Synchronization with collective cavity decay, integrated on the full
//! density matrix.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_sampling, CsvTable, OutputDir};
use crate::analytics::tsyn_general;
use crate::evolve::{evolve_lindblad, LindbladSpec, PropagatorConfig, MAX_LINDBLAD_ATOMS};
use crate::hamiltonian::{cavity_to_couplings, coherent_plus_x, CavityParams, CgrOperator, CgrParams, DEFAULT_MEMORY_BUDGET};
use crate::observables::{sync_report, RecordOptions, SeriesRecorder};
use crate::spin::{collective_operator, Axis, DensityMatrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladConfig {
    pub params: CgrParams,
    /// Collective decay rate in units of `J_perp`. Taken from `cavity`
    /// (as `kappa / Delta_c`) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_over_j_perp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityParams>,
    pub propagator: PropagatorConfig,
}

impl Default for LindbladConfig {
    /// `N = 8`, pure exchange (`J_z = 0`), `omega_split / N J_perp = 0.3125`,
    /// decay ratio from the cavity with `kappa / Delta_c = 0.032`.
    fn default() -> Self {
        let n = 8;
        let j_perp = 2.0 * PI * 0.04;
        let nj = n as f64 * j_perp;
        let two_pi = 2.0 * PI;
        Self {
            params: CgrParams::from_eta(n, j_perp, 0.0, 0.3125),
            gamma_over_j_perp: None,
            cavity: Some(CavityParams { g_c: two_pi * 4.0, kappa: two_pi * 160e3, delta_c: two_pi * 5e6, n_atoms: 1e5 }),
            propagator: PropagatorConfig::new(PI / 40.0 / nj, 3.0 * PI / nj),
        }
    }
}

impl LindbladConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.propagator.validate()?;
        if self.params.n_sites > MAX_LINDBLAD_ATOMS {
            return Err(Error::InvalidInput(format!(
                "density-matrix runs are limited to {MAX_LINDBLAD_ATOMS} atoms, got {}",
                self.params.n_sites
            )));
        }
        if self.params.j_perp <= 0.0 {
            return Err(Error::InvalidInput("dissipative runs need J_perp > 0".into()));
        }
        if let Some(c) = &self.cavity {
            c.validate()?;
        }
        match self.gamma_over_j_perp {
            Some(g) if !(g >= 0.0 && g.is_finite()) => {
                return Err(Error::InvalidInput(format!("gamma_over_j_perp must be nonnegative, got {g}")))
            }
            None if self.cavity.is_none() => {
                return Err(Error::InvalidInput("set gamma_over_j_perp or cavity".into()));
            }
            _ => {}
        }
        check_sampling(&self.params, self.propagator.dt_sample)
    }

    pub fn gamma_over_j_perp(&self) -> Result<f64> {
        match (self.gamma_over_j_perp, &self.cavity) {
            (Some(g), _) => Ok(g),
            (None, Some(c)) => {
                let cc = cavity_to_couplings(c)?;
                Ok(cc.gamma / cc.j_perp)
            }
            (None, None) => Err(Error::InvalidInput("set gamma_over_j_perp or cavity".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LindbladSummary {
    pub n_atoms: usize,
    pub gamma_over_j_perp: f64,
    pub kappa_over_delta_c: Option<f64>,
    pub gamma: f64,
    pub t_syn: Option<f64>,
    pub t_syn_predicted: Option<f64>,
    /// `N Gamma t_syn` with the simulated `t_syn`.
    pub n_gamma_t_syn: Option<f64>,
    pub min_xi2: f64,
    pub t_min_xi2: f64,
    pub max_trace_drift: f64,
    pub warnings: Vec<String>,
}

/// Integrates the master equation with jump `sqrt(Gamma) S^-` from `|+x>^N`
/// and writes `decay.csv`, `xi2_floor.csv` and `lindblad_report.json`.
pub fn run_lindblad(cfg: &LindbladConfig, out: &mut OutputDir) -> Result<LindbladSummary> {
    cfg.validate()?;
    let p = cfg.params;
    let n = p.n_sites;
    let ratio = cfg.gamma_over_j_perp()?;
    let gamma = ratio * p.j_perp;
    let spec = LindbladSpec {
        hamiltonian: CgrOperator::cgr(&p)?.to_sparse(DEFAULT_MEMORY_BUDGET)?,
        jumps: vec![(collective_operator(n, Axis::Minus)?, gamma)],
    };
    let rho0 = DensityMatrix::from_pure(&coherent_plus_x(n)?);

    let opts = RecordOptions { moments: true, purity_every: 0, stop_at_first_minimum: false, stop_after: None };
    let mut rec = SeriesRecorder::new(n, opts);
    let mut purity = Vec::new();
    let mut obs = |t: f64, rho: &DensityMatrix| {
        purity.push(rho.purity());
        crate::evolve::Observer::observe(&mut rec, t, rho)
    };
    let traj = evolve_lindblad(&rho0, &spec, &cfg.propagator, &mut obs)?;
    let ts = rec.into_series();
    let report = sync_report(&ts)?;

    let nj = n as f64 * p.j_perp;
    let xi2: Vec<Option<f64>> = ts.moments.iter().map(|m| m.squeezing().ok()).collect();
    let (k_min, min_xi2) = xi2
        .iter()
        .enumerate()
        .filter_map(|(k, x)| x.map(|x| (k, x)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });

    let mut decay = CsvTable::new(["t_s", "nj_t", "n_gamma_t", "sx", "sy", "sz", "xi2", "kcol", "purity"]);
    for (k, (t, m)) in ts.times.iter().zip(&ts.moments).enumerate() {
        decay.push(vec![
            Some(*t),
            Some(nj * t),
            Some(n as f64 * gamma * t),
            Some(m.mean[0]),
            Some(m.mean[1]),
            Some(m.mean[2]),
            xi2[k],
            Some(m.collectivity()),
            Some(purity[k]),
        ]);
    }
    out.write_csv("decay.csv", &decay)?;

    let summary = LindbladSummary {
        n_atoms: n,
        gamma_over_j_perp: ratio,
        kappa_over_delta_c: cfg.cavity.map(|c| c.kappa / c.delta_c),
        gamma,
        t_syn: report.t_syn,
        t_syn_predicted: tsyn_general(n, p.j_perp, p.j_z).ok(),
        n_gamma_t_syn: report.t_syn.map(|t| n as f64 * gamma * t),
        min_xi2,
        t_min_xi2: ts.times.get(k_min).copied().unwrap_or(f64::NAN),
        max_trace_drift: traj.max_norm_drift,
        warnings: traj.warnings,
    };

    let mut floor = CsvTable::new(["gamma_over_j_perp", "n_gamma_t_syn", "t_syn_s", "min_xi2", "t_min_xi2_s", "n_gamma_t_min_xi2"]);
    floor.push(vec![
        Some(ratio),
        summary.n_gamma_t_syn,
        summary.t_syn,
        Some(min_xi2),
        Some(summary.t_min_xi2),
        Some(n as f64 * gamma * summary.t_min_xi2),
    ]);
    out.write_csv("xi2_floor.csv", &floor)?;
    out.write_json("lindblad_report.json", &summary)?;
    Ok(summary)
}
