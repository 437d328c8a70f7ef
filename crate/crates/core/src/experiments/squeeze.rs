//! Synchronization time of rotated one-axis-twisted initial states.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_sampling, CsvTable, OutputDir, PRESET_ATOMS, PRESET_J_PERP};
use crate::analytics::{delta_tsyn_ratio, oat, tsyn_ratio_from};
use crate::evolve::{evolve_unitary, PropagatorConfig};
use crate::hamiltonian::{coherent_plus_x, oat_unitary_apply, rotation_apply, CgrOperator, CgrParams, RotationSign};
use crate::observables::{fisher_from_covariance, sync_report, CollectiveMoments, RecordOptions, SeriesRecorder};
use crate::spin::{Axis, SpinState};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeScanConfig {
    pub params: CgrParams,
    /// Shearing strengths in units of `2 pi`.
    pub q_over_2pi: Vec<f64>,
    /// Rotation angles `theta = pi k / theta_points`, `k = 0..theta_points`.
    pub theta_points: usize,
    /// Sampling grid; each run stops at the first variance minimum.
    pub propagator: PropagatorConfig,
}

impl SqueezeScanConfig {
    /// `N = 16`, `J_z = J_perp`, `omega_split / N J_perp = 0.3125`,
    /// `Q / 2 pi = 0, 0.1, .., 1.0`, 21 angles, samples every `pi / 50` of
    /// `N J_perp t` up to `N J_perp t = 3 pi`.
    pub fn preset() -> Self {
        let nj = PRESET_ATOMS as f64 * PRESET_J_PERP;
        Self {
            params: CgrParams::from_eta(PRESET_ATOMS, PRESET_J_PERP, PRESET_J_PERP, 0.3125),
            q_over_2pi: (0..=10).map(|k| k as f64 / 10.0).collect(),
            theta_points: 21,
            propagator: PropagatorConfig::new(PI / 50.0 / nj, 3.0 * PI / nj),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.propagator.validate()?;
        if self.params.j_perp <= 0.0 {
            return Err(Error::InvalidInput("squeeze scans need J_perp > 0".into()));
        }
        if self.q_over_2pi.is_empty() || self.theta_points == 0 {
            return Err(Error::InvalidInput("Q and theta grids must be nonempty".into()));
        }
        if self.q_over_2pi.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidInput("Q values must be finite".into()));
        }
        check_sampling(&self.params, self.propagator.dt_sample)
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.theta_points).map(|k| PI * k as f64 / self.theta_points as f64).collect()
    }
}

/// One `(Q, theta)` run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub q: f64,
    pub theta: f64,
    /// First minimum of the frequency variance; `None` if none was found.
    pub t_syn: Option<f64>,
    pub synchronized: bool,
    /// `t_syn / t_syn,0` from the simulation.
    pub ratio: Option<f64>,
    /// The same ratio predicted from the state's `Cov(y,z)` and `<S^x>`.
    pub ratio_predicted: f64,
    pub cov_yz: f64,
    pub cov_yz_closed_form: f64,
    pub sx: f64,
    pub sx_closed_form: f64,
    pub c_yz: f64,
    pub f_q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezeScanSummary {
    pub t_syn0: f64,
    pub points: Vec<ScanPoint>,
    /// `(Q, simulated Delta t_syn / t_syn0, predicted)` per shearing strength.
    pub delta: Vec<(f64, Option<f64>, f64)>,
}

pub fn initial_state(n: usize, q: f64, theta: f64) -> Result<SpinState> {
    let twisted = oat_unitary_apply(&coherent_plus_x(n)?, q);
    rotation_apply(&twisted, Axis::X, theta, RotationSign::Minus)
}

/// First variance minimum of the evolution from `psi0` and whether it
/// meets the synchronization threshold.
fn first_minimum(cfg: &SqueezeScanConfig, op: &CgrOperator, psi0: &SpinState) -> Result<(Option<f64>, bool)> {
    let opts = RecordOptions { moments: false, purity_every: 0, stop_at_first_minimum: true, stop_after: None };
    let mut rec = SeriesRecorder::new(psi0.n_atoms(), opts);
    evolve_unitary(psi0, op, &cfg.propagator, &mut rec)?;
    let report = sync_report(rec.series())?;
    Ok((report.t_syn, report.synchronized))
}

/// Runs every `(Q, theta)` pair and writes `tsyn_vs_theta.csv`,
/// `dtsyn_vs_Q.csv`, `cyz_fq.csv` and `squeeze_report.json`.
pub fn run_squeeze_scan(cfg: &SqueezeScanConfig, out: &mut OutputDir) -> Result<SqueezeScanSummary> {
    cfg.validate()?;
    let p = cfg.params;
    let n = p.n_sites;
    let op = CgrOperator::cgr(&p)?;
    let (t0, _) = first_minimum(cfg, &op, &coherent_plus_x(n)?)?;
    let t_syn0 = t0.ok_or_else(|| Error::InvalidInput("the unsqueezed state does not reach a frequency-variance minimum in the window".into()))?;

    let thetas = cfg.thetas();
    let grid: Vec<(f64, f64)> =
        cfg.q_over_2pi.iter().flat_map(|&q| thetas.iter().map(move |&th| (2.0 * PI * q, th))).collect();
    let points = grid
        .par_iter()
        .map(|&(q, theta)| -> Result<ScanPoint> {
            let psi = initial_state(n, q, theta)?;
            let mom = CollectiveMoments::of(&psi);
            let cov = mom.covariance();
            let fisher = fisher_from_covariance(&cov);
            let (t_syn, synchronized) = first_minimum(cfg, &op, &psi)?;
            Ok(ScanPoint {
                q,
                theta,
                t_syn,
                synchronized,
                ratio: t_syn.map(|t| t / t_syn0),
                ratio_predicted: tsyn_ratio_from(cov[1][2], mom.mean[0], n)?,
                cov_yz: cov[1][2],
                cov_yz_closed_form: oat::rotated_cov_yz(n, q, theta),
                sx: mom.mean[0],
                sx_closed_form: oat::mean_sx(n, q),
                c_yz: fisher.c_yz,
                f_q: fisher.f_q,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut delta = Vec::new();
    for &q2 in &cfg.q_over_2pi {
        let q = 2.0 * PI * q2;
        let ratios: Vec<f64> = points.iter().filter(|pt| pt.q == q).filter_map(|pt| pt.ratio).collect();
        let sim = if ratios.len() == thetas.len() && !ratios.is_empty() {
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
            Some(hi - lo)
        } else {
            None
        };
        delta.push((q, sim, delta_tsyn_ratio(oat::cov_max(n, q), oat::mean_sx(n, q), n)?));
    }

    let summary = SqueezeScanSummary { t_syn0, points, delta };
    write_outputs(cfg, &summary, out)?;
    Ok(summary)
}

fn write_outputs(cfg: &SqueezeScanConfig, s: &SqueezeScanSummary, out: &mut OutputDir) -> Result<()> {
    let nj = cfg.params.n_sites as f64 * cfg.params.j_perp;
    let mut tsyn = CsvTable::new([
        "q_over_2pi",
        "theta_rad",
        "t_syn_s",
        "nj_t_syn",
        "synchronized",
        "ratio_sim",
        "ratio_eq",
        "cov_yz",
    ]);
    let mut cyz = CsvTable::new(["q_over_2pi", "theta_rad", "c_yz", "f_q", "cov_yz", "cov_yz_closed_form", "sx", "sx_closed_form"]);
    for pt in &s.points {
        let q2 = pt.q / (2.0 * PI);
        tsyn.push(vec![
            Some(q2),
            Some(pt.theta),
            pt.t_syn,
            pt.t_syn.map(|t| nj * t),
            Some(if pt.synchronized { 1.0 } else { 0.0 }),
            pt.ratio,
            Some(pt.ratio_predicted),
            Some(pt.cov_yz),
        ]);
        cyz.push_values(&[q2, pt.theta, pt.c_yz, pt.f_q, pt.cov_yz, pt.cov_yz_closed_form, pt.sx, pt.sx_closed_form]);
    }
    out.write_csv("tsyn_vs_theta.csv", &tsyn)?;
    out.write_csv("cyz_fq.csv", &cyz)?;

    let mut dt = CsvTable::new(["q_over_2pi", "dtsyn_over_tsyn0_sim", "dtsyn_over_tsyn0_eq", "cov_max"]);
    let n = cfg.params.n_sites;
    for (q, sim, pred) in &s.delta {
        dt.push(vec![Some(q / (2.0 * PI)), *sim, Some(*pred), Some(oat::cov_max(n, *q))]);
    }
    out.write_csv("dtsyn_vs_Q.csv", &dt)?;

    #[derive(Serialize)]
    struct Report {
        t_syn0: f64,
        nj_t_syn0_over_pi: f64,
        max_abs_ratio_error: Option<f64>,
        unsynchronized_points: usize,
        max_cyz_minus_fq: f64,
    }
    let max_err = s
        .points
        .iter()
        .filter_map(|pt| pt.ratio.map(|r| (r - pt.ratio_predicted).abs()))
        .fold(None, |a: Option<f64>, e| Some(a.map_or(e, |a| a.max(e))));
    out.write_json(
        "squeeze_report.json",
        &Report {
            t_syn0: s.t_syn0,
            nj_t_syn0_over_pi: s.t_syn0 * nj / PI,
            max_abs_ratio_error: max_err,
            unsynchronized_points: s.points.iter().filter(|pt| pt.t_syn.is_none()).count(),
            max_cyz_minus_fq: s.points.iter().map(|pt| pt.c_yz - pt.f_q).fold(f64::NEG_INFINITY, f64::max),
        },
    )
}
