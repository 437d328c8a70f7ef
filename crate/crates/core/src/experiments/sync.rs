//! Frequency synchronization of an initially +x-polarized chain.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_sampling, CsvTable, OutputDir, PRESET_ATOMS, PRESET_J_PERP};
use crate::analytics::{hp_frequency, tsyn_general};
use crate::evolve::{evolve_unitary, PropagatorConfig};
use crate::hamiltonian::{coherent_plus_x, CgrOperator, CgrParams};
use crate::observables::{renyi_from_purity, rise_time, site_frequencies, sync_report, RecordOptions, SeriesRecorder, TimeSeries};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncConfig {
    pub params: CgrParams,
    pub propagator: PropagatorConfig,
    /// Half-chain purity is evaluated every this many samples.
    #[serde(default = "default_purity_every")]
    pub purity_every: usize,
    /// Window, in units of `t_syn`, over which the spin-wave prediction is
    /// compared with the simulation.
    #[serde(default = "default_hp_window")]
    pub hp_window: f64,
}

fn default_purity_every() -> usize {
    4
}

fn default_hp_window() -> f64 {
    1.5
}

impl SyncConfig {
    /// `N = 16`, `J_z = J_perp`, samples every `pi / 200` of `N J_perp t`
    /// up to `N J_perp t = 4 pi`.
    pub fn preset(eta: f64) -> Self {
        let params = CgrParams::from_eta(PRESET_ATOMS, PRESET_J_PERP, PRESET_J_PERP, eta);
        let nj = PRESET_ATOMS as f64 * PRESET_J_PERP;
        Self {
            params,
            propagator: PropagatorConfig::new(PI / 200.0 / nj, 4.0 * PI / nj),
            purity_every: default_purity_every(),
            hp_window: default_hp_window(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.propagator.validate()?;
        if self.params.j_perp <= 0.0 {
            return Err(Error::InvalidInput("sync runs need J_perp > 0".into()));
        }
        if !(self.hp_window > 0.0) {
            return Err(Error::InvalidInput("hp_window must be positive".into()));
        }
        check_sampling(&self.params, self.propagator.dt_sample)
    }
}

/// Scalar outcome of a synchronization run (`sync_report.json`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncSummary {
    pub n_atoms: usize,
    pub eta: f64,
    pub omega_split: f64,
    pub n_j_perp: f64,
    pub synchronized: bool,
    pub t_syn: Option<f64>,
    /// `N J_perp t_syn / pi`.
    pub t_syn_over_pi: Option<f64>,
    /// `((N - 2) J_perp + 2 J_z) t_syn = pi`.
    pub t_syn_predicted: Option<f64>,
    pub initial_variance: f64,
    pub variance_at_tsyn: Option<f64>,
    pub omega_at_tsyn: Option<Vec<f64>>,
    /// `max_j |omega_j(t_syn)| / omega_split`.
    pub max_omega_at_tsyn_over_split: Option<f64>,
    /// Largest `|omega_j - omega_j^HP| / |omega_j(0)|` over `t <= hp_window t_syn`.
    pub hp_max_relative_deviation: Option<f64>,
    pub hp_window: f64,
    pub min_xi2: f64,
    pub min_xi2_after_tsyn: Option<f64>,
    pub min_kcol: f64,
    /// `K_col` of the spin-wave manifold, `(N/2 - 1) / (N/2 + 1)`.
    pub spin_wave_floor: f64,
    pub max_renyi: f64,
    /// First time the Renyi entropy reaches 10% of its maximum.
    pub renyi_rise_time: Option<f64>,
    /// `pi / omega_split`.
    pub t_split: f64,
    pub max_norm_drift: f64,
    pub warnings: Vec<String>,
}

/// Evolves `|+x>^N` under the redshift-plus-exchange Hamiltonian and writes
/// `omega_j.csv`, `omega_j_hp.csv`, `variance.csv`, `xi2.csv`, `renyi.csv`,
/// `kcol.csv` and `sync_report.json`.
pub fn run_sync(cfg: &SyncConfig, out: &mut OutputDir) -> Result<SyncSummary> {
    cfg.validate()?;
    let p = cfg.params;
    let n = p.n_sites;
    let op = CgrOperator::cgr(&p)?;
    let psi0 = coherent_plus_x(n)?;
    let opts = RecordOptions { moments: true, purity_every: cfg.purity_every, stop_at_first_minimum: false, stop_after: None };
    let mut rec = SeriesRecorder::new(n, opts);
    let traj = evolve_unitary(&psi0, &op, &cfg.propagator, &mut rec)?;
    let ts = rec.into_series();
    let summary = summarize(cfg, &ts, traj.max_norm_drift)?;
    write_outputs(cfg, &ts, &summary, out)?;
    Ok(summary)
}

fn summarize(cfg: &SyncConfig, ts: &TimeSeries, max_norm_drift: f64) -> Result<SyncSummary> {
    let p = cfg.params;
    let n = p.n_sites;
    let nj = n as f64 * p.j_perp;
    let report = sync_report(ts)?;
    let split = p.omega_split();

    let freq = site_frequencies(ts);
    let hp_max = report.t_syn.map(|t_syn| {
        let mut worst = 0.0f64;
        for (t, row) in freq.times.iter().zip(&freq.omega) {
            if *t > cfg.hp_window * t_syn {
                break;
            }
            for (j, w) in row.iter().enumerate() {
                let bare = p.bare_frequency(j).abs();
                if bare > 0.0 && w.is_finite() {
                    worst = worst.max((w - hp_frequency(j, *t, &p)).abs() / bare);
                }
            }
        }
        worst
    });

    let xi2: Vec<f64> = ts.moments.iter().map(|m| m.squeezing().unwrap_or(f64::NAN)).collect();
    let min_finite = |it: &mut dyn Iterator<Item = f64>| it.filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let min_xi2 = min_finite(&mut xi2.iter().copied());
    let min_xi2_after_tsyn = report
        .t_syn
        .map(|t_syn| min_finite(&mut ts.times.iter().zip(&xi2).filter(|(t, _)| **t > t_syn).map(|(_, x)| *x)));
    let min_kcol = min_finite(&mut ts.moments.iter().map(|m| m.collectivity()));

    let (rt, rv): (Vec<f64>, Vec<f64>) =
        ts.times.iter().zip(&ts.purity).filter_map(|(t, pu)| pu.map(|pu| (*t, renyi_from_purity(pu, n)))).unzip();
    let max_renyi = rv.iter().copied().fold(0.0, f64::max);

    let half = n as f64 / 2.0;
    Ok(SyncSummary {
        n_atoms: n,
        eta: p.eta(),
        omega_split: split,
        n_j_perp: nj,
        synchronized: report.synchronized,
        t_syn: report.t_syn,
        t_syn_over_pi: report.t_syn.map(|t| t * nj / PI),
        t_syn_predicted: tsyn_general(n, p.j_perp, p.j_z).ok(),
        initial_variance: report.initial_variance,
        variance_at_tsyn: report.variance_at_tsyn,
        max_omega_at_tsyn_over_split: report
            .omega_at_tsyn
            .as_ref()
            .map(|w| w.iter().fold(0.0f64, |a, b| a.max(b.abs())) / split.abs()),
        omega_at_tsyn: report.omega_at_tsyn,
        hp_max_relative_deviation: hp_max,
        hp_window: cfg.hp_window,
        min_xi2,
        min_xi2_after_tsyn,
        min_kcol,
        spin_wave_floor: (half - 1.0) / (half + 1.0),
        max_renyi,
        renyi_rise_time: rise_time(&rt, &rv, 0.1),
        t_split: PI / split.abs(),
        max_norm_drift,
        warnings: ts.warnings.clone(),
    })
}

fn write_outputs(cfg: &SyncConfig, ts: &TimeSeries, summary: &SyncSummary, out: &mut OutputDir) -> Result<()> {
    let p = cfg.params;
    let n = p.n_sites;
    let nj = n as f64 * p.j_perp;

    let site_cols = |prefix: &'static str| (0..n).map(move |j| format!("{prefix}_{j}_rad_s"));
    let mut header = vec!["t_s".to_string(), "nj_t".to_string()];
    header.extend(site_cols("omega"));
    let mut omega = CsvTable::new(header);
    let mut header_hp = vec!["t_s".to_string(), "nj_t".to_string()];
    header_hp.extend(site_cols("omega_hp"));
    let mut hp = CsvTable::new(header_hp);
    let freq = site_frequencies(ts);
    for (t, row) in freq.times.iter().zip(&freq.omega) {
        let mut r = vec![Some(*t), Some(nj * t)];
        r.extend(row.iter().map(|w| Some(*w)));
        omega.push(r);
        let mut r = vec![*t, nj * t];
        r.extend((0..n).map(|j| hp_frequency(j, *t, &p)));
        hp.push_values(&r);
    }
    out.write_csv("omega_j.csv", &omega)?;
    out.write_csv("omega_j_hp.csv", &hp)?;

    let report = sync_report(ts)?;
    let mut var = CsvTable::new(["t_s", "nj_t", "var_omega_rad2_s2", "var_over_initial"]);
    for (t, v) in report.times.iter().zip(&report.variance_curve) {
        var.push(vec![Some(*t), Some(nj * t), Some(*v), Some(v / summary.initial_variance)]);
    }
    out.write_csv("variance.csv", &var)?;

    let mut xi = CsvTable::new(["t_s", "nj_t", "xi2", "sx", "sy", "sz"]);
    let mut kcol = CsvTable::new(["t_s", "nj_t", "kcol", "spin_wave_floor"]);
    for (t, m) in ts.times.iter().zip(&ts.moments) {
        xi.push(vec![Some(*t), Some(nj * t), m.squeezing().ok(), Some(m.mean[0]), Some(m.mean[1]), Some(m.mean[2])]);
        kcol.push_values(&[*t, nj * t, m.collectivity(), summary.spin_wave_floor]);
    }
    out.write_csv("xi2.csv", &xi)?;
    out.write_csv("kcol.csv", &kcol)?;

    let mut renyi = CsvTable::new(["t_s", "nj_t", "purity", "renyi2_per_atom"]);
    for (t, pu) in ts.times.iter().zip(&ts.purity) {
        if let Some(pu) = pu {
            renyi.push_values(&[*t, nj * t, *pu, renyi_from_purity(*pu, n)]);
        }
    }
    out.write_csv("renyi.csv", &renyi)?;
    out.write_json("sync_report.json", summary)
}
