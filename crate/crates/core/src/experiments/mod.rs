//! Experiment configurations, presets and the file-producing drivers used
//! by the command-line tool.
//!
//! Every run writes into one directory: the CSV/JSON products of the
//! experiment plus `manifest.json` with checksums. Identical configurations
//! produce byte-identical CSV files.

mod checks;
mod lindblad;
mod output;
mod squeeze;
mod sync;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use checks::{run_analytics_check, run_dressing_scan, run_gr_budget, AnalyticsCheckConfig, DressingScanConfig, GrBudgetConfig};
pub use lindblad::{run_lindblad, LindbladConfig, LindbladSummary};
pub use output::{sha256_hex, CsvTable, FileRecord, OutputDir, RunManifest};
pub use squeeze::{initial_state as squeeze_initial_state, run_squeeze_scan, ScanPoint, SqueezeScanConfig, SqueezeScanSummary};
pub use sync::{run_sync, SyncConfig, SyncSummary};

use crate::hamiltonian::CgrParams;
use crate::{Error, Result};

/// Exchange coupling used by the presets (rad/s); `N J_perp / 2 pi = 0.32 Hz`
/// at `N = 16`.
pub const PRESET_J_PERP: f64 = 2.0 * PI * 0.02;
/// Atom number of the presets.
pub const PRESET_ATOMS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Sync(SyncConfig),
    SqueezeScan(SqueezeScanConfig),
    Lindblad(LindbladConfig),
    DressingScan(DressingScanConfig),
    GrBudget(GrBudgetConfig),
    AnalyticsCheck(AnalyticsCheckConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Sync(_) => "sync",
            Experiment::SqueezeScan(_) => "squeeze-scan",
            Experiment::Lindblad(_) => "lindblad",
            Experiment::DressingScan(_) => "dressing-scan",
            Experiment::GrBudget(_) => "gr-budget",
            Experiment::AnalyticsCheck(_) => "analytics-check",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Experiment::Sync(c) => c.validate(),
            Experiment::SqueezeScan(c) => c.validate(),
            Experiment::Lindblad(c) => c.validate(),
            Experiment::DressingScan(c) => c.validate(),
            Experiment::GrBudget(c) => c.validate(),
            Experiment::AnalyticsCheck(c) => c.validate(),
        }
    }
}

/// A complete run description, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    /// Default output directory; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Reserved; every current experiment is deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { experiment, out_dir: None, seed: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    /// SHA-256 of the canonical JSON form of the experiment.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(&self.experiment).expect("configs serialize").as_bytes())
    }
}

/// Named parameter sets of the three headline protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Synchronizing regime, `omega_split / N J_perp = 0.3125`.
    Fig3b,
    /// Gradient-dominated regime, `omega_split / N J_perp = 3.125`.
    Fig3c,
    /// Squeezed initial states, `Q / 2 pi = 0.1 .. 1.0`, 21 rotation angles.
    Fig4,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "fig3b" => Ok(Preset::Fig3b),
            "fig3c" => Ok(Preset::Fig3c),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(Error::InvalidInput(format!("unknown preset {name:?}; expected fig3b, fig3c or fig4"))),
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let experiment = match self {
            Preset::Fig3b => Experiment::Sync(SyncConfig::preset(0.3125)),
            Preset::Fig3c => Experiment::Sync(SyncConfig::preset(3.125)),
            Preset::Fig4 => Experiment::SqueezeScan(SqueezeScanConfig::preset()),
        };
        ExperimentConfig::new(experiment)
    }

    /// The experiment kind (CLI verb) the preset belongs to.
    pub fn kind(self) -> &'static str {
        match self {
            Preset::Fig3b | Preset::Fig3c => "sync",
            Preset::Fig4 => "squeeze-scan",
        }
    }
}

/// Default configuration for each experiment kind.
pub fn default_config(kind: &str) -> Result<ExperimentConfig> {
    let experiment = match kind {
        "sync" => Experiment::Sync(SyncConfig::preset(0.3125)),
        "squeeze-scan" => Experiment::SqueezeScan(SqueezeScanConfig::preset()),
        "lindblad" => Experiment::Lindblad(LindbladConfig::default()),
        "dressing-scan" => Experiment::DressingScan(DressingScanConfig::default()),
        "gr-budget" => Experiment::GrBudget(GrBudgetConfig::default()),
        "analytics-check" => Experiment::AnalyticsCheck(AnalyticsCheckConfig::default()),
        _ => return Err(Error::InvalidInput(format!("unknown experiment kind {kind:?}"))),
    };
    Ok(ExperimentConfig::new(experiment))
}

/// Rejects sample intervals over which a site phase could advance by `pi`
/// or more, which would make phase unwrapping ambiguous.
pub fn check_sampling(p: &CgrParams, dt: f64) -> Result<()> {
    let max_bare = (0..p.n_sites).map(|j| p.bare_frequency(j).abs()).fold(0.0, f64::max);
    let increment = dt * (max_bare + p.n_sites as f64 * (p.j_perp.abs() + p.j_z.abs()));
    if increment >= PI {
        return Err(Error::SamplingTooCoarse { increment });
    }
    Ok(())
}

/// Runs `cfg` into `out`, writing `manifest.json` last. On failure the
/// manifest lists the files written so far and the error.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    cfg.experiment.validate()?;
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    dir.write_bytes("config.json", format!("{}\n", cfg.to_json()).as_bytes())?;
    let result = match &cfg.experiment {
        Experiment::Sync(c) => run_sync(c, &mut dir).map(|_| ()),
        Experiment::SqueezeScan(c) => run_squeeze_scan(c, &mut dir).map(|_| ()),
        Experiment::Lindblad(c) => run_lindblad(c, &mut dir).map(|_| ()),
        Experiment::DressingScan(c) => run_dressing_scan(c, &mut dir).map(|_| ()),
        Experiment::GrBudget(c) => run_gr_budget(c, &mut dir).map(|_| ()),
        Experiment::AnalyticsCheck(c) => run_analytics_check(c, &mut dir).map(|_| ()),
    };
    let manifest = RunManifest {
        kind: cfg.experiment.kind().to_string(),
        config_sha256: cfg.hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        status: match &result {
            Ok(()) => "ok".to_string(),
            Err(e) => format!("failed: {e}"),
        },
        files: dir.files().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(out.join("manifest.json"), text)?;
    result.map(|()| manifest)
}
