use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use grsync_core::evolve::PropagatorConfig;
use grsync_core::experiments::{
    default_config, run, sha256_hex, Experiment, ExperimentConfig, Preset, SyncConfig,
};
use grsync_core::hamiltonian::CgrParams;
use grsync_core::Error;
use serde_json::Value;

fn small_sync() -> ExperimentConfig {
    let n = 6;
    let nj = n as f64;
    let mut cfg = SyncConfig::preset(0.3125);
    cfg.params = CgrParams::from_eta(n, 1.0, 1.0, 0.3125);
    cfg.propagator = PropagatorConfig::new(PI / 50.0 / nj, 2.0 * PI / nj);
    ExperimentConfig::new(Experiment::Sync(cfg))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_kind_round_trips_through_json() {
    for kind in ["sync", "squeeze-scan", "lindblad", "dressing-scan", "gr-budget", "analytics-check"] {
        let cfg = default_config(kind).unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg, "{kind}");
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(back.experiment.kind(), kind);
        cfg.experiment.validate().unwrap();
    }
}

#[test]
fn presets_match_their_kinds() {
    for name in ["fig3b", "fig3c", "fig4"] {
        let p = Preset::parse(name).unwrap();
        assert_eq!(p.config().experiment.kind(), p.kind());
    }
    assert!(Preset::parse("fig9").is_err());
}

#[test]
fn manifest_checksums_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = run(&small_sync(), dir.path()).unwrap();
    assert_eq!(m.status, "ok");
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    for want in ["config.json", "omega_j.csv", "variance.csv", "xi2.csv", "kcol.csv", "renyi.csv", "sync_report.json"] {
        assert!(names.contains(&want), "missing {want}");
    }
    for f in &m.files {
        let bytes = fs::read(dir.path().join(&f.name)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.name);
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    assert_eq!(manifest(dir.path())["config_sha256"], Value::String(small_sync().hash()));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run(&small_sync(), a.path()).unwrap();
    let mb = run(&small_sync(), b.path()).unwrap();
    assert_eq!(ma.files, mb.files);
}

#[test]
fn saved_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run(&default_config("gr-budget").unwrap(), a.path()).unwrap();
    let cfg = ExperimentConfig::load(&a.path().join("config.json")).unwrap();
    let mb = run(&cfg, b.path()).unwrap();
    assert_eq!(ma.files, mb.files);
    assert_eq!(ma.config_sha256, mb.config_sha256);
}

#[test]
fn coarse_sampling_is_rejected_before_writing() {
    let mut cfg = small_sync();
    if let Experiment::Sync(c) = &mut cfg.experiment {
        c.propagator.dt_sample = 1.0;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(matches!(run(&cfg, &out), Err(Error::SamplingTooCoarse { .. })));
    assert!(!out.exists());
}

#[test]
fn unknown_kinds_and_bad_json_fail_to_parse() {
    assert!(ExperimentConfig::from_json(r#"{"kind": "teleport"}"#).is_err());
    assert!(ExperimentConfig::from_json("not json").is_err());
}
