use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grsync_core::experiments::{default_config, run, ExperimentConfig, Preset};
use grsync_core::Error;

/// Redshift-split lattice clock simulations.
#[derive(Parser, Debug)]
#[command(name = "grsync", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequency synchronization of a +x-polarized chain.
    Sync(RunArgs),
    /// Synchronization time of rotated one-axis-twisted states.
    SqueezeScan(RunArgs),
    /// Synchronization with collective cavity decay.
    Lindblad(RunArgs),
    /// Dressed-state mass defect, couplings and gradient slopes.
    DressingScan(RunArgs),
    /// Fractional sizes of relativistic frequency shifts.
    GrBudget(RunArgs),
    /// Closed-form identities and synchronization times.
    AnalyticsCheck(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Built-in parameter set: fig3b, fig3c or fig4.
    #[arg(long)]
    preset: Option<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Sync(a) => ("sync", a),
            Command::SqueezeScan(a) => ("squeeze-scan", a),
            Command::Lindblad(a) => ("lindblad", a),
            Command::DressingScan(a) => ("dressing-scan", a),
            Command::GrBudget(a) => ("gr-budget", a),
            Command::AnalyticsCheck(a) => ("analytics-check", a),
        }
    }
}

fn resolve(kind: &str, args: &RunArgs) -> grsync_core::Result<ExperimentConfig> {
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => {
            let preset = Preset::parse(name)?;
            if preset.kind() != kind {
                return Err(Error::InvalidInput(format!("preset {name} belongs to `{}`, not `{kind}`", preset.kind())));
            }
            preset.config()
        }
        (None, None) => default_config(kind)?,
    };
    if cfg.experiment.kind() != kind {
        return Err(Error::InvalidInput(format!(
            "config describes a `{}` experiment but the command is `{kind}`",
            cfg.experiment.kind()
        )));
    }
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_numerical() => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();

    let cfg = match resolve(kind, args) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if args.print_config {
        println!("{}", cfg.to_json());
        return ExitCode::SUCCESS;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(kind));
    log::info!("running {kind} into {}", out.display());
    match run(&cfg, &out) {
        Ok(manifest) => {
            log::info!("done in {:.1} s, {} files", manifest.wall_time_s, manifest.files.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
