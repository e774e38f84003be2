//! `cca`: command-line access to the emission, field and localization
//! calculations of `cca-core`.
//!
//! Every run resolves a [`RunConfig`] (preset < `--config` file < flags),
//! writes its tables into `--out`, and leaves `run.toml` and `manifest.json`
//! beside them, also when the run fails.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, RunConfig};
pub use error::{exit, CliError};
pub use output::{Achieved, Manifest};

#[derive(Debug, Parser)]
#[command(
    name = "cca",
    version,
    about = "Atom emission into a coupled-cavity array"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound-state energies, envelope ratio and weights.
    Spectrum,
    /// Excited-state amplitude and population over time.
    Emit,
    /// Photon amplitudes on the window over time, with a heatmap.
    Field,
    /// Localized-photon and trapped-atom averages over a log-spaced coupling sweep.
    Localization,
    /// Couplings at which the averages reach --eps-c.
    Thresholds,
    /// Compare the analytic amplitudes with exact propagation on a finite ring.
    Validate,
    /// Data behind one of the figures (2-5).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=5))]
        number: u8,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Spectrum => "spectrum".into(),
            Command::Emit => "emit".into(),
            Command::Field => "field".into(),
            Command::Localization => "localization".into(),
            Command::Thresholds => "thresholds".into(),
            Command::Validate => "validate".into(),
            Command::Figure { number } => format!("figure-{number}"),
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Hopping rate J.
    #[arg(long = "J", global = true)]
    pub hopping: Option<f64>,
    /// Atom-cavity coupling g.
    #[arg(long, global = true, conflicts_with = "eta")]
    pub g: Option<f64>,
    /// Dimensionless coupling η = g/J.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Comma-separated couplings η for multi-coupling commands.
    #[arg(long, global = true, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub tmin: Option<f64>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of time samples, end points included.
    #[arg(long, global = true)]
    pub tsteps: Option<usize>,
    /// Field window half width X.
    #[arg(long, global = true)]
    pub window: Option<i64>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with any of the flag names as keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Threshold level.
    #[arg(long = "eps-c", global = true)]
    pub eps_c: Option<f64>,
    /// Ring size for `validate`.
    #[arg(long = "oracle-N", global = true)]
    pub oracle_n: Option<usize>,
    /// Pass mark for `validate`.
    #[arg(long = "check-tol", global = true)]
    pub check_tol: Option<f64>,
    #[arg(long = "eta-min", global = true)]
    pub eta_min: Option<f64>,
    #[arg(long = "eta-max", global = true)]
    pub eta_max: Option<f64>,
    /// Number of couplings in the sweep.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Comma-separated snapshot times, one per coupling.
    #[arg(long, global = true, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
}

impl Flags {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            command: None,
            hopping: self.hopping,
            g: self.g,
            eta: self.eta,
            etas: self.etas.clone(),
            tmin: self.tmin,
            tmax: self.tmax,
            tsteps: self.tsteps,
            window: self.window,
            tol: self.tol,
            out: self.out.clone(),
            eps_c: self.eps_c,
            oracle_n: self.oracle_n,
            check_tol: self.check_tol,
            eta_min: self.eta_min,
            eta_max: self.eta_max,
            points: self.points,
            snapshots: self.snapshots.clone(),
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
        }
    };
    let file = match &cli.flags.config {
        Some(path) => Overrides::from_file(path),
        None => Ok(Overrides::default()),
    };
    let config =
        file.and_then(|f| RunConfig::resolve(&cli.command.name(), &f, &cli.flags.overrides()));
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = std::fs::create_dir_all(&config.out) {
        eprintln!("error: cannot create {}: {e}", config.out.display());
        return exit::IO;
    }
    execute(&config)
}

/// Runs a resolved configuration, writing `run.toml` and `manifest.json`.
pub fn execute(config: &RunConfig) -> u8 {
    let start = Instant::now();
    let result = commands::run(config);

    let run_config = config.out.join(output::RUN_CONFIG);
    if let Err(e) = std::fs::write(&run_config, config.to_toml()) {
        eprintln!("error: {}: {e}", run_config.display());
        return exit::IO;
    }

    let (code, status, error, summary) = match result {
        Ok(s) => match &s.failure {
            Some(msg) => (exit::VALIDATION_FAILED, "failed", Some(msg.clone()), s),
            None => (exit::OK, "ok", None, s),
        },
        Err(e) => (
            e.exit_code(),
            "error",
            Some(e.to_string()),
            Default::default(),
        ),
    };
    let mut outputs = summary.outputs.clone();
    outputs.push(output::RUN_CONFIG.into());
    let manifest = Manifest {
        tool: "cca".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        status: status.into(),
        exit_code: code,
        error: error.clone(),
        requested_tolerance: config.tol,
        achieved: summary.achieved.clone(),
        outputs,
        metrics: summary.metrics.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let path = config.out.join(output::MANIFEST);
    if let Err(e) = output::write_json(&path, &manifest) {
        eprintln!("error: {e}");
        return exit::IO;
    }

    for line in &summary.lines {
        println!("{line}");
    }
    if let Some(msg) = error {
        eprintln!("error: {msg}");
    }
    code
}
