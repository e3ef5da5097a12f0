//! `qclab`: mean distortion, deficit ladders, inequality audits and
//! Cauchy–Pompeiu reconstructions from the command line.
//!
//! Exit codes: 0 pass, 2 invalid input, 3 degenerate experiment, 4 inequality
//! violation. `QCLAB_THREADS` caps the worker pool.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qclab::LabError;

use output::Format;
use spec::{GridSize, MapSpec};

#[derive(Parser, Debug)]
#[command(
    name = "qclab",
    version,
    about = "Quasiconformal mean-distortion experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Inner radius of the annulus.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Rotation of the outer boundary, in [-pi, pi].
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Seed for random-point checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean distortion of one map.
    Distortion(DistortionArgs),
    /// Deficit ladder and exponent fit.
    Fit(FitArgs),
    /// One lemma audit.
    Audit(AuditArgs),
    /// Cauchy–Pompeiu reconstruction at interior points.
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Debug)]
pub struct DistortionArgs {
    /// gstar | gN:N | geps:eps (annulus) or fstar | feps:eps (unit square).
    #[arg(long)]
    pub map: MapSpec,
    #[arg(long, default_value = "square")]
    pub gauge: String,
    /// uniform | invsq; invsq on the annulus and uniform on the square by default.
    #[arg(long)]
    pub density: Option<String>,
    /// Twist of the linear stretch for fstar.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub n: f64,
    #[arg(long, default_value = "512x512")]
    pub grid: GridSize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Comma-separated eps values.
    #[arg(long, conflicts_with = "eps_geom")]
    pub eps_list: Option<String>,
    /// Geometric eps ladder `lo:hi:count`.
    #[arg(long, default_value = "1e-4:1e-2:5")]
    pub eps_geom: String,
    #[arg(long, default_value = "square")]
    pub gauge: String,
    #[arg(long, default_value = "512x512")]
    pub grid: GridSize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// taylor | k-l2 | k-mean | alignment | gn-gap | theta
    #[arg(long)]
    pub lemma: String,
    /// Candidate on the unit square (fstar or feps:eps) for k-l2, k-mean and alignment.
    #[arg(long, default_value = "feps:0.01")]
    pub map: MapSpec,
    #[arg(long, default_value = "square")]
    pub gauge: String,
    /// Declared curvature floor, if different from the gauge's own.
    #[arg(long)]
    pub c: Option<f64>,
    /// Extra turns of g_N for gn-gap.
    #[arg(long = "N", default_value_t = 1, allow_hyphen_values = true)]
    pub turns: i32,
    /// Random samples for the taylor and theta sweeps.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value = "256x256")]
    pub grid: GridSize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// identity | conj | phi-eps:eps, on the annulus q^k <= |w| <= 1.
    #[arg(long)]
    pub map: MapSpec,
    /// Number of interior target points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Boundary nodes per circle.
    #[arg(long, default_value_t = 1024)]
    pub nodes: usize,
    #[arg(long, default_value = "256x256")]
    pub grid: GridSize,
    #[command(flatten)]
    pub common: Common,
}

/// How a completed run ended.
pub enum Outcome {
    Pass,
    Violation,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lab(LabError),
    Io(std::io::Error),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::Lab(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lab(LabError::Degenerate(_) | LabError::NonFinite { .. }) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{}", m),
            Failure::Lab(e) => write!(f, "{}", e),
            Failure::Io(e) => write!(f, "output: {}", e),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QCLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "QCLAB_THREADS must be a positive integer, got '{}'",
            raw
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {}", e)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = configure_threads().and_then(|()| match cli.command {
        Command::Distortion(a) => commands::distortion(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Audit(a) => commands::audit(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
    });
    match run {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}
