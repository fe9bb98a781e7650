mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mosco_lab::Error;

use config::MeshSpec;

/// Parabolic problems and variational inequalities on perturbed domains.
#[derive(Debug, Parser)]
#[command(name = "mosco-lab", version)]
struct Cli {
    /// Threads for per-member solves (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MeshFamily {
    CrackedDisk,
    Disk,
    FixedHole,
    Dumbbell,
    TwoChambers,
    UnitSquare,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a mesh and write it in the mesh2d text format.
    Mesh {
        #[arg(long, value_enum)]
        family: MeshFamily,
        /// Crack tip position (cracked_disk).
        #[arg(long)]
        delta: Option<f64>,
        /// Handle width (dumbbell).
        #[arg(long)]
        width: Option<f64>,
        /// Hole radius (fixed_hole).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one parabolic or obstacle solve from a JSON config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a convergence study from a JSON config.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Lab(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lab(e)
    }
}

fn need(v: Option<f64>, flag: &str, family: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for --family {family}")))
}

fn mesh_spec(family: MeshFamily, delta: Option<f64>, width: Option<f64>, radius: Option<f64>, h: f64) -> Result<MeshSpec, Failure> {
    Ok(match family {
        MeshFamily::CrackedDisk => MeshSpec::CrackedDisk {
            delta: need(delta, "delta", "cracked_disk")?,
            h,
        },
        MeshFamily::Disk => MeshSpec::Disk { h },
        MeshFamily::FixedHole => MeshSpec::FixedHole {
            radius: need(radius, "radius", "fixed_hole")?,
            h,
        },
        MeshFamily::Dumbbell => MeshSpec::Dumbbell {
            width: need(width, "width", "dumbbell")?,
            h,
        },
        MeshFamily::TwoChambers => MeshSpec::TwoChambers { h },
        MeshFamily::UnitSquare => MeshSpec::UnitSquare { h },
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure {j} threads: {e}")))?;
    }
    match cli.command {
        Command::Mesh {
            family,
            delta,
            width,
            radius,
            h,
            out,
        } => commands::cmd_mesh(&mesh_spec(family, delta, width, radius, h)?, &out)?,
        Command::Solve { config, out } => commands::cmd_solve(&config, &out)?,
        Command::Study { config, out } => commands::cmd_study(&config, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lab(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
