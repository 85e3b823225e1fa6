use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use papm_core::harness;

/// Residual checks for P-connections on Riemannian almost product manifolds.
#[derive(Debug, Parser)]
#[command(name = "papm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolArg {
    /// Tolerance for validation and class flags [default: the spec's, else 1e-9]
    #[arg(long, env = "PAPM_TOL", value_name = "T")]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the almost product axioms at every sample point
    Validate {
        spec: PathBuf,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Print the W0, W3, L1, L2 class flags with residuals
    Classify {
        spec: PathBuf,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Write the JSON residual report
    Report {
        spec: PathBuf,
        /// Write the report here instead of standard output
        #[arg(long, value_name = "F")]
        out: Option<PathBuf>,
        /// Only analyse the sample point with this index
        #[arg(long, value_name = "I")]
        point: Option<usize>,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Run every shipped fixture and oracle suite
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = match cli.command {
        Command::Validate { spec, tol } => harness::cmd_validate(&spec, tol.tol, &mut out, &mut err),
        Command::Classify { spec, tol } => harness::cmd_classify(&spec, tol.tol, &mut out, &mut err),
        Command::Report {
            spec,
            out: dest,
            point,
            tol,
        } => harness::cmd_report(&spec, dest.as_deref(), point, tol.tol, &mut out, &mut err),
        Command::Selftest => harness::cmd_selftest(&mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
