use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use lz_dephasing::cli::{
    cmd_predict, cmd_qcurve, cmd_simulate, cmd_sweep, cmd_verify, CliError, CurveFormat,
};

/// Landau-Zener tunneling under dephasing: simulation and analytic cross-checks.
#[derive(Parser)]
#[command(name = "lzd", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the Q curve over an x range (csv, json or svg).
    Qcurve {
        #[arg(long, default_value_t = 0.0)]
        xmin: f64,
        #[arg(long, default_value_t = 10.0)]
        xmax: f64,
        /// Number of curve points (>= 2).
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
        /// Output format: csv | json | svg.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Run one master-equation simulation from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a parameter grid and emit one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; the output is identical for any value.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a property suite: kernel | transport | invariant | contraction | residual | all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print the analytic tunneling predictions for one parameter point.
    Predict {
        #[arg(long)]
        g0: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Qcurve {
            xmin,
            xmax,
            points,
            out,
            format,
        } => {
            let format = CurveFormat::parse(&format)
                .ok_or_else(|| CliError::Validation(format!("format: unknown '{format}'")))?;
            cmd_qcurve(xmin, xmax, points, &out, format)
        }
        Cmd::Simulate { config, out } => cmd_simulate(&config, &out),
        Cmd::Sweep { config, out, jobs } => cmd_sweep(&config, &out, jobs),
        Cmd::Verify { suite, seed } => cmd_verify(&suite, seed),
        Cmd::Predict {
            g0,
            gamma,
            eps,
            hbar,
        } => cmd_predict(g0, gamma, eps, hbar),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
