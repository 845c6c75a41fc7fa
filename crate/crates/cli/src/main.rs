#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qnoise_cli::{
    commands, verify, write_json, InputError, RunConfig, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_PASS,
};

#[derive(Parser)]
#[command(
    name = "qnoise",
    version,
    about = "Spectral model of stationary quantum noise"
)]
struct Cli {
    /// Spectrum configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Tolerance applied to every check, replacing the defaults.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Densities, modular function and support labels per retained point.
    Spectrum,
    /// Correlation kernels and the eigenvalues of the circulant model.
    Corr,
    /// Vacuum/thermal split, best estimates and modular kernels.
    Decompose,
    /// Transmission function, standard pair and reproduced spectrum.
    Synth,
    /// Integrator and canonical multiplication tables.
    Qsi,
    /// Single-mode thermal pair table.
    Mode {
        /// Mean occupation.
        #[arg(long, allow_negative_numbers = true)]
        n: f64,
    },
    /// Run every invariant suite and write verify.json.
    Verify,
}

fn load(cli: &Cli) -> Result<qnoise_cli::Setup, InputError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| InputError("--config is required for this command".into()))?;
    RunConfig::load(path)?.setup()
}

fn run(cli: &Cli) -> Result<i32, InputError> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(InputError(format!("--tol must be positive, got {tol}")));
        }
    }
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Mode { n } => {
            println!("{}", commands::mode(*n, out)?);
            return Ok(EXIT_PASS);
        }
        Command::Spectrum => commands::spectrum(&load(cli)?, out)?,
        Command::Corr => commands::corr(&load(cli)?, out)?,
        Command::Decompose => commands::decompose(&load(cli)?, out)?,
        Command::Qsi => commands::qsi(&load(cli)?, out)?,
        Command::Synth => {
            let err = commands::synth(&load(cli)?, out)?;
            println!("max relative spectrum error: {err:.3e}");
        }
        Command::Verify => {
            let setup = load(cli)?;
            let tol = cli.tol.or(setup.config.tolerance);
            let report = verify::run(&setup, tol)?;
            write_json(&out.join("verify.json"), &report.entries)?;
            for e in report.failures() {
                eprintln!(
                    "FAIL {}/{}: residual {:e} > {:e}",
                    e.suite, e.check, e.residual, e.tolerance
                );
            }
            let total = report.entries.len();
            let failed = report.failures().count();
            println!(
                "{} checks, {} passed, {} failed",
                total,
                total - failed,
                failed
            );
            return Ok(if failed == 0 {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            });
        }
    }
    Ok(EXIT_PASS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
