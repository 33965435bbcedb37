//! Command line front end: transforms FALPV models into LFT models and checks
//! the results.
//!
//! Exit codes: 0 success, 1 a check came out negative, 2 bad input or a
//! violated precondition (the error category is printed).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lpvlft", version, about = "FALPV to LFT transformation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
pub struct Output {
    /// Write the resulting model file here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a JSON twin of the text report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Realize psi from Taylor data (Ho-Kalman), minimize and certify stability.
    RealizePsi {
        taylor: PathBuf,
        /// Hankel order bound; defaults to the file's value, else (depth - 1) / 2.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Transform an FALPV model into an LFT model.
    Transform {
        falpv: PathBuf,
        /// psi-realization or psi-taylor file.
        psi: PathBuf,
        /// Use the Kronecker shortcut when n_psi = 1 (cross-checked).
        #[arg(long)]
        fast_path: bool,
        /// Word length of the post-hoc series check.
        #[arg(long)]
        depth: Option<usize>,
        /// Seed of the random scheduling points used by the pointwise check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hankel order bound for Taylor sources.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Check an assembled LFT against its FALPV source by simulation and formal maps.
    Verify {
        falpv: PathBuf,
        lft: PathBuf,
        psi: PathBuf,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Word length of the formal map comparison (default: sum of dimensions).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decide formal input-output equivalence of two LFT models.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Simulate an FALPV model or an assembled LFT on a signals file.
    Simulate {
        model: PathBuf,
        signals: PathBuf,
        /// psi file, required for FALPV models.
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Number of steps (default: signal length).
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Remove unreachable and unobservable states block by block.
    Minimize {
        model: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Search for a block-diagonal Lyapunov certificate.
    CheckStability {
        model: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RealizePsi { taylor, order, output } => commands::realize_psi(&taylor, order, &output),
        Command::Transform {
            falpv,
            psi,
            fast_path,
            depth,
            seed,
            order,
            output,
        } => commands::transform(&falpv, &psi, fast_path, depth, seed, order, &output),
        Command::Verify {
            falpv,
            lft,
            psi,
            horizon,
            trials,
            seed,
            depth,
            order,
            report,
        } => commands::verify(
            &falpv,
            &lft,
            &psi,
            commands::VerifyOptions {
                horizon,
                trials,
                seed,
                depth,
                order,
            },
            report.as_deref(),
        ),
        Command::Compare {
            first,
            second,
            depth,
            report,
        } => commands::compare(&first, &second, depth, report.as_deref()),
        Command::Simulate {
            model,
            signals,
            psi,
            horizon,
            order,
            output,
        } => commands::simulate(&model, &signals, psi.as_deref(), horizon, order, &output),
        Command::Minimize { model, output } => commands::minimize(&model, &output),
        Command::CheckStability { model, report } => commands::check_stability(&model, report.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(2)
        }
    }
}
