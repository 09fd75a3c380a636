use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

use commands::Outcome;

/// Verify, decompose and unitarize algebra objects in finite C*-tensor
/// categories.
///
/// Every command prints a JSON report on stdout and a short summary on
/// stderr. Exit codes: 0 pass, 1 property violation or non-separable input,
/// 2 unreadable input, 3 solver failure. Set QSF_LOG (error, warn, info,
/// debug, trace) for diagnostics.
#[derive(Debug, Parser)]
#[command(name = "qsys", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check algebra and module laws, the properties of every algebra, the
    /// labels stored in the file and optionally a certificate.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Threshold for identity checks.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Certificate written by `unitarize` for the (single) input file.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Split every algebra into indecomposable summands.
    Decompose {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Find an isomorphism onto a special C*-Frobenius algebra and write its
    /// certificate.
    Unitarize {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random restarts of the solver per summand.
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Which algebra to unitarize when the file holds several.
        #[arg(long)]
        algebra: Option<String>,
        /// Certificate path; defaults to `<file stem>.cert.json` next to the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random instance with ground-truth labels.
    ///
    /// Kinds: scrambled-semisimple, group-algebra, coset-algebra,
    /// dual-numbers, frobenius-nonspecial, mixed. Parameters are key=value
    /// words, e.g. `gen scrambled-semisimple blocks=1,2 --seed 7`.
    Gen {
        kind: String,
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QSF_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcomes: Vec<Outcome> = match cli.command {
        Command::Verify {
            files,
            tol,
            certificate,
        } => {
            if certificate.is_some() && files.len() != 1 {
                eprintln!("error: --certificate needs exactly one instance file");
                return ExitCode::from(2);
            }
            commands::for_each_file(&files, |f| commands::verify(f, tol, certificate.as_deref()))
        }
        Command::Decompose { files, tol } => commands::for_each_file(&files, |f| commands::decompose(f, tol)),
        Command::Unitarize {
            file,
            tol,
            seed,
            restarts,
            algebra,
            out,
        } => {
            let opts = commands::UnitarizeArgs {
                tol,
                seed,
                restarts,
                algebra,
                out,
            };
            vec![commands::unitarize(&file, &opts)]
        }
        Command::Gen {
            kind,
            params,
            seed,
            out,
        } => vec![commands::gen(&kind, &params, seed, out.as_deref())],
    };
    commands::emit(&outcomes)
}
