mod config;
mod error;
mod export;
mod patchio;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::Code;
use export::{Format, Projection};

/// Synthesize and check flat timelike surfaces from spinor seed data.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 a hypothesis of the
/// construction fails for the seed, 4 a residual budget or closedness check
/// fails.
#[derive(Parser)]
#[command(name = "spinorsurf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a patch from a JSON run config and write it to a directory.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also synthesize on the grid refined by this factor, into `<out>/refined`.
        #[arg(long)]
        refine: Option<usize>,
    },
    /// Re-run every identity on a stored patch and write `verify.json`.
    ///
    /// When `<patch>/refined` exists the convergence order of each identity
    /// between the two grids is checked as well.
    Verify {
        #[arg(long)]
        patch: PathBuf,
    },
    /// Convert a stored patch to another format.
    Export {
        #[arg(long)]
        patch: PathBuf,
        /// obj, csv or json
        #[arg(long)]
        format: String,
        /// How obj vertices are taken to R^3.
        ///
        /// drop-x1 keeps (x2, x3, x4); drop-x4 keeps (x1, x2, x3);
        /// stereo[:p] maps x to p (x2, x3, x4) / (p - x1), where the pole p
        /// defaults to one more than the largest x1 on the patch. A point with
        /// x1 = p is an error.
        #[arg(long, default_value = "drop-x1")]
        projection: String,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> error::CliResult<Option<Code>> {
    match cli.command {
        Command::Synth {
            config,
            out,
            refine,
        } => run::synth(&config, &out, refine),
        Command::Verify { patch } => run::verify(&patch),
        Command::Export {
            patch,
            format,
            projection,
            out,
        } => {
            let bad = |e| error::CliError::new(Code::Input, e);
            let format: Format = format.parse().map_err(bad)?;
            let proj: Projection = projection.parse().map_err(bad)?;
            run::export(&patch, format, proj, out.as_deref()).map(|_| None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Code::Input as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
