use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qds::commands::{self, PicardArgs, TimeArg};
use qds::{CliError, Flags, Outcome};
use qds_core::{Picture, Tolerances, DEFAULT_SEED};

/// Structure of finite-dimensional quantum dynamical semigroups.
///
/// Exit status: 0 on success, 1 when --strict is set and the verdict is
/// false, 2 on any error.
#[derive(Debug, Parser)]
#[command(name = "qds", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Residual accepted for algebraic identities.
    #[arg(long, global = true, default_value_t = Tolerances::default().alg_tol)]
    tol: f64,
    /// Relative cutoff for ranks and supports.
    #[arg(long, global = true, default_value_t = Tolerances::default().rank_tol)]
    rank_tol: f64,
    /// Convergence threshold for iterations and limits.
    #[arg(long, global = true, default_value_t = Tolerances::default().conv_tol)]
    conv_tol: f64,
    #[arg(long, global = true, env = "QDS_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report destination; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Exit with status 1 when the command's verdict is false.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PictureArg {
    Heisenberg,
    Schrodinger,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a model file.
    Check { model: PathBuf },
    /// Classify a projection; the verdict is positive recurrence.
    Classify { model: PathBuf, projection: PathBuf },
    /// Decompose the identity into recurrent projections and a remainder.
    Resolve { model: PathBuf },
    /// Evolve an operator for time --t (generators) or --n steps (maps).
    #[command(allow_negative_numbers = true)]
    Evolve {
        model: PathBuf,
        operator: PathBuf,
        #[arg(long, conflicts_with = "n", required_unless_present = "n")]
        t: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, value_enum, default_value_t = PictureArg::Heisenberg)]
        picture: PictureArg,
    },
    /// Solve the integral equation by monotone iteration.
    #[command(allow_negative_numbers = true)]
    Picard {
        model: PathBuf,
        operator: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 200)]
        max_n: usize,
        #[arg(long, default_value_t = 256)]
        steps: usize,
    },
    /// Invariant states, strong ergodicity and irreducibility.
    Ergodic { model: PathBuf },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    let flags = Flags {
        tol: Tolerances {
            alg_tol: g.tol,
            rank_tol: g.rank_tol,
            conv_tol: g.conv_tol,
            ..Tolerances::default()
        },
        seed: g.seed,
    };
    match &cli.command {
        Command::Check { model } => commands::cmd_check(model, &flags),
        Command::Classify { model, projection } => commands::cmd_classify(model, projection, &flags),
        Command::Resolve { model } => commands::cmd_resolve(model, &flags),
        Command::Evolve {
            model,
            operator,
            t,
            n,
            picture,
        } => {
            let time = match (t, n) {
                (Some(t), _) => TimeArg::Duration(*t),
                (None, Some(n)) => TimeArg::Steps(*n),
                (None, None) => unreachable!("clap requires --t or --n"),
            };
            let picture = match picture {
                PictureArg::Heisenberg => Picture::Heisenberg,
                PictureArg::Schrodinger => Picture::Schrodinger,
            };
            commands::cmd_evolve(model, operator, time, picture, &flags)
        }
        Command::Picard {
            model,
            operator,
            t,
            max_n,
            steps,
        } => commands::cmd_picard(
            model,
            operator,
            PicardArgs {
                t: *t,
                max_n: *max_n,
                steps: *steps,
            },
            &flags,
        ),
        Command::Ergodic { model } => commands::cmd_ergodic(model, &flags),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rendered = match cli.global.format {
        OutputFormat::Json => outcome.report.to_json(),
        OutputFormat::Text => outcome.report.to_text(),
    };
    match &cli.global.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    if cli.global.strict && !outcome.verdict {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
