//! `obstacle run` drives a convergence study and writes one CSV row per
//! level; `obstacle rates` fits the empirical rate of a column.
//!
//! Exit codes: 0 success, 1 other errors, 2 rejected configuration,
//! 3 solver non-convergence (completed levels are still written).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use lsq_obstacle::report::{rates, write_csv};
use lsq_obstacle::{run_adaptive_with, AdaptiveConfig, Error, FormKind, ProblemSpec, RefinementMode, SetKind, SolverOptions};

/// Thread count for the parallel assembly and estimate stages.
const THREADS_VAR: &str = "OBSTACLE_THREADS";

#[derive(Parser)]
#[command(name = "obstacle", version, about = "Least-squares finite elements for the obstacle problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a sequence of meshes and write the convergence table.
    Run(RunArgs),
    /// Fitted rate of a CSV column against the element count.
    Rates {
        csv: PathBuf,
        column: String,
        /// Number of trailing rows used in the fit.
        #[arg(long, default_value_t = 3)]
        tail: usize,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// smooth, lshape or pyramid.
    #[arg(long)]
    example: String,
    #[arg(long, default_value = "A")]
    form: FormKind,
    #[arg(long, default_value = "Ks")]
    set: SetKind,
    #[arg(long, default_value = "adaptive")]
    mode: RefinementMode,
    /// Overrides the example's default weight.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    theta: f64,
    /// Stop before solving a level with more unknowns than this.
    #[arg(long, default_value_t = 200_000)]
    max_dofs: usize,
    #[arg(long)]
    max_levels: Option<usize>,
    /// Active-set iteration limit per level.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Subdivisions per unit of the initial structured mesh.
    #[arg(long, default_value_t = 2)]
    initial_n: usize,
    /// Accepted for reproducible scripts; runs are deterministic anyway.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Comma-separated levels whose meshes are written next to the output.
    #[arg(long, value_delimiter = ',')]
    dump_mesh: Vec<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::Rates { csv, column, tail } => match rates(&csv, &column, tail) {
            Ok(r) => {
                println!("{r:.6}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = value.parse().with_context(|| format!("{THREADS_VAR}={value} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Rejected(_) | Error::InvalidTheta(_) | Error::UnknownProblem(_) | Error::InvalidObstacle => 2,
        Error::NonConvergence { .. } => 3,
        _ => 1,
    }
}

fn run(args: RunArgs) -> ExitCode {
    let problem = match ProblemSpec::by_name(&args.example) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}; known examples: {}", ProblemSpec::NAMES.join(", "));
            return ExitCode::from(2);
        }
    };
    let config = AdaptiveConfig {
        form: args.form,
        set: args.set,
        beta: args.beta,
        theta: args.theta,
        mode: args.mode,
        max_dofs: Some(args.max_dofs),
        max_levels: args.max_levels,
        initial_n: args.initial_n,
        solver: SolverOptions { max_iterations: args.max_iterations, ..SolverOptions::default() },
        ..AdaptiveConfig::default()
    };
    log::debug!("seed {} unused: runs are deterministic", args.seed);

    let dump_dir = args.output.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));
    let stem = args
        .output
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.example.clone());
    let mut dump_error = None;
    let outcome = run_adaptive_with(&problem, &config, |state| {
        let level = state.record.level;
        if args.dump_mesh.contains(&level) {
            let path = dump_dir.join(format!("{stem}.level{level}.mesh"));
            if let Err(e) = std::fs::write(&path, state.mesh.to_text()) {
                dump_error = Some(format!("{}: {e}", path.display()));
            }
        }
        Ok(())
    });
    let (records, failure) = match outcome {
        Ok(records) => (records, None),
        Err(partial) => (partial.records, Some(partial.error)),
    };

    // completed levels are kept even when the run aborted
    if let Err(e) = emit(&records, args.output.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if let Some(msg) = dump_error {
        eprintln!("error: could not write mesh {msg}");
        return ExitCode::from(1);
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(records: &[lsq_obstacle::LevelRecord], output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(records, file)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(records, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}
