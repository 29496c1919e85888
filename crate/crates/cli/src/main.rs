use std::path::{Path, PathBuf};
use std::process::ExitCode;

use branchlab_cli::commands::{report_json, Command, Context};
use branchlab_cli::output::{unix_ms, write_all, Metadata};
use branchlab_cli::scenario::{has_errors, Mode, Overrides, Scenario, Severity};
use branchlab_cli::{EXIT_INVALID, EXIT_OK, EXIT_RUNTIME};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "branchlab",
    version,
    about = "Complexity-based branch decompositions on small qubit chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Gate-count complexity of the scenario state.
    Complexity(RunArgs),
    /// Best Taylor-McCulloch split over the candidate family.
    Tm(RunArgs),
    /// Weingarten functional minimizer, with an optional b sweep.
    Weingarten(RunArgs),
    /// Branch tree along Hamiltonian evolution and complexity growth probes.
    Evolve(RunArgs),
    /// Born-rule branch sampling and off-diagonal residuals.
    Sample(RunArgs),
    /// Runs both splitters on the same state and compares their branches.
    Compare(RunArgs),
    /// Checks a scenario file and lists every problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    budget: Option<u32>,
    /// Thread cap; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: `out/<scenario name>/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Sub::Validate { scenario } => validate(&scenario),
        Sub::Complexity(a) => run(Command::Complexity, a),
        Sub::Tm(a) => run(Command::Tm, a),
        Sub::Weingarten(a) => run(Command::Weingarten, a),
        Sub::Evolve(a) => run(Command::Evolve, a),
        Sub::Sample(a) => run(Command::Sample, a),
        Sub::Compare(a) => run(Command::Compare, a),
    };
    ExitCode::from(code as u8)
}

fn validate(path: &Path) -> i32 {
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => {
            println!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let diags = scenario.check();
    for d in &diags {
        println!("{d}");
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    eprintln!(
        "{}: {errors} error(s), {} warning(s)",
        path.display(),
        diags.len() - errors
    );
    if errors > 0 {
        EXIT_INVALID
    } else {
        EXIT_OK
    }
}

fn run(command: Command, args: RunArgs) -> i32 {
    let started = unix_ms();
    let scenario = match Scenario::load(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let scenario = scenario.resolve(&Overrides {
        seed: args.seed,
        mode: args.mode,
        budget: args.budget,
    });
    let diags = scenario.check();
    for d in &diags {
        eprintln!("{d}");
    }
    if has_errors(&diags) {
        return EXIT_INVALID;
    }
    if let Some(section) = command.missing_section(&scenario) {
        eprintln!(
            "error: `{}` needs a `{section}` section in the scenario",
            command.name()
        );
        return EXIT_INVALID;
    }
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return EXIT_INVALID;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    let out_dir = args.out.clone().unwrap_or_else(|| {
        scenario
            .output
            .as_ref()
            .and_then(|o| o.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name))
            .join(command.name())
    });

    let outcome = pool.install(|| Context::new(scenario.clone()).and_then(|ctx| ctx.run(command).map(|o| (ctx, o))));
    let (ctx, outcome) = match outcome {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {} failed: {e}", command.name());
            return EXIT_RUNTIME;
        }
    };
    let report = report_json(command, &ctx.scenario, &ctx.gate_set, &outcome);
    let finished = unix_ms();
    let meta = Metadata {
        subcommand: command.name(),
        scenario_file: args.scenario.display().to_string(),
        started_unix_ms: started,
        finished_unix_ms: finished,
        elapsed_ms: finished.saturating_sub(started),
        workers,
        cache_dir: ctx.oracle.cache().dir().map(|d| d.display().to_string()),
        warnings: diags.iter().map(|d| d.to_string()).collect(),
    };
    match write_all(&out_dir, &report, &outcome.tables, &meta) {
        Ok(path) => {
            println!("{}: {}", command.name(), outcome.summary);
            println!("report: {}", path.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", out_dir.display());
            EXIT_RUNTIME
        }
    }
}
