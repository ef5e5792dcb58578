//! Thin command-line front end: graph documents in, reports out.
//!
//! Exit codes: 0 success, 1 validation/parse/configuration problem,
//! 2 singular barrier system, 3 comparison failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use barrier_walk::document::GraphDocument;
use barrier_walk::graph::{State, WalkGraph};
use barrier_walk::report::{AnalysisReport, Comparison, SimulationOutput, TimeSection};
use barrier_walk::sim::{simulate, SimConfig};
use barrier_walk::{demo, StartPosition};

#[derive(Parser)]
#[command(
    name = "barrier-walk",
    about = "Analyze and simulate random walks on graphs with multiple-function barriers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(clap::Args, Clone)]
struct SimArgs {
    /// Number of trajectories.
    #[arg(long, default_value_t = 100_000)]
    trajectories: u64,
    /// RNG seed; trajectory t draws from stream (seed, t).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Censor trajectories beyond this many steps.
    #[arg(long = "step-cap", default_value_t = 1_000_000)]
    step_cap: u64,
    /// Half-line depth at which first-passage resampling applies.
    #[arg(long, default_value_t = 128)]
    truncation: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph document against the model rules.
    Validate { path: PathBuf },
    /// Compute visit counts, absorption, and expected times.
    Analyze {
        path: PathBuf,
        /// States to evaluate, as interval:from:to:k or half:owner:label:k
        /// (comma separated or repeated).
        #[arg(long = "states", value_delimiter = ',')]
        states: Vec<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Estimate the same quantities by trajectory simulation.
    Simulate {
        path: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long = "states", value_delimiter = ',')]
        states: Vec<String>,
    },
    /// Run both and tabulate z-scores; exits 3 when any |z| > 5.
    Compare {
        path: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long = "states", value_delimiter = ',')]
        states: Vec<String>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Print a built-in document (remark2, infinite-star, cycle,
    /// two-mfb-line), or analyze it directly.
    Demo {
        name: String,
        #[arg(long)]
        analyze: bool,
    },
}

fn fail(message: impl std::fmt::Display, code: u8) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn load(path: &Path) -> Result<(WalkGraph, StartPosition), ExitCode> {
    let doc = GraphDocument::load(path).map_err(|e| fail(e, 1))?;
    let (graph, start) = doc.to_graph();
    let validation = graph.validate();
    if !validation.is_ok() {
        for violation in &validation.violations {
            eprintln!("invalid: {violation}");
        }
        return Err(ExitCode::from(1));
    }
    Ok((graph, start))
}

fn parse_states(graph: &WalkGraph, addresses: &[String]) -> Result<Vec<State>, ExitCode> {
    addresses
        .iter()
        .map(|addr| {
            let state = State::parse(addr).map_err(|e| fail(e, 1))?;
            graph.check_state(&state).map_err(|e| fail(e, 1))?;
            Ok(state)
        })
        .collect()
}

fn analyze(
    graph: &WalkGraph,
    start: StartPosition,
    states: &[State],
) -> Result<AnalysisReport, ExitCode> {
    AnalysisReport::compute(graph, start, states).map_err(|e| {
        let code = if e.is_singular() { 2 } else { 1 };
        fail(e, code)
    })
}

/// Run a closure inside a thread pool capped by BARRIER_WALK_THREADS,
/// when set.
fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("BARRIER_WALK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            pool.install(f)
        }
        None => f(),
    }
}

fn run_simulation(
    graph: &WalkGraph,
    start: StartPosition,
    args: &SimArgs,
    states: Vec<State>,
) -> Result<(barrier_walk::sim::SimReport, SimConfig), ExitCode> {
    let config = SimConfig {
        trajectories: args.trajectories,
        step_cap: args.step_cap,
        truncation_depth: args.truncation,
        seed: args.seed,
        tracked_states: states,
    };
    let report =
        with_thread_cap(|| simulate(graph, start, &config)).map_err(|e| fail(e, 1))?;
    Ok((report, config))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { path } => match load(&path) {
            Ok(_) => {
                println!("OK");
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Analyze {
            path,
            states,
            format,
        } => (|| {
            let (graph, start) = load(&path)?;
            let states = parse_states(&graph, &states)?;
            let report = analyze(&graph, start, &states)?;
            match format {
                Format::Json => println!("{}", report.to_json()),
                Format::Table => print!("{}", report.render_table()),
            }
            Ok(ExitCode::SUCCESS)
        })()
        .unwrap_or_else(|code| code),
        Command::Simulate { path, sim, states } => (|| {
            let (graph, start) = load(&path)?;
            let states = parse_states(&graph, &states)?;
            let (report, config) = run_simulation(&graph, start, &sim, states)?;
            let output = SimulationOutput::from_report(
                &report,
                config.seed,
                config.step_cap,
                config.truncation_depth,
            );
            println!("{}", output.to_json());
            Ok(ExitCode::SUCCESS)
        })()
        .unwrap_or_else(|code| code),
        Command::Compare {
            path,
            sim,
            states,
            format,
        } => (|| {
            let (graph, start) = load(&path)?;
            let states = parse_states(&graph, &states)?;
            let analysis = analyze(&graph, start, &states)?;
            let (report, _) = run_simulation(&graph, start, &sim, states)?;
            let start_time = match &analysis.time {
                TimeSection::Finite { start, .. } => Some(*start),
                TimeSection::Infinite { .. } => None,
            };
            let comparison = Comparison::build(&analysis, &report, start_time);
            match format {
                Format::Json => println!("{}", comparison.to_json()),
                Format::Table => print!("{}", comparison.render_table()),
            }
            if comparison.max_abs_z > 5.0 {
                Ok(ExitCode::from(3))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        })()
        .unwrap_or_else(|code| code),
        Command::Demo { name, analyze: run } => match demo::demo_document(&name) {
            Some(doc) => {
                if run {
                    let (graph, start) = doc.to_graph();
                    match analyze(&graph, start, &[]) {
                        Ok(report) => {
                            print!("{}", report.render_table());
                            ExitCode::SUCCESS
                        }
                        Err(code) => code,
                    }
                } else {
                    println!("{}", doc.to_json());
                    ExitCode::SUCCESS
                }
            }
            None => fail(
                format!(
                    "unknown demo {name:?}; available: {}",
                    demo::DEMO_NAMES.join(", ")
                ),
                1,
            ),
        },
    }
}
