//! Command-line front end: solve built-in or user-supplied parameterized
//! systems by monodromy and emit solution JSON or benchmark CSVs.

mod bench;
mod catalog;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use monodromy_core::ProblemInstance;

#[derive(Parser)]
#[command(
    name = "monodromy",
    about = "Witness sets of parameterized polynomial systems via monodromy",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the catalog of built-in problems.
    List,
    /// Run one collection and write a solution report as JSON.
    Solve(SolveArgs),
    /// Run repeated collections and write per-run plus aggregate CSV rows.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Standard,
    Decomposable,
    /// Both modes back to back; benchmark runs only.
    Both,
}

impl Mode {
    fn label(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Decomposable => "decomposable",
            Mode::Both => "both",
        }
    }
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Built-in problem: power, cyclic, gaussian, mixedvol, or a compact
    /// selector like cyclic5.
    #[arg(long, conflicts_with = "input")]
    problem: Option<String>,

    /// Size parameter for power and cyclic.
    #[arg(long)]
    n: Option<u32>,

    /// Component count for gaussian.
    #[arg(long)]
    k: Option<u32>,

    /// JSON problem file instead of a built-in.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    #[arg(long, value_enum, default_value = "standard")]
    pub mode: Mode,

    /// Seed for loop generation and problem instantiation; the environment
    /// variable supplies the default and the flag wins.
    #[arg(long, env = "MONODROMY_SEED", default_value_t = 0)]
    pub rng_seed: u64,

    /// Stop after this many loops.
    #[arg(long)]
    pub max_loops: Option<usize>,

    /// Stop after this many consecutive loops without growth.
    #[arg(long)]
    pub stabilization: Option<usize>,

    /// Stop once this many points (standard) or classes (decomposable) are
    /// collected. Defaults to the problem's known count when there is one.
    #[arg(long)]
    pub target_count: Option<usize>,

    /// Point identification tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Newton corrector tolerance for tracking and endpoint refinement.
    #[arg(long, default_value_t = 1e-9)]
    pub tracker_tol: f64,

    /// Cap on tracker worker threads; defaults to the core count.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,

    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the run's stats row as CSV.
    #[arg(long)]
    stats_csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,

    /// Number of repeated runs; run i uses rng-seed + i.
    #[arg(long, default_value_t = 10)]
    repeats: usize,

    /// Write the CSV here instead of standard output.
    #[arg(long)]
    stats_csv: Option<PathBuf>,
}

impl RunArgs {
    /// Instantiate the configured problem. Instance randomness comes from
    /// the given generator so a fixed seed fixes the whole run.
    fn instantiate(&self, rng: &mut ChaCha8Rng) -> Result<ProblemInstance> {
        let p = &self.problem;
        match (&p.problem, &p.input) {
            (Some(selector), None) => catalog::instantiate(selector, p.n, p.k, rng),
            (None, Some(path)) => monodromy_core::io::parse_problem_file(path, rng)
                .with_context(|| format!("loading {}", path.display())),
            (None, None) => bail!("pass either --problem or --input"),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing the worker pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            print!("{}", catalog::listing());
            Ok(())
        }
        Command::Solve(args) => run_solve(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<()> {
    init_threads(args.run.threads)?;
    if args.run.mode == Mode::Both {
        bail!("--mode both is for bench; solve runs one mode");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.run.rng_seed);
    let instance = args.run.instantiate(&mut rng)?;
    let report = runner::solve(&instance, &args.run, args.run.rng_seed, &mut rng)?;

    let json = serde_json::to_string_pretty(&report).context("serializing the report")?;
    match &args.out {
        Some(path) => std::fs::write(path, json.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.stats_csv {
        let mut csv = monodromy_core::RunStats::csv_header().to_string();
        csv.push('\n');
        csv.push_str(&report.stats.csv_row());
        csv.push('\n');
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    init_threads(args.run.threads)?;
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let csv = bench::run(&args.run, args.repeats)?;
    match &args.stats_csv {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}
