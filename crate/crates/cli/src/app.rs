//! Command-line front end: `run`, `stats`, `replay` and `list`.

use std::io::Write;
use std::path::PathBuf;

use archerfish::constrained::{load_problem, PROBLEM_NAMES};
use archerfish::unconstrained::BuiltinFunction;
use clap::{Args, Parser, Subcommand};

use crate::analysis::store_stats;
use crate::config::{parse_angle, BudgetRule, ExperimentConfig};
use crate::error::CliError;
use crate::experiment::run_experiment;
use crate::fixtures::{replay_paper_stats, FIXTURES, REPLAYABLE};
use crate::store::{read_csv, write_csv, ResultRow};

#[derive(Debug, Parser)]
#[command(
    name = "archerfish",
    version,
    about = "Archerfish hunting optimizer experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded experiment and write CSV results.
    Run(RunArgs),
    /// Friedman and signed-rank decisions over a results CSV or a fixture.
    Stats(StatsArgs),
    /// Replay the published statistical decisions from the shipped fixtures.
    Replay(ReplayArgs),
    /// List problems and fixtures.
    List,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML experiment file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem name (repeatable).
    #[arg(long = "problem")]
    pub problems: Vec<String>,
    /// Dimension for benchmark functions (repeatable).
    #[arg(long = "dim")]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// `desk`, `full` or an evaluation count.
    #[arg(long)]
    pub budget: Option<String>,
    /// Swap angle, e.g. `pi/12` or radians (repeatable).
    #[arg(long = "theta")]
    pub thetas: Vec<String>,
    /// Attractiveness rate (repeatable).
    #[arg(long = "omega")]
    pub omegas: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Same as `--budget full`.
    #[arg(long)]
    pub paper_budgets: bool,
    /// Use the 5 x 5 theta/omega grid.
    #[arg(long)]
    pub full_grid: bool,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub stagnation_limit: Option<usize>,
    /// `as-printed` or `conventional`.
    #[arg(long)]
    pub welded_beam: Option<String>,
    /// Random shift and rotation of the benchmark functions.
    #[arg(long)]
    pub shifted: bool,
    /// Skip convergence CSVs.
    #[arg(long)]
    pub no_traces: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Results CSV written by `run`.
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    pub results: Option<PathBuf>,
    /// Fixture name, see `list`.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Friedman critical value (default: chi-square 0.95 quantile).
    #[arg(long)]
    pub critical: Option<f64>,
    /// Where to write `verdicts.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Fixture names; all replayable fixtures when empty.
    pub fixtures: Vec<String>,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_toml_file(p)?,
            None => ExperimentConfig::default(),
        };
        if self.full_grid {
            cfg = cfg.with_full_grid();
        }
        if !self.problems.is_empty() {
            cfg.problems = self.problems.clone();
        }
        if !self.dims.is_empty() {
            cfg.dims = self.dims.clone();
        }
        if self.reps.is_some() {
            cfg.reps = self.reps;
        }
        if let Some(b) = &self.budget {
            cfg.budget = BudgetRule::parse(b)?;
        }
        if self.paper_budgets {
            cfg.budget = BudgetRule::Full;
        }
        if !self.thetas.is_empty() {
            cfg.thetas = self
                .thetas
                .iter()
                .map(|t| parse_angle(t))
                .collect::<Result<_, _>>()?;
        }
        if !self.omegas.is_empty() {
            cfg.omegas = self.omegas.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if self.population.is_some() {
            cfg.population = self.population;
        }
        if self.stagnation_limit.is_some() {
            cfg.stagnation_limit = self.stagnation_limit;
        }
        if let Some(w) = &self.welded_beam {
            cfg.welded_beam =
                w.parse()
                    .map_err(|e: archerfish::constrained::ConstrainedError| {
                        CliError::Config(e.to_string())
                    })?;
        }
        if self.shifted {
            cfg.shifted = true;
        }
        if self.no_traces {
            cfg.traces = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.to_config()?;
    let store = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| run_experiment(&cfg))?,
        None => run_experiment(&cfg)?,
    };
    store.write(&cfg.out)?;
    let _ = writeln!(
        out,
        "{} runs, {} failed, written to {}",
        store.rows.len() + store.failures.len(),
        store.failures.len(),
        cfg.out.display()
    );
    for s in store.summaries() {
        let _ = writeln!(
            out,
            "{:<12} d={:<3} theta={:.4} omega={:<5} best={:e} median={:e} mean={:e} FR={} SR={}",
            s.problem, s.dim, s.theta, s.omega, s.best, s.median, s.mean, s.fr, s.sr
        );
    }
    if store.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::CellsFailed {
            count: store.failures.len(),
        })
    }
}

fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(name) = &args.fixture {
        let report = replay_paper_stats(name)?;
        let _ = write!(out, "{report}");
        return Ok(());
    }
    let path = args.results.as_ref().expect("clap requires one source");
    let rows: Vec<ResultRow> = read_csv(path).map_err(|e| match e {
        CliError::Io { .. } | CliError::Csv { .. } => CliError::Config(e.to_string()),
        other => other,
    })?;
    let stats = store_stats(&rows, args.critical, None).map_err(|e| match e {
        CliError::Stats(s) => CliError::Config(format!("cannot rank results: {s}")),
        other => other,
    })?;
    let _ = write!(out, "{stats}");
    if let Some(dir) = &args.out {
        write_csv(
            &dir.join("verdicts.csv"),
            &stats.verdicts,
            "comparison,k,w_plus,w_minus,w_min,critical,verdict",
        )?;
    }
    Ok(())
}

fn cmd_replay(args: &ReplayArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let names: Vec<String> = if args.fixtures.is_empty() {
        REPLAYABLE.iter().map(|s| s.to_string()).collect()
    } else {
        args.fixtures.clone()
    };
    for n in &names {
        let report = replay_paper_stats(n)?;
        let _ = write!(out, "{report}");
    }
    Ok(())
}

fn cmd_list(out: &mut dyn Write) {
    let _ = writeln!(
        out,
        "benchmark functions (any dimension, domain [-100, 100]^d):"
    );
    for f in BuiltinFunction::ALL {
        let _ = writeln!(out, "  {f}");
    }
    let _ = writeln!(out, "engineering problems:");
    for name in PROBLEM_NAMES {
        let p = load_problem(name).expect("listed problems load");
        let _ = writeln!(
            out,
            "  {name:<6} d={:<2} inequalities={:<2} f*={:e}",
            p.dims(),
            p.inequality_count(),
            p.f_star
        );
    }
    let _ = writeln!(out, "fixtures (replayable: {}):", REPLAYABLE.join(", "));
    for (name, _) in FIXTURES {
        let _ = writeln!(out, "  {name}");
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code: 0 success, 1 bad input, 2 runtime failure.
pub fn main_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Replay(a) => cmd_replay(a, out),
        Command::List => {
            cmd_list(out);
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
