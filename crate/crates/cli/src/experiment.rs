//! Seeded batch runs over problems x dimensions x parameter grid x repetitions.

use std::path::{Path, PathBuf};

use archerfish::aho::{run, AhoParams};
use archerfish::constrained::{load_problem_with, ConstrainedProblem};
use archerfish::unconstrained::{
    builtin_problem, transform, BuiltinFunction, ShiftRotate, UnconstrainedProblem,
};
use archerfish::{Evaluation, Problem, RandomStream};
use rayon::prelude::*;

use crate::config::{problem_kind, ExperimentConfig, ProblemKind};
use crate::error::CliError;
use crate::seeds::derive_seed;
use crate::store::{
    summary_rows, trace_file_name, trace_rows, write_csv, FailureRow, ResultRow, SummaryRow,
    TraceRow, FAILURE_HEADER, RESULTS_HEADER, SUMMARY_HEADER, TRACE_HEADER,
};

/// One run to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub problem: String,
    pub dim: usize,
    pub config: usize,
    pub theta: f64,
    pub omega: f64,
    pub rep: usize,
    pub seed: u64,
    pub budget: u64,
}

enum Instance {
    Unconstrained(UnconstrainedProblem),
    Constrained(ConstrainedProblem),
}

impl Instance {
    fn problem(&self) -> &(dyn Problem + Sync) {
        match self {
            Self::Unconstrained(p) => p,
            Self::Constrained(p) => p,
        }
    }

    fn error(&self, e: &Evaluation) -> f64 {
        match self {
            Self::Unconstrained(p) => p.error(e.value),
            Self::Constrained(p) => p.error(e.value),
        }
    }
}

/// Problem instances per `(name, dim)`, built once per experiment.
struct Catalog(Vec<((String, usize), Instance)>);

impl Catalog {
    fn get(&self, name: &str, dim: usize) -> &Instance {
        &self
            .0
            .iter()
            .find(|((n, d), _)| n == name && *d == dim)
            .expect("every planned cell has an instance")
            .1
    }
}

fn build_catalog(cfg: &ExperimentConfig) -> Result<Catalog, CliError> {
    let mut out = Vec::new();
    for name in &cfg.problems {
        match problem_kind(name)? {
            ProblemKind::Constrained => {
                let p = load_problem_with(name, cfg.welded_beam)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                out.push(((name.clone(), p.dims()), Instance::Constrained(p)));
            }
            ProblemKind::Unconstrained => {
                let f: BuiltinFunction =
                    name.parse()
                        .map_err(|e: archerfish::unconstrained::UnconstrainedError| {
                            CliError::Config(e.to_string())
                        })?;
                for &d in &cfg.dims {
                    let mut p = builtin_problem(f, d);
                    if cfg.shifted {
                        let seed = derive_seed(cfg.seed, name, d, usize::MAX, usize::MAX);
                        let t = ShiftRotate::random(d, 80.0, &mut RandomStream::new(seed));
                        p = transform(&p, &t).map_err(|e| CliError::Config(e.to_string()))?;
                    }
                    out.push(((name.clone(), d), Instance::Unconstrained(p)));
                }
            }
        }
    }
    Ok(Catalog(out))
}

/// Cells in problem, dimension, config, repetition order. Engineering
/// problems use their own dimension and ignore `dims`.
pub fn plan(cfg: &ExperimentConfig) -> Result<Vec<Cell>, CliError> {
    cfg.validate()?;
    let catalog = build_catalog(cfg)?;
    plan_with(cfg, &catalog)
}

fn plan_with(cfg: &ExperimentConfig, catalog: &Catalog) -> Result<Vec<Cell>, CliError> {
    let grid = cfg.grid();
    let mut cells = Vec::new();
    for ((name, dim), _) in &catalog.0 {
        let kind = problem_kind(name)?;
        let budget = cfg.budget.resolve(kind, *dim)?;
        for (config, &(theta, omega)) in grid.iter().enumerate() {
            for rep in 0..cfg.reps_for(kind) {
                cells.push(Cell {
                    problem: name.clone(),
                    dim: *dim,
                    config,
                    theta,
                    omega,
                    rep,
                    seed: derive_seed(cfg.seed, name, *dim, config, rep),
                    budget,
                });
            }
        }
    }
    Ok(cells)
}

/// Everything an experiment produced. Rows and traces follow plan order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsStore {
    pub rows: Vec<ResultRow>,
    pub traces: Vec<(PathBuf, Vec<TraceRow>)>,
    pub failures: Vec<FailureRow>,
}

impl ResultsStore {
    pub fn summaries(&self) -> Vec<SummaryRow> {
        summary_rows(&self.rows)
    }

    /// Writes `results.csv`, `summary.csv`, `failures.csv` and, when traces
    /// were kept, `convergence/*.csv`.
    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        write_csv(&out.join("results.csv"), &self.rows, RESULTS_HEADER)?;
        write_csv(&out.join("summary.csv"), &self.summaries(), SUMMARY_HEADER)?;
        write_csv(&out.join("failures.csv"), &self.failures, FAILURE_HEADER)?;
        for (name, rows) in &self.traces {
            write_csv(&out.join("convergence").join(name), rows, TRACE_HEADER)?;
        }
        Ok(())
    }
}

enum Outcome {
    Done(ResultRow, Option<Vec<TraceRow>>),
    Failed(FailureRow),
}

fn execute(cfg: &ExperimentConfig, catalog: &Catalog, cell: &Cell) -> Outcome {
    let inst = catalog.get(&cell.problem, cell.dim);
    let mut params = AhoParams::for_dimension(cell.dim)
        .swap_angle(cell.theta)
        .attractiveness(cell.omega)
        .budget(cell.budget)
        .seed(cell.seed);
    if let Some(n) = cfg.population {
        params = params.population(n);
    }
    if let Some(l) = cfg.stagnation_limit {
        params = params.stagnation_limit(l);
    }
    match run(inst.problem(), &params) {
        Ok(record) => Outcome::Done(
            ResultRow {
                problem: cell.problem.clone(),
                dim: cell.dim,
                theta: cell.theta,
                omega: cell.omega,
                seed: cell.seed,
                fes: record.fes,
                best_error: inst.error(&record.best),
                feasible: record.best.is_feasible(),
                mv: record.best.violation,
            },
            cfg.traces.then(|| trace_rows(&record.trace)),
        ),
        Err(e) => Outcome::Failed(FailureRow {
            problem: cell.problem.clone(),
            dim: cell.dim,
            theta: cell.theta,
            omega: cell.omega,
            seed: cell.seed,
            error: e.to_string(),
        }),
    }
}

/// Runs every planned cell on the current rayon pool. Failed cells are
/// recorded and the batch continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsStore, CliError> {
    cfg.validate()?;
    let catalog = build_catalog(cfg)?;
    let cells = plan_with(cfg, &catalog)?;
    let outcomes: Vec<Outcome> = cells
        .par_iter()
        .map(|cell| execute(cfg, &catalog, cell))
        .collect();
    let mut store = ResultsStore::default();
    for (cell, outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Outcome::Done(row, trace) => {
                store.rows.push(row);
                if let Some(t) = trace {
                    let name = trace_file_name(&cell.problem, cell.dim, cell.config, cell.rep);
                    store.traces.push((name, t));
                }
            }
            Outcome::Failed(f) => store.failures.push(f),
        }
    }
    Ok(store)
}
