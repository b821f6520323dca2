//! Experiment configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! seed = 7
//! out = "runs/demo"
//!
//! [problems]
//! names = ["sphere", "rastrigin", "RC15"]
//! dims = [5, 10]              # ignored by the engineering problems
//! shifted = false             # random shift and rotation per function and dimension
//!
//! [run]
//! reps = 10                   # default: 30 unconstrained, 25 constrained
//! budget = "desk"             # "desk", "full" or an evaluation count
//! population = 30             # default: floor(30 d^1.5)
//! stagnation_limit = 300      # default: d * population
//! welded_beam = "as-printed"  # or "conventional"
//! traces = true
//!
//! [grid]
//! theta = ["pi/12", "5pi/12"] # radians; "k pi / m" strings or numbers
//! omega = [0.01]
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use archerfish::constrained::{self, WeldedBeamVariant};
use archerfish::unconstrained::BuiltinFunction;
use serde::Deserialize;

use crate::error::CliError;

pub const GRID_THETAS: [&str; 5] = ["pi/12", "pi/6", "pi/4", "pi/3", "5pi/12"];
pub const GRID_OMEGAS: [f64; 5] = [0.01, 0.05, 0.25, 1.25, 6.25];

pub const UNCONSTRAINED_REPS: usize = 30;
pub const CONSTRAINED_REPS: usize = 25;
pub const CONSTRAINED_FULL_BUDGET: u64 = 200_000;

/// Evaluation budget per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetRule {
    /// `10 000 * d`.
    Desk,
    /// 50 000 / 1 000 000 / 3 000 000 / 10 000 000 for d = 5 / 10 / 15 / 20;
    /// 200 000 for the engineering problems.
    Full,
    Fixed(u64),
}

impl BudgetRule {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            other => other
                .replace('_', "")
                .parse::<u64>()
                .map(Self::Fixed)
                .map_err(|_| CliError::Config(format!("bad budget `{text}`"))),
        }
    }

    pub fn resolve(self, kind: ProblemKind, dims: usize) -> Result<u64, CliError> {
        match (self, kind) {
            (Self::Fixed(n), _) => Ok(n),
            (Self::Desk, _) => Ok(10_000 * dims as u64),
            (Self::Full, ProblemKind::Constrained) => Ok(CONSTRAINED_FULL_BUDGET),
            (Self::Full, ProblemKind::Unconstrained) => match dims {
                5 => Ok(50_000),
                10 => Ok(1_000_000),
                15 => Ok(3_000_000),
                20 => Ok(10_000_000),
                d => Err(CliError::Config(format!(
                    "no full-scale budget for d = {d} (use 5, 10, 15 or 20)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Unconstrained,
    Constrained,
}

pub fn problem_kind(name: &str) -> Result<ProblemKind, CliError> {
    if name.parse::<BuiltinFunction>().is_ok() {
        Ok(ProblemKind::Unconstrained)
    } else if constrained::load_problem(name).is_ok() {
        Ok(ProblemKind::Constrained)
    } else {
        Err(CliError::Config(format!("unknown problem `{name}`")))
    }
}

/// Parses `pi/12`, `5pi/12`, `5*pi/12`, `pi` or a plain number of radians.
pub fn parse_angle(text: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("bad angle `{text}`"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.to_ascii_lowercase().replace('π', "pi");
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let coef = t[..pos].trim_end_matches('*');
    let coef = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| bad())?
    };
    let rest = &t[pos + 2..];
    let denom = match rest.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(coef * PI / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problems: Vec<String>,
    pub dims: Vec<usize>,
    /// Wrap each benchmark function in a seeded random shift and rotation.
    pub shifted: bool,
    /// `None` picks 30 or 25 per problem kind.
    pub reps: Option<usize>,
    pub budget: BudgetRule,
    pub thetas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub population: Option<usize>,
    pub stagnation_limit: Option<usize>,
    pub welded_beam: WeldedBeamVariant,
    pub seed: u64,
    pub out: PathBuf,
    pub traces: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: vec!["sphere".into()],
            dims: vec![10],
            shifted: false,
            reps: None,
            budget: BudgetRule::Desk,
            thetas: vec![PI / 12.0],
            omegas: vec![0.01],
            population: None,
            stagnation_limit: None,
            welded_beam: WeldedBeamVariant::AsPrinted,
            seed: 0,
            out: PathBuf::from("results"),
            traces: true,
        }
    }
}

impl ExperimentConfig {
    /// `(theta, omega)` pairs, theta-major.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.thetas
            .iter()
            .flat_map(|&t| self.omegas.iter().map(move |&o| (t, o)))
            .collect()
    }

    pub fn reps_for(&self, kind: ProblemKind) -> usize {
        self.reps.unwrap_or(match kind {
            ProblemKind::Unconstrained => UNCONSTRAINED_REPS,
            ProblemKind::Constrained => CONSTRAINED_REPS,
        })
    }

    pub fn with_full_grid(mut self) -> Self {
        self.thetas = GRID_THETAS
            .iter()
            .map(|t| parse_angle(t).unwrap())
            .collect();
        self.omegas = GRID_OMEGAS.to_vec();
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.problems.is_empty() {
            return fail("no problems selected".into());
        }
        for p in &self.problems {
            let kind = problem_kind(p)?;
            if kind == ProblemKind::Unconstrained && self.dims.is_empty() {
                return fail(format!("`{p}` needs at least one dimension"));
            }
        }
        if self.dims.contains(&0) {
            return fail("dimensions must be positive".into());
        }
        if self.reps == Some(0) {
            return fail("repetitions must be >= 1".into());
        }
        if self.thetas.is_empty() || self.omegas.is_empty() {
            return fail("parameter grid is empty".into());
        }
        if let Some(t) = self.thetas.iter().find(|t| !(**t > 0.0 && **t < PI / 2.0)) {
            return fail(format!("theta {t} outside (0, pi/2)"));
        }
        if let Some(o) = self.omegas.iter().find(|o| !(**o > 0.0 && o.is_finite())) {
            return fail(format!("omega {o} must be positive"));
        }
        if self.population.is_some_and(|n| n < 2) {
            return fail("population must be >= 2".into());
        }
        if self.stagnation_limit == Some(0) {
            return fail("stagnation limit must be positive".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let file: FileConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let mut cfg = Self::default();
        file.apply(&mut cfg)?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BudgetValue {
    Count(u64),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AngleValue {
    Radians(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    names: Option<Vec<String>>,
    dims: Option<Vec<usize>>,
    shifted: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    reps: Option<usize>,
    budget: Option<BudgetValue>,
    population: Option<usize>,
    stagnation_limit: Option<usize>,
    welded_beam: Option<String>,
    traces: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    theta: Option<Vec<AngleValue>>,
    omega: Option<Vec<f64>>,
    /// `true` selects the full 5 x 5 grid.
    full: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(default)]
    problems: ProblemSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    grid: GridSection,
}

impl FileConfig {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.out {
            cfg.out = o;
        }
        if let Some(n) = self.problems.names {
            cfg.problems = n;
        }
        if let Some(d) = self.problems.dims {
            cfg.dims = d;
        }
        if let Some(s) = self.problems.shifted {
            cfg.shifted = s;
        }
        cfg.reps = self.run.reps.or(cfg.reps);
        if let Some(b) = self.run.budget {
            cfg.budget = match b {
                BudgetValue::Count(n) => BudgetRule::Fixed(n),
                BudgetValue::Name(s) => BudgetRule::parse(&s)?,
            };
        }
        cfg.population = self.run.population.or(cfg.population);
        cfg.stagnation_limit = self.run.stagnation_limit.or(cfg.stagnation_limit);
        if let Some(w) = self.run.welded_beam {
            cfg.welded_beam = w
                .parse()
                .map_err(|e: constrained::ConstrainedError| CliError::Config(e.to_string()))?;
        }
        if let Some(t) = self.run.traces {
            cfg.traces = t;
        }
        if self.grid.full == Some(true) {
            *cfg = std::mem::take(cfg).with_full_grid();
        }
        if let Some(ts) = self.grid.theta {
            cfg.thetas = ts
                .into_iter()
                .map(|t| match t {
                    AngleValue::Radians(v) => Ok(v),
                    AngleValue::Text(s) => parse_angle(&s),
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(o) = self.grid.omega {
            cfg.omegas = o;
        }
        Ok(())
    }
}
