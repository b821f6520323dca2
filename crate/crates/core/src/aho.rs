//! The archerfish hunting optimizer.
//!
//! Each sweep visits every archerfish once. A random perceiving angle decides
//! whether it *shoots* (exploration: its prey attracts every worse member of
//! the flock) or *jumps* (exploitation: only the jumper moves toward its own
//! prey). Agents that keep failing to improve are relocated by a Lévy flight.
//!
//! Comparisons go through [`Evaluation::compare`], so constrained problems are
//! handled with feasibility rules and unconstrained ones by plain objective
//! value.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::space::{
    clamp_to_space, evaluate, sample_initial_position, Agent, CoreError, EvalCounter, Evaluation,
    Problem, RandomStream, SearchSpace,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AhoError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Tunables of the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct AhoParams {
    /// Flock size `N`.
    pub population: usize,
    /// Swap angle `theta` in radians, strictly inside `(0, pi/2)`.
    pub swap_angle: f64,
    /// Attractiveness rate `omega`.
    pub attractiveness: f64,
    /// Lévy power-law index `beta`, in `(1, 2]`.
    pub levy_beta: f64,
    /// Non-improving decisions tolerated before a Lévy escape. `None` means
    /// `dims * population`.
    pub stagnation_limit: Option<usize>,
    /// Total objective evaluations allowed.
    pub budget: u64,
    pub seed: u64,
    /// Evaluations between convergence samples. `None` means `budget / 100`.
    pub trace_stride: Option<u64>,
}

/// `floor(30 * d^1.5)`.
pub fn default_population(dims: usize) -> usize {
    (30.0 * (dims as f64).powf(1.5)).floor() as usize
}

impl AhoParams {
    /// Defaults for a `dims`-dimensional problem: `N = floor(30 d^1.5)`,
    /// `theta = pi/12`, `omega = 0.01`, `beta = 1.5`, 10 000 evaluations per
    /// dimension.
    pub fn for_dimension(dims: usize) -> Self {
        Self {
            population: default_population(dims).max(2),
            swap_angle: PI / 12.0,
            attractiveness: 0.01,
            levy_beta: 1.5,
            stagnation_limit: None,
            budget: 10_000 * dims as u64,
            seed: 0,
            trace_stride: None,
        }
    }

    pub fn population(mut self, n: usize) -> Self {
        self.population = n;
        self
    }

    pub fn swap_angle(mut self, theta: f64) -> Self {
        self.swap_angle = theta;
        self
    }

    pub fn attractiveness(mut self, omega: f64) -> Self {
        self.attractiveness = omega;
        self
    }

    pub fn levy_beta(mut self, beta: f64) -> Self {
        self.levy_beta = beta;
        self
    }

    pub fn stagnation_limit(mut self, limit: usize) -> Self {
        self.stagnation_limit = Some(limit);
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn trace_stride(mut self, stride: u64) -> Self {
        self.trace_stride = Some(stride);
        self
    }

    pub fn effective_stagnation_limit(&self, dims: usize) -> usize {
        self.stagnation_limit
            .unwrap_or(dims * self.population)
            .max(1)
    }

    pub fn effective_trace_stride(&self) -> u64 {
        self.trace_stride.unwrap_or(self.budget / 100).max(1)
    }

    pub fn validate(&self) -> Result<(), AhoError> {
        let invalid = |msg: String| Err(AhoError::InvalidParams(msg));
        if self.population < 2 {
            return invalid(format!("population must be >= 2, got {}", self.population));
        }
        if !(self.swap_angle > 0.0 && self.swap_angle < PI / 2.0) {
            return invalid(format!(
                "swap angle must lie in (0, pi/2), got {}",
                self.swap_angle
            ));
        }
        if !(self.attractiveness > 0.0 && self.attractiveness.is_finite()) {
            return invalid(format!(
                "attractiveness must be positive, got {}",
                self.attractiveness
            ));
        }
        if !(self.levy_beta > 1.0 && self.levy_beta <= 2.0) {
            return invalid(format!(
                "levy beta must lie in (1, 2], got {}",
                self.levy_beta
            ));
        }
        if self.stagnation_limit == Some(0) {
            return invalid("stagnation limit must be positive".into());
        }
        if self.budget < self.population as u64 {
            return invalid(format!(
                "budget {} cannot cover the initial flock of {}",
                self.budget, self.population
            ));
        }
        Ok(())
    }
}

/// `theta0 = (-1)^b * alpha * pi`.
pub fn perceiving_angle(negative: bool, alpha: f64) -> f64 {
    if negative {
        -alpha * PI
    } else {
        alpha * PI
    }
}

/// Draws `b ~ Bernoulli(0.5)` then `alpha ~ U[0, 1)`.
pub fn draw_perceiving_angle(rng: &mut RandomStream) -> f64 {
    let negative = rng.bernoulli(0.5);
    perceiving_angle(negative, rng.uniform())
}

/// True when `|theta0|` falls in `]0, theta[ ∪ ]pi - theta, pi[`.
pub fn is_shooting_phase(theta0: f64, theta: f64) -> bool {
    let a = theta0.abs();
    (a > 0.0 && a < theta) || (a > PI - theta && a < PI)
}

/// Prey of a shot, before clamping: `pos + e_j * omega * sin(2 theta0) + eps`.
pub fn shooting_prey_unclamped(
    pos: &[f64],
    j: usize,
    theta0: f64,
    omega: f64,
    eps: &[f64],
) -> Vec<f64> {
    let mut prey: Vec<f64> = pos.iter().zip(eps).map(|(x, e)| x + e).collect();
    prey[j] += omega * (2.0 * theta0).sin();
    prey
}

/// Prey of a jump, before clamping:
/// `pos + e_j * omega * sin(2 theta0) + e_k * omega * sin^2(theta0) + eps`.
pub fn jumping_prey_unclamped(
    pos: &[f64],
    j: usize,
    k: usize,
    theta0: f64,
    omega: f64,
    eps: &[f64],
) -> Vec<f64> {
    let mut prey = shooting_prey_unclamped(pos, j, theta0, omega, eps);
    prey[k] += omega * theta0.sin().powi(2);
    prey
}

/// Refraction noise: one `U[0, 1)` draw per component.
fn draw_refraction(dims: usize, rng: &mut RandomStream) -> Vec<f64> {
    (0..dims).map(|_| rng.uniform()).collect()
}

pub fn shooting_prey_position(
    shooter: &Agent,
    theta0: f64,
    omega: f64,
    space: &SearchSpace,
    rng: &mut RandomStream,
) -> Result<Vec<f64>, CoreError> {
    let d = space.dims();
    let j = rng.uniform_int(0, d - 1);
    let eps = draw_refraction(d, rng);
    clamp_to_space(
        &shooting_prey_unclamped(&shooter.position, j, theta0, omega, &eps),
        space,
    )
}

/// Fails with [`CoreError::DimensionTooSmall`] in one dimension, where two
/// distinct coordinates cannot be picked; callers fall back to
/// [`shooting_prey_position`], which applies only the `sin(2 theta0)` term.
pub fn jumping_prey_position(
    jumper: &Agent,
    theta0: f64,
    omega: f64,
    space: &SearchSpace,
    rng: &mut RandomStream,
) -> Result<Vec<f64>, CoreError> {
    let d = space.dims();
    if d < 2 {
        return Err(CoreError::DimensionTooSmall { dims: d });
    }
    let (j, k) = draw_distinct_pair(d, rng);
    let eps = draw_refraction(d, rng);
    clamp_to_space(
        &jumping_prey_unclamped(&jumper.position, j, k, theta0, omega, &eps),
        space,
    )
}

/// Uniform over ordered pairs `(j, k)` with `j != k`.
fn draw_distinct_pair(d: usize, rng: &mut RandomStream) -> (usize, usize) {
    let j = rng.uniform_int(0, d - 1);
    let mut k = rng.uniform_int(0, d - 2);
    if k >= j {
        k += 1;
    }
    (j, k)
}

/// `pos + exp(-|prey - pos|^2) * (prey - pos)`, before clamping.
pub fn attraction_step(pos: &[f64], prey: &[f64]) -> Vec<f64> {
    let r2: f64 = pos.iter().zip(prey).map(|(x, p)| (p - x).powi(2)).sum();
    let weight = (-r2).exp();
    pos.iter()
        .zip(prey)
        .map(|(x, p)| x + weight * (p - x))
        .collect()
}

pub fn attraction_move(
    mover: &Agent,
    prey: &[f64],
    space: &SearchSpace,
) -> Result<Vec<f64>, CoreError> {
    clamp_to_space(&attraction_step(&mover.position, prey), space)
}

/// Mantegna scale for Lévy steps:
/// `(Γ(1+β) sin(πβ/2) / (Γ((1+β)/2) β 2^((β-1)/2)))^(1/β)`.
///
/// Gamma values come from `statrs` (Lanczos approximation, relative error well
/// below 1e-12 on this range).
pub fn levy_sigma(beta: f64) -> f64 {
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    // sin(pi) rounds to ~1e-16 rather than 0 at beta = 2.
    (num / den).max(0.0).powf(1.0 / beta)
}

/// `pos + alpha * [u_j / |v_j|^(1/beta)]`, before clamping.
pub fn levy_step_unclamped(pos: &[f64], alpha: f64, u: &[f64], v: &[f64], beta: f64) -> Vec<f64> {
    pos.iter()
        .zip(u.iter().zip(v))
        .map(|(x, (u, v))| x + alpha * u / v.abs().powf(1.0 / beta))
        .collect()
}

/// Relocates a stagnating agent with a Lévy flight. The caller resets the
/// stagnation counter.
pub fn levy_escape(
    agent: &Agent,
    beta: f64,
    space: &SearchSpace,
    rng: &mut RandomStream,
) -> Result<Vec<f64>, CoreError> {
    let sigma = levy_sigma(beta);
    let d = space.dims();
    let alpha = rng.uniform();
    let mut u = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    for _ in 0..d {
        u.push(sigma * rng.normal());
        v.push(rng.normal());
    }
    clamp_to_space(
        &levy_step_unclamped(&agent.position, alpha, &u, &v, beta),
        space,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub fes: u64,
    pub best: Evaluation,
}

/// Incumbent best sampled every `stride` evaluations (plus the final count).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub samples: Vec<TracePoint>,
}

impl ConvergenceTrace {
    fn push(&mut self, fes: u64, best: Evaluation) {
        if self.samples.last().is_some_and(|p| p.fes >= fes) {
            return;
        }
        self.samples.push(TracePoint { fes, best });
    }

    /// FE counts strictly increase and the best never gets worse.
    pub fn is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[0].fes < w[1].fes && !w[0].best.is_better_than(&w[1].best))
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub best: Evaluation,
    pub best_position: Vec<f64>,
    pub fes: u64,
    pub iterations: u64,
    pub trace: ConvergenceTrace,
}

impl RunRecord {
    pub fn is_feasible(&self) -> bool {
        self.best.is_feasible()
    }
}

/// Loop state of a run.
#[derive(Debug, Clone)]
pub struct AhoState {
    pub flock: Vec<Agent>,
    pub best: Agent,
    pub iteration: u64,
    pub counter: EvalCounter,
    pub rng: RandomStream,
    pub trace: ConvergenceTrace,
}

/// Incremental driver; [`run`] is the one-shot wrapper.
pub struct Aho<'p, P: Problem + ?Sized> {
    problem: &'p P,
    params: AhoParams,
    stagnation_limit: usize,
    stride: u64,
    state: AhoState,
}

impl<'p, P: Problem + ?Sized> Aho<'p, P> {
    /// Validates `params` and spends `N` evaluations on the initial flock.
    pub fn new(problem: &'p P, params: AhoParams) -> Result<Self, AhoError> {
        params.validate()?;
        let space = problem.space();
        let mut rng = RandomStream::new(params.seed);
        let mut counter = EvalCounter::new(params.budget);
        let mut flock = Vec::with_capacity(params.population);
        let mut trace = ConvergenceTrace::default();
        let stride = params.effective_trace_stride();
        let mut best: Option<Agent> = None;
        for _ in 0..params.population {
            let position = sample_initial_position(space, &mut rng);
            let eval = evaluate(problem, &position, &mut counter)?;
            let agent = Agent::new(position, eval);
            if best.as_ref().is_none_or(|b| eval.is_better_than(&b.eval)) {
                best = Some(agent.clone());
            }
            if counter.used().is_multiple_of(stride) {
                trace.push(counter.used(), best.as_ref().map(|b| b.eval).unwrap());
            }
            flock.push(agent);
        }
        let best = best.expect("population >= 2");
        Ok(Self {
            problem,
            stagnation_limit: params.effective_stagnation_limit(space.dims()),
            stride,
            params,
            state: AhoState {
                flock,
                best,
                iteration: 0,
                counter,
                rng,
                trace,
            },
        })
    }

    pub fn state(&self) -> &AhoState {
        &self.state
    }

    pub fn params(&self) -> &AhoParams {
        &self.params
    }

    pub fn is_exhausted(&self) -> bool {
        self.state.counter.is_exhausted()
    }

    fn space(&self) -> &'p SearchSpace {
        self.problem.space()
    }

    /// Evaluates `x`, updating the incumbent and the trace.
    fn observe(&mut self, x: &[f64]) -> Result<Evaluation, CoreError> {
        let eval = evaluate(self.problem, x, &mut self.state.counter)?;
        if eval.is_better_than(&self.state.best.eval) {
            self.state.best = Agent::new(x.to_vec(), eval);
        }
        let used = self.state.counter.used();
        if used.is_multiple_of(self.stride) {
            self.state.trace.push(used, self.state.best.eval);
        }
        Ok(eval)
    }

    /// Non-improving decision for agent `idx`; fires a Lévy escape once the
    /// limit is reached.
    fn stagnate(&mut self, idx: usize) -> Result<(), CoreError> {
        self.state.flock[idx].stagnation += 1;
        if self.state.flock[idx].stagnation < self.stagnation_limit {
            return Ok(());
        }
        let position = levy_escape(
            &self.state.flock[idx],
            self.params.levy_beta,
            self.space(),
            &mut self.state.rng,
        )?;
        let eval = self.observe(&position)?;
        let agent = &mut self.state.flock[idx];
        agent.position = position;
        agent.eval = eval;
        agent.stagnation = 0;
        Ok(())
    }

    /// Moves agent `idx` toward `prey` and re-evaluates it. The move is kept
    /// even when the new value is not better; that only counts as stagnation.
    fn pursue(&mut self, idx: usize, prey: &[f64]) -> Result<(), CoreError> {
        let position = attraction_move(&self.state.flock[idx], prey, self.space())?;
        let eval = self.observe(&position)?;
        let agent = &mut self.state.flock[idx];
        let improved = eval.is_better_than(&agent.eval);
        agent.position = position;
        agent.eval = eval;
        if improved {
            agent.stagnation = 0;
            Ok(())
        } else {
            self.stagnate(idx)
        }
    }

    fn react(&mut self, idx: usize, prey: &[f64], prey_eval: &Evaluation) -> Result<(), CoreError> {
        if prey_eval.is_better_than(&self.state.flock[idx].eval) {
            self.pursue(idx, prey)
        } else {
            self.stagnate(idx)
        }
    }

    /// One sweep over the flock. Returns `BudgetExhausted` when the budget
    /// runs out, possibly partway through; the state stays consistent.
    pub fn step(&mut self) -> Result<(), CoreError> {
        if self.is_exhausted() {
            return Err(CoreError::BudgetExhausted {
                budget: self.state.counter.budget(),
            });
        }
        let theta = self.params.swap_angle;
        let omega = self.params.attractiveness;
        let space = self.space();
        for i in 0..self.state.flock.len() {
            let theta0 = draw_perceiving_angle(&mut self.state.rng);
            if is_shooting_phase(theta0, theta) {
                let prey = shooting_prey_position(
                    &self.state.flock[i],
                    theta0,
                    omega,
                    space,
                    &mut self.state.rng,
                )?;
                let prey_eval = self.observe(&prey)?;
                for j in 0..self.state.flock.len() {
                    self.react(j, &prey, &prey_eval)?;
                }
            } else {
                let prey = match jumping_prey_position(
                    &self.state.flock[i],
                    theta0,
                    omega,
                    space,
                    &mut self.state.rng,
                ) {
                    Err(CoreError::DimensionTooSmall { .. }) => shooting_prey_position(
                        &self.state.flock[i],
                        theta0,
                        omega,
                        space,
                        &mut self.state.rng,
                    )?,
                    other => other?,
                };
                let prey_eval = self.observe(&prey)?;
                self.react(i, &prey, &prey_eval)?;
            }
        }
        self.state.iteration += 1;
        Ok(())
    }

    /// Steps until the budget is spent.
    pub fn run_to_completion(mut self) -> Result<RunRecord, AhoError> {
        loop {
            match self.step() {
                Ok(()) => {}
                Err(CoreError::BudgetExhausted { .. }) => break,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(self.into_record())
    }

    pub fn into_record(mut self) -> RunRecord {
        let used = self.state.counter.used();
        self.state.trace.push(used, self.state.best.eval);
        RunRecord {
            seed: self.params.seed,
            best: self.state.best.eval,
            best_position: self.state.best.position,
            fes: used,
            iterations: self.state.iteration,
            trace: self.state.trace,
        }
    }
}

/// Initialises a flock and iterates until the evaluation budget is spent.
pub fn run<P: Problem + ?Sized>(problem: &P, params: &AhoParams) -> Result<RunRecord, AhoError> {
    Aho::new(problem, params.clone())?.run_to_completion()
}
