//! Search-space geometry, agents, evaluation bookkeeping and random draws.
//!
//! Everything here is shared by the optimizer and the problem modules. A
//! [`RandomStream`] is the single source of randomness for a run: equal seeds
//! give identical draw sequences on every platform (ChaCha8 core).

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("evaluation budget of {budget} function evaluations exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("component {index} is not finite")]
    NonFiniteComponent { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid bounds for dimension {index}: lower must be strictly below upper")]
    InvalidBounds { index: usize },
    #[error("search space must have at least one dimension")]
    EmptySpace,
    #[error("operator needs at least 2 dimensions, got {dims}")]
    DimensionTooSmall { dims: usize },
}

/// Axis-aligned box `[lower, upper]` the search is confined to.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, CoreError> {
        if lower.is_empty() {
            return Err(CoreError::EmptySpace);
        }
        if lower.len() != upper.len() {
            return Err(CoreError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (index, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CoreError::InvalidBounds { index });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The hypercube `[lo, hi]^dims`.
    pub fn cube(dims: usize, lo: f64, hi: f64) -> Result<Self, CoreError> {
        Self::new(vec![lo; dims], vec![hi; dims])
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }
}

/// Objective value paired with its mean constraint violation.
///
/// Unconstrained problems always report a violation of zero, in which case
/// the ordering reduces to comparing objective values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub violation: f64,
}

impl Evaluation {
    pub fn feasible(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    /// NaN objectives are mapped to `+inf` so that every evaluation is
    /// comparable.
    pub fn new(value: f64, violation: f64) -> Self {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        let violation = if violation.is_nan() {
            f64::INFINITY
        } else {
            violation.max(0.0)
        };
        Self { value, violation }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }

    /// Feasibility-rule ordering: feasible before infeasible, feasible pairs
    /// by objective, infeasible pairs by violation. `Less` means better.
    pub fn compare(&self, other: &Self) -> Ordering {
        match (self.is_feasible(), other.is_feasible()) {
            (true, true) => cmp_f64(self.value, other.value),
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => cmp_f64(self.violation, other.violation),
        }
    }

    pub fn is_better_than(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Less
    }
}

// Values are NaN-free by construction; -0.0 and 0.0 compare equal.
fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Something the optimizer can minimise.
pub trait Problem {
    fn space(&self) -> &SearchSpace;
    fn evaluate(&self, x: &[f64]) -> Evaluation;
}

/// One member of the flock.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub position: Vec<f64>,
    pub eval: Evaluation,
    /// Consecutive non-improving decisions.
    pub stagnation: usize,
}

impl Agent {
    pub fn new(position: Vec<f64>, eval: Evaluation) -> Self {
        Self {
            position,
            eval,
            stagnation: 0,
        }
    }

    pub fn value(&self) -> f64 {
        self.eval.value
    }
}

/// Counts objective evaluations against a fixed budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalCounter {
    used: u64,
    budget: u64,
}

impl EvalCounter {
    pub fn new(budget: u64) -> Self {
        Self { used: 0, budget }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn consume(&mut self) -> Result<(), CoreError> {
        if self.is_exhausted() {
            return Err(CoreError::BudgetExhausted {
                budget: self.budget,
            });
        }
        self.used += 1;
        Ok(())
    }
}

/// Evaluates `problem` at `x`, charging one evaluation to `counter`.
pub fn evaluate<P: Problem + ?Sized>(
    problem: &P,
    x: &[f64],
    counter: &mut EvalCounter,
) -> Result<Evaluation, CoreError> {
    counter.consume()?;
    Ok(problem.evaluate(x))
}

/// Seeded generator. Not meant to be shared between threads; parallel runs
/// each own a stream with their own seed.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer on the inclusive range `{low, ..., high}`.
    pub fn uniform_int(&mut self, low: usize, high: usize) -> usize {
        self.rng.random_range(low..=high)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// Maps per-dimension unit draws onto the box: `lower + alpha * (upper - lower)`.
pub fn position_from_unit(space: &SearchSpace, alphas: &[f64]) -> Vec<f64> {
    space
        .lower()
        .iter()
        .zip(space.upper())
        .zip(alphas)
        .map(|((lo, hi), a)| a * (hi - lo) + lo)
        .collect()
}

/// Uniform random point of the box, one fresh draw per dimension.
pub fn sample_initial_position(space: &SearchSpace, rng: &mut RandomStream) -> Vec<f64> {
    let alphas: Vec<f64> = (0..space.dims()).map(|_| rng.uniform()).collect();
    position_from_unit(space, &alphas)
}

/// Saturates every component onto its interval. Rejects NaN and infinities.
pub fn clamp_to_space(pos: &[f64], space: &SearchSpace) -> Result<Vec<f64>, CoreError> {
    if pos.len() != space.dims() {
        return Err(CoreError::DimensionMismatch {
            expected: space.dims(),
            found: pos.len(),
        });
    }
    pos.iter()
        .zip(space.lower().iter().zip(space.upper()))
        .enumerate()
        .map(|(index, (v, (lo, hi)))| {
            if v.is_finite() {
                Ok(v.max(*lo).min(*hi))
            } else {
                Err(CoreError::NonFiniteComponent { index })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Sphere(SearchSpace);

    impl Problem for Sphere {
        fn space(&self) -> &SearchSpace {
            &self.0
        }
        fn evaluate(&self, x: &[f64]) -> Evaluation {
            Evaluation::feasible(x.iter().map(|v| v * v).sum())
        }
    }

    #[test]
    fn rejects_bad_bounds() {
        assert_eq!(
            SearchSpace::new(vec![0.0, 1.0], vec![1.0, 1.0]),
            Err(CoreError::InvalidBounds { index: 1 })
        );
        assert!(matches!(
            SearchSpace::new(vec![0.0], vec![1.0, 2.0]),
            Err(CoreError::DimensionMismatch { .. })
        ));
        assert_eq!(SearchSpace::new(vec![], vec![]), Err(CoreError::EmptySpace));
    }

    #[test]
    fn unit_draws_map_to_corners_and_midpoints() {
        let unit = SearchSpace::cube(3, 0.0, 1.0).unwrap();
        assert_eq!(position_from_unit(&unit, &[0.0, 0.0, 0.0]), vec![0.0; 3]);
        let line = SearchSpace::new(vec![2.0], vec![4.0]).unwrap();
        assert_eq!(position_from_unit(&line, &[0.5]), vec![3.0]);
    }

    #[test]
    fn initial_positions_stay_in_box() {
        let space = SearchSpace::cube(10, -100.0, 100.0).unwrap();
        let mut rng = RandomStream::new(3);
        for _ in 0..1000 {
            let x = sample_initial_position(&space, &mut rng);
            assert!(space.contains(&x));
        }
    }

    #[test]
    fn initial_position_mean_is_centred() {
        let space = SearchSpace::cube(1, 0.0, 1.0).unwrap();
        let mut rng = RandomStream::new(11);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_initial_position(&space, &mut rng)[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn clamp_saturates_and_rejects_nan() {
        let space = SearchSpace::cube(2, -100.0, 100.0).unwrap();
        assert_eq!(
            clamp_to_space(&[150.0, -150.0], &space).unwrap(),
            vec![100.0, -100.0]
        );
        assert_eq!(clamp_to_space(&[1.0, 2.0], &space).unwrap(), vec![1.0, 2.0]);
        assert_eq!(
            clamp_to_space(&[f64::NAN, 0.0], &space),
            Err(CoreError::NonFiniteComponent { index: 0 })
        );
        assert_eq!(
            clamp_to_space(&[0.0, f64::INFINITY], &space),
            Err(CoreError::NonFiniteComponent { index: 1 })
        );
    }

    #[test]
    fn evaluate_counts_and_stops_at_budget() {
        let sphere = Sphere(SearchSpace::cube(2, -1.0, 1.0).unwrap());
        let mut counter = EvalCounter::new(3);
        assert_eq!(
            evaluate(&sphere, &[0.0, 0.0], &mut counter).unwrap().value,
            0.0
        );
        assert_eq!(counter.used(), 1);
        evaluate(&sphere, &[0.5, 0.0], &mut counter).unwrap();
        evaluate(&sphere, &[0.5, 0.5], &mut counter).unwrap();
        assert_eq!(counter.used(), 3);
        assert_eq!(
            evaluate(&sphere, &[0.0, 0.0], &mut counter),
            Err(CoreError::BudgetExhausted { budget: 3 })
        );
        assert_eq!(counter.used(), 3);
    }

    #[test]
    fn streams_are_reproducible() {
        let mut a = RandomStream::new(42);
        let mut b = RandomStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
            assert_eq!(a.uniform_int(1, 9), b.uniform_int(1, 9));
            assert_eq!(a.bernoulli(0.5), b.bernoulli(0.5));
        }
        let mut c = RandomStream::new(43);
        assert_ne!(RandomStream::new(42).uniform(), c.uniform());
    }

    #[test]
    fn uniform_int_covers_inclusive_range() {
        let mut rng = RandomStream::new(5);
        let mut seen = [false; 4];
        for _ in 0..1000 {
            let v = rng.uniform_int(1, 4);
            assert!((1..=4).contains(&v));
            seen[v - 1] = true;
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn feasibility_ordering_basics() {
        let feasible5 = Evaluation::feasible(5.0);
        let infeasible1 = Evaluation::new(1.0, 0.3);
        assert!(feasible5.is_better_than(&infeasible1));
        assert!(Evaluation::feasible(1.0).is_better_than(&feasible5));
        assert!(Evaluation::new(9.0, 0.1).is_better_than(&Evaluation::new(0.0, 0.2)));
        assert_eq!(
            Evaluation::feasible(0.0).compare(&Evaluation::feasible(-0.0)),
            Ordering::Equal
        );
        assert_eq!(Evaluation::new(f64::NAN, 0.0).value, f64::INFINITY);
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent_and_inside(x in proptest::collection::vec(-1e6f64..1e6, 4)) {
            let space = SearchSpace::new(vec![-1.0, 0.0, 2.0, -50.0], vec![1.0, 10.0, 3.0, 50.0]).unwrap();
            let once = clamp_to_space(&x, &space).unwrap();
            prop_assert!(space.contains(&once));
            prop_assert_eq!(clamp_to_space(&once, &space).unwrap(), once);
        }
    }
}
