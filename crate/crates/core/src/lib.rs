//! Archerfish hunting optimizer (AHO) and the pieces needed to benchmark it.
//!
//! The crate is organised around a small set of modules:
//!
//! - [`space`]: search-space geometry, agents, evaluation bookkeeping and the
//!   seeded random stream every other module draws from.
//! - [`aho`]: the optimizer itself (shooting / jumping phases, perceiving-angle
//!   phase swap, Lévy-flight stagnation escape).
//! - [`unconstrained`]: classical box-bounded test functions with optional
//!   shift / rotation transforms.
//! - [`constrained`]: five engineering design problems, the feasibility-rule
//!   comparison and the FR / MV / SR run metrics.
//! - [`stats`]: Friedman rank test and one-sided Wilcoxon signed-rank test.
//!
//! ```
//! use archerfish::aho::{AhoParams, run};
//! use archerfish::unconstrained::{builtin_problem, BuiltinFunction};
//!
//! let sphere = builtin_problem(BuiltinFunction::Sphere, 2);
//! let params = AhoParams::for_dimension(2).population(10).budget(2_000).seed(7);
//! let record = run(&sphere, &params).unwrap();
//! assert_eq!(record.fes, 2_000);
//! assert!(record.trace.is_monotone());
//! ```

pub mod aho;
pub mod constrained;
pub mod space;
pub mod stats;
pub mod unconstrained;

pub use space::{
    clamp_to_space, evaluate, sample_initial_position, Agent, CoreError, EvalCounter, Evaluation,
    Problem, RandomStream, SearchSpace,
};
