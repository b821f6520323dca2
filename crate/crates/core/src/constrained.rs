//! Five engineering design problems with inequality constraints `g_i(x) <= 0`,
//! the mean-violation measure, feasibility-rule comparison and run metrics.
//!
//! | name | problem                   | D | g | integer variables |
//! |------|---------------------------|---|---|-------------------|
//! | RC15 | speed reducer weight      | 7 | 11 | none             |
//! | RC17 | tension/compression spring| 3 | 4 | none              |
//! | RC18 | pressure vessel           | 4 | 4 | x1, x2            |
//! | RC19 | welded beam               | 4 | 5 | none              |
//! | RC21 | multiple disk clutch brake| 5 | 8 | all               |
//!
//! Integer variables are searched in their continuous relaxation and rounded
//! (then clamped) right before each evaluation.

use std::cmp::Ordering;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::aho::RunRecord;
use crate::space::{Evaluation, Problem, SearchSpace};

pub const PROBLEM_NAMES: [&str; 5] = ["RC15", "RC17", "RC18", "RC19", "RC21"];

/// Absolute gap to `f_star` that counts as a success.
pub const SUCCESS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstrainedError {
    #[error("unknown problem `{0}` (expected one of RC15, RC17, RC18, RC19, RC21)")]
    UnknownProblem(String),
    #[error("unknown welded beam variant `{0}` (expected as-printed or conventional)")]
    UnknownVariant(String),
    #[error("no run records to summarise")]
    NoRecords,
}

/// Which welded-beam formula block to use.
///
/// `AsPrinted` keeps `G = 12.106` and the shear term `2 tau' tau''^2 x2 / 2R`.
/// With that `G`, `P_c` is negative over the whole box, so no point is
/// feasible. `Conventional` uses `G = 12e6`, `2 tau' tau'' x2 / 2R` and the
/// buckling load `4.013 E sqrt(x3^2 x4^6 / 30) / L^2 (...)`; its optimum is
/// the tabulated `f_star`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeldedBeamVariant {
    #[default]
    AsPrinted,
    Conventional,
}

impl FromStr for WeldedBeamVariant {
    type Err = ConstrainedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "as-printed" | "literal" => Ok(Self::AsPrinted),
            "conventional" | "reference" => Ok(Self::Conventional),
            _ => Err(ConstrainedError::UnknownVariant(s.to_string())),
        }
    }
}

impl fmt::Display for WeldedBeamVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AsPrinted => "as-printed",
            Self::Conventional => "conventional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    SpeedReducer,
    Spring,
    PressureVessel,
    WeldedBeam(WeldedBeamVariant),
    ClutchBrake,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedProblem {
    pub name: String,
    pub space: SearchSpace,
    pub integrality: Vec<bool>,
    pub f_star: f64,
    kernel: Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    /// `max(g_i(x), 0)` per constraint.
    pub violations: Vec<f64>,
    pub mv: f64,
    pub feasible: bool,
}

impl ConstrainedProblem {
    pub fn dims(&self) -> usize {
        self.space.dims()
    }

    pub fn inequality_count(&self) -> usize {
        match self.kernel {
            Kernel::SpeedReducer => 11,
            Kernel::Spring | Kernel::PressureVessel => 4,
            Kernel::WeldedBeam(_) => 5,
            Kernel::ClutchBrake => 8,
        }
    }

    pub fn equality_count(&self) -> usize {
        0
    }

    pub fn has_integers(&self) -> bool {
        self.integrality.iter().any(|&b| b)
    }

    /// Objective at `x` as given (no rounding).
    pub fn objective(&self, x: &[f64]) -> f64 {
        match self.kernel {
            Kernel::SpeedReducer => rc15::objective(x),
            Kernel::Spring => rc17::objective(x),
            Kernel::PressureVessel => rc18::objective(x),
            Kernel::WeldedBeam(_) => rc19::objective(x),
            Kernel::ClutchBrake => rc21::objective(x),
        }
    }

    /// `g_i(x)` for every inequality, at `x` as given (no rounding).
    pub fn constraints(&self, x: &[f64]) -> Vec<f64> {
        match self.kernel {
            Kernel::SpeedReducer => rc15::constraints(x),
            Kernel::Spring => rc17::constraints(x),
            Kernel::PressureVessel => rc18::constraints(x),
            Kernel::WeldedBeam(v) => rc19::constraints(x, v),
            Kernel::ClutchBrake => rc21::constraints(x),
        }
    }

    /// `f(x) - f_star`.
    pub fn error(&self, value: f64) -> f64 {
        value - self.f_star
    }
}

impl Problem for ConstrainedProblem {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    /// Rounds integer variables, then evaluates. A non-finite objective or
    /// constraint value yields `+inf` objective and `+inf` violation.
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let owned;
        let x = if self.has_integers() {
            owned = round_integrality(x, self);
            owned.as_slice()
        } else {
            x
        };
        guarded_evaluation(self.objective(x), &self.constraints(x))
    }
}

fn guarded_evaluation(value: f64, g: &[f64]) -> Evaluation {
    if !value.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Evaluation::new(f64::INFINITY, f64::INFINITY);
    }
    Evaluation::new(value, violation_report(g).mv)
}

fn violation_report(g: &[f64]) -> ConstraintReport {
    let violations: Vec<f64> = g.iter().map(|v| v.max(0.0)).collect();
    let mv = if violations.is_empty() {
        0.0
    } else {
        violations.iter().sum::<f64>() / violations.len() as f64
    };
    ConstraintReport {
        feasible: mv == 0.0,
        violations,
        mv,
    }
}

pub fn load_problem(name: &str) -> Result<ConstrainedProblem, ConstrainedError> {
    load_problem_with(name, WeldedBeamVariant::default())
}

pub fn load_problem_with(
    name: &str,
    welded_beam: WeldedBeamVariant,
) -> Result<ConstrainedProblem, ConstrainedError> {
    let key = name.trim().to_ascii_uppercase();
    let (lower, upper, integrality, f_star, kernel): (Vec<f64>, Vec<f64>, Vec<bool>, f64, Kernel) =
        match key.as_str() {
            "RC15" => (
                vec![2.6, 0.7, 17.0, 7.3, 7.3, 2.9, 5.0],
                vec![3.6, 0.8, 28.0, 8.3, 8.3, 3.9, 5.5],
                vec![false; 7],
                2.994_424_465_8e3,
                Kernel::SpeedReducer,
            ),
            "RC17" => (
                vec![0.05, 0.25, 2.0],
                vec![2.0, 1.3, 15.0],
                vec![false; 3],
                1.266_523_278_8e-2,
                Kernel::Spring,
            ),
            "RC18" => (
                vec![1.0, 1.0, 10.0, 10.0],
                vec![99.0, 99.0, 200.0, 200.0],
                vec![true, true, false, false],
                5.885_332_773_6e3,
                Kernel::PressureVessel,
            ),
            "RC19" => (
                vec![0.125, 0.1, 0.1, 0.1],
                vec![2.0, 10.0, 10.0, 2.0],
                vec![false; 4],
                1.670_217_726_3,
                Kernel::WeldedBeam(welded_beam),
            ),
            "RC21" => (
                vec![60.0, 90.0, 1.0, 0.0, 2.0],
                vec![80.0, 110.0, 3.0, 1000.0, 9.0],
                vec![true; 5],
                2.352_424_579e-1,
                Kernel::ClutchBrake,
            ),
            _ => return Err(ConstrainedError::UnknownProblem(name.to_string())),
        };
    Ok(ConstrainedProblem {
        name: key,
        space: SearchSpace::new(lower, upper).expect("static bounds are valid"),
        integrality,
        f_star,
        kernel,
    })
}

/// Mean violation `MV = sum max(g_i, 0) / m` at `x` as given.
pub fn mean_violation(problem: &ConstrainedProblem, x: &[f64]) -> ConstraintReport {
    violation_report(&problem.constraints(x))
}

/// Feasibility rules: feasible beats infeasible, feasible pairs compare by
/// objective, infeasible pairs by MV. `Less` means `a` is better.
pub fn feasibility_compare(a: (f64, &ConstraintReport), b: (f64, &ConstraintReport)) -> Ordering {
    Evaluation::new(a.0, a.1.mv).compare(&Evaluation::new(b.0, b.1.mv))
}

/// Rounds masked components to the nearest integer, then clamps them into
/// their bounds. Continuous components are returned unchanged.
pub fn round_integrality(x: &[f64], problem: &ConstrainedProblem) -> Vec<f64> {
    let (lo, hi) = (problem.space.lower(), problem.space.upper());
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if problem.integrality[i] {
                v.round().clamp(lo[i].ceil(), hi[i].floor())
            } else {
                v
            }
        })
        .collect()
}

/// Feasibility rate, mean violation and success rate over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Percent of runs whose best is feasible.
    pub fr: f64,
    /// Mean over runs of the final best's MV.
    pub mv: f64,
    /// Percent of runs with a feasible best within [`SUCCESS_TOLERANCE`] of `f_star`.
    pub sr: f64,
}

pub fn run_metrics(
    records: &[RunRecord],
    problem: &ConstrainedProblem,
) -> Result<RunMetrics, ConstrainedError> {
    let bests: Vec<Evaluation> = records.iter().map(|r| r.best).collect();
    metrics_from_bests(&bests, problem.f_star)
}

/// [`run_metrics`] over bare final evaluations.
pub fn metrics_from_bests(
    bests: &[Evaluation],
    f_star: f64,
) -> Result<RunMetrics, ConstrainedError> {
    if bests.is_empty() {
        return Err(ConstrainedError::NoRecords);
    }
    let n = bests.len() as f64;
    let feasible = bests.iter().filter(|e| e.is_feasible()).count() as f64;
    let success = bests
        .iter()
        .filter(|e| e.is_feasible() && e.value - f_star <= SUCCESS_TOLERANCE)
        .count() as f64;
    let mv = bests.iter().map(|e| e.violation).sum::<f64>() / n;
    Ok(RunMetrics {
        fr: 100.0 * feasible / n,
        mv,
        sr: 100.0 * success / n,
    })
}

#[allow(clippy::approx_constant)]
mod rc15 {
    pub fn objective(x: &[f64]) -> f64 {
        let [x1, x2, x3, x4, x5, x6, x7] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6]];
        0.7854 * x2 * x2 * x1 * (14.9334 * x3 - 43.0934 + 3.3333 * x3 * x3)
            + 0.7854 * (x5 * x7 * x7 + x4 * x6 * x6)
            - 1.508 * x1 * (x7 * x7 + x6 * x6)
            + 7.477 * (x7.powi(3) + x6.powi(3))
    }

    pub fn constraints(x: &[f64]) -> Vec<f64> {
        let [x1, x2, x3, x4, x5, x6, x7] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6]];
        vec![
            -x1 * x2 * x2 * x3 + 27.0,
            -x1 * x2 * x2 * x3 * x3 + 397.5,
            -x2 * x6.powi(4) * x3 / x4.powi(3) + 1.93,
            -x2 * x7.powi(4) * x3 / x5.powi(3) + 1.93,
            10.0 / x6.powi(3) * (16.91e6 + (745.0 * x4 / (x2 * x3)).powi(2)).sqrt() - 1100.0,
            10.0 / x7.powi(3) * (157.5e6 + (745.0 * x5 / (x2 * x3)).powi(2)).sqrt() - 850.0,
            x2 * x3 - 40.0,
            -x1 / x2 + 5.0,
            x1 / x2 - 12.0,
            1.5 * x6 - x4 + 1.9,
            1.1 * x7 - x5 + 1.9,
        ]
    }
}

mod rc17 {
    pub fn objective(x: &[f64]) -> f64 {
        x[0] * x[0] * x[1] * (2.0 + x[2])
    }

    pub fn constraints(x: &[f64]) -> Vec<f64> {
        let [x1, x2, x3] = [x[0], x[1], x[2]];
        vec![
            1.0 - x2.powi(3) * x3 / (71785.0 * x1.powi(4)),
            (4.0 * x2 * x2 - x1 * x2) / (12566.0 * (x2 * x1.powi(3) - x1.powi(4)))
                + 1.0 / (5108.0 * x1 * x1)
                - 1.0,
            1.0 - 140.45 * x1 / (x2 * x2 * x3),
            (x1 + x2) / 1.5 - 1.0,
        ]
    }
}

mod rc18 {
    use std::f64::consts::PI;

    pub fn objective(x: &[f64]) -> f64 {
        let (z1, z2, x3, x4) = (0.0625 * x[0], 0.0625 * x[1], x[2], x[3]);
        1.7781 * z2 * x3 * x3 + 0.6224 * z1 * x3 * x4 + 3.1661 * z1 * z1 * x4 + 19.84 * z1 * z1 * x3
    }

    pub fn constraints(x: &[f64]) -> Vec<f64> {
        let (z1, z2, x3, x4) = (0.0625 * x[0], 0.0625 * x[1], x[2], x[3]);
        vec![
            0.00954 * x3 - z2,
            0.0193 * x3 - z1,
            x4 - 240.0,
            -PI * x3 * x3 * x4 - 4.0 / 3.0 * PI * x3.powi(3) + 1_296_000.0,
        ]
    }
}

mod rc19 {
    use super::{WeldedBeamVariant, SQRT_2};

    const L: f64 = 14.0;
    const P: f64 = 6000.0;
    const E: f64 = 30e6;
    const SIGMA_MAX: f64 = 30_000.0;
    const TAU_MAX: f64 = 13_600.0;
    const DELTA_MAX: f64 = 0.25;

    pub fn objective(x: &[f64]) -> f64 {
        0.04811 * x[2] * x[3] * (x[1] + 14.0) + 1.10471 * x[0] * x[0] * x[1]
    }

    pub fn constraints(x: &[f64], variant: WeldedBeamVariant) -> Vec<f64> {
        let [x1, x2, x3, x4] = [x[0], x[1], x[2], x[3]];
        let g = match variant {
            WeldedBeamVariant::AsPrinted => 12.106,
            WeldedBeamVariant::Conventional => 12e6,
        };
        let r2 = x2 * x2 / 4.0 + ((x1 + x3) / 2.0).powi(2);
        let r = r2.sqrt();
        let m = P * (x2 / 2.0 + L);
        let j = 2.0 * (r2 * SQRT_2 * x1 * x2);
        let tau1 = P / (SQRT_2 * x2 * x1);
        let tau2 = r * m / j;
        let cross = match variant {
            WeldedBeamVariant::AsPrinted => 2.0 * tau1 * tau2 * tau2 * x2 / (2.0 * r),
            WeldedBeamVariant::Conventional => 2.0 * tau1 * tau2 * x2 / (2.0 * r),
        };
        let tau = (tau1 * tau1 + tau2 * tau2 + cross).sqrt();
        let sigma = 6.0 * P * L / (x4 * x3 * x3);
        let delta = 6.0 * P * L.powi(3) / (E * x3 * x3 * x4);
        let buckling = match variant {
            WeldedBeamVariant::AsPrinted => x3 * x4.powi(3) / 6.0,
            WeldedBeamVariant::Conventional => (x3 * x3 * x4.powi(6) / 30.0).sqrt(),
        };
        let pc = 4.013 * E * buckling / (L * L) * (1.0 - x3 / (2.0 * L) * (E / (4.0 * g)).sqrt());
        vec![
            x1 - x4,
            delta - DELTA_MAX,
            P - pc,
            tau - TAU_MAX,
            sigma - SIGMA_MAX,
        ]
    }
}

mod rc21 {
    use super::PI;

    /// Steel density in kg/mm^3; the tabulated optimum includes it.
    pub const RHO: f64 = 7.8e-6;
    const DELTA_R: f64 = 20.0;
    const L_MAX: f64 = 30.0;
    const MU: f64 = 0.6;
    const V_SR_MAX: f64 = 10.0;
    const DELTA: f64 = 0.5;
    const S: f64 = 1.5;
    const T_MAX: f64 = 15.0;
    const N: f64 = 250.0;
    const I_Z: f64 = 55.0;
    const M_S: f64 = 40.0;
    const M_F: f64 = 3.0;
    const P_MAX: f64 = 1.0;

    pub fn objective(x: &[f64]) -> f64 {
        RHO * PI * (x[1] * x[1] - x[0] * x[0]) * x[2] * (x[4] + 1.0)
    }

    pub fn constraints(x: &[f64]) -> Vec<f64> {
        let [x1, x2, x3, x4, x5] = [x[0], x[1], x[2], x[3], x[4]];
        let cubes = x2.powi(3) - x1.powi(3);
        let squares = x2 * x2 - x1 * x1;
        let mh = 2.0 / 3.0 * MU * x4 * x5 * cubes / squares;
        let omega = PI * N / 30.0;
        let area = PI * squares;
        let prz = x4 / area;
        let rsr = 2.0 / 3.0 * cubes / (x2 * x2 * x1 * x1);
        let vsr = PI * rsr * N / 30.0;
        let t = I_Z * omega / (mh + M_F);
        vec![
            -P_MAX + prz,
            prz * vsr - V_SR_MAX * P_MAX,
            DELTA_R + x1 - x2,
            -L_MAX + (x5 + 1.0) * (x3 + DELTA),
            S * M_S - mh,
            -t,
            -V_SR_MAX * P_MAX + vsr,
            t - T_MAX,
        ]
    }
}
