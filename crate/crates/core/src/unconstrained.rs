//! Box-bounded benchmark functions with known optima, and shift/rotation
//! transforms that turn them into fresh instances.
//!
//! Every builtin lives on `[-100, 100]^d` and has `f_star = 0`:
//!
//! | name         | closed form                                              | `x_star` |
//! |--------------|----------------------------------------------------------|----------|
//! | `sphere`     | `sum x_i^2`                                              | 0        |
//! | `rosenbrock` | `sum 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2`              | 1        |
//! | `rastrigin`  | `10 d + sum (x_i^2 - 10 cos(2 pi x_i))`                  | 0        |
//! | `ackley`     | `-20 exp(-0.2 sqrt(mean x_i^2)) - exp(mean cos(2 pi x_i)) + 20 + e` | 0 |
//! | `griewank`   | `1 + sum x_i^2 / 4000 - prod cos(x_i / sqrt(i))`         | 0        |
//! | `schwefel`   | `sum_i (sum_{j <= i} x_j)^2` (problem 1.2)               | 0        |
//! | `bent-cigar` | `x_1^2 + 1e6 sum_{i >= 2} x_i^2`                         | 0        |

use std::f64::consts::{E, PI};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::space::{Evaluation, Problem, RandomStream, SearchSpace};

#[derive(Debug, Error)]
pub enum UnconstrainedError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rotation is not orthogonal (max |M^T M - I| = {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("cannot parse instance file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Objective = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct UnconstrainedProblem {
    pub name: String,
    pub space: SearchSpace,
    pub evaluator: Objective,
    pub f_star: f64,
    pub x_star: Option<Vec<f64>>,
}

impl fmt::Debug for UnconstrainedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnconstrainedProblem")
            .field("name", &self.name)
            .field("dims", &self.space.dims())
            .field("f_star", &self.f_star)
            .field("x_star", &self.x_star)
            .finish()
    }
}

impl UnconstrainedProblem {
    pub fn dims(&self) -> usize {
        self.space.dims()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    /// `f(x) - f_star`.
    pub fn error(&self, value: f64) -> f64 {
        value - self.f_star
    }
}

impl Problem for UnconstrainedProblem {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        Evaluation::feasible(self.value(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinFunction {
    Sphere,
    Rosenbrock,
    Rastrigin,
    Ackley,
    Griewank,
    Schwefel,
    BentCigar,
}

impl BuiltinFunction {
    pub const ALL: [BuiltinFunction; 7] = [
        Self::Sphere,
        Self::Rosenbrock,
        Self::Rastrigin,
        Self::Ackley,
        Self::Griewank,
        Self::Schwefel,
        Self::BentCigar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Rosenbrock => "rosenbrock",
            Self::Rastrigin => "rastrigin",
            Self::Ackley => "ackley",
            Self::Griewank => "griewank",
            Self::Schwefel => "schwefel",
            Self::BentCigar => "bent-cigar",
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Self::Sphere => sphere(x),
            Self::Rosenbrock => rosenbrock(x),
            Self::Rastrigin => rastrigin(x),
            Self::Ackley => ackley(x),
            Self::Griewank => griewank(x),
            Self::Schwefel => schwefel_1_2(x),
            Self::BentCigar => bent_cigar(x),
        }
    }

    fn x_star(self, dims: usize) -> Vec<f64> {
        match self {
            Self::Rosenbrock => vec![1.0; dims],
            _ => vec![0.0; dims],
        }
    }
}

impl fmt::Display for BuiltinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinFunction {
    type Err = UnconstrainedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key || (key == "bentcigar" && *f == Self::BentCigar))
            .ok_or_else(|| UnconstrainedError::UnknownFunction(s.to_string()))
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sum - prod
}

pub fn schwefel_1_2(x: &[f64]) -> f64 {
    let mut partial = 0.0;
    let mut total = 0.0;
    for v in x {
        partial += v;
        total += partial * partial;
    }
    total
}

pub fn bent_cigar(x: &[f64]) -> f64 {
    match x.split_first() {
        Some((head, tail)) => head * head + 1e6 * sphere(tail),
        None => 0.0,
    }
}

pub fn builtin_problem(function: BuiltinFunction, dims: usize) -> UnconstrainedProblem {
    UnconstrainedProblem {
        name: function.name().to_string(),
        space: SearchSpace::cube(dims, -100.0, 100.0).expect("dims >= 1"),
        evaluator: Arc::new(move |x: &[f64]| function.eval(x)),
        f_star: 0.0,
        x_star: Some(function.x_star(dims)),
    }
}

pub fn builtin_suite(dims: usize) -> Vec<UnconstrainedProblem> {
    BuiltinFunction::ALL
        .into_iter()
        .map(|f| builtin_problem(f, dims))
        .collect()
}

/// `x -> M (x - o)` applied before the base objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRotate {
    pub shift: Vec<f64>,
    pub rotation: DMatrix<f64>,
}

/// Largest entry of `|M^T M - I|`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let eye = DMatrix::<f64>::identity(m.ncols(), m.ncols());
    (gram - eye).amax()
}

impl ShiftRotate {
    pub fn new(shift: Vec<f64>, rotation: DMatrix<f64>) -> Result<Self, UnconstrainedError> {
        let d = shift.len();
        if rotation.nrows() != d || rotation.ncols() != d {
            return Err(UnconstrainedError::DimensionMismatch {
                expected: d,
                found: rotation.nrows().max(rotation.ncols()),
            });
        }
        let deviation = orthogonality_defect(&rotation);
        if deviation > 1e-9 || !deviation.is_finite() {
            return Err(UnconstrainedError::NotOrthogonal { deviation });
        }
        Ok(Self { shift, rotation })
    }

    pub fn identity(dims: usize) -> Self {
        Self {
            shift: vec![0.0; dims],
            rotation: DMatrix::identity(dims, dims),
        }
    }

    pub fn shift_only(shift: Vec<f64>) -> Self {
        let d = shift.len();
        Self {
            shift,
            rotation: DMatrix::identity(d, d),
        }
    }

    /// Shift drawn uniformly from `[-bound, bound]^d`, rotation from
    /// [`random_rotation`].
    pub fn random(dims: usize, bound: f64, rng: &mut RandomStream) -> Self {
        let shift = (0..dims)
            .map(|_| -bound + 2.0 * bound * rng.uniform())
            .collect();
        Self {
            shift,
            rotation: random_rotation(dims, rng),
        }
    }

    pub fn dims(&self) -> usize {
        self.shift.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dims();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| self.rotation[(i, j)] * (x[j] - self.shift[j]))
                    .sum()
            })
            .collect()
    }

    /// Inverse of [`apply`](Self::apply): `M^T y + o`.
    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dims();
        (0..d)
            .map(|j| self.shift[j] + (0..d).map(|i| self.rotation[(i, j)] * y[i]).sum::<f64>())
            .collect()
    }

    /// Reads a shift vector file and a row-major rotation matrix file, both
    /// whitespace-separated.
    pub fn read_files(
        shift_path: impl AsRef<Path>,
        rotation_path: impl AsRef<Path>,
    ) -> Result<Self, UnconstrainedError> {
        let shift = parse_reals(&std::fs::read_to_string(shift_path)?)?;
        let flat = parse_reals(&std::fs::read_to_string(rotation_path)?)?;
        let d = shift.len();
        if flat.len() != d * d {
            return Err(UnconstrainedError::DimensionMismatch {
                expected: d * d,
                found: flat.len(),
            });
        }
        Self::new(shift, DMatrix::from_row_slice(d, d, &flat))
    }

    pub fn write_files(
        &self,
        shift_path: impl AsRef<Path>,
        rotation_path: impl AsRef<Path>,
    ) -> Result<(), UnconstrainedError> {
        let shift: Vec<String> = self.shift.iter().map(|v| format!("{v:e}")).collect();
        std::fs::write(shift_path, shift.join(" ") + "\n")?;
        let mut out = String::new();
        for row in self.rotation.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        std::fs::write(rotation_path, out)?;
        Ok(())
    }
}

fn parse_reals(text: &str) -> Result<Vec<f64>, UnconstrainedError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| UnconstrainedError::Parse(format!("bad number `{tok}`")))
        })
        .collect()
}

/// Orthonormalises a standard Gaussian matrix with a QR factorisation. Column
/// signs follow `diag(R)`, which makes the result Haar distributed.
pub fn random_rotation(dims: usize, rng: &mut RandomStream) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(dims, dims, |_, _| rng.normal());
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dims {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn transform(
    problem: &UnconstrainedProblem,
    t: &ShiftRotate,
) -> Result<UnconstrainedProblem, UnconstrainedError> {
    if t.dims() != problem.dims() {
        return Err(UnconstrainedError::DimensionMismatch {
            expected: problem.dims(),
            found: t.dims(),
        });
    }
    let base = Arc::clone(&problem.evaluator);
    let inner = t.clone();
    Ok(UnconstrainedProblem {
        name: problem.name.clone(),
        space: problem.space.clone(),
        evaluator: Arc::new(move |x: &[f64]| base(&inner.apply(x))),
        f_star: problem.f_star,
        x_star: problem.x_star.as_ref().map(|xs| t.invert(xs)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_values() {
        assert_eq!(sphere(&[1.0, 2.0]), 5.0);
        assert_eq!(rosenbrock(&[0.0, 0.0]), 1.0);
        assert_eq!(rosenbrock(&[1.0, 1.0, 1.0]), 0.0);
        assert_relative_eq!(rastrigin(&[1.0]), 1.0, epsilon = 1e-12);
        assert_relative_eq!(rastrigin(&[0.5, 0.0]), 20.25, epsilon = 1e-12);
        assert_relative_eq!(ackley(&[1.0, 1.0]), 3.625_384_938_440_363, epsilon = 1e-12);
        assert_relative_eq!(griewank(&[PI]), 2.0 + PI * PI / 4000.0, epsilon = 1e-12);
        assert_eq!(schwefel_1_2(&[1.0, 2.0, -3.0]), 1.0 + 9.0 + 0.0);
        assert_eq!(bent_cigar(&[2.0, 1.0]), 4.0 + 1e6);
    }

    #[test]
    fn every_builtin_hits_its_optimum() {
        for d in [1, 2, 5, 10, 20] {
            for p in builtin_suite(d) {
                let xs = p.x_star.clone().unwrap();
                assert!((p.value(&xs) - p.f_star).abs() <= 1e-12, "{} d={d}", p.name);
                assert_eq!(p.space.lower()[0], -100.0);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for f in BuiltinFunction::ALL {
            assert_eq!(f.name().parse::<BuiltinFunction>().unwrap(), f);
        }
        assert!("cec99".parse::<BuiltinFunction>().is_err());
    }

    #[test]
    fn identity_transform_is_noop() {
        let p = builtin_problem(BuiltinFunction::Rastrigin, 3);
        let t = transform(&p, &ShiftRotate::identity(3)).unwrap();
        let x = [0.3, -7.0, 42.0];
        assert_eq!(t.value(&x), p.value(&x));
    }

    #[test]
    fn shifted_sphere_minimum_moves() {
        let p = builtin_problem(BuiltinFunction::Sphere, 3);
        let o = vec![1.0, -2.0, 3.5];
        let t = transform(&p, &ShiftRotate::shift_only(o.clone())).unwrap();
        assert_eq!(t.value(&o), 0.0);
        assert_eq!(t.x_star.as_deref(), Some(o.as_slice()));
        assert!(t.value(&[0.0, 0.0, 0.0]) > 0.0);
    }

    #[test]
    fn rotated_sphere_equals_sphere() {
        let mut rng = RandomStream::new(11);
        let p = builtin_problem(BuiltinFunction::Sphere, 6);
        let rot = ShiftRotate::new(vec![0.0; 6], random_rotation(6, &mut rng)).unwrap();
        let t = transform(&p, &rot).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..6).map(|_| -100.0 + 200.0 * rng.uniform()).collect();
            assert_relative_eq!(t.value(&x), p.value(&x), max_relative = 1e-12);
        }
    }

    #[test]
    fn transformed_optimum_is_preserved() {
        let mut rng = RandomStream::new(5);
        for f in BuiltinFunction::ALL {
            let p = builtin_problem(f, 4);
            let t = transform(&p, &ShiftRotate::random(4, 50.0, &mut rng)).unwrap();
            assert_eq!(t.f_star, p.f_star);
            let xs = t.x_star.clone().unwrap();
            assert!((t.value(&xs) - t.f_star).abs() < 1e-9, "{}", p.name);
        }
    }

    #[test]
    fn rotation_properties() {
        let mut rng = RandomStream::new(3);
        let one = random_rotation(1, &mut rng);
        assert_eq!(one[(0, 0)].abs(), 1.0);
        let m = random_rotation(20, &mut rng);
        assert!(orthogonality_defect(&m) < 1e-9);
        assert_relative_eq!(m.determinant().abs(), 1.0, epsilon = 1e-9);
        let a = random_rotation(8, &mut RandomStream::new(42));
        let b = random_rotation(8, &mut RandomStream::new(42));
        assert_eq!(a, b);
    }

    #[test]
    fn transform_checks_dimensions() {
        let p = builtin_problem(BuiltinFunction::Sphere, 3);
        assert!(matches!(
            transform(&p, &ShiftRotate::identity(2)),
            Err(UnconstrainedError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ShiftRotate::new(vec![0.0; 2], DMatrix::identity(3, 3)),
            Err(UnconstrainedError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ShiftRotate::new(vec![0.0; 2], DMatrix::from_element(2, 2, 1.0)),
            Err(UnconstrainedError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn instance_files_round_trip() {
        let dir = std::env::temp_dir().join(format!("archerfish-inst-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let t = ShiftRotate::random(5, 80.0, &mut RandomStream::new(8));
        let (s, r) = (dir.join("shift.txt"), dir.join("rot.txt"));
        t.write_files(&s, &r).unwrap();
        let back = ShiftRotate::read_files(&s, &r).unwrap();
        assert_eq!(back, t);
        std::fs::write(&r, "1 0 0 1").unwrap();
        assert!(ShiftRotate::read_files(&s, &r).is_err());
        std::fs::write(&r, "1 x").unwrap();
        assert!(matches!(
            ShiftRotate::read_files(&s, &r),
            Err(UnconstrainedError::Parse(_))
        ));
        std::fs::remove_dir_all(&dir).ok();
    }
}
