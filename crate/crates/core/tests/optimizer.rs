use std::cell::Cell;
use std::f64::consts::PI;

use archerfish::aho::{
    attraction_step, draw_perceiving_angle, is_shooting_phase, jumping_prey_unclamped, levy_sigma,
    levy_step_unclamped, run, shooting_prey_unclamped, Aho, AhoParams,
};
use archerfish::unconstrained::{builtin_problem, BuiltinFunction};
use archerfish::{Evaluation, Problem, RandomStream, SearchSpace};
use proptest::prelude::*;

/// Counts evaluations independently of the optimizer's own counter.
struct Counted<P> {
    inner: P,
    calls: Cell<u64>,
}

impl<P: Problem> Problem for Counted<P> {
    fn space(&self) -> &SearchSpace {
        self.inner.space()
    }
    fn evaluate(&self, x: &[f64]) -> Evaluation {
        self.calls.set(self.calls.get() + 1);
        self.inner.evaluate(x)
    }
}

#[test]
fn sphere_2d_improves_on_every_seed() {
    let sphere = builtin_problem(BuiltinFunction::Sphere, 2);
    let mut stuck = vec![];
    for seed in 0..10 {
        let params = AhoParams::for_dimension(2)
            .population(10)
            .budget(1_000)
            .seed(seed);
        let aho = Aho::new(&sphere, params.clone()).unwrap();
        let initial = aho.state().best.value();
        let record = aho.run_to_completion().unwrap();
        if record.best.value >= initial {
            stuck.push(seed);
        }
    }
    assert!(stuck.is_empty(), "no improvement for seeds {stuck:?}");
}

#[test]
fn shooting_frequency_matches_swap_angle() {
    let mut rng = RandomStream::new(2024);
    for theta in [PI / 12.0, PI / 6.0, PI / 4.0, PI / 3.0, 5.0 * PI / 12.0] {
        let shots = (0..100_000)
            .filter(|_| is_shooting_phase(draw_perceiving_angle(&mut rng), theta))
            .count();
        let freq = shots as f64 / 1e5;
        assert!(
            (freq - 2.0 * theta / PI).abs() < 0.01,
            "theta {theta}: {freq}"
        );
    }
}

#[test]
fn levy_steps_are_heavy_tailed() {
    let mut rng = RandomStream::new(3);
    let sigma = levy_sigma(1.5);
    let mut steps: Vec<f64> = (0..100_000)
        .map(|_| {
            let u = sigma * rng.normal();
            let v = rng.normal();
            levy_step_unclamped(&[0.0], 1.0, &[u], &[v], 1.5)[0].abs()
        })
        .collect();
    steps.sort_by(f64::total_cmp);
    let median = steps[50_000];
    let p99 = steps[99_000];
    assert!(p99 / median > 10.0, "p99 {p99} median {median}");
}

#[test]
fn evaluation_accounting_matches_counter() {
    let problem = Counted {
        inner: builtin_problem(BuiltinFunction::Rastrigin, 3),
        calls: Cell::new(0),
    };
    let params = AhoParams::for_dimension(3)
        .population(12)
        .budget(7_777)
        .seed(5);
    let mut aho = Aho::new(&problem, params).unwrap();
    assert_eq!(problem.calls.get(), 12);
    while aho.step().is_ok() {
        assert_eq!(problem.calls.get(), aho.state().counter.used());
    }
    assert_eq!(problem.calls.get(), 7_777);
}

#[test]
fn trace_samples_at_stride() {
    let sphere = builtin_problem(BuiltinFunction::Sphere, 4);
    let params = AhoParams::for_dimension(4)
        .population(20)
        .budget(20_000)
        .seed(1);
    let record = run(&sphere, &params).unwrap();
    assert!(record.trace.is_monotone());
    assert!(record.trace.samples.iter().all(|p| p.fes % 200 == 0));
    assert_eq!(record.trace.samples.len(), 100);
    assert_eq!(record.trace.samples.last().unwrap().best, record.best);
}

#[test]
fn same_seed_same_record_different_seed_differs() {
    let p = builtin_problem(BuiltinFunction::Ackley, 5);
    let params = AhoParams::for_dimension(5)
        .population(15)
        .budget(6_000)
        .seed(99);
    assert_eq!(run(&p, &params).unwrap(), run(&p, &params).unwrap());
    let other = run(&p, &params.clone().seed(100)).unwrap();
    assert_ne!(run(&p, &params).unwrap().best_position, other.best_position);
}

#[test]
fn invalid_params_are_rejected_before_evaluating() {
    let problem = Counted {
        inner: builtin_problem(BuiltinFunction::Sphere, 2),
        calls: Cell::new(0),
    };
    let params = AhoParams::for_dimension(2).swap_angle(2.0);
    assert!(run(&problem, &params).is_err());
    assert_eq!(problem.calls.get(), 0);
}

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-50.0f64..50.0, d)
}

proptest! {
    #[test]
    fn attraction_displacement_norm(
        (pos, prey) in (1usize..8).prop_flat_map(|d| (vector(d), vector(d)))
    ) {
        let moved = attraction_step(&pos, &prey);
        let r = pos.iter().zip(&prey).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let disp = moved.iter().zip(&pos).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((disp - (-r * r).exp() * r).abs() <= 1e-12 * (1.0 + r));
    }

    #[test]
    fn prey_kernels_touch_only_drawn_coordinates(
        (pos, j, k, theta0, omega) in (2usize..8).prop_flat_map(|d| {
            (vector(d), 0..d, 0..d - 1, -PI..PI, 0.0f64..7.0)
        })
    ) {
        let k = if k >= j { k + 1 } else { k };
        let zero = vec![0.0; pos.len()];
        let shot = shooting_prey_unclamped(&pos, j, theta0, omega, &zero);
        let jump = jumping_prey_unclamped(&pos, j, k, theta0, omega, &zero);
        for i in 0..pos.len() {
            if i != j {
                prop_assert_eq!(shot[i], pos[i]);
            }
            if i != j && i != k {
                prop_assert_eq!(jump[i], pos[i]);
            }
        }
        prop_assert_eq!(jump[j], shot[j]);
        prop_assert!((jump[k] - pos[k] - omega * theta0.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn flock_stays_in_bounds_and_best_dominates(seed in any::<u64>(), d in 1usize..5) {
        let p = builtin_problem(BuiltinFunction::Griewank, d);
        let params = AhoParams::for_dimension(d).population(6).budget(600).seed(seed);
        let mut aho = Aho::new(&p, params).unwrap();
        let mut last = aho.state().best.value();
        while aho.step().is_ok() {
            let s = aho.state();
            prop_assert!(s.best.value() <= last);
            last = s.best.value();
            for a in &s.flock {
                prop_assert!(p.space.contains(&a.position));
                prop_assert!(a.value() >= s.best.value());
            }
        }
    }
}
