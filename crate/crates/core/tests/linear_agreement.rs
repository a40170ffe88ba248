use mrigark::integrators::{dirk_step, step_method, FnSystem, InnerSolverConfig, LinearSplit, StepConfig, Stepper};
use mrigark::stability::{matrix_m, scalar_r};
use mrigark::tableaux::{lookup, multirate_names, Method};
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> StepConfig {
    StepConfig::with_inner(InnerSolverConfig::adaptive(1e-13))
}

fn one_step(name: &str, sys: &LinearSplit, y0: &DVector<f64>) -> DVector<f64> {
    let m = Method::Multirate(lookup(name).unwrap());
    let mut st = Stepper::new(tight());
    step_method(&mut st, &m, sys, 0.0, y0, 1.0).unwrap().y_next
}

#[test]
fn scalar_step_matches_stability_function() {
    let grid: Vec<f64> = (0..7).map(|i| -4.0 + 4.0 * i as f64 / 6.0).collect();
    for name in multirate_names() {
        let mut worst = 0.0f64;
        for &zf in &grid {
            for &zs in &grid {
                let y = one_step(name, &LinearSplit::scalar(zf, zs), &DVector::from_element(1, 1.0));
                let r = scalar_r(&lookup(name).unwrap(), Complex64::new(zf, 0.0), Complex64::new(zs, 0.0)).unwrap();
                worst = worst.max((y[0] - r.re).abs() + r.im.abs());
            }
        }
        assert!(worst < 1e-7, "{name}: {worst:e}");
    }
}

#[test]
fn matrix_step_matches_transfer_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in multirate_names() {
        let scheme = lookup(name).unwrap();
        for _ in 0..4 {
            let z = DMatrix::from_fn(2, 2, |i, j| if i == j { rng.random_range(-4.0..0.0) } else { rng.random_range(-1.0..1.0) });
            let sys = LinearSplit::rows(&z);
            let zc = Matrix2::from_fn(|i, j| Complex64::new(z[(i, j)], 0.0));
            let m = matrix_m(&scheme, &zc).unwrap();
            for col in 0..2 {
                let e = DVector::from_fn(2, |i, _| if i == col { 1.0 } else { 0.0 });
                let y = one_step(name, &sys, &e);
                for row in 0..2 {
                    let d = (y[row] - m[(row, col)].re).abs();
                    assert!(d < 1e-7, "{name} M[{row},{col}] off by {d:e}");
                }
            }
        }
    }
}

#[test]
fn zero_fast_part_reduces_to_base_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let a: DMatrix<f64> = DMatrix::from_fn(3, 3, |i, j| if i == j { -1.0 } else { 0.3 } * rng.random_range(0.5..1.5));
        let c = rng.random_range(0.5..2.0);
        let a2 = a.clone();
        let sys = FnSystem::new(
            3,
            |_t, _y, out: &mut DVector<f64>| out.fill(0.0),
            move |t: f64, y: &DVector<f64>, out: &mut DVector<f64>| {
                out.copy_from(&(&a2 * y));
                out[0] += (c * t).sin() - 0.1 * y[1] * y[1];
            },
        );
        let y0 = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        for name in multirate_names() {
            let y = one_step(name, &LinearSplit::scalar(0.0, 0.0), &DVector::from_element(1, 1.0));
            assert!((y[0] - 1.0).abs() < 1e-14);
            let scheme = lookup(name).unwrap();
            let m = Method::Multirate(scheme.clone());
            let mut st = Stepper::new(tight());
            let ym = step_method(&mut st, &m, &sys, 0.2, &y0, 0.3).unwrap().y_next;
            let yb = dirk_step(scheme.base(), &sys, 0.2, &y0, 0.3, &tight()).unwrap().y_next;
            assert!((ym - yb).amax() < 1e-10, "{name}");
        }
    }
}
