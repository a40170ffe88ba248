use mrigark::integrators::{LinearSplit, PartitionedSystem};
use mrigark::linalg::finite_difference_jacobian;
use mrigark::linalg::JacobianStructure;
use mrigark::problems::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn kpr() -> Kpr {
    Kpr::new(KprConfig::default())
}

fn rhs(sys: &dyn PartitionedSystem, t: f64, y: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(sys.dim());
    sys.rhs(t, y, &mut out);
    out
}

fn kpr_residual(p: &Kpr, t: f64) -> f64 {
    let y = p.exact(t);
    let dt = 1e-5;
    // Five-point derivative of the exact solution.
    let d = (p.exact(t - 2.0 * dt) - p.exact(t - dt) * 8.0 + p.exact(t + dt) * 8.0 - p.exact(t + 2.0 * dt)) / (12.0 * dt);
    (rhs(p, t, &y) - d).amax()
}

#[test]
fn kpr_initial_state() {
    let y = kpr().initial_state();
    assert_eq!(y[0], 2.0);
    assert!((y[1] - 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn kpr_coupling_matrix() {
    let om = KprConfig::default().coupling();
    let expect = DMatrix::from_row_slice(2, 2, &[-10.0, -8.1, 0.9, -1.0]);
    assert!((om - expect).amax() < 1e-14);
}

#[test]
fn kpr_exact_solution_solves_the_ode() {
    let p = kpr();
    assert!(kpr_residual(&p, 1.0) < 1e-8);
    for k in 0..100 {
        let t = 0.1 + k as f64 * (p.cfg.t_end - 0.2) / 99.0;
        let r = kpr_residual(&p, t);
        assert!(r < 1e-8, "t = {t}: {r:e}");
    }
}

#[test]
fn kpr_exact_solution_analytic_residual() {
    // y_i' written out in closed form, so no finite-difference error.
    let p = kpr();
    let w = p.cfg.omega;
    for k in 0..100 {
        let t = k as f64 * p.cfg.t_end / 99.0;
        let y = p.exact(t);
        let dy = [-w * (w * t).sin() / (2.0 * y[0]), -t.sin() / (2.0 * y[1])];
        let f = rhs(&p, t, &y);
        assert!((f[0] - dy[0]).abs() < 1e-10 && (f[1] - dy[1]).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn kpr_rejects_nonpositive_states() {
    let p = kpr();
    assert!(p.check_state(&DVector::from_vec(vec![1.0, 1.0])).is_ok());
    assert!(p.check_state(&DVector::from_vec(vec![1.0, -0.5])).is_err());
}

#[test]
fn gray_scott_homogeneous_state_is_steady() {
    let g = GrayScott::new(GrayScottConfig::default());
    let m = g.cells();
    let y = DVector::from_fn(2 * m, |i, _| if i < m { 1.0 } else { 0.0 });
    let mut out = DVector::zeros(2 * m);
    g.fast_rhs(0.0, &y, &mut out);
    assert_eq!(out.amax(), 0.0);
    g.slow_rhs(0.0, &y, &mut out);
    assert!(out.amax() < 1e-12);
}

#[test]
fn gray_scott_stencil_value() {
    let cfg = GrayScottConfig::default();
    let g = GrayScott::new(cfg);
    let n = cfg.n;
    let m = g.cells();
    let mut y = DVector::from_fn(2 * m, |i, _| if i < m { 1.0 } else { 0.0 });
    let (i, j) = (5, 7);
    y[i * n + j] += 0.3;
    let mut out = DVector::zeros(2 * m);
    g.slow_rhs(0.0, &y, &mut out);
    let h2 = 1.0 / (n * n) as f64;
    let centre = (1.0 + 1.0 + 1.0 + 1.0 - 4.0 * 1.3) * cfg.eps_u / h2;
    let neighbour = (1.3 + 3.0 - 4.0) * cfg.eps_u / h2;
    assert!((out[i * n + j] - centre).abs() < 1e-10);
    assert!((out[(i + 1) * n + j] - neighbour).abs() < 1e-10);
    assert!((out[i * n + j - 1] - neighbour).abs() < 1e-10);
}

#[test]
fn gray_scott_reaction_jacobian() {
    let g = GrayScott::new(GrayScottConfig::default());
    let j = g.reaction_jacobian_at(1.0, 0.5);
    let expect = [[-0.268, -1.0], [0.25, 0.93]];
    for r in 0..2 {
        for c in 0..2 {
            assert!((j[r][c] - expect[r][c]).abs() < 1e-14);
        }
    }
}

#[test]
fn gray_scott_jacobians_match_finite_differences() {
    let g = GrayScott::new(GrayScottConfig { n: 8, ..GrayScottConfig::default() });
    let y = g.initial_state().map(|v| v + 0.01);
    let f0 = rhs(&g, 0.0, &y);
    let fd = finite_difference_jacobian(|v, out| g.rhs(0.0, v, out), &y, &f0, JacobianStructure::Dense).to_dense();
    let an = g.jacobian(0.0, &y).to_dense();
    assert!((fd - an).amax() < 1e-5);
}

#[test]
fn gray_scott_laplacian_is_symmetric_negative_semidefinite() {
    for n in [8, 12, 16] {
        let g = GrayScott::new(GrayScottConfig { n, ..GrayScottConfig::default() });
        let l = g.diffusion();
        assert!((l - l.transpose()).amax() < 1e-12);
        let rows = l.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max);
        assert!(rows < 1e-9);
        let ev = l.clone().symmetric_eigenvalues();
        let scale = l.amax();
        assert!(ev.max() <= 1e-10 * scale, "n = {n}: {}", ev.max());
    }
}

#[test]
fn gray_scott_small_grid_is_rejected() {
    let cfg = ProblemConfig::GrayScott(GrayScottConfig { n: 4, ..GrayScottConfig::default() });
    assert!(cfg.build().is_err());
}

#[test]
fn inverter_drain_current() {
    assert_eq!(drain_current(5.0, 5.0, 0.0, 1.0), 16.0);
    assert_eq!(drain_current(0.5, 5.0, 0.0, 1.0), 0.0);
    assert_eq!(drain_current(5.0, 1.0, 0.0, 1.0), 16.0 - 9.0);
}

#[test]
fn inverter_input_signal() {
    assert_eq!(input_signal(0.0), 0.0);
    assert_eq!(input_signal(7.5), 2.5);
    assert_eq!(input_signal(12.0), 5.0);
    assert_eq!(input_signal(16.0), 2.5);
    assert_eq!(input_signal(40.0), 0.0);
}

#[test]
fn inverter_initial_state_and_first_derivative() {
    let c = InverterChain::new(InverterChainConfig::default());
    let y = c.initial_state();
    assert_eq!(y.len(), 500);
    assert_eq!(y[0], 5.0);
    assert_eq!(y[1], 6.246e-3);
    let f = rhs(&c, 0.0, &y);
    assert_eq!(f[0], 0.0);
}

#[test]
fn inverter_chain_is_nearly_steady_at_start() {
    let c = InverterChain::new(InverterChainConfig::default());
    let y = c.initial_state();
    let f = rhs(&c, 0.0, &y);
    let (lo, hi) = c.window();
    for i in (0..500).filter(|&i| i < lo || i >= hi) {
        assert!(f[i].abs() < 1e-3, "U'_{i} = {:e}", f[i]);
    }
}

#[test]
fn inverter_jacobian_matches_finite_differences() {
    let c = InverterChain::new(InverterChainConfig { m: 12, ..InverterChainConfig::default() });
    let y = DVector::from_fn(12, |i, _| 0.7 + 0.37 * i as f64);
    let f0 = rhs(&c, 6.0, &y);
    let fd = finite_difference_jacobian(|v, out| c.rhs(6.0, v, out), &y, &f0, JacobianStructure::Dense).to_dense();
    assert!((fd - c.jacobian(6.0, &y).to_dense()).amax() < 1e-4);
}

#[test]
fn inverter_window_follows_the_signal() {
    let cfg = ProblemConfig::by_name("inverter-chain").unwrap();
    let mut p = cfg.build().unwrap();
    let (ys, _) = reference_solution(&*p.system, 0.0, &p.y0, &[40.0]).unwrap();
    p.system.begin_step(40.0, &ys[0], 0.1);
    let fast = p.system.fast_indices().unwrap();
    let f = rhs(&*p.system, 40.0, &ys[0]);
    let peak = f.iamax();
    assert!(fast.contains(&peak));
    assert!(fast.len() < 250);
}

#[test]
fn reference_matches_kpr_exact_solution() {
    let p = ProblemConfig::by_name("kpr").unwrap().build().unwrap();
    let t1 = p.t_span.1;
    let (ys, _) = reference_solution(&*p.system, 0.0, &p.y0, &[t1]).unwrap();
    let err = (&ys[0] - p.system.exact_solution(t1).unwrap()).amax();
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn reference_matches_matrix_exponential() {
    let om = KprConfig::default().coupling();
    let sys = LinearSplit::new(DMatrix::zeros(2, 2), om.clone());
    let y0 = DVector::from_vec(vec![1.0, -0.5]);
    let ts = [0.5, 1.0, 2.0];
    let (ys, _) = reference_solution(&sys, 0.0, &y0, &ts).unwrap();
    for (t, y) in ts.iter().zip(&ys) {
        let exact = (&om * *t).exp() * &y0;
        assert!((y - exact).amax() < 1e-9);
    }
}

#[test]
fn reference_over_empty_span_returns_start() {
    let p = ProblemConfig::by_name("gray-scott").unwrap().build().unwrap();
    let (ys, st) = reference_solution(&*p.system, 0.0, &p.y0, &[0.0]).unwrap();
    assert_eq!(ys[0], p.y0);
    assert_eq!(st.steps, 0);
}

#[test]
fn config_overrides_and_names() {
    let c = ProblemConfig::with_overrides("gray-scott", &serde_json::json!({"t_end": 3.0, "n": 8})).unwrap();
    assert_eq!(c.t_end(), 3.0);
    assert_eq!(c.build().unwrap().y0.len(), 128);
    assert!(ProblemConfig::with_overrides("kpr", &serde_json::json!({"bogus": 1})).is_err());
    assert!(ProblemConfig::by_name("lorenz").is_err());
    for name in PROBLEM_NAMES {
        assert_eq!(ProblemConfig::by_name(name).unwrap().name(), name);
    }
}

fn mask_holds(sys: &dyn PartitionedSystem, t: f64, y: &DVector<f64>) -> bool {
    let Some(fast) = sys.fast_indices() else { return true };
    let d = sys.dim();
    let (mut f, mut s) = (DVector::zeros(d), DVector::zeros(d));
    sys.fast_rhs(t, y, &mut f);
    sys.slow_rhs(t, y, &mut s);
    let mut sub = DVector::zeros(fast.len());
    sys.fast_rhs_subset(t, y, &fast, &mut sub);
    (0..d).all(|i| if fast.contains(&i) { s[i] == 0.0 } else { f[i] == 0.0 })
        && fast.iter().zip(sub.iter()).all(|(&i, &v)| v == f[i])
}

proptest! {
    #[test]
    fn kpr_partition_mask(t in 0.0..8.0f64, a in 1.0..3.0f64, b in 1.0..3.0f64) {
        let y = DVector::from_vec(vec![a, b]);
        prop_assert!(mask_holds(&kpr(), t, &y));
    }

    #[test]
    fn inverter_partition_mask(t in 0.0..30.0f64, seed in prop::collection::vec(0.0..5.0f64, 40), lo in 0usize..30, w in 1usize..10) {
        let mut c = InverterChain::new(InverterChainConfig { m: 40, ..InverterChainConfig::default() });
        c.set_window(lo, lo + w);
        let y = DVector::from_vec(seed);
        prop_assert!(mask_holds(&c, t, &y));
    }

    #[test]
    fn gray_scott_parts_sum_to_rhs(vals in prop::collection::vec(0.0..1.5f64, 128)) {
        let g = GrayScott::new(GrayScottConfig { n: 8, ..GrayScottConfig::default() });
        let y = DVector::from_vec(vals);
        let (mut f, mut s) = (DVector::zeros(128), DVector::zeros(128));
        g.fast_rhs(0.0, &y, &mut f);
        g.slow_rhs(0.0, &y, &mut s);
        prop_assert!((f + s - rhs(&g, 0.0, &y)).amax() < 1e-12);
    }
}
