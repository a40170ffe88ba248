//! Solvers for the modified fast ODEs `v' = g(θ, v)`, `θ ∈ [0, L]`.

use std::cell::RefCell;
use std::sync::OnceLock;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::newton::{newton_solve_stage, LinearizedSolve, NewtonOptions};
use crate::error::{Error, Result};
use crate::linalg::{Factorization, Jacobian};
use crate::tableaux::{lookup_base, ButcherTableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMode {
    /// Dormand–Prince 5(4) with PI step control.
    Adaptive,
    /// Dormand–Prince 5 at a fixed number of substeps.
    Fixed,
    /// Stiffly accurate ESDIRK4(3)6 at a fixed number of substeps.
    ImplicitFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSolverConfig {
    pub mode: InnerMode,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub substeps: usize,
    pub max_steps: usize,
    /// Integrate only the fast components of component-partitioned systems.
    pub reduced: bool,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        Self { mode: InnerMode::Adaptive, abs_tol: 1e-10, rel_tol: 1e-10, substeps: 10, max_steps: 1_000_000, reduced: true }
    }
}

impl InnerSolverConfig {
    pub fn adaptive(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: tol, ..Self::default() }
    }

    pub fn fixed(substeps: usize) -> Self {
        Self { mode: InnerMode::Fixed, substeps, ..Self::default() }
    }

    pub fn implicit(substeps: usize) -> Self {
        Self { mode: InnerMode::ImplicitFixed, substeps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("inner tolerances must be positive".into()));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidInput("inner substeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub jacobian_evaluations: usize,
    pub factorizations: usize,
    pub newton_iterations: usize,
}

impl std::ops::AddAssign for InnerStats {
    fn add_assign(&mut self, o: Self) {
        self.steps += o.steps;
        self.rejected += o.rejected;
        self.rhs_evaluations += o.rhs_evaluations;
        self.jacobian_evaluations += o.jacobian_evaluations;
        self.factorizations += o.factorizations;
        self.newton_iterations += o.newton_iterations;
    }
}

/// Right-hand side of an inner problem.
pub trait InnerRhs {
    fn dim(&self) -> usize;

    fn eval(&mut self, theta: f64, v: &DVector<f64>, out: &mut DVector<f64>);

    /// `∂g/∂v`; required by [`InnerMode::ImplicitFixed`].
    fn jacobian(&mut self, theta: f64, v: &DVector<f64>) -> Jacobian;
}

/// Wraps a closure; the Jacobian is taken by finite differences.
pub struct FnInner<F> {
    dim: usize,
    f: F,
}

impl<F> FnInner<F>
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> InnerRhs for FnInner<F>
where
    F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&mut self, theta: f64, v: &DVector<f64>, out: &mut DVector<f64>) {
        (self.f)(theta, v, out)
    }

    fn jacobian(&mut self, theta: f64, v: &DVector<f64>) -> Jacobian {
        let mut f0 = DVector::zeros(self.dim);
        (self.f)(theta, v, &mut f0);
        let f = &mut self.f;
        crate::linalg::finite_difference_jacobian(
            |y, out| f(theta, y, out),
            v,
            &f0,
            crate::linalg::JacobianStructure::Dense,
        )
    }
}

/// `v(length)` for `v' = rhs(θ, v)`, `v(0) = v0`.
pub fn inner_solve(
    rhs: &mut dyn InnerRhs,
    v0: &DVector<f64>,
    length: f64,
    cfg: &InnerSolverConfig,
) -> Result<(DVector<f64>, InnerStats)> {
    if length == 0.0 || v0.is_empty() {
        return Ok((v0.clone(), InnerStats::default()));
    }
    match cfg.mode {
        InnerMode::Adaptive => dp5_adaptive(rhs, v0, length, cfg),
        InnerMode::Fixed => dp5_fixed(rhs, v0, length, cfg.substeps),
        InnerMode::ImplicitFixed => esdirk_fixed(rhs, v0, length, cfg.substeps),
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dp5Work {
    k: Vec<DVector<f64>>,
    tmp: DVector<f64>,
}

impl Dp5Work {
    fn new(n: usize) -> Self {
        Self { k: (0..7).map(|_| DVector::zeros(n)).collect(), tmp: DVector::zeros(n) }
    }

    /// One step from `(θ, v)` assuming `k[0] = g(θ, v)`; leaves the new state
    /// in `out` and its derivative in `k[6]`.
    fn step(&mut self, rhs: &mut dyn InnerRhs, theta: f64, v: &DVector<f64>, h: f64, out: &mut DVector<f64>) {
        for s in 1..7 {
            self.tmp.copy_from(v);
            for j in 0..s {
                if A[s][j] != 0.0 {
                    self.tmp.axpy(h * A[s][j], &self.k[j], 1.0);
                }
            }
            rhs.eval(theta + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        // Stage 7 is evaluated at the fifth-order solution.
        out.copy_from(&self.tmp);
    }

    fn error(&self, h: f64, v: &DVector<f64>, vn: &DVector<f64>, atol: f64, rtol: f64) -> f64 {
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * self.k[s][i];
            }
            let sc = atol + rtol * v[i].abs().max(vn[i].abs());
            acc += (h * e / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    }
}

fn initial_step(
    rhs: &mut dyn InnerRhs,
    v0: &DVector<f64>,
    f0: &DVector<f64>,
    length: f64,
    atol: f64,
    rtol: f64,
) -> f64 {
    let n = v0.len() as f64;
    let sc = v0.map(|x| atol + rtol * x.abs());
    let d0 = (v0.component_div(&sc).norm_squared() / n).sqrt();
    let d1 = (f0.component_div(&sc).norm_squared() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(length);
    let v1 = v0 + f0 * h0;
    let mut f1 = DVector::zeros(v0.len());
    rhs.eval(h0, &v1, &mut f1);
    let d2 = ((&f1 - f0).component_div(&sc).norm_squared() / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(length)
}

fn dp5_adaptive(
    rhs: &mut dyn InnerRhs,
    v0: &DVector<f64>,
    length: f64,
    cfg: &InnerSolverConfig,
) -> Result<(DVector<f64>, InnerStats)> {
    const BETA: f64 = 0.04;
    const ALPHA: f64 = 0.2 - 0.75 * BETA;
    const SAFETY: f64 = 0.9;
    const FACMIN: f64 = 0.2;
    const FACMAX: f64 = 10.0;

    let n = v0.len();
    let mut stats = InnerStats::default();
    let mut w = Dp5Work::new(n);
    let mut v = v0.clone();
    let mut vn = DVector::zeros(n);
    rhs.eval(0.0, &v, &mut w.k[0]);
    stats.rhs_evaluations += 1;
    let mut h = initial_step(rhs, &v, &w.k[0].clone(), length, cfg.abs_tol, cfg.rel_tol);
    stats.rhs_evaluations += 1;
    let mut theta = 0.0;
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;
    let mut attempts = 0;
    while theta < length {
        if attempts >= cfg.max_steps {
            return Err(Error::TooManySteps { max_steps: cfg.max_steps, theta });
        }
        attempts += 1;
        if h <= 10.0 * f64::EPSILON * theta.abs().max(length) {
            return Err(Error::StepSizeUnderflow { theta });
        }
        let last = theta + h >= length * (1.0 - 1e-14);
        if last {
            h = length - theta;
        }
        w.step(rhs, theta, &v, h, &mut vn);
        stats.rhs_evaluations += 6;
        let err = w.error(h, &v, &vn, cfg.abs_tol, cfg.rel_tol);
        if err <= 1.0 {
            let fac = if err == 0.0 { FACMAX } else { SAFETY * err.powf(-ALPHA) * err_old.powf(BETA) };
            let fac = fac.clamp(FACMIN, if rejected_last { 1.0 } else { FACMAX });
            err_old = err.max(1e-4);
            theta = if last { length } else { theta + h };
            std::mem::swap(&mut v, &mut vn);
            w.k.swap(0, 6);
            stats.steps += 1;
            h *= fac;
            rejected_last = false;
        } else {
            let fac = if err.is_finite() { (SAFETY * err.powf(-ALPHA)).max(FACMIN) } else { FACMIN };
            h *= fac;
            stats.rejected += 1;
            rejected_last = true;
        }
    }
    Ok((v, stats))
}

fn dp5_fixed(
    rhs: &mut dyn InnerRhs,
    v0: &DVector<f64>,
    length: f64,
    substeps: usize,
) -> Result<(DVector<f64>, InnerStats)> {
    let n = v0.len();
    let mut stats = InnerStats::default();
    let mut w = Dp5Work::new(n);
    let mut v = v0.clone();
    let mut vn = DVector::zeros(n);
    let h = length / substeps as f64;
    rhs.eval(0.0, &v, &mut w.k[0]);
    stats.rhs_evaluations += 1;
    for m in 0..substeps {
        w.step(rhs, m as f64 * h, &v, h, &mut vn);
        stats.rhs_evaluations += 6;
        std::mem::swap(&mut v, &mut vn);
        w.k.swap(0, 6);
        stats.steps += 1;
    }
    Ok((v, stats))
}

fn inner_tableau() -> &'static ButcherTableau {
    static TABLEAU: OnceLock<ButcherTableau> = OnceLock::new();
    TABLEAU.get_or_init(|| lookup_base("ESDIRK4(3)6").expect("registered base"))
}

struct FrozenMatrix<'a, 'b> {
    rhs: &'a RefCell<&'b mut dyn InnerRhs>,
    theta: f64,
    scale: f64,
    fact: &'a mut Factorization,
    stats: &'a mut InnerStats,
}

impl LinearizedSolve for FrozenMatrix<'_, '_> {
    fn solve(&mut self, r: &mut DVector<f64>) -> Result<()> {
        self.fact.solve_mut(r)
    }

    fn refresh(&mut self, y: &DVector<f64>) -> Result<bool> {
        let j = self.rhs.borrow_mut().jacobian(self.theta, y);
        *self.fact = j.iteration_matrix(self.scale)?;
        self.stats.jacobian_evaluations += 1;
        self.stats.factorizations += 1;
        Ok(true)
    }
}

fn esdirk_fixed(
    rhs: &mut dyn InnerRhs,
    v0: &DVector<f64>,
    length: f64,
    substeps: usize,
) -> Result<(DVector<f64>, InnerStats)> {
    let tab = inner_tableau();
    let s = tab.stages();
    let h = length / substeps as f64;
    let scale = h * tab.a[(s - 1, s - 1)];
    let mut stats = InnerStats::default();
    let mut fact = rhs.jacobian(0.0, v0).iteration_matrix(scale)?;
    stats.jacobian_evaluations += 1;
    stats.factorizations += 1;
    let opts = NewtonOptions::default();
    let rhs = RefCell::new(rhs);

    let n = v0.len();
    let mut v = v0.clone();
    let mut k: Vec<DVector<f64>> = (0..s).map(|_| DVector::zeros(n)).collect();
    for m in 0..substeps {
        let theta = m as f64 * h;
        rhs.borrow_mut().eval(theta, &v, &mut k[0]);
        stats.rhs_evaluations += 1;
        for i in 1..s {
            let mut base = v.clone();
            for j in 0..i {
                base.axpy(h * tab.a[(i, j)], &k[j], 1.0);
            }
            let ti = theta + tab.c[i] * h;
            let mut evals = 0;
            let guess = if i == 1 { v.clone() } else { &base + &k[i - 1] * scale };
            let mut lin = FrozenMatrix { rhs: &rhs, theta: ti, scale, fact: &mut fact, stats: &mut stats };
            let (zi, iters) = newton_solve_stage(
                |y, r| {
                    rhs.borrow_mut().eval(ti, y, r);
                    evals += 1;
                    for ((ri, yi), bi) in r.iter_mut().zip(y.iter()).zip(base.iter()) {
                        *ri = yi - bi - scale * *ri;
                    }
                    Ok(())
                },
                guess,
                &mut lin,
                &opts,
            )?;
            stats.newton_iterations += iters;
            stats.rhs_evaluations += evals;
            for ((ki, zj), bj) in k[i].iter_mut().zip(zi.iter()).zip(base.iter()) {
                *ki = (zj - bj) / scale;
            }
            if i == s - 1 {
                v = zi;
            }
        }
        stats.steps += 1;
    }
    Ok((v, stats))
}
