use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::inner::{inner_solve, InnerRhs, InnerSolverConfig, InnerStats};
use super::newton::{newton_solve_stage, LinearizedSolve, NewtonOptions};
use super::system::PartitionedSystem;
use crate::error::{Error, Result};
use crate::linalg::{Factorization, Jacobian};
use crate::tableaux::{ButcherTableau, CouplingPolynomial, IpcScheme, SpcScheme, Structure};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub rhs_evaluations: usize,
    pub jacobian_evaluations: usize,
    pub factorizations: usize,
    pub linear_solves: usize,
    pub inner_solves: usize,
    pub inner_steps: usize,
    pub inner_rejected: usize,
    pub inner_rhs_evaluations: usize,
}

impl StepStats {
    fn add_inner(&mut self, s: &InnerStats) {
        self.inner_solves += 1;
        self.inner_steps += s.steps;
        self.inner_rejected += s.rejected;
        self.inner_rhs_evaluations += s.rhs_evaluations;
        self.jacobian_evaluations += s.jacobian_evaluations;
        self.factorizations += s.factorizations;
        self.newton_iterations += s.newton_iterations;
    }
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.newton_iterations += o.newton_iterations;
        self.rhs_evaluations += o.rhs_evaluations;
        self.jacobian_evaluations += o.jacobian_evaluations;
        self.factorizations += o.factorizations;
        self.linear_solves += o.linear_solves;
        self.inner_solves += o.inner_solves;
        self.inner_steps += o.inner_steps;
        self.inner_rejected += o.inner_rejected;
        self.inner_rhs_evaluations += o.inner_rhs_evaluations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub inner: InnerSolverConfig,
    pub newton: NewtonOptions,
    pub compute_embedded: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { inner: InnerSolverConfig::default(), newton: NewtonOptions::default(), compute_embedded: true }
    }
}

impl StepConfig {
    pub fn with_inner(inner: InnerSolverConfig) -> Self {
        Self { inner, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub y_next: DVector<f64>,
    pub y_embedded: Option<DVector<f64>>,
    pub stats: StepStats,
}

/// Full-system Jacobian and its factorization, reused across stages and
/// steps until marked stale.
/// Relative change of `hγ` below which an existing factorization is reused.
const SCALE_REUSE: f64 = 1e-8;

/// Newton iterations after which the next stage starts from a fresh Jacobian.
const SLOW_NEWTON: usize = 4;

#[derive(Default)]
struct JacobianCache {
    jac: Option<Jacobian>,
    fact: Option<(f64, Factorization)>,
    stale: bool,
}

struct StageLin<'a, S: ?Sized> {
    sys: &'a S,
    t: f64,
    scale: f64,
    cache: &'a mut JacobianCache,
    stats: &'a mut StepStats,
}

impl<S: PartitionedSystem + ?Sized> StageLin<'_, S> {
    fn prepare(&mut self, y: &DVector<f64>) -> Result<()> {
        if self.cache.jac.is_none() || self.cache.stale {
            self.cache.jac = Some(self.sys.jacobian(self.t, y));
            self.cache.fact = None;
            self.cache.stale = false;
            self.stats.jacobian_evaluations += 1;
        }
        if self.cache.fact.as_ref().is_none_or(|(s, _)| (s - self.scale).abs() > SCALE_REUSE * self.scale.abs()) {
            let f = self.cache.jac.as_ref().expect("set above").iteration_matrix(self.scale)?;
            self.cache.fact = Some((self.scale, f));
            self.stats.factorizations += 1;
        }
        Ok(())
    }
}

impl<S: PartitionedSystem + ?Sized> LinearizedSolve for StageLin<'_, S> {
    fn solve(&mut self, r: &mut DVector<f64>) -> Result<()> {
        self.stats.linear_solves += 1;
        self.cache.fact.as_ref().expect("prepared").1.solve_mut(r)
    }

    fn refresh(&mut self, y: &DVector<f64>) -> Result<bool> {
        self.cache.stale = true;
        self.prepare(y)?;
        Ok(true)
    }
}

/// Right-hand side of a corrector ODE
/// `v' = s f^F(t₀ + s θ, v) + Σₖ (θ/H)ᵏ Pₖ`.
struct Corrector<'a, S: ?Sized> {
    sys: &'a S,
    t0: f64,
    tscale: f64,
    h: f64,
    forcing: &'a [DVector<f64>],
    reduced: Option<Reduced>,
}

/// Only the fast components are integrated; slow components follow the
/// closed-form integral of the forcing.
struct Reduced {
    fast: Vec<usize>,
    deps: Vec<usize>,
    v0: DVector<f64>,
    work: DVector<f64>,
}

impl<S: PartitionedSystem + ?Sized> Corrector<'_, S> {
    fn fill_work(&mut self, theta: f64, v: &DVector<f64>) {
        let tau = theta / self.h;
        let r = self.reduced.as_mut().expect("reduced mode");
        for (p, &i) in r.fast.iter().enumerate() {
            r.work[i] = v[p];
        }
        for &d in &r.deps {
            let mut acc = r.v0[d];
            let mut tp = tau;
            for (k, pk) in self.forcing.iter().enumerate() {
                acc += self.h * tp / (k + 1) as f64 * pk[d];
                tp *= tau;
            }
            r.work[d] = acc;
        }
    }
}

impl<S: PartitionedSystem + ?Sized> InnerRhs for Corrector<'_, S> {
    fn dim(&self) -> usize {
        self.reduced.as_ref().map_or(self.sys.dim(), |r| r.fast.len())
    }

    fn eval(&mut self, theta: f64, v: &DVector<f64>, out: &mut DVector<f64>) {
        let t = self.t0 + self.tscale * theta;
        let tau = theta / self.h;
        if self.reduced.is_some() {
            self.fill_work(theta, v);
            let r = self.reduced.as_ref().expect("checked");
            self.sys.fast_rhs_subset(t, &r.work, &r.fast, out);
            if self.tscale != 1.0 {
                *out *= self.tscale;
            }
            let mut tp = 1.0;
            for pk in self.forcing {
                for (o, &i) in out.iter_mut().zip(&r.fast) {
                    *o += tp * pk[i];
                }
                tp *= tau;
            }
        } else {
            self.sys.fast_rhs(t, v, out);
            if self.tscale != 1.0 {
                *out *= self.tscale;
            }
            let mut tp = 1.0;
            for pk in self.forcing {
                out.axpy(tp, pk, 1.0);
                tp *= tau;
            }
        }
    }

    fn jacobian(&mut self, theta: f64, v: &DVector<f64>) -> Jacobian {
        let t = self.t0 + self.tscale * theta;
        let j = if self.reduced.is_some() {
            self.fill_work(theta, v);
            let r = self.reduced.as_ref().expect("checked");
            self.sys.fast_jacobian_or_fd(t, &r.work).gather(&r.fast)
        } else {
            self.sys.fast_jacobian_or_fd(t, v)
        };
        j.scaled(self.tscale)
    }
}

/// `Pₖ = Σⱼ wᵏⱼ xⱼ` for a coupling row.
fn forcing_terms(
    terms: &mut [DVector<f64>],
    poly: &CouplingPolynomial,
    row: usize,
    values: &[DVector<f64>],
    upto: usize,
) {
    for (k, pk) in terms.iter_mut().enumerate() {
        if k > poly.degree() {
            break;
        }
        let c = &poly.coeffs()[k];
        for (j, x) in values.iter().enumerate().take(upto) {
            let w = c[(row, j)];
            if w != 0.0 {
                pk.axpy(w, x, 1.0);
            }
        }
    }
}

fn check_structure(t: &ButcherTableau, name: &str) -> Result<()> {
    if t.structure() == Structure::FullyImplicit {
        return Err(Error::FullyImplicit(name.to_string()));
    }
    Ok(())
}

/// Multirate and single-rate steppers sharing one Jacobian cache.
pub struct Stepper {
    cfg: StepConfig,
    cache: JacobianCache,
}

impl Stepper {
    pub fn new(cfg: StepConfig) -> Self {
        Self { cfg, cache: JacobianCache::default() }
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    /// Forces a fresh Jacobian at the next implicit stage.
    pub fn invalidate(&mut self) {
        self.cache.stale = true;
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_stage<S: PartitionedSystem + ?Sized>(
        &mut self,
        sys: &S,
        t: f64,
        base: &DVector<f64>,
        scale: f64,
        guess: DVector<f64>,
        stats: &mut StepStats,
    ) -> Result<DVector<f64>> {
        if scale == 0.0 {
            return Ok(base.clone());
        }
        let mut evals = 0;
        let mut tmp = DVector::zeros(base.len());
        let mut attempt = |cache: &mut JacobianCache, stats: &mut StepStats, guess: DVector<f64>| {
            let mut lin = StageLin { sys, t, scale, cache, stats };
            lin.prepare(&guess)?;
            newton_solve_stage(
                |y, r| {
                    sys.rhs(t, y, &mut tmp);
                    evals += 1;
                    r.copy_from(y);
                    *r -= base;
                    r.axpy(-scale, &tmp, 1.0);
                    Ok(())
                },
                guess,
                &mut lin,
                &self.cfg.newton,
            )
        };
        let result = match attempt(&mut self.cache, stats, guess.clone()) {
            Err(Error::NewtonFailure { .. }) => {
                self.cache.stale = true;
                attempt(&mut self.cache, stats, guess)
            }
            r => r,
        };
        stats.rhs_evaluations += evals;
        let (y, iters) = result?;
        stats.newton_iterations += iters;
        if iters > SLOW_NEWTON {
            self.cache.stale = true;
        }
        Ok(y)
    }

    /// Solves the corrector ODE from `y0` over `θ ∈ [0, H]`.
    #[allow(clippy::too_many_arguments)]
    fn correct<S: PartitionedSystem + ?Sized>(
        &self,
        sys: &S,
        t0: f64,
        tscale: f64,
        h: f64,
        y0: &DVector<f64>,
        forcing: &[DVector<f64>],
        stats: &mut StepStats,
    ) -> Result<DVector<f64>> {
        let closed_form = |out: &mut DVector<f64>, idx: Option<&[usize]>| {
            for (k, pk) in forcing.iter().enumerate() {
                let w = h / (k + 1) as f64;
                match idx {
                    None => out.axpy(w, pk, 1.0),
                    Some(ix) => ix.iter().for_each(|&i| out[i] += w * pk[i]),
                }
            }
        };
        if tscale == 0.0 {
            let mut y = y0.clone();
            closed_form(&mut y, None);
            return Ok(y);
        }
        let fast = if self.cfg.inner.reduced { sys.fast_indices() } else { None };
        let Some(fast) = fast else {
            let mut rhs = Corrector { sys, t0, tscale, h, forcing, reduced: None };
            let (y, st) = inner_solve(&mut rhs, y0, h, &self.cfg.inner)?;
            stats.add_inner(&st);
            return Ok(y);
        };
        let n = sys.dim();
        let mut is_fast = vec![false; n];
        fast.iter().for_each(|&i| is_fast[i] = true);
        let slow: Vec<usize> = (0..n).filter(|&i| !is_fast[i]).collect();
        let mut y = y0.clone();
        closed_form(&mut y, Some(&slow));
        if fast.is_empty() {
            return Ok(y);
        }
        let deps = sys.fast_dependencies().unwrap_or_else(|| slow.clone());
        let v0 = DVector::from_iterator(fast.len(), fast.iter().map(|&i| y0[i]));
        let reduced = Reduced { fast, deps, v0: y0.clone(), work: y0.clone() };
        let mut rhs = Corrector { sys, t0, tscale, h, forcing, reduced: Some(reduced) };
        let (v, st) = inner_solve(&mut rhs, &v0, h, &self.cfg.inner)?;
        stats.add_inner(&st);
        let r = rhs.reduced.expect("reduced mode");
        for (p, &i) in r.fast.iter().enumerate() {
            y[i] = v[p];
        }
        Ok(y)
    }

    fn eval_split<S: PartitionedSystem + ?Sized>(
        sys: &S,
        t: f64,
        y: &DVector<f64>,
        stats: &mut StepStats,
    ) -> (DVector<f64>, DVector<f64>) {
        let mut ff = DVector::zeros(y.len());
        let mut fs = DVector::zeros(y.len());
        sys.fast_rhs(t, y, &mut ff);
        sys.slow_rhs(t, y, &mut fs);
        stats.rhs_evaluations += 1;
        (ff, fs)
    }

    /// One step of a step predictor-corrector scheme.
    pub fn spc_step<S: PartitionedSystem + ?Sized>(
        &mut self,
        s: &SpcScheme,
        sys: &S,
        t: f64,
        y: &DVector<f64>,
        h: f64,
    ) -> Result<StepResult> {
        check_structure(&s.base, &s.name)?;
        let mut stats = StepStats::default();
        if h == 0.0 {
            return Ok(StepResult { y_next: y.clone(), y_embedded: None, stats });
        }
        let tab = &s.base;
        let ns = tab.stages();
        let mut f_full: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut f_slow: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut guess = y.clone();
        for i in 0..ns {
            let ti = t + tab.c[i] * h;
            let mut base = y.clone();
            for (j, fj) in f_full.iter().enumerate() {
                if tab.a[(i, j)] != 0.0 {
                    base.axpy(h * tab.a[(i, j)], fj, 1.0);
                }
            }
            let yi = self.solve_stage(sys, ti, &base, h * tab.a[(i, i)], guess, &mut stats)?;
            if i + 1 < ns {
                let (ff, fs) = Self::eval_split(sys, ti, &yi, &mut stats);
                f_full.push(ff + &fs);
                f_slow.push(fs);
            } else {
                let mut fs = DVector::zeros(y.len());
                sys.slow_rhs(ti, &yi, &mut fs);
                stats.rhs_evaluations += 1;
                f_slow.push(fs);
            }
            guess = yi;
        }
        let forcing = |p: &CouplingPolynomial| {
            let mut terms = vec![DVector::zeros(y.len()); p.degree() + 1];
            forcing_terms(&mut terms, p, 0, &f_slow, ns);
            terms
        };
        let y_next = self.correct(sys, t, 1.0, h, y, &forcing(&s.gamma), &mut stats)?;
        let y_embedded = match (&s.gamma_hat, self.cfg.compute_embedded) {
            (Some(gh), true) => Some(self.correct(sys, t, 1.0, h, y, &forcing(gh), &mut stats)?),
            _ => None,
        };
        Ok(StepResult { y_next, y_embedded, stats })
    }

    /// One step of an internal-stage predictor-corrector scheme.
    pub fn ipc_step<S: PartitionedSystem + ?Sized>(
        &mut self,
        s: &IpcScheme,
        sys: &S,
        t: f64,
        y: &DVector<f64>,
        h: f64,
    ) -> Result<StepResult> {
        check_structure(&s.base, &s.name)?;
        let mut stats = StepStats::default();
        if h == 0.0 {
            return Ok(StepResult { y_next: y.clone(), y_embedded: None, stats });
        }
        let tab = &s.base;
        let ns = tab.stages();
        let d = y.len();
        let deg = s.gamma.degree().max(s.psi.degree());
        let embedded = match (&s.gamma_hat, &s.psi_hat) {
            (Some(g), Some(p)) if self.cfg.compute_embedded => Some((g, p)),
            _ => None,
        };
        let mut f_full: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut f_slow: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut f_star: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut stages: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut prev = y.clone();
        let mut t_prev = t;
        for i in 0..ns {
            let ti = t + tab.c[i] * h;
            let mut base = y.clone();
            for (j, fj) in f_full.iter().enumerate() {
                if tab.a[(i, j)] != 0.0 {
                    base.axpy(h * tab.a[(i, j)], fj, 1.0);
                }
            }
            let star = self.solve_stage(sys, ti, &base, h * tab.a[(i, i)], prev.clone(), &mut stats)?;
            let mut fs = DVector::zeros(d);
            sys.slow_rhs(ti, &star, &mut fs);
            stats.rhs_evaluations += 1;
            f_star.push(fs);

            let mut terms = vec![DVector::zeros(d); deg + 1];
            forcing_terms(&mut terms, &s.gamma, i, &f_slow, i);
            forcing_terms(&mut terms, &s.psi, i, &f_star, i + 1);
            let yi = self.correct(sys, t_prev, s.delta_c[i], h, &prev, &terms, &mut stats)?;

            let need_slow = i + 1 < ns || embedded.is_some_and(|(g, _)| g.coeffs().iter().any(|c| c[(0, i)] != 0.0));
            if i + 1 < ns {
                let (ff, fs) = Self::eval_split(sys, ti, &yi, &mut stats);
                f_full.push(ff + &fs);
                f_slow.push(fs);
            } else if need_slow {
                let mut fs = DVector::zeros(d);
                sys.slow_rhs(ti, &yi, &mut fs);
                stats.rhs_evaluations += 1;
                f_slow.push(fs);
            }
            if embedded.is_some() {
                stages.push(yi.clone());
            }
            prev = yi;
            t_prev = ti;
        }
        let y_embedded = match embedded {
            Some((gh, ph)) if ns >= 2 => {
                let edeg = gh.degree().max(ph.degree());
                let mut terms = vec![DVector::zeros(d); edeg + 1];
                forcing_terms(&mut terms, gh, 0, &f_slow, f_slow.len());
                forcing_terms(&mut terms, ph, 0, &f_star, ns);
                let from = &stages[ns - 2];
                let t0 = t + tab.c[ns - 2] * h;
                Some(self.correct(sys, t0, s.delta_c[ns - 1], h, from, &terms, &mut stats)?)
            }
            _ => None,
        };
        Ok(StepResult { y_next: prev, y_embedded, stats })
    }

    /// One step of a diagonally implicit Runge–Kutta method on the full
    /// right-hand side.
    pub fn dirk_step<S: PartitionedSystem + ?Sized>(
        &mut self,
        tab: &ButcherTableau,
        sys: &S,
        t: f64,
        y: &DVector<f64>,
        h: f64,
    ) -> Result<StepResult> {
        check_structure(tab, "single-rate tableau")?;
        let mut stats = StepStats::default();
        if h == 0.0 {
            return Ok(StepResult { y_next: y.clone(), y_embedded: None, stats });
        }
        let ns = tab.stages();
        let mut f: Vec<DVector<f64>> = Vec::with_capacity(ns);
        let mut guess = y.clone();
        for i in 0..ns {
            let ti = t + tab.c[i] * h;
            let mut base = y.clone();
            for (j, fj) in f.iter().enumerate() {
                if tab.a[(i, j)] != 0.0 {
                    base.axpy(h * tab.a[(i, j)], fj, 1.0);
                }
            }
            let yi = self.solve_stage(sys, ti, &base, h * tab.a[(i, i)], guess, &mut stats)?;
            let mut fi = DVector::zeros(y.len());
            sys.rhs(ti, &yi, &mut fi);
            stats.rhs_evaluations += 1;
            f.push(fi);
            guess = yi;
        }
        let combine = |w: &DVector<f64>| {
            let mut out = y.clone();
            for (j, fj) in f.iter().enumerate() {
                out.axpy(h * w[j], fj, 1.0);
            }
            out
        };
        let y_next = if tab.is_stiffly_accurate() { guess } else { combine(&tab.b) };
        let y_embedded = match (&tab.b_hat, self.cfg.compute_embedded) {
            (Some(bh), true) => Some(combine(bh)),
            _ => None,
        };
        Ok(StepResult { y_next, y_embedded, stats })
    }
}

pub fn spc_step<S: PartitionedSystem + ?Sized>(
    s: &SpcScheme,
    sys: &S,
    t: f64,
    y: &DVector<f64>,
    h: f64,
    cfg: &StepConfig,
) -> Result<StepResult> {
    Stepper::new(*cfg).spc_step(s, sys, t, y, h)
}

pub fn ipc_step<S: PartitionedSystem + ?Sized>(
    s: &IpcScheme,
    sys: &S,
    t: f64,
    y: &DVector<f64>,
    h: f64,
    cfg: &StepConfig,
) -> Result<StepResult> {
    Stepper::new(*cfg).ipc_step(s, sys, t, y, h)
}

pub fn dirk_step<S: PartitionedSystem + ?Sized>(
    tab: &ButcherTableau,
    sys: &S,
    t: f64,
    y: &DVector<f64>,
    h: f64,
    cfg: &StepConfig,
) -> Result<StepResult> {
    Stepper::new(*cfg).dirk_step(tab, sys, t, y, h)
}
