use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use super::steppers::{StepConfig, StepResult, StepStats, Stepper};
use super::system::PartitionedSystem;
use crate::error::{Error, Result};
use crate::tableaux::{Method, MultirateScheme};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegrateOptions {
    pub step: StepConfig,
    /// Keep every accepted state, not only the final one.
    pub store_states: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// All states when requested, otherwise only the initial and final one.
    pub states: Vec<DVector<f64>>,
    /// `‖y − ŷ‖₂/√d` per step, when an embedded solution exists.
    pub embedded_errors: Vec<f64>,
    pub stats: StepStats,
    pub steps: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    steps: usize,
    t_final: f64,
    stats: &'a StepStats,
    max_embedded_error: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Rows `t, y1, …, yd`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.states.first().map_or(0, |s| s.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("y{i}")));
        w.write_record(&header)?;
        for (t, y) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:?}")];
            row.extend(y.iter().map(|v| format!("{v:?}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        let max = self.embedded_errors.iter().copied().fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
        Ok(serde_json::to_string_pretty(&Summary {
            steps: self.steps,
            t_final: self.final_time(),
            stats: &self.stats,
            max_embedded_error: max,
        })?)
    }
}

/// Number of macro steps covering `span` with step `h`; the last one is
/// shortened when `h` does not divide the span.
pub fn step_count(span: f64, h: f64) -> usize {
    if span <= 0.0 {
        0
    } else {
        (span / h - 1e-10).ceil().max(1.0) as usize
    }
}

/// Advances one step with any registered method.
pub fn step_method<S: PartitionedSystem + ?Sized>(
    stepper: &mut Stepper,
    method: &Method,
    sys: &S,
    t: f64,
    y: &DVector<f64>,
    h: f64,
) -> Result<StepResult> {
    match method {
        Method::Multirate(MultirateScheme::Spc(s)) => stepper.spc_step(s, sys, t, y, h),
        Method::Multirate(MultirateScheme::Ipc(s)) => stepper.ipc_step(s, sys, t, y, h),
        Method::SingleRate { tableau, .. } => stepper.dirk_step(tableau, sys, t, y, h),
    }
}

/// Fixed-step integration over `t_span`.
pub fn integrate<S: PartitionedSystem + ?Sized>(
    method: &Method,
    sys: &mut S,
    t_span: (f64, f64),
    y0: &DVector<f64>,
    h: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {h}")));
    }
    if y0.len() != sys.dim() {
        return Err(Error::InvalidInput(format!("initial state has {} components, system has {}", y0.len(), sys.dim())));
    }
    opts.step.inner.validate()?;
    let n = step_count(t1 - t0, h);
    let mut stepper = Stepper::new(opts.step);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.clone()],
        embedded_errors: Vec::new(),
        stats: StepStats::default(),
        steps: 0,
    };
    let mut y = y0.clone();
    let scale = (y0.len() as f64).sqrt().max(1.0);
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let (t_next, hk) = if k + 1 == n { (t1, t1 - t) } else { (t0 + (k + 1) as f64 * h, h) };
        let wrap = |e: Error| Error::Step { index: k, t, source: Box::new(e) };
        sys.begin_step(t, &y, hk);
        let r = step_method(&mut stepper, method, &*sys, t, &y, hk).map_err(wrap)?;
        sys.check_state(&r.y_next).map_err(wrap)?;
        traj.stats += r.stats;
        if let Some(ye) = &r.y_embedded {
            traj.embedded_errors.push((&r.y_next - ye).norm() / scale);
        }
        y = r.y_next;
        traj.steps += 1;
        if opts.store_states || k + 1 == n {
            traj.times.push(t_next);
            traj.states.push(y.clone());
        }
    }
    Ok(traj)
}
