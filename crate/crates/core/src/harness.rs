//! Convergence studies and work-precision sweeps.

use std::io::Write;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{integrate, InnerSolverConfig, IntegrateOptions, StepConfig, StepStats};
use crate::problems::{terminal_reference, ProblemConfig, REFERENCE_TOLERANCE};
use crate::tableaux::Method;

/// Errors outside this band are left out of slope fits.
pub const FIT_RANGE: (f64, f64) = (1e-13, 1e-2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    /// `‖e‖₂/√d`.
    #[default]
    L2,
    Linf,
}

impl ErrorNorm {
    pub fn measure(self, y: &DVector<f64>, reference: &DVector<f64>) -> f64 {
        let d = y - reference;
        match self {
            ErrorNorm::L2 => d.norm() / (d.len().max(1) as f64).sqrt(),
            ErrorNorm::Linf => d.amax(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub method: String,
    pub problem: ProblemConfig,
    pub steps: Vec<usize>,
    pub norm: ErrorNorm,
    pub inner: InnerSolverConfig,
    /// Tolerance of the reference solve when no exact solution is known.
    pub reference_tolerance: f64,
}

impl ConvergenceStudy {
    pub fn new(method: &str, problem: ProblemConfig, steps: Vec<usize>) -> Self {
        Self {
            method: method.to_string(),
            problem,
            steps,
            norm: ErrorNorm::L2,
            inner: InnerSolverConfig::adaptive(1e-10),
            reference_tolerance: REFERENCE_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.contains(&0) {
            return Err(Error::InvalidInput("step counts must be positive".into()));
        }
        if self.steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("step counts must be strictly increasing".into()));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub h: f64,
    pub error: Option<f64>,
    pub failure: Option<String>,
    pub stats: StepStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: String,
    pub problem: String,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log H`.
    pub slope: Option<f64>,
}

impl ConvergenceReport {
    /// Columns `scheme, steps, H, error, slope`; failed rows have an empty
    /// error, and the slope is repeated on every row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scheme", "steps", "H", "error", "slope"])?;
        let slope = self.slope.map(|s| format!("{s:?}")).unwrap_or_default();
        for r in &self.rows {
            let err = r.error.map(|e| format!("{e:?}")).unwrap_or_default();
            w.write_record([self.method.clone(), r.steps.to_string(), format!("{:?}", r.h), err, slope.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `log y` against `log x`; needs two distinct points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Slope over the rows whose error lies in [`FIT_RANGE`].
pub fn fit_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.error.map(|e| (r.h, e)))
        .filter(|(_, e)| (FIT_RANGE.0..=FIT_RANGE.1).contains(e))
        .collect();
    log_log_slope(&pts)
}

fn step_config(inner: InnerSolverConfig) -> StepConfig {
    StepConfig { compute_embedded: false, ..StepConfig::with_inner(inner) }
}

/// Runs every row of a study against `reference`, or against the problem's
/// own terminal reference when none is given. Rows run in parallel.
pub fn run_convergence(study: &ConvergenceStudy, reference: Option<&DVector<f64>>) -> Result<ConvergenceReport> {
    study.validate()?;
    let method = crate::tableaux::lookup_method(&study.method)?;
    let owned;
    let reference = match reference {
        Some(r) => r,
        None => {
            owned = terminal_reference(&study.problem.build()?, study.reference_tolerance)?;
            &owned
        }
    };
    let rows = study
        .steps
        .par_iter()
        .map(|&n| convergence_row(&method, study, n, reference))
        .collect::<Result<Vec<_>>>()?;
    let slope = fit_slope(&rows);
    Ok(ConvergenceReport { method: study.method.clone(), problem: study.problem.name().to_string(), rows, slope })
}

fn convergence_row(method: &Method, study: &ConvergenceStudy, n: usize, reference: &DVector<f64>) -> Result<ConvergenceRow> {
    let mut p = study.problem.build()?;
    let h = (p.t_span.1 - p.t_span.0) / n as f64;
    let opts = IntegrateOptions { step: step_config(study.inner), store_states: false };
    Ok(match integrate(method, &mut *p.system, p.t_span, &p.y0, h, &opts) {
        Ok(tr) => ConvergenceRow {
            steps: n,
            h,
            error: Some(study.norm.measure(tr.final_state(), reference)),
            failure: None,
            stats: tr.stats,
        },
        Err(e) => ConvergenceRow { steps: n, h, error: None, failure: Some(e.to_string()), stats: StepStats::default() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkPrecisionRun {
    pub scheme: String,
    pub h: f64,
    pub error: Option<f64>,
    /// Median wall time of the integration loop.
    pub seconds: f64,
    pub stats: StepStats,
    pub inner: InnerSolverConfig,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkPrecisionOptions {
    pub inner: InnerSolverConfig,
    pub repetitions: usize,
    pub norm: ErrorNorm,
}

impl Default for WorkPrecisionOptions {
    fn default() -> Self {
        Self { inner: InnerSolverConfig::implicit(5), repetitions: 3, norm: ErrorNorm::L2 }
    }
}

/// One row per scheme and step size. Rows run sequentially so wall times
/// are not disturbed by each other.
pub fn run_work_precision(
    schemes: &[String],
    problem: &ProblemConfig,
    h_list: &[f64],
    opts: &WorkPrecisionOptions,
    reference: Option<&DVector<f64>>,
) -> Result<Vec<WorkPrecisionRun>> {
    if h_list.is_empty() || schemes.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(h) = h_list.iter().find(|h| !(**h > 0.0)) {
        return Err(Error::InvalidInput(format!("step sizes must be positive, got {h}")));
    }
    opts.inner.validate()?;
    let methods = schemes.iter().map(|s| crate::tableaux::lookup_method(s)).collect::<Result<Vec<_>>>()?;
    let owned;
    let reference = match reference {
        Some(r) => r,
        None => {
            owned = terminal_reference(&problem.build()?, REFERENCE_TOLERANCE)?;
            &owned
        }
    };
    let mut out = Vec::new();
    for (name, method) in schemes.iter().zip(&methods) {
        for &h in h_list {
            out.push(work_precision_row(name, method, problem, h, opts, reference)?);
        }
    }
    Ok(out)
}

fn work_precision_row(
    name: &str,
    method: &Method,
    problem: &ProblemConfig,
    h: f64,
    opts: &WorkPrecisionOptions,
    reference: &DVector<f64>,
) -> Result<WorkPrecisionRun> {
    let iopts = IntegrateOptions { step: step_config(opts.inner), store_states: false };
    let mut times = Vec::new();
    let mut last = None;
    for _ in 0..opts.repetitions.max(1) {
        let mut p = problem.build()?;
        let start = Instant::now();
        let r = integrate(method, &mut *p.system, p.t_span, &p.y0, h, &iopts);
        times.push(start.elapsed().as_secs_f64());
        match r {
            Ok(tr) => last = Some(tr),
            Err(e) => {
                return Ok(WorkPrecisionRun {
                    scheme: name.to_string(),
                    h,
                    error: None,
                    seconds: times[0],
                    stats: StepStats::default(),
                    inner: opts.inner,
                    failure: Some(e.to_string()),
                })
            }
        }
    }
    times.sort_by(f64::total_cmp);
    let tr = last.expect("at least one repetition");
    Ok(WorkPrecisionRun {
        scheme: name.to_string(),
        h,
        error: Some(opts.norm.measure(tr.final_state(), reference)),
        seconds: times[times.len() / 2].max(f64::MIN_POSITIVE),
        stats: tr.stats,
        inner: opts.inner,
        failure: None,
    })
}

/// Columns `scheme, H, error, seconds, newton_iters, inner_steps`.
pub fn write_work_precision_csv<W: Write>(runs: &[WorkPrecisionRun], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "H", "error", "seconds", "newton_iters", "inner_steps"])?;
    for r in runs {
        w.write_record([
            r.scheme.clone(),
            format!("{:?}", r.h),
            r.error.map(|e| format!("{e:?}")).unwrap_or_default(),
            format!("{:?}", r.seconds),
            r.stats.newton_iterations.to_string(),
            r.stats.inner_steps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wall time of `runs` at `error`, interpolated linearly in log-log
/// coordinates between the two nearest successful runs bracketing it.
pub fn time_at_error(runs: &[WorkPrecisionRun], error: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = runs
        .iter()
        .filter_map(|r| r.error.filter(|e| *e > 0.0).map(|e| (e.ln(), r.seconds.ln())))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x = error.ln();
    pts.windows(2).find(|w| w[0].0 <= x && x <= w[1].0).map(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let y = if x1 == x0 { y0.min(y1) } else { y0 + (y1 - y0) * (x - x0) / (x1 - x0) };
        y.exp()
    })
}

/// Speedup of each successful `fast` run over `baseline` at the same error.
/// Runs whose error lies outside the baseline's range are skipped.
pub fn speedups(baseline: &[WorkPrecisionRun], fast: &[WorkPrecisionRun]) -> Vec<(f64, f64)> {
    fast.iter()
        .filter_map(|r| {
            let e = r.error?;
            time_at_error(baseline, e).map(|t| (e, t / r.seconds))
        })
        .collect()
}

/// Pairs `(baseline, other)` whose errors agree within `factor`, with the
/// wall-time ratio `baseline/other`.
pub fn matched_pairs(baseline: &[WorkPrecisionRun], other: &[WorkPrecisionRun], factor: f64) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for b in baseline {
        for o in other {
            if let (Some(eb), Some(eo)) = (b.error, o.error) {
                if eb > 0.0 && eo > 0.0 && (eb / eo).max(eo / eb) <= factor {
                    out.push((eb, eo, b.seconds / o.seconds));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(h: f64, e: Option<f64>) -> ConvergenceRow {
        ConvergenceRow { steps: 1, h, error: e, failure: None, stats: StepStats::default() }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<_> = (0..5).map(|k| row(0.1 / 2f64.powi(k), Some(3.0 * (0.1 / 2f64.powi(k)).powi(3)))).collect();
        assert!((fit_slope(&rows).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn slope_ignores_out_of_range_and_failed_rows() {
        let rows = vec![row(0.4, Some(0.5)), row(0.2, Some(4e-4)), row(0.1, Some(1e-4)), row(0.05, None), row(0.025, Some(1e-15))];
        assert!((fit_slope(&rows).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_slope(&rows[..2]), None);
    }

    #[test]
    fn interpolated_time() {
        let mk = |e: f64, s: f64| WorkPrecisionRun {
            scheme: "x".into(),
            h: 1.0,
            error: Some(e),
            seconds: s,
            stats: StepStats::default(),
            inner: InnerSolverConfig::default(),
            failure: None,
        };
        let base = vec![mk(1e-2, 1.0), mk(1e-4, 100.0)];
        assert!((time_at_error(&base, 1e-3).unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(time_at_error(&base, 1e-5), None);
        let sp = speedups(&base, &[mk(1e-3, 2.0)]);
        assert!((sp[0].1 - 5.0).abs() < 1e-9);
        assert_eq!(matched_pairs(&base, &[mk(1.5e-2, 0.5)], 2.0).len(), 1);
    }
}
