//! Benchmark systems: Gray–Scott (additive split), the KPR system and the
//! inverter chain (component splits), plus a high-accuracy reference solver.

mod gray_scott;
mod inverter;
mod kpr;

pub use gray_scott::{GrayScott, GrayScottConfig};
pub use inverter::{drain_current, input_signal, InverterChain, InverterChainConfig};
pub use kpr::{Kpr, KprConfig};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{inner_solve, InnerRhs, InnerSolverConfig, InnerStats, PartitionedSystem};
use crate::linalg::Jacobian;

pub const PROBLEM_NAMES: [&str; 3] = ["gray-scott", "kpr", "inverter-chain"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum ProblemConfig {
    GrayScott(GrayScottConfig),
    Kpr(KprConfig),
    InverterChain(InverterChainConfig),
}

impl ProblemConfig {
    /// Default configuration of a named problem.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gray-scott" => Ok(Self::GrayScott(GrayScottConfig::default())),
            "kpr" => Ok(Self::Kpr(KprConfig::default())),
            "inverter-chain" => Ok(Self::InverterChain(InverterChainConfig::default())),
            _ => Err(Error::UnknownProblem { name: name.to_string(), available: PROBLEM_NAMES.join(", ") }),
        }
    }

    /// Named problem with fields overridden by a JSON object.
    pub fn with_overrides(name: &str, overrides: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(Self::by_name(name)?)?;
        let (Some(obj), Some(extra)) = (base.as_object_mut(), overrides.as_object()) else {
            return Err(Error::InvalidInput("problem overrides must be a JSON object".into()));
        };
        for (k, v) in extra {
            if k != "problem" {
                obj.insert(k.clone(), v.clone());
            }
        }
        Ok(serde_json::from_value(base)?)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GrayScott(_) => "gray-scott",
            Self::Kpr(_) => "kpr",
            Self::InverterChain(_) => "inverter-chain",
        }
    }

    pub fn t_end(&self) -> f64 {
        match self {
            Self::GrayScott(c) => c.t_end,
            Self::Kpr(c) => c.t_end,
            Self::InverterChain(c) => c.t_end,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        let (system, y0): (Box<dyn PartitionedSystem + Send>, _) = match *self {
            Self::GrayScott(c) => {
                if c.n < 8 {
                    return Err(Error::InvalidInput(format!("Gray-Scott grid must be at least 8, got {}", c.n)));
                }
                let s = GrayScott::new(c);
                let y0 = s.initial_state();
                (Box::new(s), y0)
            }
            Self::Kpr(c) => {
                let s = Kpr::new(c);
                let y0 = s.initial_state();
                (Box::new(s), y0)
            }
            Self::InverterChain(c) => {
                if c.m == 0 {
                    return Err(Error::InvalidInput("inverter chain needs at least one inverter".into()));
                }
                let s = InverterChain::new(c);
                let y0 = s.initial_state();
                (Box::new(s), y0)
            }
        };
        Ok(Problem { config: *self, system, t_span: (0.0, self.t_end()), y0 })
    }
}

/// A ready-to-integrate problem instance.
pub struct Problem {
    pub config: ProblemConfig,
    pub system: Box<dyn PartitionedSystem + Send>,
    pub t_span: (f64, f64),
    pub y0: DVector<f64>,
}

struct Unsplit<'a, S: ?Sized> {
    sys: &'a S,
    t0: f64,
}

impl<S: PartitionedSystem + ?Sized> InnerRhs for Unsplit<'_, S> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn eval(&mut self, theta: f64, v: &DVector<f64>, out: &mut DVector<f64>) {
        self.sys.rhs(self.t0 + theta, v, out);
    }

    fn jacobian(&mut self, theta: f64, v: &DVector<f64>) -> Jacobian {
        self.sys.jacobian(self.t0 + theta, v)
    }
}

/// Tolerance of [`reference_solution`].
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

/// States at the increasing `checkpoints` of the unsplit system, solved by
/// the adaptive Dormand–Prince integrator at `abs = rel = 1e-12`.
pub fn reference_solution<S: PartitionedSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &DVector<f64>,
    checkpoints: &[f64],
) -> Result<(Vec<DVector<f64>>, InnerStats)> {
    reference_solution_with(sys, t0, y0, checkpoints, REFERENCE_TOLERANCE)
}

/// [`reference_solution`] at a chosen tolerance.
pub fn reference_solution_with<S: PartitionedSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &DVector<f64>,
    checkpoints: &[f64],
    tol: f64,
) -> Result<(Vec<DVector<f64>>, InnerStats)> {
    let cfg = InnerSolverConfig { max_steps: 50_000_000, ..InnerSolverConfig::adaptive(tol) };
    let mut t = t0;
    let mut y = y0.clone();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut stats = InnerStats::default();
    for &tc in checkpoints {
        if tc < t {
            return Err(Error::InvalidInput("reference checkpoints must be increasing".into()));
        }
        let (yn, st) = inner_solve(&mut Unsplit { sys, t0: t }, &y, tc - t, &cfg)?;
        stats += st;
        y = yn;
        t = tc;
        out.push(y.clone());
    }
    Ok((out, stats))
}

/// Terminal reference state: the exact solution when known, otherwise a
/// reference solve at `tol`.
pub fn terminal_reference(problem: &Problem, tol: f64) -> Result<DVector<f64>> {
    let (t0, t1) = problem.t_span;
    if let Some(y) = problem.system.exact_solution(t1) {
        return Ok(y);
    }
    let (mut ys, _) = reference_solution_with(&*problem.system, t0, &problem.y0, &[t1], tol)?;
    Ok(ys.pop().expect("one checkpoint"))
}
