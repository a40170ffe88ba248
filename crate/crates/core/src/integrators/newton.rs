use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::norm_inf;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonOptions {
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iterations: 25 }
    }
}

const SLOW_CONTRACTION: f64 = 0.3;
const MAX_HALVINGS: usize = 6;

/// The linear solves of a simplified Newton iteration.
pub trait LinearizedSolve {
    /// Overwrites `r` with `M⁻¹ r` for the current iteration matrix `M`.
    fn solve(&mut self, r: &mut DVector<f64>) -> Result<()>;

    /// Rebuilds the iteration matrix at `y`. Returns false when nothing
    /// changed.
    fn refresh(&mut self, y: &DVector<f64>) -> Result<bool>;
}

/// Simplified Newton iteration for `residual(Y) = 0`.
///
/// Converged when `‖r‖∞ ≤ tol (1 + ‖Y‖∞)`; an update below ten ulps of `Y`
/// is also accepted. The iteration matrix is refreshed at the current iterate
/// whenever the residual contracts by less than a factor 0.3, but never on two
/// consecutive iterations. An update computed with a freshly built matrix
/// is halved until the residual decreases, at most six times. Returns the
/// solution and the iteration count.
pub fn newton_solve_stage<R>(
    mut residual: R,
    guess: DVector<f64>,
    lin: &mut dyn LinearizedSolve,
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, usize)>
where
    R: FnMut(&DVector<f64>, &mut DVector<f64>) -> Result<()>,
{
    let mut y = guess;
    let mut r = DVector::zeros(y.len());
    let mut delta = DVector::zeros(y.len());
    residual(&y, &mut r)?;
    let mut prev = f64::INFINITY;
    let mut fresh = false;
    let mut iterations = 0;
    loop {
        let rn = norm_inf(&r);
        if !rn.is_finite() {
            return Err(Error::NewtonFailure { iterations, residual: rn });
        }
        if rn <= opts.tol * (1.0 + norm_inf(&y)) {
            return Ok((y, iterations));
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NewtonFailure { iterations, residual: rn });
        }
        if rn > SLOW_CONTRACTION * prev && !fresh {
            fresh = lin.refresh(&y)?;
        } else {
            fresh = false;
        }
        prev = rn;
        delta.copy_from(&r);
        delta.neg_mut();
        lin.solve(&mut delta)?;
        y += &delta;
        iterations += 1;
        residual(&y, &mut r)?;
        if fresh {
            let mut halvings = 0;
            while !(norm_inf(&r) < rn) && halvings < MAX_HALVINGS {
                delta *= 0.5;
                y -= &delta;
                residual(&y, &mut r)?;
                halvings += 1;
            }
        }
        if norm_inf(&delta) <= 10.0 * f64::EPSILON * (1.0 + norm_inf(&y)) {
            return Ok((y, iterations));
        }
    }
}
