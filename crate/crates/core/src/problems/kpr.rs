use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::PartitionedSystem;
use crate::linalg::Jacobian;

/// Parameters of the nonlinear two-scale Prothero–Robinson system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KprConfig {
    pub lambda_f: f64,
    pub lambda_s: f64,
    pub xi: f64,
    pub alpha: f64,
    pub omega: f64,
    pub t_end: f64,
}

impl Default for KprConfig {
    fn default() -> Self {
        Self {
            lambda_f: -10.0,
            lambda_s: -1.0,
            xi: 0.1,
            alpha: 1.0,
            omega: 20.0,
            t_end: 2.5 * std::f64::consts::PI,
        }
    }
}

impl KprConfig {
    /// `[[λ^F, (1−ξ)(λ^F−λ^S)/α], [−αξ(λ^F−λ^S), λ^S]]`.
    pub fn coupling(&self) -> DMatrix<f64> {
        let d = self.lambda_f - self.lambda_s;
        DMatrix::from_row_slice(
            2,
            2,
            &[self.lambda_f, (1.0 - self.xi) * d / self.alpha, -self.alpha * self.xi * d, self.lambda_s],
        )
    }
}

/// Component 0 is fast, component 1 slow.
#[derive(Debug, Clone)]
pub struct Kpr {
    pub cfg: KprConfig,
    omega_mat: DMatrix<f64>,
}

impl Kpr {
    pub fn new(cfg: KprConfig) -> Self {
        Self { omega_mat: cfg.coupling(), cfg }
    }

    pub fn initial_state(&self) -> DVector<f64> {
        self.exact(0.0)
    }

    pub fn exact(&self, t: f64) -> DVector<f64> {
        DVector::from_vec(vec![(3.0 + (self.cfg.omega * t).cos()).sqrt(), (2.0 + t.cos()).sqrt()])
    }

    fn g(&self, t: f64, y: &DVector<f64>) -> [f64; 2] {
        let w = self.cfg.omega;
        [
            (-3.0 + y[0] * y[0] - (w * t).cos()) / (2.0 * y[0]),
            (-2.0 + y[1] * y[1] - t.cos()) / (2.0 * y[1]),
        ]
    }

    fn dg(&self, t: f64, y: &DVector<f64>) -> [f64; 2] {
        let w = self.cfg.omega;
        [
            0.5 + (3.0 + (w * t).cos()) / (2.0 * y[0] * y[0]),
            0.5 + (2.0 + t.cos()) / (2.0 * y[1] * y[1]),
        ]
    }

    fn row(&self, i: usize, t: f64, y: &DVector<f64>) -> f64 {
        let g = self.g(t, y);
        let forcing = if i == 0 {
            self.cfg.omega * (self.cfg.omega * t).sin() / (2.0 * y[0])
        } else {
            t.sin() / (2.0 * y[1])
        };
        self.omega_mat[(i, 0)] * g[0] + self.omega_mat[(i, 1)] * g[1] - forcing
    }

    fn row_jacobian(&self, i: usize, t: f64, y: &DVector<f64>) -> Jacobian {
        let dg = self.dg(t, y);
        let mut j = DMatrix::zeros(2, 2);
        j[(i, 0)] = self.omega_mat[(i, 0)] * dg[0];
        j[(i, 1)] = self.omega_mat[(i, 1)] * dg[1];
        if i == 0 {
            j[(0, 0)] += self.cfg.omega * (self.cfg.omega * t).sin() / (2.0 * y[0] * y[0]);
        } else {
            j[(1, 1)] += t.sin() / (2.0 * y[1] * y[1]);
        }
        Jacobian::Dense(j)
    }
}

impl PartitionedSystem for Kpr {
    fn dim(&self) -> usize {
        2
    }

    fn fast_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        out[0] = self.row(0, t, y);
        out[1] = 0.0;
    }

    fn slow_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        out[0] = 0.0;
        out[1] = self.row(1, t, y);
    }

    fn fast_jacobian(&self, t: f64, y: &DVector<f64>) -> Option<Jacobian> {
        Some(self.row_jacobian(0, t, y))
    }

    fn slow_jacobian(&self, t: f64, y: &DVector<f64>) -> Option<Jacobian> {
        Some(self.row_jacobian(1, t, y))
    }

    fn fast_indices(&self) -> Option<Vec<usize>> {
        Some(vec![0])
    }

    fn fast_dependencies(&self) -> Option<Vec<usize>> {
        Some(vec![1])
    }

    fn exact_solution(&self, t: f64) -> Option<DVector<f64>> {
        Some(self.exact(t))
    }

    fn check_state(&self, y: &DVector<f64>) -> Result<()> {
        match y.iter().position(|&v| !(v > 0.0)) {
            Some(index) => Err(Error::NonPositiveState { index, value: y[index] }),
            None => Ok(()),
        }
    }

    fn name(&self) -> &str {
        "kpr"
    }
}
