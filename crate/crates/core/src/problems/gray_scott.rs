use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::integrators::PartitionedSystem;
use crate::linalg::Jacobian;

/// Gray–Scott reaction-diffusion on the periodic unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrayScottConfig {
    /// Grid points per direction.
    pub n: usize,
    pub eps_u: f64,
    pub eps_v: f64,
    pub feed: f64,
    pub kill: f64,
    pub t_end: f64,
    /// Half-width of the centered initial patch, as a fraction of the side.
    pub patch: f64,
}

impl Default for GrayScottConfig {
    fn default() -> Self {
        Self { n: 16, eps_u: 0.0625, eps_v: 0.0312, feed: 0.0180, kill: 0.0520, t_end: 30.0, patch: 0.1 }
    }
}

/// State layout `[u; v]`, each block row-major over the grid. Diffusion is
/// the slow part, reaction the fast part.
#[derive(Debug, Clone)]
pub struct GrayScott {
    pub cfg: GrayScottConfig,
    laplacian: DMatrix<f64>,
}

impl GrayScott {
    pub fn new(cfg: GrayScottConfig) -> Self {
        assert!(cfg.n >= 3, "grid too small");
        let n = cfg.n;
        let m = n * n;
        let inv_h2 = (n * n) as f64;
        let mut lap = DMatrix::zeros(2 * m, 2 * m);
        for (block, eps) in [(0, cfg.eps_u), (m, cfg.eps_v)] {
            let s = eps * inv_h2;
            for i in 0..n {
                for j in 0..n {
                    let p = block + i * n + j;
                    lap[(p, p)] -= 4.0 * s;
                    for (ii, jj) in [((i + 1) % n, j), ((i + n - 1) % n, j), (i, (j + 1) % n), (i, (j + n - 1) % n)] {
                        lap[(p, block + ii * n + jj)] += s;
                    }
                }
            }
        }
        Self { cfg, laplacian: lap }
    }

    pub fn cells(&self) -> usize {
        self.cfg.n * self.cfg.n
    }

    /// Homogeneous state `(1, 0)` with a centered square patch `(0.5, 0.25)`.
    pub fn initial_state(&self) -> DVector<f64> {
        let n = self.cfg.n;
        let m = self.cells();
        let mut y = DVector::zeros(2 * m);
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 + 0.5) / n as f64 - 0.5;
                let z = (j as f64 + 0.5) / n as f64 - 0.5;
                let inside = x.abs() <= self.cfg.patch && z.abs() <= self.cfg.patch;
                let p = i * n + j;
                y[p] = if inside { 0.5 } else { 1.0 };
                y[m + p] = if inside { 0.25 } else { 0.0 };
            }
        }
        y
    }

    /// The constant diffusion matrix.
    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn reaction_jacobian_at(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        let (f, k) = (self.cfg.feed, self.cfg.kill);
        [[-v * v - f, -2.0 * u * v], [v * v, 2.0 * u * v - f - k]]
    }
}

impl PartitionedSystem for GrayScott {
    fn dim(&self) -> usize {
        2 * self.cells()
    }

    fn fast_rhs(&self, _t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        let m = self.cells();
        let (f, k) = (self.cfg.feed, self.cfg.kill);
        for p in 0..m {
            let (u, v) = (y[p], y[m + p]);
            let uvv = u * v * v;
            out[p] = -uvv + f * (1.0 - u);
            out[m + p] = uvv - (f + k) * v;
        }
    }

    fn slow_rhs(&self, _t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        self.laplacian.mul_to(y, out);
    }

    fn fast_jacobian(&self, _t: f64, y: &DVector<f64>) -> Option<Jacobian> {
        let m = self.cells();
        let mut j = DMatrix::zeros(2 * m, 2 * m);
        for p in 0..m {
            let r = self.reaction_jacobian_at(y[p], y[m + p]);
            j[(p, p)] = r[0][0];
            j[(p, m + p)] = r[0][1];
            j[(m + p, p)] = r[1][0];
            j[(m + p, m + p)] = r[1][1];
        }
        Some(Jacobian::Dense(j))
    }

    fn slow_jacobian(&self, _t: f64, _y: &DVector<f64>) -> Option<Jacobian> {
        Some(Jacobian::Dense(self.laplacian.clone()))
    }

    fn name(&self) -> &str {
        "gray-scott"
    }
}
