//! φ-functions `φ₀(z) = eᶻ`, `φₖ₊₁(z) = ∫₀¹ e^{z(1−t)} tᵏ dt` and the weight
//! vectors built from them.
//!
//! With this normalization `φₖ(0) = 1/k` and `φₖ₊₁(z) = (k φₖ(z) − 1)/z`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::tableaux::{CouplingPolynomial, IpcScheme, SpcScheme};

/// Largest supported index.
pub const MAX_INDEX: usize = 12;

const SERIES_RADIUS: f64 = 0.5;

/// `φ₀(z), …, φ_K(z)` for one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSeries {
    pub z: Complex64,
    pub values: Vec<Complex64>,
}

impl PhiSeries {
    pub fn new(z: Complex64, max_index: usize) -> Self {
        Self { z, values: phi_all(z, max_index) }
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.values[k]
    }
}

/// `eᶻ − 1` without cancellation for small `z`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

/// `(k−1)! Σⱼ zʲ/(j+k)!` for `k ≥ 1`, summed until the terms stop contributing.
fn series(k: usize, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0 / k as f64, 0.0);
    let mut sum = term;
    for j in 1..200 {
        term *= z / (j + k) as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// All values `φ₀(z) … φ_K(z)`.
pub fn phi_all(z: Complex64, max_index: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); max_index + 1];
    out[0] = z.exp();
    if max_index == 0 {
        return out;
    }
    let r = z.norm();
    if r < SERIES_RADIUS {
        for (k, v) in out.iter_mut().enumerate().skip(1) {
            *v = series(k, z);
        }
        return out;
    }
    out[1] = expm1(z) / z;
    // Upward recurrence loses accuracy once k exceeds |z|.
    let upward = (r.floor() as usize).min(max_index);
    for k in 1..upward {
        out[k + 1] = (out[k] * k as f64 - 1.0) / z;
    }
    if upward < max_index {
        let top = max_index.max((2.0 * r).ceil() as usize) + 10;
        let mut v = series(top, z);
        for k in (upward + 1..top).rev() {
            v = (z * v + 1.0) / k as f64;
            if k <= max_index {
                out[k] = v;
            }
        }
    }
    out
}

/// `φₖ(z)`.
pub fn phi(k: usize, z: Complex64) -> Complex64 {
    phi_all(z, k)[k]
}

pub fn phi_real(k: usize, x: f64) -> f64 {
    phi(k, Complex64::new(x, 0.0)).re
}


/// SPC weights `μ = Σₖ γᵏ φₖ₊₁(z)` and `μ̃ = Σₖ γᵏ φₖ₊₂(z)/(k+1)`.
pub fn spc_weights(gamma: &CouplingPolynomial, zf: Complex64) -> (DVector<Complex64>, DVector<Complex64>) {
    let n = gamma.shape().1;
    let deg = gamma.degree();
    let p = phi_all(zf, deg + 2);
    let mut mu = DVector::zeros(n);
    let mut mu_t = DVector::zeros(n);
    for k in 0..=deg {
        let row = gamma.coeff(k);
        let g = DVector::from_fn(n, |j, _| Complex64::new(row[(0, j)], 0.0));
        mu += &g * p[k + 1];
        mu_t += &g * (p[k + 2] / (k + 1) as f64);
    }
    (mu, mu_t)
}

pub fn stability_weights_spc(s: &SpcScheme, zf: Complex64) -> (DVector<Complex64>, DVector<Complex64>) {
    spc_weights(&s.gamma, zf)
}

/// IPC weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct IpcWeights {
    /// `Σₖ diag(φₖ₊₁(Δc z)) Γᵏ`
    pub mu: DMatrix<Complex64>,
    /// `Σₖ diag(φₖ₊₁(Δc z)) Ψᵏ`
    pub nu: DMatrix<Complex64>,
    /// `Σₖ diag(Δc φₖ₊₂(Δc z)/(k+1)) Γᵏ`
    pub mu_tilde: DMatrix<Complex64>,
    /// `Σₖ diag(Δc φₖ₊₂(Δc z)/(k+1)) Ψᵏ`
    pub nu_tilde: DMatrix<Complex64>,
}

/// Weights for arbitrary `Γ`, `Ψ` and increments; rows with `Δcᵢ = 0` use
/// the limits `φₖ(0) = 1/k`.
pub fn ipc_weights(
    gamma: &CouplingPolynomial,
    psi: &CouplingPolynomial,
    delta_c: &DVector<f64>,
    zf: Complex64,
) -> IpcWeights {
    let (rows, cols) = gamma.shape();
    let deg = gamma.degree().max(psi.degree());
    let phis: Vec<Vec<Complex64>> = delta_c.iter().map(|&d| phi_all(zf * d, deg + 2)).collect();
    let mut w = IpcWeights {
        mu: DMatrix::zeros(rows, cols),
        nu: DMatrix::zeros(rows, cols),
        mu_tilde: DMatrix::zeros(rows, cols),
        nu_tilde: DMatrix::zeros(rows, cols),
    };
    for k in 0..=deg {
        let g = gamma.coeff(k);
        let p = psi.coeff(k);
        for i in 0..rows {
            let f1 = phis[i][k + 1];
            let f2 = phis[i][k + 2] * delta_c[i] / (k + 1) as f64;
            for j in 0..cols {
                w.mu[(i, j)] += f1 * g[(i, j)];
                w.nu[(i, j)] += f1 * p[(i, j)];
                w.mu_tilde[(i, j)] += f2 * g[(i, j)];
                w.nu_tilde[(i, j)] += f2 * p[(i, j)];
            }
        }
    }
    w
}

pub fn stability_weights_ipc(s: &IpcScheme, zf: Complex64) -> IpcWeights {
    ipc_weights(&s.gamma, &s.psi, &s.delta_c, zf)
}
