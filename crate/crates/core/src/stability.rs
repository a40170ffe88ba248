//! Linear stability functions of both families and region scans.
//!
//! Scalar functions follow the Dahlquist split `y' = λ^F y + λ^S y` with
//! `z^F = Hλ^F`, `z^S = Hλ^S`. Matrix functions follow the component split of
//! `y' = (Z/H) y` with the fast row first: `Z = [[z^F, w^S], [w^F, z^S]]`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phi::{phi, spc_weights, stability_weights_ipc};
use crate::tableaux::{ButcherTableau, IpcScheme, MultirateScheme, SpcScheme};

type C = Complex64;
type CMat = DMatrix<C>;

fn cplx(x: f64) -> C {
    C::new(x, 0.0)
}

fn to_c(m: &DMatrix<f64>) -> CMat {
    m.map(cplx)
}

fn solve(m: CMat, b: CMat, what: &'static str) -> Result<CMat> {
    let lu = m.lu();
    lu.solve(&b).filter(|x| x.iter().all(|v| v.is_finite())).ok_or(Error::Singular(what))
}

/// `R(z) = 1 + z bᵀ (I − zA)⁻¹ 1` of a Runge–Kutta tableau.
pub fn base_stability(t: &ButcherTableau, z: C) -> Result<C> {
    let s = t.stages();
    let m = CMat::identity(s, s) - to_c(&t.a) * z;
    let x = solve(m, CMat::from_element(s, 1, cplx(1.0)), "base resolvent")?;
    let b = t.b.map(cplx);
    Ok(cplx(1.0) + z * (b.transpose() * x)[(0, 0)])
}

/// `R = φ₀(z^F) + z^S μ(z^F)ᵀ (I − zA)⁻¹ 1`, `z = z^F + z^S`.
pub fn spc_scalar_r(s: &SpcScheme, zf: C, zs: C) -> Result<C> {
    let n = s.stages();
    let z = zf + zs;
    let (mu, _) = spc_weights(&s.gamma, zf);
    let m = CMat::identity(n, n) - to_c(&s.base.a) * z;
    let x = solve(m, CMat::from_element(n, 1, cplx(1.0)), "SPC resolvent")?;
    Ok(zf.exp() + zs * (mu.transpose() * x)[(0, 0)])
}

/// `lim_{z^S→−∞} R = φ₀(z^F) − μ(z^F)ᵀ A⁻¹ 1`.
pub fn spc_zs_limit(s: &SpcScheme, zf: C) -> Result<C> {
    let n = s.stages();
    if let Some(i) = (0..n).find(|&i| s.base.a[(i, i)] == 0.0) {
        return Err(Error::SingularDiagonal { index: i + 1, context: "the slow-stiff limit" });
    }
    let (mu, _) = spc_weights(&s.gamma, zf);
    let x = solve(to_c(&s.base.a), CMat::from_element(n, 1, cplx(1.0)), "base matrix A")?;
    Ok(zf.exp() - (mu.transpose() * x)[(0, 0)])
}

fn kron2(z: &Matrix2<C>, a: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = CMat::zeros(2 * n, 2 * n);
    for bi in 0..2 {
        for bj in 0..2 {
            out.view_mut((bi * n, bj * n), (n, n)).copy_from(&(a * z[(bi, bj)]));
        }
    }
    out
}

fn ones2(n: usize) -> CMat {
    let mut out = CMat::zeros(2 * n, 2);
    for i in 0..n {
        out[(i, 0)] = cplx(1.0);
        out[(n + i, 1)] = cplx(1.0);
    }
    out
}

/// Transfer matrix of an SPC scheme on the matrix test problem.
pub fn spc_matrix_m(s: &SpcScheme, z: &Matrix2<C>) -> Result<Matrix2<C>> {
    let n = s.stages();
    let (zf, ws, wf, zs) = (z[(0, 0)], z[(0, 1)], z[(1, 0)], z[(1, 1)]);
    let a = to_c(&s.base.a);
    let frak_y = solve(CMat::identity(2 * n, 2 * n) - kron2(z, &a), ones2(n), "SPC matrix resolvent")?;
    let (_, mu_t) = spc_weights(&s.gamma, zf);
    let b = s.base.b.map(cplx);
    let mut left = CMat::zeros(2, 2 * n);
    for j in 0..n {
        left[(0, j)] = ws * wf * mu_t[j];
        left[(0, n + j)] = ws * zs * mu_t[j];
        left[(1, j)] = wf * b[j];
        left[(1, n + j)] = zs * b[j];
    }
    let prod = left * frak_y;
    let mut m = Matrix2::new(zf.exp(), ws * phi(1, zf), cplx(0.0), cplx(1.0));
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] += prod[(i, j)];
        }
    }
    Ok(m)
}

/// `(I − zD)⁻¹` applied to `rhs` for the diagonal `D` of the base method.
fn diag_resolvent(d: &DVector<f64>, z: C, rhs: &CMat) -> Result<CMat> {
    let mut out = rhs.clone();
    for i in 0..d.len() {
        let den = cplx(1.0) - z * d[i];
        if den.norm() == 0.0 {
            return Err(Error::Singular("IPC diagonal resolvent"));
        }
        out.row_mut(i).iter_mut().for_each(|v| *v /= den);
    }
    Ok(out)
}

fn shift(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j + 1 { cplx(1.0) } else { cplx(0.0) })
}

/// The matrix `𝔐(z^F, z^S)` of the IPC scalar stability function.
pub fn ipc_frak_m(s: &IpcScheme, zf: C, zs: C) -> Result<CMat> {
    let n = s.stages();
    let z = zf + zs;
    let w = stability_weights_ipc(s, zf);
    let d = s.base.a.diagonal();
    let t = to_c(&s.base.strictly_lower());
    let l = shift(n);
    let phi0 = CMat::from_diagonal(&s.delta_c.map(|dc| (zf * dc).exp()));
    let res_t = diag_resolvent(&d, z, &t)?;
    Ok(CMat::identity(n, n) - phi0 * l - &w.mu * zs - &w.nu * res_t * (zs * z))
}

/// `R = e_sᵀ 𝔐⁻¹ (φ₀(Δc₁ z^F) e₁ + z^S ν (I − zD)⁻¹ 1)`.
pub fn ipc_scalar_r(s: &IpcScheme, zf: C, zs: C) -> Result<C> {
    let n = s.stages();
    let z = zf + zs;
    let w = stability_weights_ipc(s, zf);
    let d = s.base.a.diagonal();
    let mut rhs = &w.nu * diag_resolvent(&d, z, &CMat::from_element(n, 1, cplx(1.0)))? * zs;
    rhs[(0, 0)] += (zf * s.delta_c[0]).exp();
    let x = solve(ipc_frak_m(s, zf, zs)?, rhs, "IPC matrix M")?;
    Ok(x[(n - 1, 0)])
}

/// Transfer matrix `(I₂ ⊗ e_sᵀ) 𝔑₁⁻¹ 𝔑₂` of an IPC scheme.
pub fn ipc_matrix_m(s: &IpcScheme, z: &Matrix2<C>) -> Result<Matrix2<C>> {
    let n = s.stages();
    let (zf, ws, wf, zs) = (z[(0, 0)], z[(0, 1)], z[(1, 0)], z[(1, 1)]);
    let w = stability_weights_ipc(s, zf);
    let dmat = to_c(&s.base.diagonal());
    let tmat = to_c(&s.base.strictly_lower());
    let l = shift(n);
    let dc = &s.delta_c;
    let phi0 = CMat::from_diagonal(&dc.map(|x| (zf * x).exp()));
    let phi1 = CMat::from_diagonal(&dc.map(|x| phi(1, zf * x) * x));

    let resolvent = CMat::identity(2 * n, 2 * n) - kron2(z, &dmat);
    let lu = resolvent.lu();
    let p1 = lu.solve(&ones2(n)).ok_or(Error::Singular("IPC matrix resolvent"))?;
    let p2 = lu.solve(&kron2(z, &tmat)).ok_or(Error::Singular("IPC matrix resolvent"))?;

    let mut corr = CMat::zeros(2 * n, 2 * n);
    corr.view_mut((0, 0), (n, n)).copy_from(&(&w.nu_tilde * (ws * wf)));
    corr.view_mut((0, n), (n, n)).copy_from(&(&w.nu_tilde * (ws * zs)));
    corr.view_mut((n, n), (n, n)).copy_from(&CMat::identity(n, n));

    let mut n1 = CMat::identity(2 * n, 2 * n) - &corr * p2;
    {
        let mut tl = n1.view_mut((0, 0), (n, n));
        tl -= &phi0 * &l + &w.mu_tilde * (ws * wf);
    }
    {
        let mut tr = n1.view_mut((0, n), (n, n));
        tr -= &phi1 * &l * ws + &w.mu_tilde * (ws * zs);
    }
    let mut n2 = &corr * p1;
    n2[(0, 0)] += (zf * dc[0]).exp();
    n2[(0, 1)] += ws * dc[0] * phi(1, zf * dc[0]);

    let x = solve(n1, n2, "IPC matrix N1")?;
    Ok(Matrix2::new(x[(n - 1, 0)], x[(n - 1, 1)], x[(2 * n - 1, 0)], x[(2 * n - 1, 1)]))
}

pub fn scalar_r(m: &MultirateScheme, zf: C, zs: C) -> Result<C> {
    match m {
        MultirateScheme::Spc(s) => spc_scalar_r(s, zf, zs),
        MultirateScheme::Ipc(s) => ipc_scalar_r(s, zf, zs),
    }
}

pub fn matrix_m(m: &MultirateScheme, z: &Matrix2<C>) -> Result<Matrix2<C>> {
    match m {
        MultirateScheme::Spc(s) => spc_matrix_m(s, z),
        MultirateScheme::Ipc(s) => ipc_matrix_m(s, z),
    }
}

/// `Ω` of the matrix test problem.
pub fn omega(lambda_f: C, lambda_s: C, xi: f64, alpha: f64) -> Matrix2<C> {
    let d = lambda_f - lambda_s;
    Matrix2::new(lambda_f, d * ((1.0 - xi) / alpha), -d * (alpha * xi), lambda_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixTestParams {
    pub lambda_f: C,
    pub lambda_s: C,
    pub xi: f64,
    pub alpha: f64,
    pub h: f64,
}

impl MatrixTestParams {
    pub fn omega(&self) -> Matrix2<C> {
        omega(self.lambda_f, self.lambda_s, self.xi, self.alpha)
    }

    /// `Z = H Ω`.
    pub fn z(&self) -> Matrix2<C> {
        self.omega() * cplx(self.h)
    }
}

/// Largest eigenvalue modulus of a 2×2 matrix.
pub fn spectral_radius(m: &Matrix2<C>) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    l1.norm().max(l2.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Scalar,
    Matrix,
}

/// How the fast fan and the grid point enter `Z` for matrix scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixReading {
    /// `Z = Ω(z^F, z^F)`: both arguments fast, so every grid point sees the
    /// same fan.
    #[default]
    Literal,
    /// `Z = Ω(z^F, z^S)` with the grid point as the slow eigenvalue.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityQuery {
    /// Fan radius; infinite means `10⁶`.
    pub rho: f64,
    /// Half-angle of the fan about the negative real axis, in degrees.
    pub alpha_deg: f64,
    pub radial: usize,
    pub angular: usize,
    /// `[re_min, re_max, im_min, im_max]` of the `z^S` window.
    pub window: [f64; 4],
    /// Grid points along the real and imaginary axes.
    pub resolution: (usize, usize),
    pub reading: MatrixReading,
    pub xi: f64,
    pub coupling_alpha: f64,
    /// Replaces the sampled fan.
    pub fan_override: Option<Vec<C>>,
}

impl Default for StabilityQuery {
    fn default() -> Self {
        Self {
            rho: f64::INFINITY,
            alpha_deg: 45.0,
            radial: 24,
            angular: 17,
            window: [-10.0, 0.0, -10.0, 10.0],
            resolution: (41, 81),
            reading: MatrixReading::Literal,
            xi: 0.1,
            coupling_alpha: 1.0,
            fan_override: None,
        }
    }
}

impl StabilityQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_deg > 0.0 && self.alpha_deg <= 90.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 90], got {}", self.alpha_deg)));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidInput(format!("rho must be positive, got {}", self.rho)));
        }
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(Error::InvalidInput("resolution must be positive".into()));
        }
        if self.xi <= 0.0 || self.xi >= 1.0 || self.coupling_alpha == 0.0 {
            return Err(Error::InvalidInput("xi must lie in (0, 1) and alpha must be nonzero".into()));
        }
        Ok(())
    }

    /// Sampled `z^F`: log-spaced radii times equispaced angles, plus zero.
    pub fn fan(&self) -> Vec<C> {
        if let Some(f) = &self.fan_override {
            return f.clone();
        }
        let rho = if self.rho.is_finite() { self.rho } else { 1e6 };
        let alpha = self.alpha_deg.to_radians();
        let mut out = vec![cplx(0.0)];
        for i in 0..self.radial {
            let frac = if self.radial == 1 { 1.0 } else { i as f64 / (self.radial - 1) as f64 };
            let r = rho * 10f64.powf(-3.0 * (1.0 - frac));
            for j in 0..self.angular {
                let a = if self.angular == 1 {
                    0.0
                } else {
                    -alpha + 2.0 * alpha * j as f64 / (self.angular - 1) as f64
                };
                out.push(C::from_polar(r, std::f64::consts::PI + a));
            }
        }
        out
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    }

    pub fn grid(&self) -> (Vec<f64>, Vec<f64>) {
        let [x0, x1, y0, y1] = self.window;
        (Self::axis(x0, x1, self.resolution.0), Self::axis(y0, y1, self.resolution.1))
    }
}

/// Boolean stability mask over the `z^S` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Indexed `[j * re.len() + i]` for `(re[i], im[j])`.
    pub inside: Vec<bool>,
}

impl Region {
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.inside[j * self.re.len() + i]
    }

    pub fn fraction_inside(&self) -> f64 {
        self.inside.iter().filter(|&&b| b).count() as f64 / self.inside.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "inside"])?;
        for (j, y) in self.im.iter().enumerate() {
            for (i, x) in self.re.iter().enumerate() {
                w.write_record([format!("{x:?}"), format!("{y:?}"), u8::from(self.at(i, j)).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

const UNIT_SLACK: f64 = 1e-12;

fn point_stable(m: &MultirateScheme, q: &StabilityQuery, fan: &[C], zs: C, kind: RegionKind) -> bool {
    fan.iter().all(|&zf| match kind {
        RegionKind::Scalar => scalar_r(m, zf, zs).is_ok_and(|r| r.norm() <= 1.0 + UNIT_SLACK),
        RegionKind::Matrix => {
            let second = match q.reading {
                MatrixReading::Literal => zf,
                MatrixReading::Grid => zs,
            };
            let z = omega(zf, second, q.xi, q.coupling_alpha);
            matrix_m(m, &z).is_ok_and(|mm| spectral_radius(&mm) <= 1.0 + UNIT_SLACK)
        }
    })
}

/// Scans the `z^S` window. Grid points are evaluated in parallel.
pub fn scan_region(m: &MultirateScheme, q: &StabilityQuery, kind: RegionKind) -> Result<Region> {
    q.validate()?;
    let (re, im) = q.grid();
    let fan = q.fan();
    let nx = re.len();
    let inside = (0..re.len() * im.len())
        .into_par_iter()
        .map(|k| point_stable(m, q, &fan, C::new(re[k % nx], im[k / nx]), kind))
        .collect();
    Ok(Region { re, im, inside })
}

/// Stability region of the base method alone on the same grid.
pub fn scan_base_region(t: &ButcherTableau, q: &StabilityQuery) -> Result<Region> {
    q.validate()?;
    let (re, im) = q.grid();
    let nx = re.len();
    let inside = (0..re.len() * im.len())
        .into_par_iter()
        .map(|k| base_stability(t, C::new(re[k % nx], im[k / nx])).is_ok_and(|r| r.norm() <= 1.0 + UNIT_SLACK))
        .collect();
    Ok(Region { re, im, inside })
}
