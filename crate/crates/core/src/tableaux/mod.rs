//! Runge–Kutta tableaus, time-dependent coupling polynomials and the two
//! multirate scheme families.

mod json;
mod registry;

pub use json::{MethodDocument, Number};
pub use registry::{base_names, lookup, lookup_base, lookup_method, multirate_names, Method};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance class of a coefficient set; bounds the achievable residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Built from rationals and surds at full double precision.
    Exact,
    /// Printed to 16 significant digits.
    Decimal,
    /// Loaded from a user file.
    User,
}

impl Precision {
    pub fn tolerance(self) -> f64 {
        match self {
            Precision::Exact => 1e-13,
            Precision::Decimal => 1e-10,
            Precision::User => 1e-9,
        }
    }
}

/// Structural class of the matrix `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Explicit,
    Sdirk,
    Esdirk,
    /// Lower triangular with differing diagonal entries.
    Dirk,
    FullyImplicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub b_hat: Option<DVector<f64>>,
    pub c: DVector<f64>,
}

impl ButcherTableau {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        b_hat: Option<DVector<f64>>,
        c: DVector<f64>,
    ) -> Result<Self> {
        let s = a.nrows();
        if s == 0 || a.ncols() != s || b.len() != s || c.len() != s {
            return Err(Error::InvalidTableau(format!(
                "inconsistent dimensions: A {}x{}, b {}, c {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if let Some(bh) = &b_hat {
            if bh.len() != s {
                return Err(Error::InvalidTableau(format!(
                    "embedded weights have length {}, expected {s}",
                    bh.len()
                )));
            }
        }
        let all_finite = a.iter().chain(b.iter()).chain(c.iter()).all(|v| v.is_finite())
            && b_hat.as_ref().map_or(true, |v| v.iter().all(|x| x.is_finite()));
        if !all_finite {
            return Err(Error::InvalidTableau("non-finite coefficient".into()));
        }
        Ok(Self { a, b, b_hat, c })
    }

    /// Stiffly accurate tableau from `A`: `b` is the last row and `c` the row sums.
    pub fn stiffly_accurate(a: DMatrix<f64>, b_hat: Option<DVector<f64>>) -> Result<Self> {
        let s = a.nrows();
        let b = a.row(s - 1).transpose();
        let c = row_sums(&a);
        Self::new(a, b, b_hat, c)
    }

    pub fn stages(&self) -> usize {
        self.a.nrows()
    }

    pub fn structure(&self) -> Structure {
        let s = self.stages();
        let a = &self.a;
        let upper_zero = (0..s).all(|i| (i + 1..s).all(|j| a[(i, j)] == 0.0));
        if !upper_zero {
            return Structure::FullyImplicit;
        }
        let diag: Vec<f64> = (0..s).map(|i| a[(i, i)]).collect();
        if diag.iter().all(|&d| d == 0.0) {
            return Structure::Explicit;
        }
        let same = |ds: &[f64]| ds.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12 * w[0].abs());
        if diag[0] != 0.0 && same(&diag) {
            Structure::Sdirk
        } else if diag[0] == 0.0 && s > 1 && diag[1] != 0.0 && same(&diag[1..]) {
            Structure::Esdirk
        } else {
            Structure::Dirk
        }
    }

    pub fn is_diagonally_implicit(&self) -> bool {
        self.structure() != Structure::FullyImplicit
    }

    pub fn is_stiffly_accurate(&self) -> bool {
        let s = self.stages();
        (0..s).all(|j| (self.a[(s - 1, j)] - self.b[j]).abs() <= 1e-14)
    }

    /// Largest `|Σⱼ a[i,j] − c[i]|`.
    pub fn row_sum_defect(&self) -> f64 {
        (row_sums(&self.a) - &self.c).amax()
    }

    /// Strictly lower part of `A`.
    pub fn strictly_lower(&self) -> DMatrix<f64> {
        let mut t = self.a.clone();
        t.fill_upper_triangle(0.0, 0);
        t
    }

    /// Diagonal part of `A`.
    pub fn diagonal(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.a.diagonal())
    }
}

pub(crate) fn row_sums(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(a.nrows(), |i, _| a.row(i).sum())
}

/// Matrix-valued polynomial `p(τ) = Σₖ coeffs[k] τᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPolynomial {
    coeffs: Vec<DMatrix<f64>>,
}

impl CouplingPolynomial {
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidTableau("coupling polynomial has no coefficients".into()))?;
        let shape = first.shape();
        if coeffs.iter().any(|m| m.shape() != shape) {
            return Err(Error::InvalidTableau(
                "coupling polynomial coefficients differ in shape".into(),
            ));
        }
        if coeffs.iter().flat_map(|m| m.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTableau("non-finite coupling coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            coeffs: vec![DMatrix::zeros(rows, cols)],
        }
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// Coefficient matrix of `τᵏ` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> DMatrix<f64> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| {
            let (r, c) = self.shape();
            DMatrix::zeros(r, c)
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs[0].shape()
    }

    pub fn eval(&self, tau: f64) -> DMatrix<f64> {
        let mut acc = self.coeffs[self.degree()].clone();
        for k in (0..self.degree()).rev() {
            acc = acc * tau + &self.coeffs[k];
        }
        acc
    }

    /// `∫₀^τ p(σ) dσ`.
    pub fn integral(&self, tau: f64) -> DMatrix<f64> {
        let (r, c) = self.shape();
        let mut acc = DMatrix::zeros(r, c);
        for k in (0..=self.degree()).rev() {
            acc = (acc + &self.coeffs[k] / (k as f64 + 1.0)) * tau;
        }
        acc
    }

    /// `∫₀¹ p(σ) dσ`.
    pub fn bar(&self) -> DMatrix<f64> {
        self.integral(1.0)
    }

    /// Row `i` as a `1 × cols` polynomial.
    pub fn row(&self, i: usize) -> CouplingPolynomial {
        CouplingPolynomial {
            coeffs: self.coeffs.iter().map(|m| m.rows(i, 1).into_owned()).collect(),
        }
    }

    pub fn scale_coeff(&mut self, k: usize, factor: f64) {
        if let Some(m) = self.coeffs.get_mut(k) {
            *m *= factor;
        }
    }
}

pub fn poly_eval(p: &CouplingPolynomial, tau: f64) -> DMatrix<f64> {
    p.eval(tau)
}

pub fn poly_integral(p: &CouplingPolynomial, tau: f64) -> DMatrix<f64> {
    p.integral(tau)
}

/// Step predictor-corrector scheme.
#[derive(Debug, Clone)]
pub struct SpcScheme {
    pub name: String,
    pub base: ButcherTableau,
    /// `1 × s` polynomial `γ(τ)`.
    pub gamma: CouplingPolynomial,
    pub gamma_hat: Option<CouplingPolynomial>,
    pub order: usize,
    pub embedded_order: Option<usize>,
    pub precision: Precision,
}

impl SpcScheme {
    pub fn new(
        name: impl Into<String>,
        base: ButcherTableau,
        gamma: CouplingPolynomial,
        gamma_hat: Option<CouplingPolynomial>,
        order: usize,
        embedded_order: Option<usize>,
        precision: Precision,
    ) -> Result<Self> {
        let s = base.stages();
        for p in std::iter::once(&gamma).chain(gamma_hat.iter()) {
            if p.shape() != (1, s) {
                return Err(Error::InvalidTableau(format!(
                    "SPC coupling polynomial must be 1x{s}, got {:?}",
                    p.shape()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            base,
            gamma,
            gamma_hat,
            order,
            embedded_order,
            precision,
        })
    }

    pub fn stages(&self) -> usize {
        self.base.stages()
    }

    pub fn gamma_bar(&self) -> DVector<f64> {
        self.gamma.bar().row(0).transpose()
    }
}

/// Internal-stage predictor-corrector scheme.
#[derive(Debug, Clone)]
pub struct IpcScheme {
    pub name: String,
    pub base: ButcherTableau,
    /// `s × s` strictly lower triangular `Γ(τ)`.
    pub gamma: CouplingPolynomial,
    /// `s × s` lower triangular `Ψ(τ)`.
    pub psi: CouplingPolynomial,
    pub gamma_hat: Option<CouplingPolynomial>,
    pub psi_hat: Option<CouplingPolynomial>,
    pub delta_c: DVector<f64>,
    pub order: usize,
    pub embedded_order: Option<usize>,
    pub precision: Precision,
}

impl IpcScheme {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        base: ButcherTableau,
        gamma: CouplingPolynomial,
        psi: CouplingPolynomial,
        gamma_hat: Option<CouplingPolynomial>,
        psi_hat: Option<CouplingPolynomial>,
        order: usize,
        embedded_order: Option<usize>,
        precision: Precision,
    ) -> Result<Self> {
        let s = base.stages();
        if !base.is_diagonally_implicit() {
            return Err(Error::InvalidTableau(
                "IPC base method must be diagonally implicit".into(),
            ));
        }
        if gamma.shape() != (s, s) || psi.shape() != (s, s) {
            return Err(Error::InvalidTableau(format!(
                "IPC coupling polynomials must be {s}x{s}"
            )));
        }
        for m in gamma.coeffs() {
            if (0..s).any(|i| (i..s).any(|j| m[(i, j)] != 0.0)) {
                return Err(Error::InvalidTableau("Γ must be strictly lower triangular".into()));
            }
        }
        for m in psi.coeffs() {
            if (0..s).any(|i| (i + 1..s).any(|j| m[(i, j)] != 0.0)) {
                return Err(Error::InvalidTableau("Ψ must be lower triangular".into()));
            }
        }
        if (gamma_hat.is_some() != psi_hat.is_some())
            || gamma_hat.as_ref().is_some_and(|p| p.shape() != (1, s))
            || psi_hat.as_ref().is_some_and(|p| p.shape() != (1, s))
        {
            return Err(Error::InvalidTableau(format!(
                "IPC embedded rows must both be present and 1x{s}"
            )));
        }
        if !base.is_stiffly_accurate() {
            return Err(Error::InvalidTableau("IPC base method must be stiffly accurate".into()));
        }
        let c = &base.c;
        let mut delta_c = DVector::zeros(s);
        for i in 0..s {
            let prev = if i == 0 { 0.0 } else { c[i - 1] };
            let d = c[i] - prev;
            if d < -1e-14 {
                return Err(Error::InvalidTableau("abscissae must be non-decreasing".into()));
            }
            delta_c[i] = if d.abs() <= 1e-14 { 0.0 } else { d };
        }
        if c[0] < -1e-14 || c[s - 1] > 1.0 + 1e-14 {
            return Err(Error::InvalidTableau("abscissae must lie in [0, 1]".into()));
        }
        Ok(Self {
            name: name.into(),
            base,
            gamma,
            psi,
            gamma_hat,
            psi_hat,
            delta_c,
            order,
            embedded_order,
            precision,
        })
    }

    pub fn stages(&self) -> usize {
        self.base.stages()
    }

    /// Lower triangular matrix of ones.
    pub fn e_matrix(&self) -> DMatrix<f64> {
        let s = self.stages();
        DMatrix::from_fn(s, s, |i, j| if j <= i { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spc,
    Ipc,
}

#[derive(Debug, Clone)]
pub enum MultirateScheme {
    Spc(SpcScheme),
    Ipc(IpcScheme),
}

impl MultirateScheme {
    pub fn name(&self) -> &str {
        match self {
            MultirateScheme::Spc(s) => &s.name,
            MultirateScheme::Ipc(s) => &s.name,
        }
    }

    pub fn base(&self) -> &ButcherTableau {
        match self {
            MultirateScheme::Spc(s) => &s.base,
            MultirateScheme::Ipc(s) => &s.base,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            MultirateScheme::Spc(s) => s.order,
            MultirateScheme::Ipc(s) => s.order,
        }
    }

    pub fn embedded_order(&self) -> Option<usize> {
        match self {
            MultirateScheme::Spc(s) => s.embedded_order,
            MultirateScheme::Ipc(s) => s.embedded_order,
        }
    }

    pub fn precision(&self) -> Precision {
        match self {
            MultirateScheme::Spc(s) => s.precision,
            MultirateScheme::Ipc(s) => s.precision,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            MultirateScheme::Spc(_) => Family::Spc,
            MultirateScheme::Ipc(_) => Family::Ipc,
        }
    }
}
