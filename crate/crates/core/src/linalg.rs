//! Jacobian storage and the factorizations used by the implicit stage solvers.
//!
//! Problems whose Jacobian is narrow-banded (the inverter chain) get an O(n)
//! banded LU with partial pivoting; everything else goes through nalgebra's
//! dense LU.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};

/// Sparsity structure a system advertises for its Jacobians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianStructure {
    #[default]
    Dense,
    /// `kl` sub-diagonals and `ku` super-diagonals.
    Banded { kl: usize, ku: usize },
}

/// Square band matrix. Row `r` stores columns `r - kl ..= r + ku + kl`; the extra
/// `kl` super-diagonals hold the fill-in created by row pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let off = c as isize - r as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width || c >= self.n {
            None
        } else {
            Some(r * self.width + off as usize)
        }
    }

    /// Entry (r, c); zero outside the stored band.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.slot(r, c).map_or(0.0, |i| self.data[i])
    }

    /// Sets entry (r, c). Panics if (r, c) lies outside the declared band.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(
            in_band(r, c, self.kl, self.ku),
            "({r}, {c}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let i = self.slot(r, c).expect("checked above");
        self.data[i] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.get(r, c))
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for r in 0..self.n {
            let lo = r.saturating_sub(self.kl);
            let hi = (r + self.ku).min(self.n - 1);
            y[r] = (lo..=hi).map(|c| self.get(r, c) * x[c]).sum();
        }
        y
    }

    /// Band LU with partial pivoting (the same elimination order as LAPACK `gbtrf`).
    pub fn lu(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last_row {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular("banded LU"));
            }
            pivots[k] = p;
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let a = self.slot(k, c).expect("pivot row band");
                    let b = self.slot(p, c).expect("pivot row band");
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last_row {
                let i = self.slot(r, k).expect("sub-diagonal band");
                let l = self.data[i] / pivot;
                self.data[i] = l;
                if l != 0.0 {
                    for c in k + 1..=last_col {
                        let akc = self.get(k, c);
                        let j = self.slot(r, c).expect("fill-in band");
                        self.data[j] -= l * akc;
                    }
                }
            }
        }
        Ok(BandLu {
            factors: self,
            pivots,
        })
    }
}

fn in_band(r: usize, c: usize, kl: usize, ku: usize) -> bool {
    (c <= r && r - c <= kl) || (c > r && c - r <= ku)
}

/// Factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    factors: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve_mut(&self, b: &mut DVector<f64>) {
        let m = &self.factors;
        let n = m.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap_rows(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for r in k + 1..=(k + m.kl).min(n - 1) {
                    b[r] -= m.get(r, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let hi = (k + m.ku + m.kl).min(n - 1);
            let mut acc = b[k];
            for c in k + 1..=hi {
                acc -= m.get(k, c) * b[c];
            }
            b[k] = acc / m.get(k, k);
        }
    }
}

/// A Jacobian in one of the supported storage formats.
#[derive(Debug, Clone)]
pub enum Jacobian {
    Dense(DMatrix<f64>),
    Banded(BandMatrix),
}

impl Jacobian {
    pub fn dim(&self) -> usize {
        match self {
            Jacobian::Dense(m) => m.nrows(),
            Jacobian::Banded(b) => b.dim(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Jacobian::Dense(m) => m.clone(),
            Jacobian::Banded(b) => b.to_dense(),
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Jacobian::Dense(m) => m * x,
            Jacobian::Banded(b) => b.mul_vec(x),
        }
    }

    /// `self + other`, staying banded when both operands are.
    pub fn sum(&self, other: &Jacobian) -> Jacobian {
        match (self, other) {
            (Jacobian::Banded(a), Jacobian::Banded(b)) => {
                let kl = a.kl.max(b.kl);
                let ku = a.ku.max(b.ku);
                let n = a.n;
                let mut out = BandMatrix::zeros(n, kl, ku);
                for r in 0..n {
                    for c in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                        out.set(r, c, a.get(r, c) + b.get(r, c));
                    }
                }
                Jacobian::Banded(out)
            }
            _ => Jacobian::Dense(self.to_dense() + other.to_dense()),
        }
    }

    pub fn scaled(&self, s: f64) -> Jacobian {
        match self {
            Jacobian::Dense(m) => Jacobian::Dense(m * s),
            Jacobian::Banded(b) => {
                let mut out = b.clone();
                out.data.iter_mut().for_each(|v| *v *= s);
                Jacobian::Banded(out)
            }
        }
    }

    /// The principal submatrix on the sorted indices `idx`. A band stays a band
    /// of the same widths, since `|p − q| ≤ |idx[p] − idx[q]|`.
    pub fn gather(&self, idx: &[usize]) -> Jacobian {
        let m = idx.len();
        match self {
            Jacobian::Dense(j) => Jacobian::Dense(DMatrix::from_fn(m, m, |p, q| j[(idx[p], idx[q])])),
            Jacobian::Banded(b) => {
                let mut out = BandMatrix::zeros(m, b.kl, b.ku);
                for p in 0..m {
                    for q in p.saturating_sub(b.kl)..=(p + b.ku).min(m.saturating_sub(1)) {
                        out.set(p, q, b.get(idx[p], idx[q]));
                    }
                }
                Jacobian::Banded(out)
            }
        }
    }

    /// Factorizes the Newton iteration matrix `I - scale * J`.
    pub fn iteration_matrix(&self, scale: f64) -> Result<Factorization> {
        match self {
            Jacobian::Dense(j) => {
                let n = j.nrows();
                let m = DMatrix::identity(n, n) - j * scale;
                let lu = m.lu();
                if !lu.is_invertible() {
                    return Err(Error::Singular("Newton iteration matrix"));
                }
                Ok(Factorization::Dense(lu))
            }
            Jacobian::Banded(b) => {
                let mut m = BandMatrix::zeros(b.n, b.kl, b.ku);
                for r in 0..b.n {
                    for c in r.saturating_sub(b.kl)..=(r + b.ku).min(b.n - 1) {
                        let id = if r == c { 1.0 } else { 0.0 };
                        m.set(r, c, id - scale * b.get(r, c));
                    }
                }
                Ok(Factorization::Banded(m.lu()?))
            }
        }
    }
}

/// LU factors of an iteration matrix.
#[derive(Debug, Clone)]
pub enum Factorization {
    Dense(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Banded(BandLu),
}

impl Factorization {
    pub fn solve_mut(&self, b: &mut DVector<f64>) -> Result<()> {
        match self {
            Factorization::Dense(lu) => {
                if lu.solve_mut(b) {
                    Ok(())
                } else {
                    Err(Error::Singular("Newton iteration matrix"))
                }
            }
            Factorization::Banded(lu) => {
                lu.solve_mut(b);
                Ok(())
            }
        }
    }
}

/// Forward-difference Jacobian of `f` at `y`, given `f0 = f(y)`.
///
/// Perturbation per column is `sqrt(eps) * (1 + |y_j|)`. Banded structures use
/// column grouping so only `kl + ku + 1` extra evaluations are needed.
pub fn finite_difference_jacobian<F>(
    mut f: F,
    y: &DVector<f64>,
    f0: &DVector<f64>,
    structure: JacobianStructure,
) -> Jacobian
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    let n = y.len();
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut yp = y.clone();
    let mut fp = DVector::zeros(n);
    match structure {
        JacobianStructure::Dense => {
            let mut jac = DMatrix::zeros(n, n);
            for j in 0..n {
                let delta = sqrt_eps * (1.0 + y[j].abs());
                yp[j] = y[j] + delta;
                f(&yp, &mut fp);
                yp[j] = y[j];
                for i in 0..n {
                    jac[(i, j)] = (fp[i] - f0[i]) / delta;
                }
            }
            Jacobian::Dense(jac)
        }
        JacobianStructure::Banded { kl, ku } => {
            let group = kl + ku + 1;
            let mut band = BandMatrix::zeros(n, kl, ku);
            let mut deltas = vec![0.0; n];
            for start in 0..group.min(n) {
                for j in (start..n).step_by(group) {
                    deltas[j] = sqrt_eps * (1.0 + y[j].abs());
                    yp[j] = y[j] + deltas[j];
                }
                f(&yp, &mut fp);
                for j in (start..n).step_by(group) {
                    yp[j] = y[j];
                    for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                        band.set(i, j, (fp[i] - f0[i]) / deltas[j]);
                    }
                }
            }
            Jacobian::Banded(band)
        }
    }
}

pub fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
