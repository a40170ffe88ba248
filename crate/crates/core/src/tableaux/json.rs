//! JSON interchange format for coefficient sets.
//!
//! Numbers are written as shortest round-trip decimal strings so that a
//! document re-imports bit for bit; plain JSON numbers are accepted on input.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ButcherTableau, CouplingPolynomial, Family, IpcScheme, MultirateScheme, Precision, SpcScheme};
use crate::error::{Error, Result};

/// A coefficient written either as a decimal string or a JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Value(f64),
}

impl Number {
    fn from_f64(v: f64) -> Self {
        Number::Text(format!("{v:?}"))
    }

    fn to_f64(&self) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidTableau(format!("not a number: {s:?}"))),
        }
    }
}

type Rows = Vec<Vec<Number>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodDocument {
    pub name: String,
    pub family: Family,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedded_order: Option<usize>,
    pub a: Rows,
    pub b: Vec<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_hat: Option<Vec<Number>>,
    pub c: Vec<Number>,
    /// One matrix per power of `t`.
    pub gamma: Vec<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<Vec<Rows>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub psi: Vec<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_hat: Option<Vec<Rows>>,
}

fn vec_out(v: &DVector<f64>) -> Vec<Number> {
    v.iter().map(|&x| Number::from_f64(x)).collect()
}

fn mat_out(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Number::from_f64(m[(i, j)])).collect())
        .collect()
}

fn poly_out(p: &CouplingPolynomial) -> Vec<Rows> {
    p.coeffs().iter().map(mat_out).collect()
}

fn vec_in(v: &[Number]) -> Result<DVector<f64>> {
    let xs = v.iter().map(Number::to_f64).collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(xs))
}

fn mat_in(rows: &Rows) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidTableau("ragged matrix".into()));
    }
    let mut m = DMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = v.to_f64()?;
        }
    }
    Ok(m)
}

fn poly_in(p: &[Rows]) -> Result<CouplingPolynomial> {
    CouplingPolynomial::new(p.iter().map(mat_in).collect::<Result<Vec<_>>>()?)
}

impl MethodDocument {
    pub fn from_scheme(m: &MultirateScheme) -> Self {
        let base = m.base();
        let mut doc = MethodDocument {
            name: m.name().to_string(),
            family: m.family(),
            order: m.order(),
            embedded_order: m.embedded_order(),
            a: mat_out(&base.a),
            b: vec_out(&base.b),
            b_hat: base.b_hat.as_ref().map(vec_out),
            c: vec_out(&base.c),
            gamma: Vec::new(),
            gamma_hat: None,
            psi: Vec::new(),
            psi_hat: None,
        };
        match m {
            MultirateScheme::Spc(s) => {
                doc.gamma = poly_out(&s.gamma);
                doc.gamma_hat = s.gamma_hat.as_ref().map(poly_out);
            }
            MultirateScheme::Ipc(s) => {
                doc.gamma = poly_out(&s.gamma);
                doc.gamma_hat = s.gamma_hat.as_ref().map(poly_out);
                doc.psi = poly_out(&s.psi);
                doc.psi_hat = s.psi_hat.as_ref().map(poly_out);
            }
        }
        doc
    }

    /// Builds a scheme with the given precision class.
    pub fn to_scheme(&self, precision: Precision) -> Result<MultirateScheme> {
        let b_hat = self.b_hat.as_deref().map(vec_in).transpose()?;
        let base = ButcherTableau::new(mat_in(&self.a)?, vec_in(&self.b)?, b_hat, vec_in(&self.c)?)?;
        let gamma = poly_in(&self.gamma)?;
        let gamma_hat = self.gamma_hat.as_deref().map(poly_in).transpose()?;
        match self.family {
            Family::Spc => Ok(MultirateScheme::Spc(SpcScheme::new(
                &self.name,
                base,
                gamma,
                gamma_hat,
                self.order,
                self.embedded_order,
                precision,
            )?)),
            Family::Ipc => {
                if self.psi.is_empty() {
                    return Err(Error::InvalidTableau("IPC method requires psi".into()));
                }
                Ok(MultirateScheme::Ipc(IpcScheme::new(
                    &self.name,
                    base,
                    gamma,
                    poly_in(&self.psi)?,
                    gamma_hat,
                    self.psi_hat.as_deref().map(poly_in).transpose()?,
                    self.order,
                    self.embedded_order,
                    precision,
                )?))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
