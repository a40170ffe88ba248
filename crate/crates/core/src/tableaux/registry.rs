//! Built-in coefficient sets.
//!
//! SPC tables are laid out as the rows of `A`, then the `γ(t)` row, then the
//! `γ̂(t)` row. Every entry of `γ` is linear in `t` and written here as
//! `lin(constant, slope)`.
//!
//! IPC tables are laid out as a `Γ(t)` block next to a `Ψ(t)` block, one row per
//! stage, with the embedded `γ̂ | ψ̂` row last. The base matrix of the two
//! custom IPC bases is recovered from `A = E (Γ̄ + Ψ̄)`.
//!
//! Exact entries (rationals and surds) are evaluated in double precision at load
//! time. The two decimal-only SPC tables keep their printed digits, apart from
//! three entries whose leading digit was corrected so that `b = γ̄`,
//! `Σ γ¹ = 0` and `Σⱼ aᵢⱼ = cᵢ` hold.

use nalgebra::{DMatrix, DVector};

use super::{ButcherTableau, CouplingPolynomial, IpcScheme, MultirateScheme, Precision, SpcScheme};
use crate::error::{Error, Result};

const MULTIRATE: [&str; 10] = [
    "SPC-SDIRK2(1)2",
    "SPC-ESDIRK2(1)3",
    "SPC-SDIRK3(2)4",
    "SPC-ESDIRK3(2)4",
    "SPC-SDIRK4(3)5",
    "SPC-ESDIRK4(3)6",
    "IPC-SDIRK2(1)2",
    "IPC-ESDIRK2(1)3",
    "IPC-SDIRK3(2)5",
    "IPC-SDIRK4(3)6",
];

/// Single-rate base methods and the multirate scheme each one is taken from.
const BASES: [(&str, &str); 8] = [
    ("SDIRK2(1)2", "SPC-SDIRK2(1)2"),
    ("ESDIRK2(1)3", "SPC-ESDIRK2(1)3"),
    ("SDIRK3(2)4", "SPC-SDIRK3(2)4"),
    ("ESDIRK3(2)4", "SPC-ESDIRK3(2)4"),
    ("SDIRK4(3)5", "SPC-SDIRK4(3)5"),
    ("ESDIRK4(3)6", "SPC-ESDIRK4(3)6"),
    ("SDIRK3(2)5", "IPC-SDIRK3(2)5"),
    ("SDIRK4(3)6", "IPC-SDIRK4(3)6"),
];

pub fn multirate_names() -> &'static [&'static str] {
    &MULTIRATE
}

pub fn base_names() -> Vec<&'static str> {
    BASES.iter().map(|(n, _)| *n).collect()
}

fn available() -> String {
    MULTIRATE
        .iter()
        .copied()
        .chain(BASES.iter().map(|(n, _)| *n))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A multirate scheme or a single-rate DIRK method.
#[derive(Debug, Clone)]
pub enum Method {
    Multirate(MultirateScheme),
    SingleRate { name: String, tableau: ButcherTableau },
}

impl Method {
    pub fn name(&self) -> &str {
        match self {
            Method::Multirate(m) => m.name(),
            Method::SingleRate { name, .. } => name,
        }
    }

    pub fn base(&self) -> &ButcherTableau {
        match self {
            Method::Multirate(m) => m.base(),
            Method::SingleRate { tableau, .. } => tableau,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Method::Multirate(m) => m.order(),
            Method::SingleRate { name, .. } => order_from_name(name).unwrap_or(0),
        }
    }
}

impl From<MultirateScheme> for Method {
    fn from(m: MultirateScheme) -> Self {
        Method::Multirate(m)
    }
}

/// Reads `p` and `q` from a `...p(q)s` identifier.
pub(crate) fn order_from_name(name: &str) -> Option<usize> {
    let open = name.rfind('(')?;
    let head = &name[..open];
    let digits: String = head.chars().rev().take_while(|c| c.is_ascii_digit()).collect();
    digits.chars().rev().collect::<String>().parse().ok()
}

pub fn lookup(name: &str) -> Result<MultirateScheme> {
    let scheme = match name {
        "SPC-SDIRK2(1)2" => spc_sdirk2_1_2(),
        "SPC-ESDIRK2(1)3" => spc_esdirk2_1_3(),
        "SPC-SDIRK3(2)4" => spc_sdirk3_2_4(),
        "SPC-ESDIRK3(2)4" => spc_esdirk3_2_4(),
        "SPC-SDIRK4(3)5" => spc_sdirk4_3_5(),
        "SPC-ESDIRK4(3)6" => spc_esdirk4_3_6(),
        "IPC-SDIRK2(1)2" => ipc_sdirk2_1_2(),
        "IPC-ESDIRK2(1)3" => ipc_esdirk2_1_3(),
        "IPC-SDIRK3(2)5" => ipc_sdirk3_2_5(),
        "IPC-SDIRK4(3)6" => ipc_sdirk4_3_6(),
        _ => {
            return Err(Error::UnknownMethod {
                name: name.to_string(),
                available: available(),
            })
        }
    };
    Ok(scheme.expect("built-in coefficient sets are well formed"))
}

/// Single-rate base tableau, by base name (`SDIRK2(1)2`) or multirate name.
pub fn lookup_base(name: &str) -> Result<ButcherTableau> {
    if let Some((_, src)) = BASES.iter().find(|(n, _)| *n == name) {
        return Ok(single_rate_tableau(&lookup(src)?));
    }
    lookup(name).map(|m| single_rate_tableau(&m)).map_err(|_| Error::UnknownMethod {
        name: name.to_string(),
        available: available(),
    })
}

/// Multirate scheme or single-rate base method by name.
pub fn lookup_method(name: &str) -> Result<Method> {
    if BASES.iter().any(|(n, _)| *n == name) {
        return Ok(Method::SingleRate {
            name: name.to_string(),
            tableau: lookup_base(name)?,
        });
    }
    lookup(name).map(Method::Multirate)
}

/// The base tableau with the embedded weights the scheme reduces to when the
/// fast partition is absent.
fn single_rate_tableau(m: &MultirateScheme) -> ButcherTableau {
    match m {
        MultirateScheme::Spc(s) => {
            let mut t = s.base.clone();
            t.b_hat = s.gamma_hat.as_ref().map(|g| g.bar().row(0).transpose());
            t
        }
        MultirateScheme::Ipc(s) => {
            let mut t = s.base.clone();
            let n = s.stages();
            t.b_hat = match (&s.gamma_hat, &s.psi_hat) {
                (Some(g), Some(p)) if n >= 2 => {
                    let row = s.base.a.row(n - 2).transpose();
                    Some(row + g.bar().row(0).transpose() + p.bar().row(0).transpose())
                }
                _ => None,
            };
            t
        }
    }
}

/// `(constant, slope)` of a linear polynomial entry.
type Lin = (f64, f64);

fn lin(constant: f64, slope: f64) -> Lin {
    (constant, slope)
}

fn cst(constant: f64) -> Lin {
    (constant, 0.0)
}

fn row_poly(entries: &[Lin]) -> CouplingPolynomial {
    let s = entries.len();
    let c0 = DMatrix::from_fn(1, s, |_, j| entries[j].0);
    let c1 = DMatrix::from_fn(1, s, |_, j| entries[j].1);
    CouplingPolynomial::new(vec![c0, c1]).expect("shapes agree")
}

fn square_poly(s: usize, entries: &[(usize, usize, Lin)]) -> CouplingPolynomial {
    let mut c0 = DMatrix::zeros(s, s);
    let mut c1 = DMatrix::zeros(s, s);
    for &(i, j, (a, b)) in entries {
        c0[(i - 1, j - 1)] = a;
        c1[(i - 1, j - 1)] = b;
    }
    CouplingPolynomial::new(vec![c0, c1]).expect("shapes agree")
}

fn lower(rows: &[&[f64]]) -> DMatrix<f64> {
    let s = rows.len();
    let mut a = DMatrix::zeros(s, s);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    a
}

#[allow(clippy::too_many_arguments)]
fn spc(
    name: &str,
    a: DMatrix<f64>,
    c: Option<Vec<f64>>,
    gamma: &[Lin],
    gamma_hat: &[Lin],
    order: usize,
    embedded: usize,
    precision: Precision,
) -> Result<MultirateScheme> {
    let s = a.nrows();
    let b = a.row(s - 1).transpose();
    let c = match c {
        Some(c) => DVector::from_vec(c),
        None => super::row_sums(&a),
    };
    let gamma_hat = row_poly(gamma_hat);
    let b_hat = gamma_hat.bar().row(0).transpose();
    let base = ButcherTableau::new(a, b, Some(b_hat), c)?;
    Ok(MultirateScheme::Spc(SpcScheme::new(
        name,
        base,
        row_poly(gamma),
        Some(gamma_hat),
        order,
        Some(embedded),
        precision,
    )?))
}

#[allow(clippy::too_many_arguments)]
fn ipc(
    name: &str,
    a: Option<DMatrix<f64>>,
    c: Vec<f64>,
    gamma: CouplingPolynomial,
    psi: CouplingPolynomial,
    gamma_hat: &[Lin],
    psi_hat: &[Lin],
    order: usize,
    embedded: usize,
) -> Result<MultirateScheme> {
    let s = c.len();
    let e = DMatrix::from_fn(s, s, |i, j| if j <= i { 1.0 } else { 0.0 });
    let a = a.unwrap_or_else(|| &e * (gamma.bar() + psi.bar()));
    let b = a.row(s - 1).transpose();
    let base = ButcherTableau::new(a, b, None, DVector::from_vec(c))?;
    let mut scheme = IpcScheme::new(
        name,
        base,
        gamma,
        psi,
        Some(row_poly(gamma_hat)),
        Some(row_poly(psi_hat)),
        order,
        Some(embedded),
        Precision::Exact,
    )?;
    let n = scheme.stages();
    let bh = scheme.base.a.row(n - 2).transpose()
        + scheme.gamma_hat.as_ref().map(|g| g.bar().row(0).transpose()).unwrap_or_default()
        + scheme.psi_hat.as_ref().map(|p| p.bar().row(0).transpose()).unwrap_or_default();
    scheme.base.b_hat = Some(bh);
    Ok(MultirateScheme::Ipc(scheme))
}

const SQ2: f64 = std::f64::consts::SQRT_2;
const ISQ2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `1 − 1/√2`.
fn dd() -> f64 {
    1.0 - ISQ2
}

// Alexander's two-stage L-stable SDIRK.
fn spc_sdirk2_1_2() -> Result<MultirateScheme> {
    let d = dd();
    spc(
        "SPC-SDIRK2(1)2",
        lower(&[&[d], &[ISQ2, d]]),
        None,
        &[
            lin(5.0 * SQ2 - 6.0, 12.0 - 9.0 * SQ2),
            lin(7.0 - 5.0 * SQ2, 9.0 * SQ2 - 12.0),
        ],
        &[
            lin(6.0 * SQ2 - 36.0 / 5.0, 78.0 / 5.0 - 12.0 * SQ2),
            lin(41.0 / 5.0 - 6.0 * SQ2, 12.0 * SQ2 - 78.0 / 5.0),
        ],
        2,
        1,
        Precision::Exact,
    )
}

// TR-BDF2.
fn spc_esdirk2_1_3() -> Result<MultirateScheme> {
    let d = dd();
    let h = 1.0 / (2.0 * SQ2);
    let g12 = lin(5.0 * ISQ2 - 3.0, 6.0 - 9.0 * ISQ2);
    let gh12 = lin(3.0 * SQ2 - 18.0 / 5.0, 39.0 / 5.0 - 6.0 * SQ2);
    spc(
        "SPC-ESDIRK2(1)3",
        lower(&[&[0.0], &[d, d], &[h, h, d]]),
        None,
        &[g12, g12, lin(7.0 - 5.0 * SQ2, 9.0 * SQ2 - 12.0)],
        &[gh12, gh12, lin(41.0 / 5.0 - 6.0 * SQ2, 12.0 * SQ2 - 78.0 / 5.0)],
        2,
        1,
        Precision::Exact,
    )
}

fn spc_sdirk3_2_4() -> Result<MultirateScheme> {
    let q = 9.0 / 40.0;
    spc(
        "SPC-SDIRK3(2)4",
        lower(&[
            &[q],
            &[163.0 / 520.0, q],
            &[-6481433.0 / 8838675.0, 87795409.0 / 70709400.0, q],
            &[4032.0 / 9943.0, 6929.0 / 15485.0, -723.0 / 9272.0, q],
        ]),
        None,
        &[
            lin(3.0 / 2.0, -21765.0 / 9943.0),
            lin(
                -46850957023.0 / 152236344800.0,
                18740344238109.0 / 12407262101200.0,
            ),
            lin(-2336165553.0 / 30447268960.0, -2318739807.0 / 928641703280.0),
            lin(-231399837.0 / 2003109800.0, 341049771.0 / 500777450.0),
        ],
        &[
            lin(17.0 / 9.0, -458.0 / 153.0),
            lin(-5.0 / 7.0, 1143703567597.0 / 484654507050.0),
            lin(
                -3214490524810792571.0 / 14788625074813908864.0,
                12128361703356241349.0 / 41321158297274157120.0,
            ),
            lin(
                70261070970241507.0 / 1643180563868212096.0,
                6985915649614123877.0 / 20539757048352651200.0,
            ),
        ],
        3,
        2,
        Precision::Exact,
    )
}

// Decimal table. Corrected entries: γ₄ slope (0.3354…) and γ̂₁ constant (0.3812…).
fn spc_esdirk3_2_4() -> Result<MultirateScheme> {
    let g = 0.4358665215084590;
    spc(
        "SPC-ESDIRK3(2)4",
        lower(&[
            &[0.0],
            &[g, g],
            &[0.2648804871412033, -0.09178037827254760, g],
            &[0.1921013555637903, -0.6181218831132021, 0.9901540060409528, g],
        ]),
        Some(vec![0.0, 0.8717330430169180, 0.6089666303771147, 1.0]),
        &[
            lin(0.07530362905710443, 0.2335954530133717),
            lin(-2.542040109838414, 3.847836453450424),
            lin(3.198591776366924, -4.416875540651942),
            lin(0.2681447044143857, 0.3354436341881466),
        ],
        &[
            lin(0.3812962236875004, -0.5331294033713856),
            lin(-1.0, 0.1096316239241135),
            lin(1.688048335476923, -0.7855025327869668),
            lin(-0.06934455916442332, 1.209000312234239),
        ],
        3,
        2,
        Precision::Decimal,
    )
}

fn spc_sdirk4_3_5() -> Result<MultirateScheme> {
    let q = 0.25;
    spc(
        "SPC-SDIRK4(3)5",
        lower(&[
            &[q],
            &[13.0 / 20.0, q],
            &[580.0 / 1287.0, -175.0 / 5148.0, q],
            &[12698.0 / 37375.0, -201.0 / 2990.0, 891.0 / 11500.0, q],
            &[944.0 / 1365.0, -400.0 / 819.0, 99.0 / 35.0, -575.0 / 252.0, q],
        ]),
        None,
        &[
            lin(487.0 / 273.0, -142.0 / 65.0),
            lin(-475.0 / 3276.0, -125.0 / 182.0),
            lin(99.0 / 56.0, 297.0 / 140.0),
            cst(-575.0 / 252.0),
            lin(-1.0 / 8.0, 3.0 / 4.0),
        ],
        &[
            lin(1.0 / 27.0, 357179.0 / 270270.0),
            lin(-17.0 / 8.0, 222331.0 / 72072.0),
            lin(110483689.0 / 63252720.0, 1135934341.0 / 442769040.0),
            lin(28581755.0 / 18975816.0, -11524110095.0 / 1461137832.0),
            lin(-10434149.0 / 63252720.0, 636740663.0 / 695779920.0),
        ],
        4,
        3,
        Precision::Exact,
    )
}

// ESDIRK4(3)6L[2]SA base; columns one and two of A and of γ coincide.
// Corrected entries: a₆₃ (0.3876…) and the γ₆ slope (−0.3477…).
fn spc_esdirk4_3_6() -> Result<MultirateScheme> {
    let q = 0.25;
    let a21 = q;
    let a31 = -0.05177669529663688;
    let a41 = -0.07655460838455727;
    let a51 = -0.7274063478261298;
    let a61 = -0.01558763503571650;
    let g2 = lin(3.066401942782878, -6.163979155637189);
    let gh2 = lin(2.375, -4.935764673620373);
    spc(
        "SPC-ESDIRK4(3)6",
        lower(&[
            &[0.0],
            &[a21, q],
            &[a31, a31, q],
            &[a41, a41, 0.5281092167691145, q],
            &[a51, a51, 1.584995061740679, 0.6598176339115803, q],
            &[a61, a61, 0.3876576709132033, 0.5017726195721632, -0.1082550204139335, q],
        ]),
        Some(vec![0.0, 0.5, (2.0 - SQ2) / 4.0, 5.0 / 8.0, 26.0 / 25.0, 1.0]),
        &[
            g2,
            g2,
            lin(-4.0, 8.775315341826407),
            lin(-0.5967621323323260, 2.197069503808978),
            lin(-0.9599111955850004, 1.703312350342134),
            lin(0.4238694423515700, -0.3477388847031400),
        ],
        &[
            gh2,
            gh2,
            lin(-3.058823529411765, 7.151127236629060),
            lin(-0.05607965938087753, 1.151758875793870),
            lin(-1.734976675593132, 3.303286684519598),
            lin(1.099879864385774, -1.734643449701781),
        ],
        4,
        3,
        Precision::Decimal,
    )
}

fn ipc_sdirk2_1_2() -> Result<MultirateScheme> {
    let d = dd();
    ipc(
        "IPC-SDIRK2(1)2",
        Some(lower(&[&[d], &[ISQ2, d]])),
        vec![d, 1.0],
        square_poly(2, &[(2, 1, cst(ISQ2))]),
        square_poly(2, &[(1, 1, cst(d)), (2, 1, cst(ISQ2 - 1.0)), (2, 2, cst(d))]),
        &[cst(3.0 / 5.0), cst(0.0)],
        &[cst(ISQ2 - 1.0), cst(2.0 / 5.0)],
        2,
        1,
    )
}

// TR-BDF2.
fn ipc_esdirk2_1_3() -> Result<MultirateScheme> {
    let d = dd();
    let h = 1.0 / (2.0 * SQ2);
    ipc(
        "IPC-ESDIRK2(1)3",
        Some(lower(&[&[0.0], &[d, d], &[h, h, d]])),
        vec![0.0, 2.0 - SQ2, 1.0],
        square_poly(3, &[(2, 1, cst(d)), (3, 1, cst(3.0 * h - 1.0)), (3, 2, cst(h))]),
        square_poly(3, &[(2, 2, cst(d)), (3, 2, cst(ISQ2 - 1.0)), (3, 3, cst(d))]),
        &[cst(ISQ2 - 7.0 / 10.0), cst(3.0 / 10.0), cst(0.0)],
        &[cst(0.0), cst(ISQ2 - 1.0), cst(2.0 / 5.0)],
        2,
        1,
    )
}

fn ipc_sdirk3_2_5() -> Result<MultirateScheme> {
    let q = 7.0 / 40.0;
    ipc(
        "IPC-SDIRK3(2)5",
        None,
        vec![7.0 / 40.0, 1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0],
        square_poly(
            5,
            &[
                (2, 1, cst(19.0 / 120.0)),
                (3, 1, cst(1.0 / 10.0)),
                (3, 2, cst(-1.0 / 10.0)),
                (4, 1, cst(17341.0 / 182400.0)),
                (4, 2, cst(-73.0 / 70.0)),
                (4, 3, cst(687111.0 / 425600.0)),
                (5, 1, cst(-21487.0 / 60800.0)),
                (5, 2, cst(1618427.0 / 1702400.0)),
                (5, 3, cst(-1144471.0 / 1702400.0)),
                (5, 4, cst(3.0 / 40.0)),
            ],
        ),
        square_poly(
            5,
            &[
                (1, 1, cst(q)),
                (2, 1, cst(-q)),
                (2, 2, cst(q)),
                (3, 2, cst(-q)),
                (3, 3, cst(q)),
                (4, 3, cst(-q)),
                (4, 4, cst(q)),
                (5, 4, cst(-q)),
                (5, 5, cst(q)),
            ],
        ),
        &[
            cst(2833.0 / 60800.0),
            cst(-9.0 / 35.0),
            cst(17257.0 / 425600.0),
            cst(1.0 / 6.0),
            cst(0.0),
        ],
        &[cst(0.0), cst(0.0), cst(0.0), cst(-q), cst(107.0 / 600.0)],
        3,
        2,
    )
}

// Ψ row 6, columns 3–5: constants follow the `ψ(t) = a t − a/2` pattern of the
// neighbouring entries so that E Ψ̄ is diagonal.
fn ipc_sdirk4_3_6() -> Result<MultirateScheme> {
    let gamma = square_poly(
        6,
        &[
            (2, 1, lin(4.0 / 7.0, -73.0 / 70.0)),
            (3, 1, lin(2253133.0 / 425250.0, -2592641.0 / 425250.0)),
            (3, 2, lin(-30.0 / 7.0, 32.0 / 7.0)),
            (4, 1, lin(-5.0 / 14.0, -79813.0 / 26425.0)),
            (4, 2, lin(-5.0 / 6.0, 417821.0 / 79275.0)),
            (4, 3, lin(4.0 / 9.0, -180296.0 / 237825.0)),
            (5, 1, lin(6626912.0 / 467775.0, -1709523149.0 / 68615910.0)),
            (5, 2, lin(-81.0 / 7.0, 8462196.0 / 449225.0)),
            (5, 3, lin(-8.0 / 9.0, 2352991367.0 / 1035014400.0)),
            (5, 4, lin(-2.0 / 11.0, 180121.0 / 143616.0)),
            (
                6,
                1,
                lin(-796870764337.0 / 204132332250.0, 1646963990099.0 / 204132332250.0),
            ),
            (6, 2, lin(113260367.0 / 22910475.0, -78294288.0 / 7636825.0)),
            (
                6,
                3,
                lin(-28671224497.0 / 17595244800.0, 49839881579.0 / 17595244800.0),
            ),
            (6, 4, lin(4299217.0 / 2441472.0, -5075915.0 / 2441472.0)),
            (6, 5, lin(-2.0 / 3.0, 152.0 / 165.0)),
        ],
    );
    let psi = square_poly(
        6,
        &[
            (1, 1, cst(1.0 / 5.0)),
            (2, 1, lin(-393.0 / 140.0, 73.0 / 14.0)),
            (2, 2, lin(16.0 / 7.0, -146.0 / 35.0)),
            (3, 1, lin(-454241.0 / 170100.0, 454241.0 / 85050.0)),
            (3, 2, lin(314516.0 / 212625.0, -714082.0 / 212625.0)),
            (3, 3, lin(3.0 / 7.0, -16.0 / 35.0)),
            (4, 1, lin(23293.0 / 2268.0, -23293.0 / 1134.0)),
            (4, 2, lin(-20473.0 / 1890.0, 20473.0 / 945.0)),
            (4, 3, lin(-997.0 / 19440.0, -2891.0 / 9720.0)),
            (4, 4, lin(5285.0 / 3888.0, -22537.0 / 9720.0)),
            (5, 1, lin(-7713555547.0 / 621579420.0, 7713555547.0 / 310789710.0)),
            (5, 2, lin(851872739.0 / 70634025.0, -1703745478.0 / 70634025.0)),
            (5, 3, lin(3353446993.0 / 2260288800.0, -3353446993.0 / 1130144400.0)),
            (5, 4, lin(-30061615.0 / 12915936.0, 137392139.0 / 32289840.0)),
            (5, 5, lin(-52224.0 / 639485.0, 360242.0 / 639485.0)),
            (
                6,
                1,
                lin(-9215792648141.0 / 898182261900.0, 9215792648141.0 / 449091130950.0),
            ),
            (
                6,
                2,
                lin(174867684313.0 / 14580880875.0, -349735368626.0 / 14580880875.0),
            ),
            (
                6,
                3,
                lin(-115392839939.0 / 1306446926400.0, 115392839939.0 / 653223463200.0),
            ),
            (6, 4, lin(-61269407807.0 / 37327055040.0, 61269407807.0 / 18663527520.0)),
            (6, 5, lin(-9832286.0 / 10871245.0, 15316074.0 / 10871245.0)),
            (6, 6, lin(11.0 / 17.0, -76.0 / 85.0)),
        ],
    );
    ipc(
        "IPC-SDIRK4(3)6",
        None,
        vec![1.0 / 5.0, 1.0 / 4.0, 1.0 / 2.0, 1.0 / 2.0, 3.0 / 4.0, 1.0],
        gamma,
        psi,
        &[
            lin(-669461750351.0 / 192124548000.0, 694507614551.0 / 96062274000.0),
            lin(9560707.0 / 2156280.0, -9882343.0 / 1078140.0),
            lin(-14640287027.0 / 9936138240.0, 13007509307.0 / 4968069120.0),
            lin(2715895.0 / 1880064.0, -1639519.0 / 940032.0),
            lin(-35.0 / 99.0, 49.0 / 99.0),
            cst(0.0),
        ],
        &[
            lin(-13988077.0 / 1360800.0, 13988077.0 / 680400.0),
            lin(10360601.0 / 850500.0, -10360601.0 / 425250.0),
            lin(-1.0 / 15.0, 2.0 / 15.0),
            lin(-11.0 / 6.0, 11.0 / 3.0),
            lin(-7.0 / 8.0, 27.0 / 20.0),
            lin(5.0 / 9.0, -7.0 / 9.0),
        ],
        4,
        3,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for n in multirate_names() {
            let m = lookup(n).unwrap();
            assert_eq!(m.name(), *n);
            assert_eq!(Some(m.order()), order_from_name(n));
        }
        for n in base_names() {
            let t = lookup_base(n).unwrap();
            assert!(t.b_hat.is_some(), "{n}");
            assert!(matches!(lookup_method(n).unwrap(), Method::SingleRate { .. }));
        }
    }

    #[test]
    fn shared_second_order_bases_agree() {
        let spc = lookup_base("SPC-SDIRK2(1)2").unwrap();
        let ipc = lookup_base("IPC-SDIRK2(1)2").unwrap();
        assert!((spc.a - ipc.a).amax() < 1e-15);
        let spc = lookup_base("SPC-ESDIRK2(1)3").unwrap();
        let ipc = lookup_base("IPC-ESDIRK2(1)3").unwrap();
        assert!((spc.a - ipc.a).amax() < 1e-15);
    }

    #[test]
    fn order_parsing() {
        assert_eq!(order_from_name("SPC-ESDIRK4(3)6"), Some(4));
        assert_eq!(order_from_name("SDIRK2(1)2"), Some(2));
        assert_eq!(order_from_name("nonsense"), None);
    }
}
