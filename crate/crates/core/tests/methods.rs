use mrigark::phi::{phi, phi_all, stability_weights_ipc, stability_weights_spc, MAX_INDEX};
use mrigark::quadrature::integrate;
use mrigark::tableaux::*;
use mrigark::verify::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn phi_quadrature(k: usize, z: C) -> C {
    if k == 0 {
        return z.exp();
    }
    integrate(64, |t| (z * (1.0 - t)).exp() * t.powi(k as i32 - 1))
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn registry_lists_each_method_once() {
    let names = multirate_names();
    assert_eq!(names.len(), 10);
    let mut sorted = names.to_vec();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    let err = lookup("NOSUCH").unwrap_err().to_string();
    assert!(err.contains("SPC-SDIRK2(1)2"));
}

#[test]
fn every_registered_method_verifies() {
    for name in multirate_names() {
        let m = lookup(name).unwrap();
        let reports = verify_scheme(&m);
        let tol = m.precision().tolerance();
        for r in reports.iter().filter(|r| r.required) {
            assert!(r.pass && r.residual.abs() <= tol, "{name} {}: {:e}", r.id, r.residual);
        }
        assert!(all_required_pass(&reports));
    }
}

#[test]
fn row_sums_and_structure() {
    for name in multirate_names() {
        let m = lookup(name).unwrap();
        let t = m.base();
        assert!(t.row_sum_defect() <= 1e-13, "{name}");
        assert!(t.is_diagonally_implicit(), "{name}");
        let esdirk = name.contains("ESDIRK");
        assert_eq!(t.structure() == Structure::Esdirk, esdirk, "{name}");
    }
}

#[test]
fn ipc_structure_invariants() {
    for name in multirate_names() {
        let MultirateScheme::Ipc(s) = lookup(name).unwrap() else { continue };
        let c = &s.base.c;
        assert!(c.iter().zip(c.iter().skip(1)).all(|(a, b)| a <= b), "{name}");
        assert!(s.base.is_stiffly_accurate(), "{name}");
        assert_eq!(s.delta_c[0], c[0]);
        for i in 1..c.len() {
            assert_eq!(s.delta_c[i], c[i] - c[i - 1]);
        }
        for g in s.gamma.coeffs() {
            assert!((0..g.nrows()).all(|i| (i..g.ncols()).all(|j| g[(i, j)] == 0.0)), "{name} gamma");
        }
        for p in s.psi.coeffs() {
            assert!((0..p.nrows()).all(|i| (i + 1..p.ncols()).all(|j| p[(i, j)] == 0.0)), "{name} psi");
        }
        let (res, _) = ipc_simplifying_residuals(&s).unwrap();
        assert!(res.iter().all(|r| *r < 1e-12), "{name}: {res:?}");
    }
}

#[test]
fn spc_sdirk2_coefficients() {
    let MultirateScheme::Spc(s) = lookup("SPC-SDIRK2(1)2").unwrap() else { unreachable!() };
    let r2 = 2f64.sqrt();
    let g0 = poly_eval(&s.gamma, 0.0);
    assert!((g0[(0, 0)] - (5.0 * r2 - 6.0)).abs() < 1e-15);
    let g1 = poly_eval(&s.gamma, 1.0);
    assert!((g1[(0, 0)] - (6.0 - 4.0 * r2)).abs() < 1e-14 && (g1[(0, 1)] - (4.0 * r2 - 5.0)).abs() < 1e-14);
    let bar = poly_integral(&s.gamma, 1.0);
    assert!((bar[(0, 0)] - 1.0 / r2).abs() < 1e-15 && (bar[(0, 1)] - (1.0 - 1.0 / r2)).abs() < 1e-15);
    assert!((s.base.c[0] - (1.0 - 1.0 / r2)).abs() < 1e-15 && s.base.c[1] == 1.0);
}

#[test]
fn ipc_sdirk3_abscissae() {
    let MultirateScheme::Ipc(s) = lookup("IPC-SDIRK3(2)5").unwrap() else { unreachable!() };
    let expect = [7.0 / 40.0, 1.0 / 3.0, 1.0 / 3.0, 1.0, 1.0];
    for (c, e) in s.base.c.iter().zip(expect) {
        assert!((c - e).abs() < 1e-15);
    }
    let rows = (s.psi.coeff(0) + s.gamma.coeff(0)) * DVector::from_element(5, 1.0);
    let dc = [7.0 / 40.0, 1.0 / 3.0 - 7.0 / 40.0, 0.0, 2.0 / 3.0, 0.0];
    for (r, d) in rows.iter().zip(dc) {
        assert!((r - d).abs() < 1e-14);
    }
}

#[test]
fn base_residual_examples() {
    let euler = ButcherTableau::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0), None, DVector::zeros(1)).unwrap();
    let r = base_order_residuals(&euler, 2, 1e-13);
    assert_eq!(r[0].residual, 0.0);
    assert_eq!(r[1].residual, -0.5);
    assert!(!r[1].pass);
    for r in base_order_residuals(&lookup_base("SDIRK4(3)5").unwrap(), 4, 1e-13) {
        assert!(r.pass, "{}", r.id);
    }
}

#[test]
fn broken_coupling_is_detected() {
    let MultirateScheme::Spc(mut s) = lookup("SPC-SDIRK2(1)2").unwrap() else { unreachable!() };
    s.gamma.scale_coeff(0, 2.0);
    let r = spc_consistency(&s);
    let sum = r.iter().find(|r| r.id.contains("sum-0") || r.anchor.contains("γ⁰")).unwrap_or(&r[1]);
    assert!(!all_required_pass(&r));
    assert!(r.iter().any(|x| (x.residual.abs() - 1.0).abs() < 1e-13), "{sum:?}");
}

#[test]
fn json_round_trip_preserves_residuals() {
    for name in multirate_names() {
        let m = lookup(name).unwrap();
        let doc = MethodDocument::from_scheme(&m);
        let back = MethodDocument::from_json(&doc.to_json().unwrap()).unwrap().to_scheme(Precision::User).unwrap();
        assert_eq!(back.base().a, m.base().a);
        assert!(all_required_pass(&verify_scheme(&back)), "{name}");
    }
}

#[test]
fn quadrature_constants_match_integrals() {
    let q = QuadratureConstants::new(6);
    for k in 0..6 {
        let p = |t: f64| t.powi(k as i32);
        assert!((q.zeta[k] - integrate(16, |t: f64| p(t) * (1.0 - t))).abs() < 1e-15);
        assert!((q.omega[k] - integrate(16, |t: f64| p(t) * (1.0 - t * t) / 2.0)).abs() < 1e-15);
        assert!((q.xi[k] - integrate(16, |t: f64| p(t) * (1.0 - t).powi(2) / 2.0)).abs() < 1e-15);
    }
}

#[test]
fn phi_examples() {
    let zero = C::new(0.0, 0.0);
    assert_eq!(phi(1, zero), C::new(1.0, 0.0));
    for k in 0..MAX_INDEX {
        assert!((phi(k + 1, zero) - C::new(1.0 / (k + 1) as f64, 0.0)).norm() < 1e-16);
    }
    assert!((phi(1, C::new(1.0, 0.0)).re - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    let z = C::new(-1.0, 0.0);
    assert!(rel(phi(2, z), phi_quadrature(2, z)) < 1e-12);
}

#[test]
fn phi_recurrence_and_quadrature_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let r = rng.random_range(0.0f64..50.0);
        let z = C::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU));
        let v = phi_all(z, 9);
        for k in 1..=8 {
            assert!(rel(v[k], phi_quadrature(k, z)) < 1e-11, "phi_{k}({z})");
            let kk = k as f64;
            let defect = (z * v[k + 1] - kk * v[k] + 1.0).norm() / (kk * v[k].norm()).max(1.0);
            assert!(defect < 1e-11, "recurrence {k} at {z}: {defect:e}");
        }
    }
}

#[test]
fn phi_is_continuous_at_series_switch() {
    for angle in [0.0, 1.0, 2.0, 3.0, std::f64::consts::PI] {
        let lo = C::from_polar(0.5 - 1e-14, angle);
        let hi = C::from_polar(0.5 + 1e-14, angle);
        for k in 1..=MAX_INDEX {
            assert!(rel(phi(k, lo), phi(k, hi)) < 1e-12, "k = {k}, angle {angle}");
        }
    }
}

#[test]
fn weights_at_zero() {
    let zero = C::new(0.0, 0.0);
    for name in multirate_names() {
        match lookup(name).unwrap() {
            MultirateScheme::Spc(s) => {
                let (mu, _) = stability_weights_spc(&s, zero);
                for (m, b) in mu.iter().zip(s.base.b.iter()) {
                    assert!((m.re - b).abs() < 1e-12 && m.im == 0.0, "{name}");
                }
            }
            MultirateScheme::Ipc(s) => {
                let w = stability_weights_ipc(&s, zero);
                let rows = (w.mu + w.nu) * DVector::from_element(s.stages(), C::new(1.0, 0.0));
                let mut expect = DVector::zeros(s.stages());
                for (k, (g, p)) in s.gamma.coeffs().iter().zip(s.psi.coeffs()).enumerate() {
                    expect += (g + p) * DVector::from_element(s.stages(), 1.0) / (k + 1) as f64;
                }
                for (r, e) in rows.iter().zip(expect.iter()) {
                    assert!((r.re - e).abs() < 1e-12, "{name}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn integral_matches_antiderivative(coeffs in prop::collection::vec(-3.0..3.0f64, 1..=6), tau in 0.0..1.0f64) {
        let p = CouplingPolynomial::new(coeffs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect()).unwrap();
        let direct: f64 = coeffs.iter().enumerate().map(|(k, c)| c * tau.powi(k as i32 + 1) / (k + 1) as f64).sum();
        prop_assert!((poly_integral(&p, tau)[(0, 0)] - direct).abs() < 1e-13);
        let value: f64 = coeffs.iter().enumerate().map(|(k, c)| c * tau.powi(k as i32)).sum();
        prop_assert!((poly_eval(&p, tau)[(0, 0)] - value).abs() < 1e-13);
        prop_assert_eq!(poly_eval(&p, 0.0)[(0, 0)], coeffs[0]);
    }

    #[test]
    fn phi_matches_quadrature(re in -50.0..50.0f64, im in -50.0..50.0f64, k in 1usize..=8) {
        let z = C::new(re, im);
        prop_assume!(z.norm() <= 50.0);
        prop_assert!(rel(phi(k, z), phi_quadrature(k, z)) < 1e-11);
    }
}
