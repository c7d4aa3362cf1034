use std::f64::consts::PI;

use proptest::prelude::*;
use torus_patterns::operator::{apply_literal_laplacian, quadrature, weighted_inner_product};
use torus_patterns::{assemble_laplacian, PeriodicGrid, ScalarField, TorusParams};

fn std_params() -> TorusParams {
    TorusParams::standard(5.0, 1.0).unwrap()
}

fn max_err(a: &ScalarField, f: impl Fn(f64, f64) -> f64) -> f64 {
    let g = a.grid;
    let mut e = 0.0f64;
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            e = e.max((a.at(i, j) - f(g.phi(i), g.theta(j))).abs());
        }
    }
    e
}

fn exact_cos_cos2(phi: f64, theta: f64) -> f64 {
    let rho = 5.0 + phi.cos();
    (2.0 * theta).cos() * (-phi.cos() + phi.sin().powi(2) / rho) - 4.0 * phi.cos() * (2.0 * theta).cos() / (rho * rho)
}

#[test]
fn constants_are_in_the_kernel() {
    let p = TorusParams::new(5.0, 1.0, 0.1, 3).unwrap();
    let g = PeriodicGrid::new(32, 48).unwrap();
    let op = assemble_laplacian(&p, &g).unwrap();
    let lu = op.laplacian(&ScalarField::constant(g, 3.7));
    assert!(lu.max_abs() < 1e-12);
}

#[test]
fn second_order_on_cos_phi() {
    let p = std_params();
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let g = PeriodicGrid::new(n, n).unwrap();
        let op = assemble_laplacian(&p, &g).unwrap();
        let lu = op.laplacian(&ScalarField::from_fn(g, |phi, _| phi.cos()));
        errs.push(max_err(&lu, |phi, _| -phi.cos() + phi.sin().powi(2) / (5.0 + phi.cos())));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }
}

#[test]
fn second_order_on_mixed_mode() {
    let p = std_params();
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let g = PeriodicGrid::new(n, n).unwrap();
        let op = assemble_laplacian(&p, &g).unwrap();
        let lu = op.laplacian(&ScalarField::from_fn(g, |phi, t| phi.cos() * (2.0 * t).cos()));
        errs.push(max_err(&lu, exact_cos_cos2));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }
}

#[test]
fn area_and_quadrature() {
    let p = std_params();
    let g = PeriodicGrid::new(64, 64).unwrap();
    let op = assemble_laplacian(&p, &g).unwrap();
    let area = 4.0 * PI * PI * 5.0;
    assert!((op.area() - area).abs() < 1e-10 * area);
    let s = ScalarField::from_fn(g, |_, t| t.sin());
    assert!(quadrature(&s, &p).abs() < 1e-12);
    let c = ScalarField::from_fn(g, |phi, _| phi.cos());
    // integral of cos(phi) (R + r cos phi) r = 2 pi * pi r^2
    assert!((op.quadrature(&c.values) - 2.0 * PI * PI).abs() < 1e-10);
    let one = ScalarField::constant(g, 1.0);
    assert!((weighted_inner_product(&one, &c, &p) - 2.0 * PI * PI).abs() < 1e-10);
    assert!((op.norm(&one.values) - area.sqrt()).abs() < 1e-10);
}

#[test]
fn flux_form_agrees_with_literal_form_to_second_order() {
    let p = TorusParams::new(5.0, 1.0, 0.2, 2).unwrap();
    let u = |phi: f64, t: f64| (phi.cos() + 0.3 * (2.0 * phi).sin()) * (1.0 + 0.5 * (3.0 * t).cos());
    let mut diffs = Vec::new();
    for n in [32, 64, 128] {
        let g = PeriodicGrid::new(n, n).unwrap();
        let f = ScalarField::from_fn(g, u);
        let op = assemble_laplacian(&p, &g).unwrap();
        diffs.push(op.laplacian(&f).dist_inf(&apply_literal_laplacian(&p, &f)));
    }
    for w in diffs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "order {order}");
    }
}

#[test]
fn grid_validation() {
    assert!(PeriodicGrid::new(15, 32).is_err());
    assert!(PeriodicGrid::new(8, 32).is_err());
    let p = TorusParams::new(5.0, 1.0, 0.1, 5).unwrap();
    let g = PeriodicGrid::new(32, 30).unwrap();
    assert!(assemble_laplacian(&p, &g).is_err());
    assert!(assemble_laplacian(&p.with_epsilon(0.0).unwrap(), &g).is_ok());
    assert_eq!(PeriodicGrid::auto_theta(27, 512), 540);
    assert_eq!(PeriodicGrid::auto_theta(4, 64), 64);
}

#[test]
fn field_formats_round_trip() {
    let g = PeriodicGrid::new(16, 20).unwrap();
    let f = ScalarField::from_fn(g, |phi, t| (phi + 2.0 * t).sin() / 3.0);
    let mut bin = Vec::new();
    f.write_binary(&mut bin).unwrap();
    assert_eq!(&bin[..4], b"TPF1");
    assert_eq!(bin.len(), 16 + 8 * 320);
    assert_eq!(ScalarField::read_binary(&bin[..]).unwrap(), f);
    let mut csv = Vec::new();
    f.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("phi,theta,value\n"));
    assert_eq!(ScalarField::read_csv(text.as_bytes()).unwrap(), f);
    assert!(ScalarField::read_csv("x,y\n1,2\n".as_bytes()).is_err());
    let mut bad = bin.clone();
    bad[0] = b'X';
    assert!(ScalarField::read_binary(&bad[..]).is_err());
    assert!(ScalarField::read_binary(&bin[..100]).is_err());
}

fn smooth_field(g: PeriodicGrid, c: &[f64; 6]) -> ScalarField {
    ScalarField::from_fn(g, |p, t| {
        c[0] * p.cos() + c[1] * (2.0 * p).sin() + c[2] * t.cos() + c[3] * (p + t).sin() + c[4] * (3.0 * t).cos() * p.sin() + c[5]
    })
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-2.0f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_self_adjoint(a in coeffs(), b in coeffs(), eps in -0.3f64..0.3, n in 1u32..4) {
        let p = TorusParams::new(5.0, 1.0, eps, n).unwrap();
        let g = PeriodicGrid::new(24, 48).unwrap();
        let op = assemble_laplacian(&p, &g).unwrap();
        let (u, v) = (smooth_field(g, &a), smooth_field(g, &b));
        let lhs = op.inner(&u.values, &op.laplacian(&v).values);
        let rhs = op.inner(&op.laplacian(&u).values, &v.values);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn green_identity_and_nonnegativity(a in coeffs(), eps in -0.3f64..0.3, n in 1u32..4) {
        let p = TorusParams::new(5.0, 1.0, eps, n).unwrap();
        let g = PeriodicGrid::new(24, 48).unwrap();
        let op = assemble_laplacian(&p, &g).unwrap();
        let u = smooth_field(g, &a);
        let d = op.dirichlet_form(&u.values);
        prop_assert!(d >= 0.0);
        let green = -op.inner(&u.values, &op.laplacian(&u).values);
        prop_assert!((d - green).abs() < 1e-9 * (1.0 + d));
        // the mean of L u vanishes
        prop_assert!(op.quadrature(&op.laplacian(&u).values).abs() < 1e-9 * (1.0 + d));
    }

    #[test]
    fn nonconstant_fields_have_positive_energy(a in coeffs(), eps in -0.3f64..0.3) {
        let p = TorusParams::new(5.0, 1.0, eps, 2).unwrap();
        let g = PeriodicGrid::new(24, 48).unwrap();
        let op = assemble_laplacian(&p, &g).unwrap();
        let u = smooth_field(g, &a);
        let mean = op.quadrature(&u.values) / op.area();
        let centred = u.map(|v| v - mean);
        let norm2 = op.inner(&centred.values, &centred.values);
        prop_assume!(norm2 > 1e-6);
        // the spectral gap of -L is bounded below on this coarse torus
        prop_assert!(op.dirichlet_form(&centred.values) / norm2 > 1e-3);
    }
}
