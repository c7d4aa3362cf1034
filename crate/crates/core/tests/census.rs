mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use torus_patterns::census::{
    expected_set, locate_critical_points, off_set_margin, theta_certificates, verify_count, CensusDoc, CensusOptions,
    CriticalKind, CriticalPoint,
};
use torus_patterns::newton::{base_state, continuation, NewtonOptions};
use torus_patterns::perturbation::{coefficients_ab, solve_c2};
use torus_patterns::{PeriodicGrid, ScalarField, TorusParams};

fn synthetic(n: u32, delta: f64, g: PeriodicGrid) -> ScalarField {
    ScalarField::from_fn(g, |p, t| p.cos() * (1.0 + delta * (n as f64 * t).sin()))
}

#[test]
fn expected_sets() {
    let p1 = TorusParams::new(5.0, 1.0, 0.1, 1).unwrap();
    assert_eq!(
        expected_set(&p1),
        vec![(0.0, PI / 2.0), (0.0, 3.0 * PI / 2.0), (PI, PI / 2.0), (PI, 3.0 * PI / 2.0)]
    );
    let p2 = p1.with_waves(2).unwrap();
    let thetas: Vec<f64> = expected_set(&p2).iter().take(4).map(|e| e.1).collect();
    for (a, b) in thetas.iter().zip([PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0]) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(expected_set(&p1.with_waves(15).unwrap()).len(), 60);
}

#[test]
fn axisymmetric_field_has_critical_circles() {
    let p = TorusParams::standard(5.0, 1.0).unwrap();
    let g = PeriodicGrid::new(32, 32).unwrap();
    let u = ScalarField::from_fn(g, |phi, _| phi.cos());
    let rep = locate_critical_points(&u, &p, &CensusOptions::default()).unwrap();
    let mut phis: Vec<f64> = rep.circles.iter().map(|c| c.phi).collect();
    phis.sort_by(f64::total_cmp);
    assert_eq!(phis.len(), 2);
    assert!(phis[0].abs() < 1e-12 && (phis[1] - PI).abs() < 1e-12);
    let v = verify_count(&rep, &p, off_set_margin(&u, &p, 3.0), 2.0);
    assert!(!v.verdict);
    assert!(v.reasons.iter().any(|r| r == "degenerate circles"));
}

#[test]
fn synthetic_pattern_has_exactly_4n_points() {
    let p = TorusParams::new(5.0, 1.0, 0.1, 3).unwrap();
    let g = PeriodicGrid::new(32, 48).unwrap();
    let u = synthetic(3, 0.1, g);
    let rep = locate_critical_points(&u, &p, &CensusOptions::default()).unwrap();
    assert_eq!(rep.count, 12);
    assert!(rep.circles.is_empty());
    assert!(rep.max_match_distance < 1e-9);
    let count = |phi: f64, kind: CriticalKind| {
        rep.points
            .iter()
            .filter(|q| (q.phi - phi).abs() < 1e-9 && q.kind == kind)
            .count()
    };
    assert_eq!(count(0.0, CriticalKind::Max), 3);
    assert_eq!(count(0.0, CriticalKind::Saddle), 3);
    assert_eq!(count(PI, CriticalKind::Min), 3);
    assert_eq!(count(PI, CriticalKind::Saddle), 3);
    let margin = off_set_margin(&u, &p, 3.0);
    let v = verify_count(&rep, &p, margin, 2.0);
    assert!(v.verdict, "{:?}", v.reasons);
    assert!(v.off_set_margin > 0.0);

    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("phi,theta,kind,grad_norm\n"));
    assert_eq!(text.lines().count(), 13);
    let doc = serde_json::to_value(CensusDoc::new(&rep, &v, &p)).unwrap();
    assert_eq!(doc["count"], 12);
    assert_eq!(doc["verdict"], true);
    assert!(doc["points"][0].get("grad_norm").is_some());
}

#[test]
fn injected_point_breaks_the_verdict() {
    let p = TorusParams::new(5.0, 1.0, 0.1, 3).unwrap();
    let g = PeriodicGrid::new(32, 48).unwrap();
    let u = synthetic(3, 0.1, g);
    let mut rep = locate_critical_points(&u, &p, &CensusOptions::default()).unwrap();
    rep.points.push(CriticalPoint {
        phi: 1.0,
        theta: 1.0,
        kind: CriticalKind::Saddle,
        grad_norm: 0.0,
        hessian: [1.0, 0.0, -1.0],
    });
    rep.count += 1;
    let v = verify_count(&rep, &p, off_set_margin(&u, &p, 3.0), 2.0);
    assert!(!v.verdict && !v.count_match && !v.one_to_one);
    assert!(v.reasons.iter().any(|r| r.starts_with("count mismatch")));
}

#[test]
fn standard_torus_state_has_degenerate_circles() {
    let fx = common::fixture();
    let g = PeriodicGrid::new(64, 108).unwrap();
    let s = base_state(&fx.sampled(g), &fx.params, &fx.nl, &NewtonOptions::default()).unwrap();
    let rep = locate_critical_points(&s.field, &s.params, &CensusOptions::default()).unwrap();
    assert_eq!(rep.circles.len(), 2);
    let v = verify_count(&rep, &fx.params, off_set_margin(&s.field, &fx.params, 3.0), 2.0);
    assert!(!v.verdict);
    assert!(v.reasons.iter().any(|r| r == "degenerate circles"));
}

#[test]
fn perturbed_state_has_4n_isolated_points() {
    let fx = common::fixture();
    let n = fx.params.n_waves;
    let g = PeriodicGrid::new(64, 216).unwrap();
    let opts = NewtonOptions::default();
    let base = base_state(&fx.sampled(g), &fx.params, &fx.nl, &opts).unwrap();
    let eps = 0.02;
    let branch = continuation(&base, &fx.params, &fx.nl, eps, 4, &opts).unwrap();
    let s = branch.last();
    let rep = locate_critical_points(&s.field, &s.params, &CensusOptions::default()).unwrap();
    let margin = off_set_margin(&s.field, &s.params, 3.0);
    let v = verify_count(&rep, &s.params, margin, 2.0);
    assert_eq!(rep.count, 4 * n as usize);
    assert!(v.verdict, "{:?}", v.reasons);
    assert!(rep.max_match_cells <= 2.0);
    for q in &rep.points {
        assert!(q.grad_norm < 1e-6 * rep.max_gradient);
    }
    // theta-theta second differences follow -eps n^2 C2 sin(n theta) to leading order
    let c = coefficients_ab(&fx.profile, &fx.nl, &fx.params, n, 4096);
    let c2 = solve_c2(&c, 1e-14).unwrap();
    let certs = theta_certificates(&s.field, &s.params, c2[0], c2[2048]).unwrap();
    assert_eq!(certs.len(), 4 * n as usize);
    for cert in &certs {
        assert_eq!(cert.measured.signum(), cert.predicted.signum());
        assert!((cert.measured / cert.predicted - 1.0).abs() < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synthetic_count_is_4n(n in 1u32..6, delta in 0.02f64..0.5, k in 1usize..3) {
        let p = TorusParams::new(5.0, 1.0, 0.1, n).unwrap();
        let g = PeriodicGrid::new(32, 4 * n as usize * 2 * k + 8 * n as usize).unwrap();
        let u = synthetic(n, delta, g);
        let rep = locate_critical_points(&u, &p, &CensusOptions::default()).unwrap();
        prop_assert_eq!(rep.count, 4 * n as usize);
        let v = verify_count(&rep, &p, off_set_margin(&u, &p, 3.0), 2.0);
        prop_assert!(v.verdict);
    }
}
