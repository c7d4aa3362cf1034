use std::f64::consts::PI;

use proptest::prelude::*;
use torus_patterns::nonlinearity::{
    forge_nonlinearity, forged_point, profile_f_integral, profile_ode_residual, NonlinearityDoc,
};
use torus_patterns::{Error, Nonlinearity, Profile, ProfileConfig, ProfileFamily, TorusParams};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn standard() -> TorusParams {
    TorusParams::standard(5.0, 1.0).unwrap()
}

// Multiprecision quadrature of the sech-layer weight, images j = -6..6.
#[test]
fn default_profile_matches_quadrature_oracle() {
    let p = standard();
    let prof = Profile::build(&ProfileConfig::default(), &p).unwrap();
    assert!(rel(prof.total_weight(), 0.878287301910816756955887048654) < 1e-12);
    let cases = [
        (0.5, 0.000946990457618757141084227356646, 0.0052606731019639610525691635751),
        (1.0, 0.010870803299648008228478179942, 0.0494802803008864533944764555405),
        (2.0, 0.505750708426596894262561132724, 1.1384223777764228238534099024),
        (2.5, 0.914989346727744222484639126592, 0.391356035274679677132714150569),
    ];
    for (phi, u, du) in cases {
        let s = prof.eval(phi);
        assert!(rel(s.u, u) < 1e-10, "U({phi}) = {} vs {u}", s.u);
        assert!(rel(s.du, du) < 1e-12);
    }
    assert!(rel(prof.eval(0.0).d2u, 0.00505575694982774252774673067138) < 1e-10);
    assert!(rel(prof.eval(PI).d2u, -0.23519754559019733391065444381) < 1e-10);
}

#[test]
fn default_forge_matches_quadrature_oracle() {
    let p = standard();
    let prof = Profile::build(&ProfileConfig::default(), &p).unwrap();
    let nl = forge_nonlinearity(&prof, &p).unwrap();
    assert!(rel(nl.max_abs_fprime, 19.8866844495873945455004899742) < 1e-9);
    assert!(rel(nl.fprime[0], -19.8866844495873945455004899742) < 1e-9);
    assert!(rel(*nl.fprime.last().unwrap(), -19.3391670510785103305363770287) < 1e-9);
    assert!(rel(nl.value(0.0), -0.00505575694982774252774673067138) < 1e-10);
    assert!(rel(nl.value(1.0), 0.23519754559019733391065444381) < 1e-10);
    for (phi, f) in [
        (0.5, -0.0237210418352609685331892386406),
        (1.0, -0.210308777098419073204097930684),
        (2.0, 0.226535270172930512960798194535),
        (2.5, 1.49317046403153133079436692261),
    ] {
        assert!(rel(forged_point(&prof, &p, phi).f, f) < 1e-10);
    }
    let t = nl.threshold(&p);
    assert_eq!(t.n, 27);
    assert!((t.bound - 19.8866844495873945455004899742f64.sqrt() * 6.0).abs() < 1e-8);
}

#[test]
fn forged_profile_solves_its_ode() {
    let p = standard();
    let prof = Profile::build(&ProfileConfig::default(), &p).unwrap();
    let nl = forge_nonlinearity(&prof, &p).unwrap();
    assert!(profile_ode_residual(&prof, &nl, &p) < 1e-9);
    assert!(profile_f_integral(&prof, &nl, &p).abs() < 1e-8);
    assert_eq!(prof.eval(0.0).u, 0.0);
    assert_eq!(prof.eval(PI).u, 1.0);
    // f(U(0)) < 0 < f(U(pi))
    assert!(nl.value(0.0) < 0.0 && nl.value(1.0) > 0.0);
    assert!(prof.samples.windows(2).all(|w| w[1].u > w[0].u));
}

#[test]
fn cos_gaussian_total_weight_is_closed_form() {
    let p = standard();
    let cfg = ProfileConfig {
        family: ProfileFamily::CosGaussian,
        phi0: 2.6,
        steepness: 20.0,
        ..ProfileConfig::default()
    };
    let prof = Profile::build(&cfg, &p).unwrap();
    // sqrt(pi/k)/2 [erf(sqrt k (1 - c0)) + erf(sqrt k (1 + c0))]
    assert!(rel(prof.total_weight(), 0.323921854573281722154656510177) < 1e-10);
    assert!(rel(prof.eval(PI).d2u, -2.04958309386853194019321464202) < 1e-10);
    assert!(rel(prof.eval(2.5).u, 0.443177477355843525037691903871) < 1e-10);
}

#[test]
fn stas_condition_is_enforced() {
    let p = standard();
    let cfg = ProfileConfig {
        phi0: 1.5,
        ..ProfileConfig::default()
    };
    assert!(matches!(Profile::build(&cfg, &p), Err(Error::StasViolated { .. })));
    let cfg = ProfileConfig {
        phi0: (-0.2f64).acos() - 1e-9,
        ..ProfileConfig::default()
    };
    assert!(Profile::build(&cfg, &p).is_err());
}

#[test]
fn forging_needs_the_standard_torus() {
    let p = standard();
    let prof = Profile::build(&ProfileConfig::default(), &p).unwrap();
    assert!(forge_nonlinearity(&prof, &p.with_epsilon(0.01).unwrap()).is_err());
}

#[test]
fn threshold_arithmetic() {
    let p = standard();
    assert_eq!(Nonlinearity::affine(0.0, 2.0).threshold(&p).n, 9);
    assert_eq!(Nonlinearity::affine(1.0, 0.0).threshold(&p).n, 1);
    // sqrt(c) (R + r) = 12 exactly: N^2 must exceed 144
    assert_eq!(Nonlinearity::affine(0.0, 4.0).threshold(&p).n, 13);
}

#[test]
fn document_round_trip() {
    let p = standard();
    let cfg = ProfileConfig::default();
    let prof = Profile::build(&cfg, &p).unwrap();
    let nl = forge_nonlinearity(&prof, &p).unwrap();
    let text = serde_json::to_string(&NonlinearityDoc::new(&cfg, &nl)).unwrap();
    let back: NonlinearityDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(back.into_nonlinearity().unwrap(), nl);
    let mut doc = NonlinearityDoc::new(&cfg, &nl);
    doc.version = 99;
    assert!(doc.into_nonlinearity().is_err());
}

#[test]
fn malformed_knots_are_rejected() {
    assert!(Nonlinearity::from_knots(vec![0.0], vec![0.0], vec![0.0]).is_err());
    assert!(Nonlinearity::from_knots(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    assert!(Nonlinearity::from_knots(vec![0.0, 1.0], vec![0.0, f64::NAN], vec![0.0; 2]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn random_profiles_forge_consistently(phi0 in 1.9f64..2.8, k in 1.5f64..4.0) {
        let p = standard();
        let cfg = ProfileConfig { phi0, steepness: k, ..ProfileConfig::default() };
        let prof = Profile::build(&cfg, &p).unwrap();
        let nl = forge_nonlinearity(&prof, &p).unwrap();
        prop_assert!(profile_ode_residual(&prof, &nl, &p) < 1e-8);
        prop_assert!(profile_f_integral(&prof, &nl, &p).abs() < 1e-8);
        prop_assert!(nl.value(0.0) < 0.0);
        prop_assert!(nl.value(1.0) > 0.0);
        let t = nl.threshold(&p);
        let rhs = nl.max_abs_fprime * 36.0;
        prop_assert!((t.n as f64).powi(2) > rhs && ((t.n - 1) as f64).powi(2) <= rhs);
    }
}

proptest! {
    #[test]
    fn interpolant_is_c1_and_antiderivative_consistent(
        knots in prop::collection::vec((0.01f64..1.0, -3.0f64..3.0, -3.0f64..3.0), 2..12),
        t in 0.0f64..1.0,
    ) {
        let mut s = Vec::new();
        let mut acc = 0.0;
        for (d, _, _) in &knots {
            acc += d;
            s.push(acc);
        }
        let f: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let fp: Vec<f64> = knots.iter().map(|k| k.2).collect();
        let nl = Nonlinearity::from_knots(s.clone(), f.clone(), fp.clone()).unwrap();
        for j in 0..s.len() {
            let (v, dv) = nl.eval(s[j]);
            prop_assert!((v - f[j]).abs() < 1e-12);
            prop_assert!((dv - fp[j]).abs() < 1e-9);
        }
        let x = s[0] - 0.5 + t * (s[s.len() - 1] - s[0] + 1.0);
        let h = 1e-6;
        let dd = (nl.value(x + h) - nl.value(x - h)) / (2.0 * h);
        prop_assert!((dd - nl.derivative(x)).abs() < 1e-5 * (1.0 + dd.abs()));
        let da = (nl.antiderivative(x + h) - nl.antiderivative(x - h)) / (2.0 * h);
        prop_assert!((da - nl.value(x)).abs() < 1e-6 * (1.0 + da.abs()));
    }
}
