mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use torus_patterns::dynamics::{energy, smooth_random_field, stability_probe, step_imex, ImexStepper, ProbeOptions};
use torus_patterns::linalg::SolverKind;
use torus_patterns::newton::{base_state, NewtonOptions};
use torus_patterns::{assemble_laplacian, Nonlinearity, PeriodicGrid, ScalarField, TorusParams};

fn probe_opts(t_end: f64, dt: f64) -> ProbeOptions {
    ProbeOptions {
        t_end,
        dt,
        max_mode: 8,
        solver: SolverKind::Auto,
        linear_tol: 1e-13,
    }
}

#[test]
fn steady_state_is_a_fixed_point() {
    let fx = common::fixture();
    let g = PeriodicGrid::new(128, 16).unwrap();
    let opts = NewtonOptions::default();
    let s = base_state(&fx.sampled(g), &fx.params, &fx.nl, &opts).unwrap();
    let op = assemble_laplacian(&s.params, &g).unwrap();
    let dt = 0.5 / fx.nl.max_abs_fprime;
    let next = step_imex(&s.field, dt, &op, &fx.nl, 1e-13).unwrap();
    assert!(next.dist_inf(&s.field) <= 10.0 * (opts.tol + opts.linear_tol));
}

#[test]
fn pure_diffusion_keeps_constants_and_decays_modes() {
    let p = TorusParams::standard(5.0, 1.0).unwrap();
    let g = PeriodicGrid::new(32, 32).unwrap();
    let op = assemble_laplacian(&p, &g).unwrap();
    let zero = Nonlinearity::affine(0.0, 0.0);
    let c = ScalarField::constant(g, 0.3);
    assert!(step_imex(&c, 0.1, &op, &zero, 1e-13).unwrap().dist_inf(&c) < 1e-14);
    let stepper = ImexStepper::new(&op, &zero, 0.05, SolverKind::Auto, 1e-13).unwrap();
    let mut u = ScalarField::from_fn(g, |phi, _| phi.cos()).values;
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        u = stepper.step(&u).unwrap();
        let m = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(m < last);
        last = m;
    }
    assert!(step_imex(&c, 0.0, &op, &zero, 1e-13).is_err());
}

#[test]
fn unperturbed_probe_stays_put() {
    let fx = common::fixture();
    let g = PeriodicGrid::new(64, 16).unwrap();
    let s = base_state(&fx.sampled(g), &fx.params, &fx.nl, &NewtonOptions::default()).unwrap();
    let op = assemble_laplacian(&s.params, &g).unwrap();
    let t = stability_probe(&s.field, &op, &fx.nl, 0.0, 1, &probe_opts(1.0, 0.02)).unwrap();
    assert!(t.max_sup_distance() < 1e-9);
    assert!(stability_probe(&s.field, &op, &fx.nl, -1.0, 1, &probe_opts(1.0, 0.02)).is_err());
}

#[test]
fn perturbation_decays_and_energy_descends() {
    let fx = common::fixture();
    let g = PeriodicGrid::new(64, 16).unwrap();
    let s = base_state(&fx.sampled(g), &fx.params, &fx.nl, &NewtonOptions::default()).unwrap();
    let op = assemble_laplacian(&s.params, &g).unwrap();
    let delta = 1e-2 * s.field.max_abs();
    let dt = 0.5 / fx.nl.max_abs_fprime;
    let t = stability_probe(&s.field, &op, &fx.nl, delta, 3, &probe_opts(20.0, dt)).unwrap();
    assert_eq!(t.times.len(), t.sup_distance.len());
    assert_eq!(t.times.len(), t.energy.len());
    assert!(t.times.windows(2).all(|w| w[1] > w[0]));
    assert!((t.times.last().unwrap() - 20.0).abs() < 1e-12);
    assert!((t.sup_distance[0] - delta).abs() < 1e-12);
    assert!(t.final_sup_distance() < t.sup_distance[0]);
    assert!(t.max_sup_distance() < 3.0 * delta);
    assert!(t.max_energy_increase() <= 1e-10);
    let mut csv = Vec::new();
    t.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("t,sup_distance,energy\n"));
}

#[test]
fn smooth_random_fields_are_seeded_and_normalized() {
    let g = PeriodicGrid::new(32, 48).unwrap();
    let a = smooth_random_field(&g, 11, 8);
    assert_eq!(a, smooth_random_field(&g, 11, 8));
    assert_ne!(a, smooth_random_field(&g, 12, 8));
    assert!((a.max_abs() - 1.0).abs() < 1e-15);
}

#[test]
fn energy_of_constant_is_minus_potential() {
    let p = TorusParams::standard(5.0, 1.0).unwrap();
    let g = PeriodicGrid::new(32, 32).unwrap();
    let op = assemble_laplacian(&p, &g).unwrap();
    let nl = Nonlinearity::affine(1.0, 0.0);
    // F(s) = s - s_min with s_min = 0
    let e = energy(&vec![2.0; g.len()], &op, &nl);
    assert!((e + 2.0 * 4.0 * PI * PI * 5.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn comparison_principle(seed in 0u64..1000, gap in 0.0f64..0.2) {
        let fx = common::fixture();
        let g = PeriodicGrid::new(32, 16).unwrap();
        let op = assemble_laplacian(&fx.params.with_epsilon(0.0).unwrap(), &g).unwrap();
        let dt = 0.9 / fx.nl.max_abs_fprime;
        let stepper = ImexStepper::new(&op, &fx.nl, dt, SolverKind::Auto, 1e-13).unwrap();
        let xi = smooth_random_field(&g, seed, 4);
        let mut u: Vec<f64> = xi.values.iter().map(|x| 0.5 + 0.4 * x).collect();
        let bump = smooth_random_field(&g, seed + 1, 3);
        let mut v: Vec<f64> = u.iter().zip(&bump.values).map(|(a, b)| a + gap * (1.0 + b) / 2.0).collect();
        for _ in 0..20 {
            u = stepper.step(&u).unwrap();
            v = stepper.step(&v).unwrap();
            prop_assert!(u.iter().zip(&v).all(|(a, b)| *a <= b + 1e-8));
        }
    }
}
