use std::f64::consts::PI;

use proptest::prelude::*;
use torus_patterns::geometry::{
    big_phi_derivatives, laplace_coefficients, metric_at, stas_indicator, TorusParams,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

// Symbolic values from the embedding, R = 5, r = 1, eps = 0.1, n = 3.
#[test]
fn laplace_coefficients_match_symbolic_oracle() {
    let p = TorusParams::new(5.0, 1.0, 0.1, 3).unwrap();
    let (phi, theta) = (PI / 4.0, PI / 7.0);
    let m = metric_at(&p, phi, theta);
    assert!(close(m.g11, 1.2044904267758768170, 1e-13));
    assert!(close(m.g22, 33.367147564069615158, 1e-13));
    assert!(close(m.sqrt_det, 6.3395906657874898872, 1e-13));
    let c = laplace_coefficients(&p, phi, theta);
    assert!(close(c.c_pp, 0.83022660684547975217, 1e-13));
    assert!(close(c.c_tt, 0.029969598032911245638, 1e-13));
    assert!(close(c.c_p, -0.11153079079005275254, 1e-13));
    assert!(close(c.c_t, 0.0016306567395364921263, 1e-12));
}

#[test]
fn standard_torus_by_hand() {
    let p = TorusParams::standard(5.0, 1.0).unwrap();
    let m = metric_at(&p, 0.0, 1.3);
    assert_eq!(m.g11, 1.0);
    assert!(close(m.g22, 36.0, 1e-15));
    let m = metric_at(&p, PI, 0.2);
    assert!(close(m.sqrt_det, 4.0, 1e-15));
    let c = laplace_coefficients(&p, PI / 2.0, 0.0);
    assert!(close(c.c_p, -1.0 / 5.0, 1e-15));
    assert_eq!(c.c_t, 0.0);
    // (psi'/psi)' in phi: -(r + R cos phi) / (r rho^2)
    assert!(close(stas_indicator(&p, 0.0), -6.0 / 36.0, 1e-15));
    assert!(close(stas_indicator(&p, PI), 4.0 / 16.0, 1e-15));
}

#[test]
fn rejects_degenerate_tori() {
    assert!(TorusParams::new(1.0, 1.0, 0.0, 1).is_err());
    assert!(TorusParams::new(5.0, 1.0, 1.0, 3).is_err());
    assert!(TorusParams::new(1.05, 1.0, 0.1, 3).is_err());
    assert!(TorusParams::new(5.0, -1.0, 0.0, 3).is_err());
    assert!(TorusParams::new(5.0, 1.0, 0.1, 0).is_err());
    assert!(TorusParams::new(f64::NAN, 1.0, 0.0, 1).is_err());
}

fn params() -> impl Strategy<Value = (TorusParams, f64, f64)> {
    (2.0f64..10.0, 0.2f64..1.0, -0.5f64..0.5, 1u32..30, 0.0f64..2.0 * PI, 0.0f64..2.0 * PI)
        .prop_filter_map("admissible", |(big, r, e, n, phi, theta)| {
            let eps = e * r;
            TorusParams::new(big, r, eps, n).ok().map(|p| (p, phi, theta))
        })
}

proptest! {
    #[test]
    fn metric_is_positive_and_consistent((p, phi, theta) in params()) {
        let m = metric_at(&p, phi, theta);
        prop_assert!(m.g11 > 0.0 && m.g22 > 0.0);
        prop_assert!(close(m.sqrt_det, (m.g11 * m.g22).sqrt(), 1e-13));
    }

    #[test]
    fn theta_period_is_two_pi_over_n((p, phi, theta) in params()) {
        let shift = 2.0 * PI / p.n_waves as f64;
        let a = laplace_coefficients(&p, phi, theta);
        let b = laplace_coefficients(&p, phi, theta + shift);
        prop_assert!(close(a.c_pp, b.c_pp, 1e-9));
        prop_assert!(close(a.c_tt, b.c_tt, 1e-9));
        prop_assert!((a.c_p - b.c_p).abs() < 1e-9);
        prop_assert!((a.c_t - b.c_t).abs() < 1e-9);
        let m = metric_at(&p, phi + 2.0 * PI, theta);
        prop_assert!(close(m.sqrt_det, metric_at(&p, phi, theta).sqrt_det, 1e-12));
    }

    #[test]
    fn first_order_coefficients_are_divergence_of_inverse_metric((p, phi, theta) in params()) {
        // c_p = (1/sqrt g) d_phi(sqrt g g^11), c_t = (1/sqrt g) d_theta(sqrt g g^22)
        let h = 1e-5;
        let a = |ph: f64, th: f64| {
            let m = metric_at(&p, ph, th);
            (m.sqrt_det / m.g11, m.sqrt_det / m.g22)
        };
        let sg = metric_at(&p, phi, theta).sqrt_det;
        let dp = (a(phi + h, theta).0 - a(phi - h, theta).0) / (2.0 * h) / sg;
        let dt = (a(phi, theta + h).1 - a(phi, theta - h).1) / (2.0 * h) / sg;
        let c = laplace_coefficients(&p, phi, theta);
        prop_assert!((c.c_p - dp).abs() < 1e-6 * (1.0 + dp.abs()));
        prop_assert!((c.c_t - dt).abs() < 1e-6 * (1.0 + dt.abs()));
    }

    #[test]
    fn big_phi_partials_match_differences((p, phi, theta) in params()) {
        let h = 1e-5;
        let (dp, dt) = big_phi_derivatives(&p, phi, theta);
        let fp = (p.big_phi(phi + h, theta) - p.big_phi(phi - h, theta)) / (2.0 * h);
        let ft = (p.big_phi(phi, theta + h) - p.big_phi(phi, theta - h)) / (2.0 * h);
        prop_assert!((dp - fp).abs() < 1e-6 * (1.0 + fp.abs()));
        prop_assert!((dt - ft).abs() < 1e-6 * (1.0 + ft.abs()));
    }

    #[test]
    fn embedding_lengths_match_metric((p, phi, theta) in params()) {
        let h = 1e-6;
        let d = |a: [f64; 3], b: [f64; 3]| {
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt() / (2.0 * h)
        };
        let m = metric_at(&p, phi, theta);
        let lp = d(p.embed(phi + h, theta), p.embed(phi - h, theta));
        let lt = d(p.embed(phi, theta + h), p.embed(phi, theta - h));
        prop_assert!((lp - m.g11.sqrt()).abs() < 1e-5 * (1.0 + lp));
        prop_assert!((lt - m.g22.sqrt()).abs() < 1e-5 * (1.0 + lt));
    }

    #[test]
    fn zero_epsilon_is_standard((p, phi, theta) in params()) {
        let q = p.with_epsilon(0.0).unwrap();
        let m = metric_at(&q, phi, theta);
        let rho = q.major_radius + q.tube_radius * phi.cos();
        prop_assert!(close(m.g22, rho * rho, 1e-14));
        prop_assert!(close(m.g11, q.tube_radius * q.tube_radius, 1e-15));
        prop_assert_eq!(laplace_coefficients(&q, phi, theta).c_t, 0.0);
    }
}
