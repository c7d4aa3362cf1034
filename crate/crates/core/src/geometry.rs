//! Closed-form metric quantities of the standard torus and of the perturbed
//! torus whose tube radius is `r + eps * sin(n theta)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusParams {
    pub major_radius: f64,
    pub tube_radius: f64,
    pub epsilon: f64,
    pub n_waves: u32,
}

impl TorusParams {
    pub fn new(major_radius: f64, tube_radius: f64, epsilon: f64, n_waves: u32) -> Result<Self> {
        let p = TorusParams {
            major_radius,
            tube_radius,
            epsilon,
            n_waves,
        };
        p.validate()?;
        Ok(p)
    }

    /// Standard torus (`epsilon = 0`, one wave as a placeholder).
    pub fn standard(major_radius: f64, tube_radius: f64) -> Result<Self> {
        Self::new(major_radius, tube_radius, 0.0, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let (big, r, e) = (self.major_radius, self.tube_radius, self.epsilon);
        if !(big.is_finite() && r.is_finite() && e.is_finite()) {
            return Err(Error::InvalidParams("non-finite radius or epsilon".into()));
        }
        if r <= 0.0 {
            return Err(Error::InvalidParams(format!("tube radius r = {r} must be positive")));
        }
        if r <= e.abs() {
            return Err(Error::InvalidParams(format!(
                "need r > |epsilon| (r = {r}, epsilon = {e})"
            )));
        }
        if big <= r + e.abs() {
            return Err(Error::InvalidParams(format!(
                "need R > r + |epsilon| (R = {big}, r = {r}, epsilon = {e})"
            )));
        }
        if self.n_waves == 0 {
            return Err(Error::InvalidParams("n_waves must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.major_radius, self.tube_radius, epsilon, self.n_waves)
    }

    pub fn with_waves(&self, n_waves: u32) -> Result<Self> {
        Self::new(self.major_radius, self.tube_radius, self.epsilon, n_waves)
    }

    pub fn r_eps(&self, theta: f64) -> f64 {
        self.tube_radius + self.epsilon * (self.n_waves as f64 * theta).sin()
    }

    pub fn dr_eps(&self, theta: f64) -> f64 {
        let n = self.n_waves as f64;
        self.epsilon * n * (n * theta).cos()
    }

    pub fn d2r_eps(&self, theta: f64) -> f64 {
        let n = self.n_waves as f64;
        -self.epsilon * n * n * (n * theta).sin()
    }

    /// `Phi = sqrt((R + r_eps cos phi)^2 + r_eps'^2)`.
    pub fn big_phi(&self, phi: f64, theta: f64) -> f64 {
        let re = self.r_eps(theta);
        let dre = self.dr_eps(theta);
        let rho = self.major_radius + re * phi.cos();
        if dre == 0.0 {
            rho
        } else {
            (rho * rho + dre * dre).sqrt()
        }
    }

    /// Point on the embedded surface in R^3.
    pub fn embed(&self, phi: f64, theta: f64) -> [f64; 3] {
        let re = self.r_eps(theta);
        let rho = self.major_radius + re * phi.cos();
        [rho * theta.cos(), rho * theta.sin(), re * phi.sin()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricPoint {
    pub g11: f64,
    pub g22: f64,
    pub sqrt_det: f64,
    pub big_phi: f64,
    pub r_eps: f64,
    pub dr_eps: f64,
}

pub fn metric_at(params: &TorusParams, phi: f64, theta: f64) -> MetricPoint {
    let r_eps = params.r_eps(theta);
    let dr_eps = params.dr_eps(theta);
    let big_phi = params.big_phi(phi, theta);
    MetricPoint {
        g11: r_eps * r_eps,
        g22: big_phi * big_phi,
        sqrt_det: r_eps * big_phi,
        big_phi,
        r_eps,
        dr_eps,
    }
}

/// Coefficients of `u_pp, u_tt, u_p, u_t` in the Laplace-Beltrami operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceCoefficients {
    pub c_pp: f64,
    pub c_tt: f64,
    pub c_p: f64,
    pub c_t: f64,
}

/// Partial derivatives of `Phi` in phi and theta.
pub fn big_phi_derivatives(params: &TorusParams, phi: f64, theta: f64) -> (f64, f64) {
    let re = params.r_eps(theta);
    let dre = params.dr_eps(theta);
    let d2re = params.d2r_eps(theta);
    let big_phi = params.big_phi(phi, theta);
    let rho = params.major_radius + re * phi.cos();
    let d_phi = -rho * re * phi.sin() / big_phi;
    let d_theta = (rho * phi.cos() * dre + dre * d2re) / big_phi;
    (d_phi, d_theta)
}

pub fn laplace_coefficients(params: &TorusParams, phi: f64, theta: f64) -> LaplaceCoefficients {
    let re = params.r_eps(theta);
    let dre = params.dr_eps(theta);
    let big_phi = params.big_phi(phi, theta);
    let (p_phi, p_theta) = big_phi_derivatives(params, phi, theta);
    LaplaceCoefficients {
        c_pp: 1.0 / (re * re),
        c_tt: 1.0 / (big_phi * big_phi),
        c_p: p_phi / (re * re * big_phi),
        c_t: (dre * big_phi - re * p_theta) / (re * big_phi * big_phi * big_phi),
    }
}

/// Squared Riemannian gradient norm from coordinate partials.
pub fn gradient_norm_sq(u_phi: f64, u_theta: f64, mp: &MetricPoint) -> f64 {
    u_phi * u_phi / mp.g11 + u_theta * u_theta / mp.g22
}

/// `(psi'/psi)'` of the standard torus generatrix, written in phi.
pub fn stas_indicator(params: &TorusParams, phi: f64) -> f64 {
    let (big, r) = (params.major_radius, params.tube_radius);
    let rho = big + r * phi.cos();
    -(r + big * phi.cos()) / (r * rho * rho)
}

/// Generatrix of a surface of revolution, parametrized by arclength on `[0, L]`.
pub trait Generatrix {
    fn length(&self) -> f64;
    fn psi(&self, rho: f64) -> f64;
    fn chi(&self, rho: f64) -> f64;
    fn dpsi(&self, rho: f64) -> f64;
    fn dchi(&self, rho: f64) -> f64;
}

/// Upper half of the standard torus: `rho = r phi`, `phi in [0, pi]`.
#[derive(Clone, Copy, Debug)]
pub struct TorusGeneratrix {
    pub major_radius: f64,
    pub tube_radius: f64,
}

impl Generatrix for TorusGeneratrix {
    fn length(&self) -> f64 {
        self.tube_radius * PI
    }
    fn psi(&self, rho: f64) -> f64 {
        self.major_radius + self.tube_radius * (rho / self.tube_radius).cos()
    }
    fn chi(&self, rho: f64) -> f64 {
        self.tube_radius * (rho / self.tube_radius).sin()
    }
    fn dpsi(&self, rho: f64) -> f64 {
        -(rho / self.tube_radius).sin()
    }
    fn dchi(&self, rho: f64) -> f64 {
        (rho / self.tube_radius).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn area_density_standard() {
        let p = TorusParams::standard(5.0, 1.0).unwrap();
        assert_eq!(metric_at(&p, 0.0, 0.0).sqrt_det, 6.0);
    }

    #[test]
    fn perturbed_hand_values() {
        let p = TorusParams::new(5.0, 1.0, 0.2, 15).unwrap();
        let m = metric_at(&p, PI / 2.0, 0.0);
        assert!(close(m.r_eps, 1.0, 1e-15));
        assert!(close(m.dr_eps, 3.0, 1e-15));
        assert!(close(m.big_phi, 34f64.sqrt(), 1e-14));
    }

    #[test]
    fn standard_reductions() {
        let p = TorusParams::standard(5.0, 1.0).unwrap();
        for &(phi, theta) in &[(0.3, 1.2), (2.0, 4.0), (PI, 0.1)] {
            let m = metric_at(&p, phi, theta);
            assert_eq!(m.dr_eps, 0.0);
            assert_eq!(m.big_phi, 5.0 + phi.cos());
            let c = laplace_coefficients(&p, phi, theta);
            assert_eq!(c.c_t, 0.0);
            assert!(close(c.c_p, -phi.sin() / (5.0 + phi.cos()), 1e-15));
        }
        assert_eq!(laplace_coefficients(&p, PI, 0.0).c_p.abs() < 1e-16, true);
    }

    #[test]
    fn gradient_norms() {
        let p = TorusParams::standard(5.0, 1.0).unwrap();
        let m = metric_at(&p, 0.0, 0.0);
        assert_eq!(gradient_norm_sq(0.0, 0.0, &m), 0.0);
        assert_eq!(gradient_norm_sq(1.0, 0.0, &m), 1.0);
        assert!(close(gradient_norm_sq(1.0, 2.0, &m), 1.0 + 4.0 / 36.0, 1e-15));
    }

    #[test]
    fn stas_values() {
        let p = TorusParams::standard(5.0, 1.0).unwrap();
        assert!(close(stas_indicator(&p, PI), 0.25, 1e-15));
        assert!(close(stas_indicator(&p, 0.0), -6.0 / 36.0, 1e-15));
        assert!(stas_indicator(&p, (-0.2f64).acos()).abs() < 1e-15);
    }

    #[test]
    fn embedding_condition() {
        assert!(TorusParams::new(5.0, 1.0, 0.02, 3).is_ok());
        assert!(TorusParams::new(1.01, 1.0, 0.02, 3).is_err());
        assert!(TorusParams::new(5.0, 1.0, 0.0, 0).is_err());
        assert!(TorusParams::new(5.0, 0.5, 0.6, 3).is_err());
    }

    #[test]
    fn generatrix_unit_speed() {
        let g = TorusGeneratrix {
            major_radius: 5.0,
            tube_radius: 1.0,
        };
        for k in 0..=20 {
            let rho = g.length() * k as f64 / 20.0;
            let s = g.dpsi(rho).powi(2) + g.dchi(rho).powi(2);
            assert!((s - 1.0).abs() < 1e-14);
            assert!(g.psi(rho) > 0.0);
        }
    }
}
