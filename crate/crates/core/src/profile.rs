//! Monotone generatrix profiles `U(phi)` on `[0, pi]` and their even
//! extension to the circle.
//!
//! `U(phi) = height * W(phi) / W(pi)` with `W` the antiderivative of a
//! weight `w` that is positive on `(0, pi)` and odd about `0` and `pi`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TorusParams;
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFamily {
    /// `w(s) = sum_j sech^2(k(s - p_j)) - sech^2(k(s + p_j))`, `p_j = phi0 + 2 pi j`.
    SechLayer,
    /// `w(s) = sin(s) exp(-k (cos s - cos phi0)^2)`.
    CosGaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub family: ProfileFamily,
    pub phi0: f64,
    pub steepness: f64,
    pub height: f64,
    pub samples: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            family: ProfileFamily::SechLayer,
            phi0: 2.0,
            steepness: 2.25,
            height: 1.0,
            samples: 4001,
        }
    }
}

const MAX_SECH_STEEPNESS: f64 = 100.0;

impl ProfileConfig {
    pub fn validate(&self, params: &TorusParams) -> Result<()> {
        if !(self.phi0 > 0.0 && self.phi0 < PI) {
            return Err(Error::InvalidParams(format!("phi0 = {} must lie in (0, pi)", self.phi0)));
        }
        let bound = -params.tube_radius / params.major_radius;
        if self.phi0.cos() >= bound {
            return Err(Error::StasViolated {
                cos_phi0: self.phi0.cos(),
                bound,
            });
        }
        if !(self.steepness > 0.0 && self.steepness.is_finite()) {
            return Err(Error::InvalidParams("steepness must be positive".into()));
        }
        if self.family == ProfileFamily::SechLayer && self.steepness > MAX_SECH_STEEPNESS {
            return Err(Error::InvalidParams(format!(
                "sech_layer steepness must not exceed {MAX_SECH_STEEPNESS}"
            )));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::InvalidParams("height must be positive".into()));
        }
        if self.samples < 2001 {
            return Err(Error::InvalidParams("need at least 2001 profile samples".into()));
        }
        Ok(())
    }
}

/// Values and derivatives of `U` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub phi: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub d3u: f64,
    pub d4u: f64,
}

#[derive(Clone, Debug)]
pub struct Profile {
    pub config: ProfileConfig,
    pub samples: Vec<ProfileSample>,
    pub height: f64,
    cumulative: Vec<f64>,
    total: f64,
    images: Vec<f64>,
}

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

impl Profile {
    pub fn build(config: &ProfileConfig, params: &TorusParams) -> Result<Profile> {
        config.validate(params)?;
        let k = config.steepness;
        let images = match config.family {
            ProfileFamily::SechLayer => {
                let reach = (40.0 / (2.0 * PI * k)).ceil() as i64 + 1;
                (-reach..=reach)
                    .map(|j| config.phi0 + 2.0 * PI * j as f64)
                    .collect()
            }
            ProfileFamily::CosGaussian => Vec::new(),
        };
        let mut p = Profile {
            config: config.clone(),
            samples: Vec::with_capacity(config.samples),
            height: config.height,
            cumulative: Vec::with_capacity(config.samples),
            total: 0.0,
            images,
        };
        let m = config.samples - 1;
        let dphi = PI / m as f64;
        let mut acc = 0.0;
        p.cumulative.push(0.0);
        for i in 0..m {
            let a = i as f64 * dphi;
            acc += p.integrate_weight(a, a + dphi);
            p.cumulative.push(acc);
        }
        p.total = acc;
        for i in 0..=m {
            let phi = if i == m { PI } else { i as f64 * dphi };
            let jet = p.weight_jet(phi);
            let scale = p.height / p.total;
            p.samples.push(ProfileSample {
                phi,
                u: p.height * p.cumulative[i] / p.total,
                du: scale * jet.c[0],
                d2u: scale * jet.deriv(1),
                d3u: scale * jet.deriv(2),
                d4u: scale * jet.deriv(3),
            });
        }
        p.samples[0].du = 0.0;
        p.samples[m].du = 0.0;
        p.check_invariants()?;
        Ok(p)
    }

    fn check_invariants(&self) -> Result<()> {
        let m = self.samples.len() - 1;
        for i in 1..m {
            let s = &self.samples[i];
            if !(s.du > 0.0) || !(s.u > self.samples[i - 1].u) {
                return Err(Error::NonMonotoneProfile { phi: s.phi });
            }
        }
        if !(self.samples[m].u > self.samples[m - 1].u) {
            return Err(Error::NonMonotoneProfile { phi: PI });
        }
        if !(self.samples[0].d2u > 0.0) || !(self.samples[m].d2u < 0.0) {
            return Err(Error::InvalidParams(
                "profile must satisfy U''(0) > 0 > U''(pi)".into(),
            ));
        }
        Ok(())
    }

    /// Weight `w` as a jet carrying `w, w', w'', w'''`.
    pub fn weight_jet(&self, s: f64) -> Jet<4> {
        let k = self.config.steepness;
        let x = Jet::<4>::variable(s);
        match self.config.family {
            ProfileFamily::SechLayer => {
                let (sh, ch) = (x * (2.0 * k)).sinh_cosh();
                let mut w = Jet::constant(0.0);
                for &p in &self.images {
                    let sig = sech(2.0 * k * p);
                    if sig == 0.0 {
                        continue;
                    }
                    let den = (ch * sig).offset(1.0);
                    let num = sh * (4.0 * (2.0 * k * p).tanh() * sig);
                    w = w + num / (den * den);
                }
                w
            }
            ProfileFamily::CosGaussian => {
                let (sn, cs) = x.sin_cos();
                let d = cs.offset(-self.config.phi0.cos());
                sn * (d * d * (-k)).exp()
            }
        }
    }

    pub fn weight(&self, s: f64) -> f64 {
        self.weight_jet(s).c[0]
    }

    fn integrate_weight(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for q in 0..4 {
            acc += GL_W[q] * (self.weight(mid - half * GL_X[q]) + self.weight(mid + half * GL_X[q]));
        }
        acc * half
    }

    /// Total weight mass `W(pi)`.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// `U, U', U''` at any `phi` in `[0, pi]`.
    pub fn eval(&self, phi: f64) -> ProfileSample {
        let phi = phi.clamp(0.0, PI);
        let m = self.samples.len() - 1;
        let dphi = PI / m as f64;
        let i = ((phi / dphi).floor() as usize).min(m - 1);
        let a = i as f64 * dphi;
        let w_acc = self.cumulative[i] + if phi > a { self.integrate_weight(a, phi) } else { 0.0 };
        let jet = self.weight_jet(phi);
        let scale = self.height / self.total;
        let edge = phi == 0.0 || phi == PI;
        ProfileSample {
            phi,
            u: if phi == PI { self.height } else { self.height * w_acc / self.total },
            du: if edge { 0.0 } else { scale * jet.c[0] },
            d2u: scale * jet.deriv(1),
            d3u: scale * jet.deriv(2),
            d4u: scale * jet.deriv(3),
        }
    }

    pub fn extend_symmetric(&self) -> PeriodicProfile<'_> {
        PeriodicProfile { profile: self }
    }
}

/// Even extension of a profile about `phi = 0` and `phi = pi`.
#[derive(Clone, Copy, Debug)]
pub struct PeriodicProfile<'a> {
    pub profile: &'a Profile,
}

impl PeriodicProfile<'_> {
    /// Reduce `phi` to `[0, pi]`; the flag tells whether the branch was reflected.
    pub fn fold(phi: f64) -> (f64, bool) {
        let t = phi.rem_euclid(2.0 * PI);
        if t <= PI {
            (t, false)
        } else {
            (2.0 * PI - t, true)
        }
    }

    pub fn eval(&self, phi: f64) -> ProfileSample {
        let (t, reflected) = Self::fold(phi);
        let mut s = self.profile.eval(t);
        s.phi = phi;
        if reflected {
            s.du = -s.du;
            s.d3u = -s.d3u;
        }
        s
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.eval(phi).u
    }

    /// Values at `2 pi k / n`, `k = 0..n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| self.value(2.0 * PI * k as f64 / n as f64))
            .collect()
    }
}
