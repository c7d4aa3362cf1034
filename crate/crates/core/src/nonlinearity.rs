//! The reaction term `f`, forged from a profile so that the profile solves
//! `(1/r^2) U'' - sin(phi)/(r (R + r cos phi)) U' + f(U) = 0` on the standard torus.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TorusParams;
use crate::jet::Jet;
use crate::profile::{Profile, ProfileConfig, ProfileSample};

/// C1 cubic Hermite table `(s_j, f_j, f'_j)` with linear extension.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
    pub max_abs_fprime: f64,
    antider: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub n: u32,
    pub bound: f64,
}

/// `f` and its phi-derivatives along the profile, from the profile ODE.
#[derive(Clone, Copy, Debug)]
pub struct ForgedPoint {
    pub phi: f64,
    pub u: f64,
    pub f: f64,
    pub fprime: f64,
}

fn forged_jet(profile: &Profile, params: &TorusParams, phi: f64) -> (Jet<3>, ProfileSample) {
    let (big, r) = (params.major_radius, params.tube_radius);
    let sample = profile.eval(phi);
    let scale = profile.height / profile.total_weight();
    let w = profile.weight_jet(sample.phi);
    let mut du = Jet::<3>::constant(0.0);
    let mut d2u = Jet::<3>::constant(0.0);
    for k in 0..3 {
        du.c[k] = scale * w.c[k];
        d2u.c[k] = scale * (k as f64 + 1.0) * w.c[k + 1];
    }
    let x = Jet::<3>::variable(sample.phi);
    let (sn, cs) = x.sin_cos();
    let a = sn / (cs * r).offset(big).scale(r);
    let f = d2u.scale(-1.0 / (r * r)) + a * du;
    (f, sample)
}

/// Evaluate `f(U(phi))` and `f'(U(phi))` from the closed-form profile.
pub fn forged_point(profile: &Profile, params: &TorusParams, phi: f64) -> ForgedPoint {
    let (f, s) = forged_jet(profile, params, phi);
    let edge = s.phi == 0.0 || s.phi == PI;
    let fprime = if edge { f.deriv(2) / s.d2u } else { f.deriv(1) / s.du };
    ForgedPoint {
        phi: s.phi,
        u: s.u,
        f: f.c[0],
        fprime,
    }
}

pub fn forge_nonlinearity(profile: &Profile, params: &TorusParams) -> Result<Nonlinearity> {
    if params.epsilon != 0.0 {
        return Err(Error::InvalidParams(
            "the nonlinearity is forged on the standard torus (epsilon = 0)".into(),
        ));
    }
    let m = profile.samples.len();
    let mut s = Vec::with_capacity(m);
    let mut f = Vec::with_capacity(m);
    let mut fp = Vec::with_capacity(m);
    for sample in &profile.samples {
        let pt = forged_point(profile, params, sample.phi);
        if let Some(&last) = s.last() {
            if !(sample.u > last) {
                return Err(Error::NonMonotoneProfile { phi: sample.phi });
            }
        }
        s.push(sample.u);
        f.push(pt.f);
        fp.push(pt.fprime);
    }
    Nonlinearity::from_knots(s, f, fp)
}

impl Nonlinearity {
    pub fn from_knots(s: Vec<f64>, f: Vec<f64>, fprime: Vec<f64>) -> Result<Self> {
        if s.len() < 2 || s.len() != f.len() || s.len() != fprime.len() {
            return Err(Error::Format("knot arrays must have equal length >= 2".into()));
        }
        for w in s.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Format("knots must be strictly increasing".into()));
            }
        }
        if s.iter().chain(&f).chain(&fprime).any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite knot data".into()));
        }
        let max_abs_fprime = fprime.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut antider = Vec::with_capacity(s.len());
        antider.push(0.0);
        for j in 0..s.len() - 1 {
            let d = s[j + 1] - s[j];
            let inc = d * (0.5 * (f[j] + f[j + 1]) + d * (fprime[j] - fprime[j + 1]) / 12.0);
            antider.push(antider[j] + inc);
        }
        Ok(Nonlinearity {
            s,
            f,
            fprime,
            max_abs_fprime,
            antider,
        })
    }

    /// Constant-slope nonlinearity `f(s) = c0 + c1 s`, handy for tests.
    pub fn affine(c0: f64, c1: f64) -> Self {
        Self::from_knots(vec![0.0, 1.0], vec![c0, c0 + c1], vec![c1, c1]).expect("valid knots")
    }

    pub fn s_min(&self) -> f64 {
        self.s[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    fn interval(&self, x: f64) -> usize {
        let j = self.s.partition_point(|&v| v <= x);
        j.saturating_sub(1).min(self.s.len() - 2)
    }

    /// `(f(x), f'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let last = self.s.len() - 1;
        if x <= self.s[0] {
            return (self.f[0] + self.fprime[0] * (x - self.s[0]), self.fprime[0]);
        }
        if x >= self.s[last] {
            return (
                self.f[last] + self.fprime[last] * (x - self.s[last]),
                self.fprime[last],
            );
        }
        let j = self.interval(x);
        let d = self.s[j + 1] - self.s[j];
        let t = (x - self.s[j]) / d;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.f[j] + h10 * d * self.fprime[j] + h01 * self.f[j + 1] + h11 * d * self.fprime[j + 1];
        let dv = (6.0 * t2 - 6.0 * t) / d * (self.f[j] - self.f[j + 1])
            + (3.0 * t2 - 4.0 * t + 1.0) * self.fprime[j]
            + (3.0 * t2 - 2.0 * t) * self.fprime[j + 1];
        (v, dv)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    /// Exact antiderivative of the interpolant, `F(s_min) = 0`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let last = self.s.len() - 1;
        if x <= self.s[0] {
            let d = x - self.s[0];
            return self.f[0] * d + 0.5 * self.fprime[0] * d * d;
        }
        if x >= self.s[last] {
            let d = x - self.s[last];
            return self.antider[last] + self.f[last] * d + 0.5 * self.fprime[last] * d * d;
        }
        let j = self.interval(x);
        let d = self.s[j + 1] - self.s[j];
        let t = (x - self.s[j]) / d;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let i00 = 0.5 * t4 - t3 + t;
        let i10 = 0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2;
        let i01 = -0.5 * t4 + t3;
        let i11 = 0.25 * t4 - t3 / 3.0;
        self.antider[j]
            + d * (i00 * self.f[j] + i10 * d * self.fprime[j] + i01 * self.f[j + 1] + i11 * d * self.fprime[j + 1])
    }

    /// Smallest `N` with `N^2 > max|f'| (R + r)^2`, plus the continuous bound.
    pub fn threshold(&self, params: &TorusParams) -> Threshold {
        let scale = params.major_radius + params.tube_radius;
        let rhs = self.max_abs_fprime * scale * scale;
        let bound = self.max_abs_fprime.sqrt() * scale;
        let mut n = bound.floor().max(0.0) as u64 + 1;
        while n > 1 && ((n - 1) * (n - 1)) as f64 > rhs {
            n -= 1;
        }
        while ((n * n) as f64) <= rhs {
            n += 1;
        }
        Threshold { n: n as u32, bound }
    }
}

/// Max over interior midpoints of the profile ODE residual with the tabulated `f`.
pub fn profile_ode_residual(profile: &Profile, nl: &Nonlinearity, params: &TorusParams) -> f64 {
    let (big, r) = (params.major_radius, params.tube_radius);
    let mut worst = 0.0f64;
    let sm = &profile.samples;
    for i in 0..sm.len() - 1 {
        for phi in [sm[i].phi, 0.5 * (sm[i].phi + sm[i + 1].phi)] {
            if phi <= 0.0 || phi >= PI {
                continue;
            }
            let p = profile.eval(phi);
            let res = p.d2u / (r * r) - phi.sin() / (r * (big + r * phi.cos())) * p.du + nl.value(p.u);
            worst = worst.max(res.abs());
        }
    }
    worst
}

/// Trapezoid value of the integral of `(R + r cos phi) f(U(phi))` over `[0, pi]`.
pub fn profile_f_integral(profile: &Profile, nl: &Nonlinearity, params: &TorusParams) -> f64 {
    let sm = &profile.samples;
    let m = sm.len() - 1;
    let h = PI / m as f64;
    let mut acc = 0.0;
    for (i, s) in sm.iter().enumerate() {
        let g = (params.major_radius + params.tube_radius * s.phi.cos()) * nl.value(s.u);
        acc += if i == 0 || i == m { 0.5 * g } else { g };
    }
    acc * h
}

/// Versioned on-disk form of a profile-derived nonlinearity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityDoc {
    pub version: u32,
    pub family: crate::profile::ProfileFamily,
    pub phi0: f64,
    pub steepness: f64,
    pub height: f64,
    pub max_abs_fprime: f64,
    pub knots: Knots,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knots {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
}

pub const NONLINEARITY_DOC_VERSION: u32 = 1;

impl NonlinearityDoc {
    pub fn new(cfg: &ProfileConfig, nl: &Nonlinearity) -> Self {
        NonlinearityDoc {
            version: NONLINEARITY_DOC_VERSION,
            family: cfg.family,
            phi0: cfg.phi0,
            steepness: cfg.steepness,
            height: cfg.height,
            max_abs_fprime: nl.max_abs_fprime,
            knots: Knots {
                s: nl.s.clone(),
                f: nl.f.clone(),
                fprime: nl.fprime.clone(),
            },
        }
    }

    pub fn into_nonlinearity(self) -> Result<Nonlinearity> {
        if self.version != NONLINEARITY_DOC_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        Nonlinearity::from_knots(self.knots.s, self.knots.f, self.knots.fprime)
    }
}
