//! First-order perturbation analysis: the periodic ODEs for the `cos(n theta)`
//! and `sin(n theta)` coefficients of `dU/d eps` at `eps = 0`, their
//! structural facts, and comparison with the Newton branch.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TorusParams;
use crate::grid::{PeriodicGrid, ScalarField};
use crate::linalg::{CyclicLdl, CyclicTridiagonal};
use crate::nonlinearity::Nonlinearity;
use crate::profile::Profile;
use crate::spectral::fitted_order;

/// Coefficients of `(1/psi)(psi C')' - B C = A` on the uniform circle grid
/// `phi_i = 2 pi i / m`, with `psi = R + r cos phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeCoefficients {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    /// `psi` at `phi_{i + 1/2}`.
    pub psi_half: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub n_waves: u32,
}

fn circle(params: &TorusParams, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = 2.0 * PI / m as f64;
    let (big, r) = (params.major_radius, params.tube_radius);
    let phi: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let psi = phi.iter().map(|p| big + r * p.cos()).collect();
    let psi_half = (0..m).map(|i| big + r * ((i as f64 + 0.5) * h).cos()).collect();
    (phi, psi, psi_half)
}

/// `A` and `B` from closed forms along the profile on `m` circle points.
pub fn coefficients_ab(profile: &Profile, nl: &Nonlinearity, params: &TorusParams, n: u32, m: usize) -> OdeCoefficients {
    let (big, r) = (params.major_radius, params.tube_radius);
    let (phi, psi, psi_half) = circle(params, m);
    let ext = profile.extend_symmetric();
    let nn = n as f64 * n as f64;
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for i in 0..m {
        let p = ext.eval(phi[i]);
        let (f, fp) = nl.eval(p.u);
        a.push(2.0 * r * (-f + big * phi[i].sin() * p.du / (2.0 * r * psi[i] * psi[i])));
        b.push(r * r * (nn / (psi[i] * psi[i]) - fp));
    }
    OdeCoefficients {
        phi,
        psi,
        psi_half,
        a,
        b,
        n_waves: n,
    }
}

/// Coefficients consistent with the surface discretization on `grid`: `B`
/// uses the discrete symbol of `d^2/d theta^2` on `sin(n theta)` and `A` is
/// the exact epsilon-derivative of the discrete operator applied to the
/// discrete standard-torus state `column` (its values on `theta = 0`).
pub fn grid_consistent_coefficients(
    column: &[f64],
    nl: &Nonlinearity,
    params: &TorusParams,
    grid: &PeriodicGrid,
    n: u32,
) -> Result<OdeCoefficients> {
    let m = grid.n_phi;
    if column.len() != m {
        return Err(Error::Shape {
            expected: (m, 1),
            got: (column.len(), 1),
        });
    }
    let (big, r) = (params.major_radius, params.tube_radius);
    let (phi, psi, psi_half) = circle(params, m);
    let h = grid.h_phi();
    let ht = grid.h_theta();
    let kappa = (2.0 / ht * (n as f64 * ht / 2.0).sin()).powi(2);
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for i in 0..m {
        let (ip, im) = ((i + 1) % m, (i + m - 1) % m);
        let (u, up, um) = (column[i], column[ip], column[im]);
        let flux = (psi_half[i] * (up - u) - psi_half[im] * (u - um)) / (r * h * h);
        let d2 = (up - 2.0 * u + um) / (h * h);
        let c = phi[i].cos();
        let deriv = -(psi[i] + r * c) / (r * r * psi[i] * psi[i]) * flux - big / (r * r * r * psi[i]) * d2;
        a.push(-r * r * deriv);
        b.push(r * r * (kappa / (psi[i] * psi[i]) - nl.derivative(u)));
    }
    Ok(OdeCoefficients {
        phi,
        psi,
        psi_half,
        a,
        b,
        n_waves: n,
    })
}

/// Factored periodic operator `C -> (1/psi)(psi C')' - B C` in symmetric form.
pub struct PeriodicSturmSolver {
    h: f64,
    psi: Vec<f64>,
    matrix: CyclicTridiagonal,
    ldl: CyclicLdl,
}

impl PeriodicSturmSolver {
    pub fn new(psi: &[f64], psi_half: &[f64], b: &[f64], pivot_tol: f64) -> Result<Self> {
        let m = psi.len();
        let min_b = b.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_b > 0.0) {
            return Err(Error::NonPositiveB { min: min_b });
        }
        let h = 2.0 * PI / m as f64;
        let diag = (0..m)
            .map(|i| psi_half[i] + psi_half[(i + m - 1) % m] + h * h * psi[i] * b[i])
            .collect();
        let off = psi_half.iter().map(|p| -p).collect();
        let matrix = CyclicTridiagonal { diag, off };
        let ldl = matrix.factor(pivot_tol)?;
        Ok(PeriodicSturmSolver {
            h,
            psi: psi.to_vec(),
            matrix,
            ldl,
        })
    }

    pub fn from_coefficients(c: &OdeCoefficients, pivot_tol: f64) -> Result<Self> {
        Self::new(&c.psi, &c.psi_half, &c.b, pivot_tol)
    }

    /// Periodic solution of `(1/psi)(psi C')' - B C = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = rhs
            .iter()
            .zip(&self.psi)
            .map(|(v, p)| -self.h * self.h * p * v)
            .collect();
        self.ldl.solve(&y)
    }

    /// `(1/psi)(psi C')' - B C` of a sampled `C`.
    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        self.matrix
            .apply(c)
            .iter()
            .zip(&self.psi)
            .map(|(v, p)| -v / (self.h * self.h * p))
            .collect()
    }
}

pub fn solve_c1(coeffs: &OdeCoefficients, pivot_tol: f64) -> Result<Vec<f64>> {
    let s = PeriodicSturmSolver::from_coefficients(coeffs, pivot_tol)?;
    Ok(s.solve(&vec![0.0; coeffs.phi.len()]))
}

pub fn solve_c2(coeffs: &OdeCoefficients, pivot_tol: f64) -> Result<Vec<f64>> {
    let s = PeriodicSturmSolver::from_coefficients(coeffs, pivot_tol)?;
    Ok(s.solve(&coeffs.a))
}

#[derive(Clone, Debug)]
pub struct PerturbationSolution {
    pub coefficients: OdeCoefficients,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub threshold_n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTolerances {
    pub c1_max: f64,
    pub slope_max: f64,
    pub nonzero_fraction: f64,
    pub integral_zero: f64,
    pub symmetry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationVerdict {
    pub b_positive: bool,
    pub c1_vanishes: bool,
    pub c2_boundary_slopes: bool,
    pub c2_nonzero_at_poles: bool,
    pub zero_integral: bool,
    pub negativity_integral: bool,
    pub min_b: f64,
    pub c1_max: f64,
    pub c2_max: f64,
    pub c2_at_0: f64,
    pub c2_at_pi: f64,
    pub c2_slope_at_0: f64,
    pub c2_slope_at_pi: f64,
    pub zero_integral_value: f64,
    pub negativity_integral_value: f64,
    pub a_integral: f64,
    pub c2_symmetry_defect: f64,
    pub n_waves: u32,
    pub threshold_n: u32,
}

impl PerturbationVerdict {
    pub fn all_pass(&self) -> bool {
        self.b_positive
            && self.c1_vanishes
            && self.c2_boundary_slopes
            && self.c2_nonzero_at_poles
            && self.zero_integral
            && self.negativity_integral
    }
}

/// Trapezoid integral over `[0, pi]` of `psi g` on the circle grid.
pub fn half_circle_integral(psi: &[f64], g: &[f64]) -> f64 {
    let m = psi.len();
    let h = 2.0 * PI / m as f64;
    let half = m / 2;
    let mut acc = 0.5 * (psi[0] * g[0] + psi[half] * g[half]);
    for i in 1..half {
        acc += psi[i] * g[i];
    }
    acc * h
}

impl PerturbationSolution {
    pub fn solve(coefficients: OdeCoefficients, threshold_n: u32, pivot_tol: f64) -> Result<Self> {
        let c1 = solve_c1(&coefficients, pivot_tol)?;
        let c2 = solve_c2(&coefficients, pivot_tol)?;
        Ok(PerturbationSolution {
            coefficients,
            c1,
            c2,
            threshold_n,
        })
    }

    pub fn verdict(&self, tol: &PerturbationTolerances) -> PerturbationVerdict {
        let c = &self.coefficients;
        let m = c.phi.len();
        let h = 2.0 * PI / m as f64;
        let half = m / 2;
        let norm = |v: &[f64]| v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let min_b = c.b.iter().copied().fold(f64::INFINITY, f64::min);
        let c1_max = norm(&self.c1);
        let c2_max = norm(&self.c2);
        let c2 = &self.c2;
        let slope0 = (c2[1] - c2[m - 1]) / (2.0 * h);
        let slope_pi = (c2[half + 1] - c2[half - 1]) / (2.0 * h);
        let bc2a: Vec<f64> = (0..m).map(|i| c.b[i] * c2[i] + c.a[i]).collect();
        let bc2: Vec<f64> = (0..m).map(|i| c.b[i] * c2[i]).collect();
        let zero_val = half_circle_integral(&c.psi, &bc2a);
        let neg_val = half_circle_integral(&c.psi, &bc2);
        let a_int = half_circle_integral(&c.psi, &c.a);
        let sym = (0..m).map(|i| (c2[i] - c2[(m - i) % m]).abs()).fold(0.0, f64::max);
        PerturbationVerdict {
            b_positive: min_b > 0.0,
            c1_vanishes: c1_max < tol.c1_max,
            c2_boundary_slopes: slope0.abs() < tol.slope_max && slope_pi.abs() < tol.slope_max,
            c2_nonzero_at_poles: c2[0].abs() > tol.nonzero_fraction * c2_max
                && c2[half].abs() > tol.nonzero_fraction * c2_max,
            zero_integral: zero_val.abs() < tol.integral_zero,
            negativity_integral: neg_val < 0.0,
            min_b,
            c1_max,
            c2_max,
            c2_at_0: c2[0],
            c2_at_pi: c2[half],
            c2_slope_at_0: slope0,
            c2_slope_at_pi: slope_pi,
            zero_integral_value: zero_val,
            negativity_integral_value: neg_val,
            a_integral: a_int,
            c2_symmetry_defect: sym,
            n_waves: c.n_waves,
            threshold_n: self.threshold_n,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi,A,B,C1,C2")?;
        let c = &self.coefficients;
        for i in 0..c.phi.len() {
            writeln!(w, "{:e},{:e},{:e},{:e},{:e}", c.phi[i], c.a[i], c.b[i], self.c1[i], self.c2[i])?;
        }
        Ok(())
    }
}

/// `V(phi, theta) = C2(phi) sin(n theta)` on the grid; `c2` sampled at the grid's phi values.
pub fn first_order_field(c2: &[f64], n: u32, grid: &PeriodicGrid) -> Result<ScalarField> {
    if c2.len() != grid.n_phi {
        return Err(Error::Shape {
            expected: (grid.n_phi, 1),
            got: (c2.len(), 1),
        });
    }
    let s: Vec<f64> = (0..grid.n_theta)
        .map(|j| (n as f64 * grid.theta(j)).sin())
        .collect();
    let mut f = ScalarField::zeros(*grid);
    for i in 0..grid.n_phi {
        for j in 0..grid.n_theta {
            f.values[grid.idx(i, j)] = c2[i] * s[j];
        }
    }
    Ok(f)
}

/// Max over phi-rows of `|(2/N) sum_j g(phi, theta_j) t(n theta_j)|` for `t = cos` and `t = sin`.
pub fn fourier_content(field: &ScalarField, n: u32) -> (f64, f64) {
    let g = &field.grid;
    let nt = g.n_theta;
    let (mut cmax, mut smax) = (0.0f64, 0.0f64);
    for i in 0..g.n_phi {
        let (mut c, mut s) = (0.0, 0.0);
        for j in 0..nt {
            let arg = n as f64 * g.theta(j);
            c += field.at(i, j) * arg.cos();
            s += field.at(i, j) * arg.sin();
        }
        cmax = cmax.max((2.0 * c / nt as f64).abs());
        smax = smax.max((2.0 * s / nt as f64).abs());
    }
    (cmax, smax)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComparisonRow {
    pub epsilon: f64,
    /// `||(U^eps - U)/eps - V||_inf`; `None` at `eps = 0`.
    pub e: Option<f64>,
    /// Max-row `cos(n theta)` coefficient of `(U^eps - U)/eps`.
    pub cos_content: Option<f64>,
    pub sin_content: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub e_order: Option<f64>,
    /// `E(eps_k) / E(eps_{k-1})` for consecutive epsilons sorted ascending.
    pub e_ratios: Vec<f64>,
    pub cos_order: Option<f64>,
}

/// Compare Newton states `(eps, U^eps)` against `U + eps V`.
pub fn compare_with_newton(base: &ScalarField, branch: &[(f64, &ScalarField)], v: &ScalarField, n: u32) -> ComparisonTable {
    let mut rows: Vec<ComparisonRow> = branch
        .iter()
        .map(|&(eps, u)| {
            if eps == 0.0 {
                return ComparisonRow {
                    epsilon: 0.0,
                    e: None,
                    cos_content: None,
                    sin_content: None,
                    note: Some("skipped: division by epsilon undefined at epsilon = 0".into()),
                };
            }
            let d = u.sub(base).map(|x| x / eps);
            let (c, s) = fourier_content(&d, n);
            ComparisonRow {
                epsilon: eps,
                e: Some(d.dist_inf(v)),
                cos_content: Some(c),
                sin_content: Some(s),
                note: None,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.epsilon.abs().total_cmp(&b.epsilon.abs()));
    let nz: Vec<&ComparisonRow> = rows.iter().filter(|r| r.e.is_some()).collect();
    let eps: Vec<f64> = nz.iter().map(|r| r.epsilon.abs()).collect();
    let es: Vec<f64> = nz.iter().map(|r| r.e.unwrap()).collect();
    let cs: Vec<f64> = nz.iter().map(|r| r.cos_content.unwrap()).collect();
    ComparisonTable {
        e_order: fitted_order(&eps, &es),
        e_ratios: es.windows(2).map(|w| w[1] / w[0]).collect(),
        cos_order: fitted_order(&eps, &cs),
        rows,
    }
}
