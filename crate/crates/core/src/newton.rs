//! Stationary states of `Δu + f(u) = 0` by Newton's method, continuation in
//! epsilon, and reflection-symmetry diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TorusParams;
use crate::grid::{PeriodicGrid, ScalarField};
use crate::linalg::{self, SolverKind, SpdSolver};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{assemble_laplacian, DiscreteOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Max-norm residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub solver: SolverKind,
    /// Relative tolerance of iterative linear solves.
    pub linear_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 25,
            solver: SolverKind::Auto,
            linear_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub field: ScalarField,
    pub residual_norm: f64,
    pub params: TorusParams,
    pub newton_iters: usize,
    /// Max-norm residual before each update and after the last one.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SteadySidecar {
    pub epsilon: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
    pub n_waves: u32,
    pub n_phi: usize,
    pub n_theta: usize,
}

impl SteadyState {
    pub fn sidecar(&self) -> SteadySidecar {
        SteadySidecar {
            epsilon: self.params.epsilon,
            residual_norm: self.residual_norm,
            newton_iters: self.newton_iters,
            n_waves: self.params.n_waves,
            n_phi: self.field.grid.n_phi,
            n_theta: self.field.grid.n_theta,
        }
    }

    /// Estimates of `C` in `r_{k+1} <= C r_k^2` over the last three iterates.
    pub fn quadratic_constants(&self) -> Vec<f64> {
        let h = &self.history;
        let start = h.len().saturating_sub(3);
        h[start..]
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect()
    }

    /// `log(r_{k+1}/r_k) / log(r_k/r_{k-1})`; close to 2 in the quadratic regime.
    pub fn convergence_orders(&self) -> Vec<f64> {
        self.history
            .windows(3)
            .filter(|w| w.iter().all(|&v| v > 0.0) && w[1] != w[0])
            .map(|w| (w[2] / w[1]).ln() / (w[1] / w[0]).ln())
            .collect()
    }
}

/// Pointwise `Δu + f(u)`.
pub fn residual(u: &ScalarField, op: &DiscreteOperator, nl: &Nonlinearity) -> ScalarField {
    let mut out = op.laplacian(u);
    for (o, &v) in out.values.iter_mut().zip(&u.values) {
        *o += nl.value(v);
    }
    out
}

pub fn newton_solve(
    initial: &ScalarField,
    op: &DiscreteOperator,
    nl: &Nonlinearity,
    opts: &NewtonOptions,
) -> Result<SteadyState> {
    if initial.grid != op.grid {
        return Err(Error::Shape {
            expected: (op.grid.n_phi, op.grid.n_theta),
            got: (initial.grid.n_phi, initial.grid.n_theta),
        });
    }
    let eps = Some(op.params.epsilon);
    let mut u = initial.clone();
    let mut res = residual(&u, op, nl);
    let mut rnorm = res.max_abs();
    let mut history = vec![rnorm];
    let mut iters = 0;
    while rnorm >= opts.tol {
        if iters == opts.max_iter || !rnorm.is_finite() {
            return Err(Error::NoConvergence {
                iters,
                residual: rnorm,
                epsilon: eps,
            });
        }
        let diag: Vec<f64> = u
            .values
            .iter()
            .zip(&op.weights)
            .map(|(&v, w)| -w * nl.derivative(v))
            .collect();
        let rhs: Vec<f64> = res.values.iter().zip(&op.weights).map(|(r, w)| r * w).collect();
        let delta = match SpdSolver::prepare(op, 1.0, diag.clone(), opts.solver, opts.linear_tol)? {
            Some(s) => s.solve(&rhs)?,
            None => {
                let f = linalg::lu(op, 1.0, &diag).map_err(|_| Error::SingularJacobian { epsilon: eps })?;
                f.solve(&rhs)
            }
        };
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::SingularJacobian { epsilon: eps });
        }
        for (x, d) in u.values.iter_mut().zip(&delta) {
            *x += d;
        }
        iters += 1;
        res = residual(&u, op, nl);
        rnorm = res.max_abs();
        history.push(rnorm);
    }
    Ok(SteadyState {
        field: u,
        residual_norm: rnorm,
        params: op.params,
        newton_iters: iters,
        history,
    })
}

/// Steady states along `eps_k = k target / steps`, `k = 0..=steps`.
#[derive(Clone, Debug)]
pub struct Branch {
    pub states: Vec<SteadyState>,
}

impl Branch {
    pub fn last(&self) -> &SteadyState {
        self.states.last().expect("non-empty branch")
    }

    /// `||U^{eps_k} - U^0||_inf` along the branch.
    pub fn deviations(&self) -> Vec<f64> {
        let base = &self.states[0].field;
        self.states.iter().map(|s| s.field.dist_inf(base)).collect()
    }
}

/// Continue the standard-torus state `base` to `target_eps` on `params`' torus.
pub fn continuation(
    base: &SteadyState,
    params: &TorusParams,
    nl: &Nonlinearity,
    target_eps: f64,
    steps: usize,
    opts: &NewtonOptions,
) -> Result<Branch> {
    if steps == 0 {
        return Err(Error::InvalidParams("continuation needs at least one step".into()));
    }
    let target = params.with_epsilon(target_eps)?;
    let grid = base.field.grid;
    grid.check_params(&target)?;
    let mut states = vec![base.clone()];
    if target_eps == 0.0 {
        return Ok(Branch { states });
    }
    for k in 1..=steps {
        let eps = target_eps * k as f64 / steps as f64;
        let p = params.with_epsilon(eps)?;
        let op = assemble_laplacian(&p, &grid)?;
        let prev = &states.last().unwrap().field;
        let next = newton_solve(prev, &op, nl, opts).map_err(|e| attach_eps(e, eps))?;
        states.push(next);
    }
    Ok(Branch { states })
}

fn attach_eps(e: Error, eps: f64) -> Error {
    match e {
        Error::NoConvergence { iters, residual, .. } => Error::NoConvergence {
            iters,
            residual,
            epsilon: Some(eps),
        },
        Error::SingularJacobian { .. } => Error::SingularJacobian { epsilon: Some(eps) },
        other => other,
    }
}

/// Standard-torus steady state seeded by `initial` (typically the sampled profile).
pub fn base_state(
    initial: &ScalarField,
    params: &TorusParams,
    nl: &Nonlinearity,
    opts: &NewtonOptions,
) -> Result<SteadyState> {
    let p0 = params.with_epsilon(0.0)?;
    let op = assemble_laplacian(&p0, &initial.grid)?;
    newton_solve(initial, &op, nl, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymmetryReport {
    /// Defect of the reflection `phi -> 2 pi - phi`.
    pub equatorial_defect: f64,
    /// Defects of `theta -> 2 theta_k - theta`, `k = 0..n`.
    pub plane_defects: Vec<f64>,
    pub max_defect: f64,
    /// Max centered phi-difference on the rows `phi = 0` and `phi = pi`.
    pub phi_derivative_on_rows: f64,
    /// Max centered theta-difference on the lines `theta = theta_k`.
    pub theta_derivative_on_lines: f64,
}

/// Indices of the lines `theta_k = (2k + 1) pi / (2n)`, `k = 0..2n`.
pub fn theta_k_indices(grid: &PeriodicGrid, n_waves: u32) -> Result<Vec<usize>> {
    let q = 4 * n_waves as usize;
    if grid.n_theta % q != 0 {
        return Err(Error::Grid(format!(
            "n_theta = {} not divisible by 4 n = {q}",
            grid.n_theta
        )));
    }
    let step = grid.n_theta / q;
    Ok((0..2 * n_waves as usize).map(|k| (2 * k + 1) * step).collect())
}

pub fn symmetry_check(field: &ScalarField, n_waves: u32) -> Result<SymmetryReport> {
    let g = &field.grid;
    let lines = theta_k_indices(g, n_waves)?;
    let mut eq = 0.0f64;
    for i in 0..g.n_phi {
        let mirror = (g.n_phi - i) % g.n_phi;
        for j in 0..g.n_theta {
            eq = eq.max((field.at(i, j) - field.at(mirror, j)).abs());
        }
    }
    let mut planes = Vec::with_capacity(n_waves as usize);
    for &jk in lines.iter().take(n_waves as usize) {
        let mut d = 0.0f64;
        for i in 0..g.n_phi {
            for s in 1..g.n_theta / 2 {
                let a = field.at(i, (jk + s) % g.n_theta);
                let b = field.at(i, (jk + g.n_theta - s) % g.n_theta);
                d = d.max((a - b).abs());
            }
        }
        planes.push(d);
    }
    let (gp, gt) = crate::operator::centered_gradient(g, &field.values);
    let mut dphi = 0.0f64;
    for i in [0, g.pi_row()] {
        for j in 0..g.n_theta {
            dphi = dphi.max(gp[g.idx(i, j)].abs());
        }
    }
    let mut dtheta = 0.0f64;
    for &jk in &lines {
        for i in 0..g.n_phi {
            dtheta = dtheta.max(gt[g.idx(i, jk)].abs());
        }
    }
    let max_defect = planes.iter().copied().fold(eq, f64::max);
    Ok(SymmetryReport {
        equatorial_defect: eq,
        plane_defects: planes,
        max_defect,
        phi_derivative_on_rows: dphi,
        theta_derivative_on_lines: dtheta,
    })
}
