//! Flux-form discretization of the Laplace-Beltrami operator on the
//! (perturbed) torus, weighted quadrature, and gradients.
//!
//! With node weights `w = sqrt|g| h_phi h_theta` and symmetric edge couplings
//! `c`, `(L u)_k = (1/w_k) sum_l c_kl (u_l - u_k)`. The stiffness matrix
//! `S = -W L` is symmetric positive semidefinite with the constants as kernel.

use std::sync::OnceLock;

use crate::error::Result;
use crate::geometry::{gradient_norm_sq, laplace_coefficients, metric_at, TorusParams};
use crate::grid::{PeriodicGrid, ScalarField};
use crate::linalg::Pattern;

pub struct DiscreteOperator {
    pub params: TorusParams,
    pub grid: PeriodicGrid,
    /// Quadrature weights `sqrt|g| h_phi h_theta` at nodes.
    pub weights: Vec<f64>,
    /// Coupling between node `(i, j)` and `(i + 1, j)`.
    pub c_phi: Vec<f64>,
    /// Coupling between node `(i, j)` and `(i, j + 1)`.
    pub c_theta: Vec<f64>,
    pattern: OnceLock<Pattern>,
}

impl std::fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("params", &self.params)
            .field("grid", &self.grid)
            .finish()
    }
}

pub fn assemble_laplacian(params: &TorusParams, grid: &PeriodicGrid) -> Result<DiscreteOperator> {
    params.validate()?;
    grid.check_params(params)?;
    let (hp, ht) = (grid.h_phi(), grid.h_theta());
    let n = grid.len();
    let mut weights = Vec::with_capacity(n);
    let mut c_phi = Vec::with_capacity(n);
    let mut c_theta = Vec::with_capacity(n);
    for i in 0..grid.n_phi {
        let phi = grid.phi(i);
        let phi_half = phi + 0.5 * hp;
        for j in 0..grid.n_theta {
            let theta = grid.theta(j);
            let theta_half = theta + 0.5 * ht;
            weights.push(metric_at(params, phi, theta).sqrt_det * hp * ht);
            let a = params.big_phi(phi_half, theta) / params.r_eps(theta);
            c_phi.push(a * ht / hp);
            let b = params.r_eps(theta_half) / params.big_phi(phi, theta_half);
            c_theta.push(b * hp / ht);
        }
    }
    Ok(DiscreteOperator {
        params: *params,
        grid: *grid,
        weights,
        c_phi,
        c_theta,
        pattern: OnceLock::new(),
    })
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Neighbours of node `k` with their couplings: `(i+1), (i-1), (j+1), (j-1)`.
    pub fn neighbours(&self, k: usize) -> [(usize, f64); 4] {
        let g = &self.grid;
        let (i, j) = (k / g.n_theta, k % g.n_theta);
        let kip = g.idx(g.ip(i), j);
        let kim = g.idx(g.im(i), j);
        let kjp = g.idx(i, g.jp(j));
        let kjm = g.idx(i, g.jm(j));
        [
            (kip, self.c_phi[k]),
            (kim, self.c_phi[kim]),
            (kjp, self.c_theta[k]),
            (kjm, self.c_theta[kjm]),
        ]
    }

    /// `out = S u` with `S = -W L`.
    pub fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (l, c) in self.neighbours(k) {
                acc += c * (u[k] - u[l]);
            }
            *o = acc;
        }
    }

    /// `out = L u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        self.apply_stiffness(u, out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = -*o / w;
        }
    }

    pub fn laplacian(&self, u: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(u.grid);
        self.apply(&u.values, &mut out.values);
        out
    }

    /// `u^T S u`, the discrete Dirichlet form.
    pub fn dirichlet_form(&self, u: &[f64]) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for i in 0..g.n_phi {
            for j in 0..g.n_theta {
                let k = g.idx(i, j);
                let dp = u[g.idx(g.ip(i), j)] - u[k];
                let dt = u[g.idx(i, g.jp(j))] - u[k];
                acc += self.c_phi[k] * dp * dp + self.c_theta[k] * dt * dt;
            }
        }
        acc
    }

    /// Weighted sum `sum_k w_k v_k` in fixed order.
    pub fn quadrature(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..a.len() {
            acc += self.weights[k] * a[k] * b[k];
        }
        acc
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn pattern(&self) -> &Pattern {
        self.pattern.get_or_init(|| Pattern::new(self))
    }

    /// Centered-difference coordinate partials `(u_phi, u_theta)`.
    pub fn centered_gradient(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        centered_gradient(&self.grid, u)
    }

    /// `|grad u|^2` from centered differences and the metric at nodes.
    pub fn gradient_norm_sq_field(&self, u: &[f64]) -> Vec<f64> {
        let (gp, gt) = self.centered_gradient(u);
        let g = &self.grid;
        let mut out = Vec::with_capacity(g.len());
        for i in 0..g.n_phi {
            for j in 0..g.n_theta {
                let k = g.idx(i, j);
                let mp = metric_at(&self.params, g.phi(i), g.theta(j));
                out.push(gradient_norm_sq(gp[k], gt[k], &mp));
            }
        }
        out
    }
}

pub fn centered_gradient(g: &PeriodicGrid, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (hp, ht) = (g.h_phi(), g.h_theta());
    let mut gp = Vec::with_capacity(g.len());
    let mut gt = Vec::with_capacity(g.len());
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            gp.push((u[g.idx(g.ip(i), j)] - u[g.idx(g.im(i), j)]) / (2.0 * hp));
            gt.push((u[g.idx(i, g.jp(j))] - u[g.idx(i, g.jm(j))]) / (2.0 * ht));
        }
    }
    (gp, gt)
}

/// Quadrature of `f` against the area element.
pub fn quadrature(f: &ScalarField, params: &TorusParams) -> f64 {
    let g = &f.grid;
    let (hp, ht) = (g.h_phi(), g.h_theta());
    let mut acc = 0.0;
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            acc += f.at(i, j) * metric_at(params, g.phi(i), g.theta(j)).sqrt_det * hp * ht;
        }
    }
    acc
}

pub fn weighted_inner_product(f: &ScalarField, g: &ScalarField, params: &TorusParams) -> f64 {
    let prod = ScalarField {
        grid: f.grid,
        values: f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect(),
    };
    quadrature(&prod, params)
}

/// Direct transcription of the Laplace-Beltrami operator in non-divergence
/// form with central differences; used to cross-check the flux form.
pub fn apply_literal_laplacian(params: &TorusParams, u: &ScalarField) -> ScalarField {
    let g = &u.grid;
    let (hp, ht) = (g.h_phi(), g.h_theta());
    let mut out = ScalarField::zeros(*g);
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            let c = laplace_coefficients(params, g.phi(i), g.theta(j));
            let (uc, upp, upm) = (u.at(i, j), u.at(g.ip(i), j), u.at(g.im(i), j));
            let (utp, utm) = (u.at(i, g.jp(j)), u.at(i, g.jm(j)));
            out.values[g.idx(i, j)] = c.c_pp * (upp - 2.0 * uc + upm) / (hp * hp)
                + c.c_tt * (utp - 2.0 * uc + utm) / (ht * ht)
                + c.c_p * (upp - upm) / (2.0 * hp)
                + c.c_t * (utp - utm) / (2.0 * ht);
        }
    }
    out
}
