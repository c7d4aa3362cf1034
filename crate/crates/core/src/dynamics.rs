//! IMEX time stepping of `u_t = Δu + f(u)`: implicit diffusion, explicit
//! reaction, and a seeded Lyapunov probe around a steady state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, ScalarField};
use crate::linalg::{SolverKind, SpdSolver};
use crate::nonlinearity::Nonlinearity;
use crate::operator::DiscreteOperator;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub sup_distance: Vec<f64>,
    pub energy: Vec<f64>,
}

impl EvolutionTrace {
    /// Largest per-step energy increase (negative when strictly decreasing).
    pub fn max_energy_increase(&self) -> f64 {
        self.energy
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_sup_distance(&self) -> f64 {
        self.sup_distance.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_sup_distance(&self) -> f64 {
        *self.sup_distance.last().unwrap_or(&0.0)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,sup_distance,energy")?;
        for k in 0..self.times.len() {
            writeln!(w, "{:e},{:e},{:e}", self.times[k], self.sup_distance[k], self.energy[k])?;
        }
        Ok(())
    }
}

/// Discrete energy `1/2 u^T S u - sum_k w_k F(u_k)`.
pub fn energy(u: &[f64], op: &DiscreteOperator, nl: &Nonlinearity) -> f64 {
    let mut pot = 0.0;
    for k in 0..u.len() {
        pot += op.weights[k] * nl.antiderivative(u[k]);
    }
    0.5 * op.dirichlet_form(u) - pot
}

/// `(W + dt S) u_new = W (u + dt f(u))`, factored once.
pub struct ImexStepper<'a> {
    op: &'a DiscreteOperator,
    nl: &'a Nonlinearity,
    pub dt: f64,
    solver: SpdSolver<'a>,
}

impl<'a> ImexStepper<'a> {
    pub fn new(op: &'a DiscreteOperator, nl: &'a Nonlinearity, dt: f64, kind: SolverKind, linear_tol: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("time step {dt} must be positive")));
        }
        let solver = SpdSolver::prepare(op, dt, op.weights.clone(), kind, linear_tol)?
            .ok_or_else(|| Error::LinearSolve("implicit diffusion matrix not positive definite".into()))?;
        Ok(ImexStepper { op, nl, dt, solver })
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = u
            .iter()
            .zip(&self.op.weights)
            .map(|(&v, w)| w * (v + self.dt * self.nl.value(v)))
            .collect();
        self.solver.solve(&rhs)
    }
}

pub fn step_imex(u: &ScalarField, dt: f64, op: &DiscreteOperator, nl: &Nonlinearity, linear_tol: f64) -> Result<ScalarField> {
    let s = ImexStepper::new(op, nl, dt, SolverKind::Auto, linear_tol)?;
    Ok(ScalarField {
        grid: u.grid,
        values: s.step(&u.values)?,
    })
}

/// Seeded smooth field with Fourier modes `|p|, |q| <= max_mode`, scaled to unit max-norm.
pub fn smooth_random_field(grid: &PeriodicGrid, seed: u64, max_mode: usize) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = max_mode as i64;
    let mut coeffs = Vec::new();
    for p in 0..=m {
        for q in -m..=m {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            coeffs.push((p, q, a, b));
        }
    }
    let mut f = ScalarField::zeros(*grid);
    for i in 0..grid.n_phi {
        let phi = grid.phi(i);
        for j in 0..grid.n_theta {
            let theta = grid.theta(j);
            let mut v = 0.0;
            for &(p, q, a, b) in &coeffs {
                let arg = p as f64 * phi + q as f64 * theta;
                v += a * arg.cos() + b * arg.sin();
            }
            f.values[grid.idx(i, j)] = v;
        }
    }
    let s = f.max_abs();
    f.map(|v| v / s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub t_end: f64,
    /// Requested time step; rounded down so that an integer number of steps reaches `t_end`.
    pub dt: f64,
    pub max_mode: usize,
    pub solver: SolverKind,
    pub linear_tol: f64,
}

/// Evolve `U + delta xi` for a seeded smooth `xi` and record the distance to `U`.
pub fn stability_probe(
    steady: &ScalarField,
    op: &DiscreteOperator,
    nl: &Nonlinearity,
    delta: f64,
    seed: u64,
    opts: &ProbeOptions,
) -> Result<EvolutionTrace> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParams("delta must be non-negative".into()));
    }
    let steps = (opts.t_end / opts.dt).ceil().max(1.0) as usize;
    let dt = opts.t_end / steps as f64;
    let stepper = ImexStepper::new(op, nl, dt, opts.solver, opts.linear_tol)?;
    let xi = smooth_random_field(&steady.grid, seed, opts.max_mode);
    let mut u: Vec<f64> = steady.values.iter().zip(&xi.values).map(|(a, b)| a + delta * b).collect();
    let dist = |u: &[f64]| u.iter().zip(&steady.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let mut trace = EvolutionTrace::default();
    trace.times.push(0.0);
    trace.sup_distance.push(dist(&u));
    trace.energy.push(energy(&u, op, nl));
    for k in 1..=steps {
        u = stepper.step(&u)?;
        trace.times.push(k as f64 * dt);
        trace.sup_distance.push(dist(&u));
        trace.energy.push(energy(&u, op, nl));
    }
    Ok(trace)
}
