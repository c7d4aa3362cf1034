//! Principal eigenpair of the linearization `-(Δ + f'(U))` in the area
//! inner product, its one-dimensional reduction on the standard torus, and
//! the Rayleigh quotient.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::TorusParams;
use crate::grid::ScalarField;
use crate::linalg::{CyclicTridiagonal, SolverKind, SpdSolver};
use crate::nonlinearity::Nonlinearity;
use crate::operator::DiscreteOperator;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Bound on `||A x - lambda x||` in the weighted norm with `||x|| = 1`.
    pub tol: f64,
    /// Total inverse-iteration sweeps.
    pub max_iter: usize,
    pub solver: SolverKind,
    pub linear_tol: f64,
    /// Smallest admissible pivot of the 1-D cyclic factorization.
    pub pivot_tol: f64,
    /// Relative floor of the gap kept between shift and Rayleigh quotient.
    pub shift_margin: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            max_iter: 400,
            solver: SolverKind::Auto,
            linear_tol: 1e-14,
            pivot_tol: 1e-14,
            shift_margin: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub eigenfield: ScalarField,
    pub residual: f64,
    pub normalization: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralSummary {
    pub lambda1: f64,
    pub residual: f64,
    pub normalization: f64,
    pub iterations: usize,
    pub min_eigenfield: f64,
}

impl SpectralResult {
    pub fn summary(&self) -> SpectralSummary {
        SpectralSummary {
            lambda1: self.lambda1,
            residual: self.residual,
            normalization: self.normalization,
            iterations: self.iterations,
            min_eigenfield: self.eigenfield.min(),
        }
    }
}

/// Generalized symmetric problem `K x = lambda W x` with `W` diagonal.
trait EigenProblem {
    fn weights(&self) -> &[f64];
    /// `out = K x`.
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// Solver for `(K - shift W) y = b`; `None` if not positive definite.
    fn shifted(&self, shift: f64) -> Result<Option<Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + '_>>>;
}

struct Eig {
    lambda: f64,
    x: Vec<f64>,
    residual: f64,
    iterations: usize,
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..w.len() {
        acc += w[k] * a[k] * b[k];
    }
    acc
}

fn rq_and_residual(p: &dyn EigenProblem, x: &[f64], kx: &mut [f64]) -> (f64, f64) {
    let w = p.weights();
    p.apply(x, kx);
    let nrm = weighted_dot(w, x, x);
    let rho = x.iter().zip(kx.iter()).map(|(a, b)| a * b).sum::<f64>() / nrm;
    let mut res = 0.0;
    for k in 0..x.len() {
        let r = kx[k] / w[k] - rho * x[k];
        res += w[k] * r * r;
    }
    (rho, (res / nrm).sqrt())
}

/// Shift-and-invert iteration with adaptive shifts kept below the eigenvalue.
fn inverse_iteration(p: &dyn EigenProblem, first_shift: f64, opts: &EigenOptions, adaptive: bool) -> Result<Eig> {
    let w = p.weights();
    let n = w.len();
    let area: f64 = w.iter().sum();
    let mut x = vec![1.0 / area.sqrt(); n];
    let mut kx = vec![0.0; n];
    let (mut rho, mut res) = rq_and_residual(p, &x, &mut kx);
    let mut shift = first_shift;
    let mut iters = 0;
    let min_margin = opts.shift_margin * (1.0 + rho.abs());
    while iters < opts.max_iter {
        if res < opts.tol {
            break;
        }
        let solve = match p.shifted(shift)? {
            Some(s) => s,
            None => {
                let gap = (rho - shift).abs().max(1.0);
                shift -= gap;
                continue;
            }
        };
        let mut prev = res;
        loop {
            let b: Vec<f64> = x.iter().zip(w).map(|(a, ww)| a * ww).collect();
            let y = solve(&b)?;
            let nrm = weighted_dot(w, &y, &y).sqrt();
            if !(nrm.is_finite() && nrm > 0.0) {
                return Err(Error::LinearSolve("shifted solve produced a zero or non-finite vector".into()));
            }
            x = y.iter().map(|v| v / nrm).collect();
            (rho, res) = rq_and_residual(p, &x, &mut kx);
            iters += 1;
            if res < opts.tol || iters >= opts.max_iter {
                break;
            }
            if adaptive && res > 0.1 * prev {
                break;
            }
            prev = res;
        }
        if adaptive {
            shift = rho - (2.0 * res).max(min_margin);
        }
    }
    if res >= opts.tol {
        return Err(Error::EigenNotConverged {
            tol: opts.tol,
            iters,
            residual: res,
        });
    }
    let sum: f64 = x.iter().sum();
    if sum < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Eig {
        lambda: rho,
        x,
        residual: res,
        iterations: iters,
    })
}

fn check_sign(x: &[f64]) -> Result<()> {
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min > 0.0) {
        return Err(Error::NonPositiveEigenfield { min, max });
    }
    Ok(())
}

struct Surface<'a> {
    op: &'a DiscreteOperator,
    potential: &'a [f64],
    opts: EigenOptions,
}

impl EigenProblem for Surface<'_> {
    fn weights(&self) -> &[f64] {
        &self.op.weights
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.op.apply_stiffness(x, out);
        for k in 0..x.len() {
            out[k] -= self.op.weights[k] * self.potential[k] * x[k];
        }
    }
    fn shifted(&self, shift: f64) -> Result<Option<Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + '_>>> {
        let diag: Vec<f64> = (0..self.op.len())
            .map(|k| -self.op.weights[k] * (self.potential[k] + shift))
            .collect();
        Ok(SpdSolver::prepare(self.op, 1.0, diag, self.opts.solver, self.opts.linear_tol)?
            .map(|s| Box::new(move |b: &[f64]| s.solve(b)) as Box<dyn Fn(&[f64]) -> Result<Vec<f64>>>))
    }
}

/// Principal eigenpair of `-(L + diag(potential))`.
pub fn principal_eigpair_with_potential(
    op: &DiscreteOperator,
    potential: &[f64],
    lambda_est: Option<f64>,
    opts: &EigenOptions,
) -> Result<SpectralResult> {
    let prob = Surface {
        op,
        potential,
        opts: *opts,
    };
    let est = lambda_est.unwrap_or_else(|| -op.quadrature(potential) / op.area());
    let eig = match inverse_iteration(&prob, est - 1.0, opts, true) {
        Ok(e) if check_sign(&e.x).is_ok() => e,
        _ => {
            let e = inverse_iteration(&prob, est - 1.0, opts, false)?;
            check_sign(&e.x)?;
            e
        }
    };
    let field = ScalarField {
        grid: op.grid,
        values: eig.x,
    };
    let normalization = op.inner(&field.values, &field.values);
    Ok(SpectralResult {
        lambda1: eig.lambda,
        eigenfield: field,
        residual: eig.residual,
        normalization,
        iterations: eig.iterations,
    })
}

/// Principal eigenpair of the linearization about a steady field.
pub fn principal_eigpair(
    steady: &ScalarField,
    op: &DiscreteOperator,
    nl: &Nonlinearity,
    lambda_est: Option<f64>,
    opts: &EigenOptions,
) -> Result<SpectralResult> {
    let q: Vec<f64> = steady.values.iter().map(|&v| nl.derivative(v)).collect();
    principal_eigpair_with_potential(op, &q, lambda_est, opts)
}

/// Discrete Rayleigh quotient `(phi^T S phi - sum w f'(U) phi^2) / sum w phi^2`.
pub fn rayleigh_quotient(phi: &[f64], op: &DiscreteOperator, potential: &[f64]) -> Result<f64> {
    let den = op.inner(phi, phi);
    if !(den > 0.0) {
        return Err(Error::ZeroField);
    }
    let mut num = op.dirichlet_form(phi);
    for k in 0..phi.len() {
        num -= op.weights[k] * potential[k] * phi[k] * phi[k];
    }
    Ok(num / den)
}

/// Periodic 1-D reduction on the standard torus:
/// `-(1/r^2) (1/psi)(psi y')' - q y` in the weight `2 pi r psi`.
pub struct SturmLiouville1d {
    pub params: TorusParams,
    pub n_phi: usize,
    pub weights: Vec<f64>,
    pub couplings: Vec<f64>,
    pub potential: Vec<f64>,
    pivot_tol: f64,
}

impl SturmLiouville1d {
    pub fn new(params: &TorusParams, potential: Vec<f64>, pivot_tol: f64) -> Self {
        let n = potential.len();
        let h = 2.0 * PI / n as f64;
        let (big, r) = (params.major_radius, params.tube_radius);
        let weights = (0..n)
            .map(|i| 2.0 * PI * r * (big + r * (i as f64 * h).cos()) * h)
            .collect();
        let couplings = (0..n)
            .map(|i| 2.0 * PI * (big + r * ((i as f64 + 0.5) * h).cos()) / r / h)
            .collect();
        SturmLiouville1d {
            params: *params,
            n_phi: n,
            weights,
            couplings,
            potential,
            pivot_tol,
        }
    }

    fn matrix(&self, shift: f64) -> CyclicTridiagonal {
        let n = self.n_phi;
        let diag = (0..n)
            .map(|i| {
                self.couplings[i] + self.couplings[(i + n - 1) % n]
                    - self.weights[i] * (self.potential[i] + shift)
            })
            .collect();
        let off = self.couplings.iter().map(|c| -c).collect();
        CyclicTridiagonal { diag, off }
    }
}

impl EigenProblem for SturmLiouville1d {
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let y = self.matrix(0.0).apply(x);
        out.copy_from_slice(&y);
    }
    fn shifted(&self, shift: f64) -> Result<Option<Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + '_>>> {
        match self.matrix(shift).factor(self.pivot_tol) {
            Ok(f) => Ok(Some(Box::new(move |b: &[f64]| Ok(f.solve(b))))),
            Err(Error::SingularSystem { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenProfile {
    pub lambda1: f64,
    /// Values at `phi_i = 2 pi i / n`, normalized so that the surface integral of the square is 1.
    pub values: Vec<f64>,
    pub residual: f64,
    /// `max |y(phi) - y(2 pi - phi)|`.
    pub evenness_defect: f64,
}

/// Principal eigenpair of the 1-D reduction with potential `f'(U(phi_i))`.
pub fn sl_reduction_eigpair(params: &TorusParams, potential: Vec<f64>, opts: &EigenOptions) -> Result<EigenProfile> {
    let sl = SturmLiouville1d::new(params, potential, opts.pivot_tol);
    let area: f64 = sl.weights.iter().sum();
    let est = -sl.weights.iter().zip(&sl.potential).map(|(w, q)| w * q).sum::<f64>() / area;
    let eig = inverse_iteration(&sl, est - 1.0, opts, true)?;
    check_sign(&eig.x)?;
    let n = sl.n_phi;
    let evenness_defect = (0..n)
        .map(|i| (eig.x[i] - eig.x[(n - i) % n]).abs())
        .fold(0.0, f64::max);
    Ok(EigenProfile {
        lambda1: eig.lambda,
        values: eig.x,
        residual: eig.residual,
        evenness_defect,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HalfTorusReport {
    /// Integral of `y^2` over the upper half `phi in [0, pi]`.
    pub upper_half: f64,
    pub lower_half: f64,
    /// Integral of `(sqrt 2 y)^2` over the upper half.
    pub rescaled_norm: f64,
    pub passed: bool,
}

/// Restrict a full-torus normalized eigenprofile to the upper half and rescale by `sqrt 2`.
pub fn half_torus_normalization_check(params: &TorusParams, values: &[f64], tol: f64) -> HalfTorusReport {
    let n = values.len();
    let h = 2.0 * PI / n as f64;
    let (big, r) = (params.major_radius, params.tube_radius);
    let g = |i: usize| values[i] * values[i] * 2.0 * PI * r * (big + r * (i as f64 * h).cos()) * h;
    let half = n / 2;
    let mut upper = 0.5 * (g(0) + g(half));
    for i in 1..half {
        upper += g(i);
    }
    let mut lower = 0.5 * (g(half) + g(0));
    for i in half + 1..n {
        lower += g(i);
    }
    let rescaled = 2.0 * upper;
    HalfTorusReport {
        upper_half: upper,
        lower_half: lower,
        rescaled_norm: rescaled,
        passed: (rescaled - 1.0).abs() < tol && (upper - lower).abs() < tol,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub lambda1: f64,
    pub deviation_inf: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log gap` against `log epsilon` over nonzero rows.
    pub gap_order: Option<f64>,
    /// Least-squares slope of `log ||U^eps - U||` against `log epsilon`.
    pub deviation_order: Option<f64>,
    /// `gap(eps_k) / gap(eps_{k-1})` for consecutive nonzero epsilons sorted ascending.
    pub gap_ratios: Vec<f64>,
    pub non_monotone: bool,
}

/// Least-squares slope of `log y` on `log x`, skipping non-positive entries.
pub fn fitted_order(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

impl ConvergenceTable {
    /// `rows` may include an `epsilon = 0` row; the reference is `lambda0`.
    pub fn build(lambda0: f64, mut rows: Vec<ConvergenceRow>) -> Self {
        for r in rows.iter_mut() {
            r.gap = (r.lambda1 - lambda0).abs();
        }
        rows.sort_by(|a, b| a.epsilon.abs().total_cmp(&b.epsilon.abs()));
        let nz: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.epsilon != 0.0).collect();
        let eps: Vec<f64> = nz.iter().map(|r| r.epsilon.abs()).collect();
        let gaps: Vec<f64> = nz.iter().map(|r| r.gap).collect();
        let devs: Vec<f64> = nz.iter().map(|r| r.deviation_inf).collect();
        let gap_ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
        let non_monotone = gaps.windows(2).any(|w| w[1] < w[0]);
        ConvergenceTable {
            gap_order: fitted_order(&eps, &gaps),
            deviation_order: fitted_order(&eps, &devs),
            gap_ratios,
            non_monotone,
            rows,
        }
    }
}
