//! Linear solvers for systems `alpha S + diag(d)` on the stencil pattern,
//! plus a cyclic symmetric tridiagonal solver for periodic 1-D problems.

use std::sync::OnceLock;

use faer::prelude::SpSolver;
use faer::sparse::linalg::solvers::{Cholesky, Lu, SymbolicCholesky, SymbolicLu};
use faer::sparse::linalg::CholeskyError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Parallelism, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::DiscreteOperator;

/// Sparsity pattern of the 5-point stencil with cached symbolic analyses.
pub(crate) struct Pattern {
    symbolic: SymbolicSparseColMat<usize>,
    diag_pos: Vec<usize>,
    nb_pos: Vec<[usize; 4]>,
    chol: OnceLock<SymbolicCholesky<usize>>,
    lu: OnceLock<SymbolicLu<usize>>,
}

impl Pattern {
    pub(crate) fn new(op: &DiscreteOperator) -> Self {
        let n = op.len();
        let mut col_ptrs = Vec::with_capacity(n + 1);
        let mut rows = Vec::with_capacity(5 * n);
        let mut diag_pos = Vec::with_capacity(n);
        let mut nb_pos = Vec::with_capacity(n);
        col_ptrs.push(0);
        for k in 0..n {
            let nbs = op.neighbours(k);
            let mut entries = [k, nbs[0].0, nbs[1].0, nbs[2].0, nbs[3].0];
            entries.sort_unstable();
            let base = rows.len();
            rows.extend_from_slice(&entries);
            let pos = |r: usize| base + entries.iter().position(|&e| e == r).unwrap();
            diag_pos.push(pos(k));
            nb_pos.push([pos(nbs[0].0), pos(nbs[1].0), pos(nbs[2].0), pos(nbs[3].0)]);
            col_ptrs.push(rows.len());
        }
        Pattern {
            symbolic: SymbolicSparseColMat::new_checked(n, n, col_ptrs, None, rows),
            diag_pos,
            nb_pos,
            chol: OnceLock::new(),
            lu: OnceLock::new(),
        }
    }
}

fn assemble(op: &DiscreteOperator, alpha: f64, diag: &[f64]) -> SparseColMat<usize, f64> {
    let pat = op.pattern();
    let mut values = vec![0.0; pat.symbolic.row_indices().len()];
    for k in 0..op.len() {
        let nbs = op.neighbours(k);
        let mut sum = 0.0;
        for (slot, (_, c)) in nbs.iter().enumerate() {
            values[pat.nb_pos[k][slot]] = -alpha * c;
            sum += c;
        }
        values[pat.diag_pos[k]] = alpha * sum + diag[k];
    }
    SparseColMat::new(pat.symbolic.clone(), values)
}

fn single_threaded() {
    faer::set_global_parallelism(Parallelism::None);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Direct factorization up to `DIRECT_LIMIT` unknowns, conjugate gradients above.
    #[default]
    Auto,
    Direct,
    Iterative,
}

pub const DIRECT_LIMIT: usize = 2_000_000;

impl SolverKind {
    pub fn use_direct(&self, n: usize) -> bool {
        match self {
            SolverKind::Auto => n <= DIRECT_LIMIT,
            SolverKind::Direct => true,
            SolverKind::Iterative => false,
        }
    }
}

pub enum Factorization {
    Cholesky(Cholesky<usize, f64>),
    Lu(Lu<usize, f64>),
}

/// Outcome of an attempted Cholesky factorization.
pub enum SpdOutcome {
    Factored(Factorization),
    NotPositiveDefinite,
}

/// Cholesky factorization of `alpha S + diag(d)`.
pub fn cholesky(op: &DiscreteOperator, alpha: f64, diag: &[f64]) -> Result<SpdOutcome> {
    single_threaded();
    let m = assemble(op, alpha, diag);
    let pat = op.pattern();
    let sym = match pat.chol.get() {
        Some(s) => s.clone(),
        None => {
            let s = SymbolicCholesky::try_new(pat.symbolic.as_ref(), Side::Lower)
                .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
            pat.chol.get_or_init(|| s).clone()
        }
    };
    match Cholesky::try_new_with_symbolic(sym, m.as_ref(), Side::Lower) {
        Ok(c) => Ok(SpdOutcome::Factored(Factorization::Cholesky(c))),
        Err(CholeskyError::NotPositiveDefinite) => Ok(SpdOutcome::NotPositiveDefinite),
        Err(e) => Err(Error::LinearSolve(format!("{e:?}"))),
    }
}

/// LU factorization of `alpha S + diag(d)`.
pub fn lu(op: &DiscreteOperator, alpha: f64, diag: &[f64]) -> Result<Factorization> {
    single_threaded();
    let m = assemble(op, alpha, diag);
    let pat = op.pattern();
    let sym = match pat.lu.get() {
        Some(s) => s.clone(),
        None => {
            let s = SymbolicLu::try_new(pat.symbolic.as_ref())
                .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
            pat.lu.get_or_init(|| s).clone()
        }
    };
    Lu::try_new_with_symbolic(sym, m.as_ref())
        .map(Factorization::Lu)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))
}

impl Factorization {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = match self {
            Factorization::Cholesky(c) => c.solve(&b),
            Factorization::Lu(l) => l.solve(&b),
        };
        (0..rhs.len()).map(|i| x.read(i, 0)).collect()
    }
}

/// `out = (alpha S + diag(d)) x`.
pub fn apply_system(op: &DiscreteOperator, alpha: f64, diag: &[f64], x: &[f64], out: &mut [f64]) {
    op.apply_stiffness(x, out);
    for k in 0..x.len() {
        out[k] = alpha * out[k] + diag[k] * x[k];
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD `alpha S + diag(d)`.
pub fn conjugate_gradient(
    op: &DiscreteOperator,
    alpha: f64,
    diag: &[f64],
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let precond: Vec<f64> = (0..n)
        .map(|k| {
            let s: f64 = op.neighbours(k).iter().map(|(_, c)| c).sum();
            1.0 / (alpha * s + diag[k])
        })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(a, p)| a * p).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        apply_system(op, alpha, diag, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolve("conjugate gradients met a non-positive direction".into()));
        }
        let step = rz / pap;
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        for k in 0..n {
            z[k] = r[k] * precond[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::LinearSolve(format!("conjugate gradients did not reach {rel_tol:e} in {max_iter} iterations")))
}

/// A prepared SPD system `alpha S + diag(d)`.
pub enum SpdSolver<'a> {
    Direct(Factorization),
    Iterative {
        op: &'a DiscreteOperator,
        alpha: f64,
        diag: Vec<f64>,
        rel_tol: f64,
        max_iter: usize,
    },
}

impl<'a> SpdSolver<'a> {
    /// `Ok(None)` when the direct factorization reports indefiniteness.
    pub fn prepare(
        op: &'a DiscreteOperator,
        alpha: f64,
        diag: Vec<f64>,
        kind: SolverKind,
        rel_tol: f64,
    ) -> Result<Option<Self>> {
        if kind.use_direct(op.len()) {
            match cholesky(op, alpha, &diag)? {
                SpdOutcome::Factored(f) => Ok(Some(SpdSolver::Direct(f))),
                SpdOutcome::NotPositiveDefinite => Ok(None),
            }
        } else {
            Ok(Some(SpdSolver::Iterative {
                op,
                alpha,
                diag,
                rel_tol,
                max_iter: 20 * op.len().max(100),
            }))
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Direct(f) => Ok(f.solve(rhs)),
            SpdSolver::Iterative {
                op,
                alpha,
                diag,
                rel_tol,
                max_iter,
            } => conjugate_gradient(op, *alpha, diag, rhs, *rel_tol, *max_iter),
        }
    }
}

/// Symmetric cyclic tridiagonal matrix: `diag[i]`, `off[i]` couples `i` and
/// `i + 1 (mod n)`.
#[derive(Clone, Debug)]
pub struct CyclicTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// `L D L^T` factors of a positive definite cyclic tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct CyclicLdl {
    d: Vec<f64>,
    l: Vec<f64>,
    m: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let ip = (i + 1) % n;
                let im = (i + n - 1) % n;
                self.diag[i] * x[i] + self.off[i] * x[ip] + self.off[im] * x[im]
            })
            .collect()
    }

    /// Factor, requiring every pivot to exceed `pivot_tol * max|diag|`.
    pub fn factor(&self, pivot_tol: f64) -> Result<CyclicLdl> {
        let n = self.diag.len();
        assert!(n >= 3 && self.off.len() == n);
        let (a, b) = (&self.diag, &self.off);
        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let floor = pivot_tol * scale;
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut m = vec![0.0; n - 1];
        let mut cur = a.clone();
        let mut v = vec![0.0; n - 1];
        v[0] = b[n - 1];
        v[n - 2] += b[n - 2];
        let mut last = a[n - 1];
        for i in 0..n - 1 {
            d[i] = cur[i];
            if !(d[i] > floor) {
                return Err(Error::SingularSystem { row: i, pivot: d[i] });
            }
            m[i] = v[i] / d[i];
            last -= v[i] * v[i] / d[i];
            if i < n - 2 {
                l[i] = b[i] / d[i];
                cur[i + 1] -= b[i] * b[i] / d[i];
                v[i + 1] -= b[i] * v[i] / d[i];
            }
        }
        d[n - 1] = last;
        if !(last > floor) {
            return Err(Error::SingularSystem { row: n - 1, pivot: last });
        }
        Ok(CyclicLdl { d, l, m })
    }
}

impl CyclicLdl {
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut z = y.to_vec();
        for i in 1..n - 1 {
            z[i] -= self.l[i - 1] * z[i - 1];
        }
        let mut acc = z[n - 1];
        for i in 0..n - 1 {
            acc -= self.m[i] * z[i];
        }
        z[n - 1] = acc;
        for i in 0..n {
            z[i] /= self.d[i];
        }
        let mut x = z.clone();
        for i in (0..n - 1).rev() {
            let mut xi = z[i] - self.m[i] * x[n - 1];
            if i < n - 2 {
                xi -= self.l[i] * x[i + 1];
            }
            x[i] = xi;
        }
        x
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }
}
