//! Critical points of a stationary field on the (possibly perturbed) torus:
//! detection from sign changes of the gradient, sub-cell refinement,
//! classification, and the count against the predicted set.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{gradient_norm_sq, metric_at, TorusParams};
use crate::grid::{PeriodicGrid, ScalarField};
use crate::operator::centered_gradient;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Max,
    Min,
    Saddle,
    Degenerate,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::Max => "max",
            CriticalKind::Min => "min",
            CriticalKind::Saddle => "saddle",
            CriticalKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub phi: f64,
    pub theta: f64,
    pub kind: CriticalKind,
    pub grad_norm: f64,
    /// Coordinate Hessian `[u_pp, u_pt, u_tt]` of the local model.
    pub hessian: [f64; 3],
}

/// A whole row of the grid on which the gradient vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCircle {
    pub phi: f64,
    pub rows: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusOptions {
    /// Acceptance threshold relative to the largest nodal gradient norm.
    pub threshold: f64,
    /// Sign-noise band relative to the largest gradient component.
    pub zero_band: f64,
    /// Relative size below which the Hessian determinant counts as zero.
    pub degenerate_det: f64,
    pub max_refine: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            threshold: 1e-6,
            zero_band: 1e-10,
            degenerate_det: 1e-10,
            max_refine: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub points: Vec<CriticalPoint>,
    pub expected: Vec<(f64, f64)>,
    pub count: usize,
    /// Largest angular distance from an expected point to its nearest reported point.
    pub max_match_distance: f64,
    /// The same in grid cells (max over the two directions).
    pub max_match_cells: f64,
    pub circles: Vec<CriticalCircle>,
    pub candidate_clusters: usize,
    pub rejected_clusters: usize,
    pub max_gradient: f64,
    pub n_phi: usize,
    pub n_theta: usize,
}

/// Into `[0, 2 pi)`, with values a hair below `2 pi` sent to 0.
fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if 2.0 * PI - y < 1e-12 {
        0.0
    } else {
        y
    }
}

/// `{0, pi} x {(2k + 1) pi / (2n)}`, `k = 0..2n`.
pub fn expected_set(params: &TorusParams) -> Vec<(f64, f64)> {
    let n = params.n_waves as usize;
    let mut out = Vec::with_capacity(4 * n);
    for phi in [0.0, PI] {
        for k in 0..2 * n {
            out.push((phi, (2 * k + 1) as f64 * PI / (2 * n) as f64));
        }
    }
    out
}

fn wrap(d: f64) -> f64 {
    let x = d.rem_euclid(2.0 * PI);
    if x > PI {
        2.0 * PI - x
    } else {
        x
    }
}

fn sign(x: f64, tau: f64) -> i8 {
    if x > tau {
        1
    } else if x < -tau {
        -1
    } else {
        0
    }
}

fn vanishes_in(s: [i8; 4]) -> bool {
    s.contains(&0) || (s.contains(&1) && s.contains(&-1))
}

/// Biquadratic model on the 3x3 stencil around node `(i, j)`; returns
/// value derivatives `(u_s, u_t, u_ss, u_st, u_tt)` in cell units at `(s, t)`.
fn local_model(u: &ScalarField, i: usize, j: usize, s: f64, t: f64) -> [f64; 5] {
    let g = &u.grid;
    let l = |x: f64| [x * (x - 1.0) / 2.0, 1.0 - x * x, x * (x + 1.0) / 2.0];
    let dl = |x: f64| [x - 0.5, -2.0 * x, x + 0.5];
    let ddl = [1.0, -2.0, 1.0];
    let rows = [g.im(i), i, g.ip(i)];
    let cols = [g.jm(j), j, g.jp(j)];
    let (ls, dls, lt, dlt) = (l(s), dl(s), l(t), dl(t));
    let mut out = [0.0; 5];
    for a in 0..3 {
        for b in 0..3 {
            let v = u.at(rows[a], cols[b]);
            out[0] += dls[a] * lt[b] * v;
            out[1] += ls[a] * dlt[b] * v;
            out[2] += ddl[a] * lt[b] * v;
            out[3] += dls[a] * dlt[b] * v;
            out[4] += ls[a] * ddl[b] * v;
        }
    }
    out
}

struct Refined {
    phi: f64,
    theta: f64,
    d: [f64; 5],
}

fn refine(u: &ScalarField, i0: usize, j0: usize, max_iter: usize) -> Option<Refined> {
    let g = &u.grid;
    let (mut i, mut j) = (i0, j0);
    let (mut s, mut t) = (0.0f64, 0.0f64);
    for _ in 0..max_iter {
        let d = local_model(u, i, j, s, t);
        let det = d[2] * d[4] - d[3] * d[3];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let ds = -(d[4] * d[0] - d[3] * d[1]) / det;
        let dt = -(d[2] * d[1] - d[3] * d[0]) / det;
        s += ds.clamp(-1.0, 1.0);
        t += dt.clamp(-1.0, 1.0);
        let (ri, rj) = (s.round(), t.round());
        if ri != 0.0 || rj != 0.0 {
            i = (i as i64 + ri as i64).rem_euclid(g.n_phi as i64) as usize;
            j = (j as i64 + rj as i64).rem_euclid(g.n_theta as i64) as usize;
            s -= ri;
            t -= rj;
        }
        if ds.abs() < 1e-13 && dt.abs() < 1e-13 {
            break;
        }
    }
    let d = local_model(u, i, j, s, t);
    Some(Refined {
        phi: wrap_angle((i as f64 + s) * g.h_phi()),
        theta: wrap_angle((j as f64 + t) * g.h_theta()),
        d,
    })
}

/// Connected components of candidate cells under periodic 8-adjacency, in row-major order of first cell.
fn clusters(g: &PeriodicGrid, cand: &[bool]) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![false; cand.len()];
    let mut out = Vec::new();
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            let k = g.idx(i, j);
            if !cand[k] || seen[k] {
                continue;
            }
            seen[k] = true;
            let mut stack = vec![(i, j)];
            let mut comp = Vec::new();
            while let Some((a, b)) = stack.pop() {
                comp.push((a, b));
                for ia in [g.im(a), a, g.ip(a)] {
                    for jb in [g.jm(b), b, g.jp(b)] {
                        let kk = g.idx(ia, jb);
                        if cand[kk] && !seen[kk] {
                            seen[kk] = true;
                            stack.push((ia, jb));
                        }
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
    }
    out
}

/// Nodal `|grad_g u|` for `u` on `params`' torus.
pub fn gradient_norm_field(u: &ScalarField, params: &TorusParams) -> Vec<f64> {
    let g = &u.grid;
    let (gp, gt) = centered_gradient(g, &u.values);
    let mut out = vec![0.0; g.len()];
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            let k = g.idx(i, j);
            let mp = metric_at(params, g.phi(i), g.theta(j));
            out[k] = gradient_norm_sq(gp[k], gt[k], &mp).sqrt();
        }
    }
    out
}

pub fn locate_critical_points(u: &ScalarField, params: &TorusParams, opts: &CensusOptions) -> Result<CriticalPointReport> {
    let g = u.grid;
    if params.epsilon != 0.0 {
        g.check_params(params)?;
    }
    let (gp, gt) = centered_gradient(&g, &u.values);
    let comp_max = gp.iter().chain(&gt).fold(0.0f64, |m, x| m.max(x.abs()));
    let norms = gradient_norm_field(u, params);
    let max_gradient = norms.iter().copied().fold(0.0, f64::max);
    if max_gradient == 0.0 {
        return Err(Error::ZeroField);
    }
    let tau = opts.zero_band * comp_max;
    let mut cand = vec![false; g.len()];
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            let corners = [g.idx(i, j), g.idx(g.ip(i), j), g.idx(i, g.jp(j)), g.idx(g.ip(i), g.jp(j))];
            let sp = corners.map(|k| sign(gp[k], tau));
            let st = corners.map(|k| sign(gt[k], tau));
            cand[g.idx(i, j)] = vanishes_in(sp) && vanishes_in(st);
        }
    }
    let comps = clusters(&g, &cand);
    let hp = g.h_phi();
    let ht = g.h_theta();
    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut circles = Vec::new();
    let mut rejected = 0;
    for comp in &comps {
        let cols: BTreeSet<usize> = comp.iter().map(|c| c.1).collect();
        if cols.len() == g.n_theta {
            let rows: BTreeSet<usize> = comp.iter().map(|c| c.0).collect();
            let rows: Vec<usize> = rows.into_iter().collect();
            // the zero row is the one on which the phi-component vanishes
            let row = *rows
                .iter()
                .min_by(|a, b| {
                    let ma = (0..g.n_theta).fold(0.0f64, |m, j| m.max(gp[g.idx(**a, j)].abs()));
                    let mb = (0..g.n_theta).fold(0.0f64, |m, j| m.max(gp[g.idx(**b, j)].abs()));
                    ma.total_cmp(&mb)
                })
                .unwrap();
            circles.push(CriticalCircle { phi: g.phi(row), rows });
            continue;
        }
        let mut best = (f64::INFINITY, 0, 0);
        for &(ci, cj) in comp {
            for (a, b) in [(ci, cj), (g.ip(ci), cj), (ci, g.jp(cj)), (g.ip(ci), g.jp(cj))] {
                let v = norms[g.idx(a, b)];
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        let Some(rf) = refine(u, best.1, best.2, opts.max_refine) else {
            rejected += 1;
            continue;
        };
        let (u_p, u_t) = (rf.d[0] / hp, rf.d[1] / ht);
        let mp = metric_at(params, rf.phi, rf.theta);
        let grad_norm = gradient_norm_sq(u_p, u_t, &mp).sqrt();
        if !(grad_norm < opts.threshold * max_gradient) {
            rejected += 1;
            continue;
        }
        let hess = [rf.d[2] / (hp * hp), rf.d[3] / (hp * ht), rf.d[4] / (ht * ht)];
        let det = hess[0] * hess[2] - hess[1] * hess[1];
        let scale = (hess[0] * hess[2]).abs() + hess[1] * hess[1];
        let kind = if det.abs() <= opts.degenerate_det * scale || scale == 0.0 {
            CriticalKind::Degenerate
        } else if det < 0.0 {
            CriticalKind::Saddle
        } else if hess[0] + hess[2] < 0.0 {
            CriticalKind::Max
        } else {
            CriticalKind::Min
        };
        let dup = points
            .iter()
            .any(|p| wrap(p.phi - rf.phi) < 0.5 * hp && wrap(p.theta - rf.theta) < 0.5 * ht);
        if !dup {
            points.push(CriticalPoint {
                phi: rf.phi,
                theta: rf.theta,
                kind,
                grad_norm,
                hessian: hess,
            });
        }
    }
    let expected = if params.n_waves > 0 { expected_set(params) } else { Vec::new() };
    let (mut md, mut mc) = (0.0f64, 0.0f64);
    for &(ep, et) in &expected {
        let near = points
            .iter()
            .map(|p| {
                let (dp, dt) = (wrap(p.phi - ep), wrap(p.theta - et));
                ((dp * dp + dt * dt).sqrt(), (dp / hp).max(dt / ht))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match near {
            Some((d, c)) => {
                md = md.max(d);
                mc = mc.max(c);
            }
            None => {
                md = f64::INFINITY;
                mc = f64::INFINITY;
            }
        }
    }
    Ok(CriticalPointReport {
        count: points.len(),
        points,
        expected,
        max_match_distance: md,
        max_match_cells: mc,
        circles,
        candidate_clusters: comps.len(),
        rejected_clusters: rejected,
        max_gradient,
        n_phi: g.n_phi,
        n_theta: g.n_theta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountVerdict {
    pub verdict: bool,
    pub count: usize,
    pub expected_count: usize,
    pub count_match: bool,
    /// Every expected point has exactly one reported point within `max_cells`.
    pub one_to_one: bool,
    pub max_match_cells: f64,
    pub max_match_distance: f64,
    /// Minimum nodal `|grad_g u|` further than `margin_cells` cells from the expected set.
    pub off_set_margin: f64,
    pub reasons: Vec<String>,
}

/// Off-set margin: min of `|grad_g u|` over nodes whose index distance (max norm) to every expected point exceeds `cells`.
pub fn off_set_margin(u: &ScalarField, params: &TorusParams, cells: f64) -> f64 {
    let g = &u.grid;
    let norms = gradient_norm_field(u, params);
    let expected = expected_set(params);
    let mut m = f64::INFINITY;
    for i in 0..g.n_phi {
        for j in 0..g.n_theta {
            let (p, t) = (g.phi(i), g.theta(j));
            let near = expected
                .iter()
                .any(|&(ep, et)| (wrap(p - ep) / g.h_phi()).max(wrap(t - et) / g.h_theta()) <= cells);
            if !near {
                m = m.min(norms[g.idx(i, j)]);
            }
        }
    }
    m
}

pub fn verify_count(report: &CriticalPointReport, params: &TorusParams, off_set_margin: f64, max_cells: f64) -> CountVerdict {
    let expected = expected_set(params);
    let hp = 2.0 * PI / report.n_phi as f64;
    let ht = 2.0 * PI / report.n_theta as f64;
    let mut reasons = Vec::new();
    if !report.circles.is_empty() {
        reasons.push("degenerate circles".to_string());
    }
    let count_match = report.count == expected.len();
    if !count_match {
        reasons.push(format!("count mismatch: {} reported, {} expected", report.count, expected.len()));
    }
    let mut hits = vec![0usize; expected.len()];
    let mut stray = 0;
    for p in &report.points {
        let m = expected
            .iter()
            .position(|&(ep, et)| (wrap(p.phi - ep) / hp).max(wrap(p.theta - et) / ht) <= max_cells);
        match m {
            Some(k) => hits[k] += 1,
            None => stray += 1,
        }
    }
    let one_to_one = stray == 0 && hits.iter().all(|&h| h == 1);
    if !one_to_one {
        reasons.push(format!(
            "matching failed: {stray} stray points, {} expected points unmatched or multiply matched",
            hits.iter().filter(|&&h| h != 1).count()
        ));
    }
    if !(off_set_margin > 0.0) {
        reasons.push("non-positive off-set gradient margin".to_string());
    }
    CountVerdict {
        verdict: reasons.is_empty(),
        count: report.count,
        expected_count: expected.len(),
        count_match,
        one_to_one,
        max_match_cells: report.max_match_cells,
        max_match_distance: report.max_match_distance,
        off_set_margin,
        reasons,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    pub phi: f64,
    pub theta: f64,
    /// Second theta-difference of the field at the node.
    pub measured: f64,
    /// `-eps n^2 C2(phi) sin(n theta)`.
    pub predicted: f64,
}

/// Second theta-differences at the expected nodes against the first-order prediction.
pub fn theta_certificates(u: &ScalarField, params: &TorusParams, c2_at_0: f64, c2_at_pi: f64) -> Result<Vec<ThetaCertificate>> {
    let g = &u.grid;
    let n = params.n_waves;
    let lines = crate::newton::theta_k_indices(g, n)?;
    let nn = (n as f64).powi(2);
    let ht = g.h_theta();
    let mut out = Vec::new();
    for (row, c2) in [(0, c2_at_0), (g.pi_row(), c2_at_pi)] {
        for &j in &lines {
            let d2 = (u.at(row, g.jp(j)) - 2.0 * u.at(row, j) + u.at(row, g.jm(j))) / (ht * ht);
            let th = g.theta(j);
            out.push(ThetaCertificate {
                phi: g.phi(row),
                theta: th,
                measured: d2,
                predicted: -params.epsilon * nn * c2 * (n as f64 * th).sin(),
            });
        }
    }
    Ok(out)
}

impl CriticalPointReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi,theta,kind,grad_norm")?;
        for p in &self.points {
            writeln!(w, "{:e},{:e},{},{:e}", p.phi, p.theta, p.kind.as_str(), p.grad_norm)?;
        }
        Ok(())
    }
}

/// JSON document with `count`, `points`, `verdict` and diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusDoc {
    pub count: usize,
    pub points: Vec<PointDoc>,
    pub verdict: bool,
    pub details: CountVerdict,
    pub circles: Vec<CriticalCircle>,
    pub epsilon: f64,
    pub n_waves: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDoc {
    pub phi: f64,
    pub theta: f64,
    pub kind: CriticalKind,
    pub grad_norm: f64,
}

impl CensusDoc {
    pub fn new(report: &CriticalPointReport, verdict: &CountVerdict, params: &TorusParams) -> Self {
        CensusDoc {
            count: report.count,
            points: report
                .points
                .iter()
                .map(|p| PointDoc {
                    phi: p.phi,
                    theta: p.theta,
                    kind: p.kind,
                    grad_norm: p.grad_norm,
                })
                .collect(),
            verdict: verdict.verdict,
            details: verdict.clone(),
            circles: report.circles.clone(),
            epsilon: params.epsilon,
            n_waves: params.n_waves,
        }
    }
}
