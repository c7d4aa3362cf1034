//! Pipeline stages (construct, steady, spectrum, evolve, perturb, census) and
//! the verification run that checks every claim and writes the report.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crate::census::{self, CensusDoc, CensusOptions, CountVerdict, CriticalKind, CriticalPointReport};
use crate::config::{RunConfig, Tolerances};
use crate::dynamics::{self, EvolutionTrace, ProbeOptions};
use crate::error::Result;
use crate::geometry::{laplace_coefficients, TorusParams};
use crate::grid::{PeriodicGrid, ScalarField};
use crate::io::{self, Cache};
use crate::newton::{self, NewtonOptions, SteadyState, SymmetryReport};
use crate::nonlinearity::{self, Nonlinearity, NonlinearityDoc, Threshold};
use crate::operator::assemble_laplacian;
use crate::perturbation::{self, ComparisonTable, PerturbationSolution, PerturbationTolerances, PerturbationVerdict};
use crate::profile::Profile;
use crate::spectral::{self, ConvergenceRow, ConvergenceTable, EigenOptions, SpectralResult};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConstructionSummary {
    pub ode_residual: f64,
    pub f_integral: f64,
    pub f_at_0: f64,
    pub f_at_pi: f64,
    pub max_abs_fprime: f64,
    pub threshold_n: u32,
    pub threshold_bound: f64,
}

pub struct Construction {
    pub standard: TorusParams,
    pub profile: Profile,
    pub nl: Nonlinearity,
    pub threshold: Threshold,
    pub summary: ConstructionSummary,
}

/// Profile, forged nonlinearity and its diagnostics on the standard torus.
pub fn construct(cfg: &RunConfig) -> Result<Construction> {
    let standard = TorusParams::standard(cfg.params.major_radius, cfg.params.tube_radius)?;
    let profile = Profile::build(&cfg.profile, &standard)?;
    let nl = nonlinearity::forge_nonlinearity(&profile, &standard)?;
    let threshold = nl.threshold(&standard);
    let u0 = profile.samples[0].u;
    let upi = profile.samples.last().unwrap().u;
    let summary = ConstructionSummary {
        ode_residual: nonlinearity::profile_ode_residual(&profile, &nl, &standard),
        f_integral: nonlinearity::profile_f_integral(&profile, &nl, &standard),
        f_at_0: nl.value(u0),
        f_at_pi: nl.value(upi),
        max_abs_fprime: nl.max_abs_fprime,
        threshold_n: threshold.n,
        threshold_bound: threshold.bound,
    };
    Ok(Construction {
        standard,
        profile,
        nl,
        threshold,
        summary,
    })
}

/// Everything the stages share: configuration, construction, torus, grid and cache.
pub struct Session<'a> {
    pub cfg: &'a RunConfig,
    pub tol: &'a Tolerances,
    pub construction: Construction,
    /// Standard torus carrying the wave number.
    pub params: TorusParams,
    pub grid: PeriodicGrid,
    cache: Option<Cache>,
    progress: Box<dyn Fn(&str) + 'a>,
    timings: RefCell<Vec<(String, f64)>>,
}

#[derive(Serialize)]
struct SteadyKey<'a> {
    kind: &'static str,
    version: u32,
    major_radius: f64,
    tube_radius: f64,
    n_waves: u32,
    epsilon: f64,
    profile: &'a crate::profile::ProfileConfig,
    n_phi: usize,
    n_theta: usize,
    newton: NewtonOptions,
    continuation_step: f64,
}

impl<'a> Session<'a> {
    pub fn new(cfg: &'a RunConfig, cache: Option<Cache>, progress: impl Fn(&str) + 'a) -> Result<Self> {
        let t = Instant::now();
        let construction = construct(cfg)?;
        let (params, grid) = cfg.resolve(construction.threshold.n)?;
        let s = Session {
            cfg,
            tol: &cfg.tolerances,
            construction,
            params,
            grid,
            cache,
            progress: Box::new(progress),
            timings: RefCell::new(Vec::new()),
        };
        s.record("construct", t);
        Ok(s)
    }

    pub fn nl(&self) -> &Nonlinearity {
        &self.construction.nl
    }

    fn say(&self, msg: &str) {
        (self.progress)(msg)
    }

    fn record(&self, stage: &str, t: Instant) {
        self.timings
            .borrow_mut()
            .push((stage.to_string(), t.elapsed().as_secs_f64()));
    }

    pub fn timings(&self) -> Vec<(String, f64)> {
        self.timings.borrow().clone()
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol.get("newton_tol"),
            max_iter: self.cfg.limits.newton_max_iter,
            solver: self.cfg.solver,
            linear_tol: self.tol.get("linear_tol"),
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.tol.get("eigen_tol"),
            max_iter: self.cfg.limits.eigen_max_iter,
            solver: self.cfg.solver,
            linear_tol: self.tol.get("eigen_linear_tol"),
            pivot_tol: self.tol.get("eigen_pivot_tol"),
            shift_margin: self.tol.get("eigen_shift_margin"),
        }
    }

    pub fn census_options(&self) -> CensusOptions {
        CensusOptions {
            threshold: self.tol.get("census_threshold"),
            zero_band: self.tol.get("census_zero_band"),
            degenerate_det: self.tol.get("census_degenerate_det"),
            max_refine: self.cfg.limits.census_max_refine,
        }
    }

    pub fn perturbation_tolerances(&self) -> PerturbationTolerances {
        PerturbationTolerances {
            c1_max: self.tol.get("c1_max"),
            slope_max: self.tol.get("c2_slope_max"),
            nonzero_fraction: self.tol.get("c2_nonzero_fraction"),
            integral_zero: self.tol.get("integral_zero"),
            symmetry: self.tol.get("c2_symmetry"),
        }
    }

    pub fn probe_options(&self) -> ProbeOptions {
        ProbeOptions {
            t_end: self.cfg.probe.t_end,
            dt: self
                .cfg
                .probe
                .dt
                .unwrap_or(self.cfg.probe.dt_factor / self.nl().max_abs_fprime),
            max_mode: self.cfg.probe.max_mode,
            solver: self.cfg.solver,
            linear_tol: self.tol.get("linear_tol"),
        }
    }

    pub fn params_at(&self, eps: f64) -> Result<TorusParams> {
        self.params.with_epsilon(eps)
    }

    fn key(&self, grid: &PeriodicGrid, eps: f64) -> String {
        Cache::key(&SteadyKey {
            kind: "steady",
            version: 1,
            major_radius: self.params.major_radius,
            tube_radius: self.params.tube_radius,
            n_waves: self.params.n_waves,
            epsilon: eps,
            profile: &self.cfg.profile,
            n_phi: grid.n_phi,
            n_theta: grid.n_theta,
            newton: self.newton_options(),
            continuation_step: self.cfg.continuation_step,
        })
    }

    fn cached(&self, grid: &PeriodicGrid, eps: f64, compute: impl FnOnce() -> Result<SteadyState>) -> Result<SteadyState> {
        let key = self.key(grid, eps);
        let p = self.params_at(eps)?;
        if let Some(c) = &self.cache {
            if let Some(s) = c.load(&key, &p) {
                if s.field.grid == *grid {
                    return Ok(s);
                }
            }
        }
        let s = compute()?;
        if let Some(c) = &self.cache {
            c.store(&key, &s);
        }
        Ok(s)
    }

    /// Standard-torus steady state seeded by the sampled profile.
    pub fn base(&self, grid: &PeriodicGrid) -> Result<SteadyState> {
        self.cached(grid, 0.0, || {
            let ext = self.construction.profile.extend_symmetric();
            let init = ScalarField::from_fn(*grid, |phi, _| ext.value(phi));
            newton::base_state(&init, &self.params, self.nl(), &self.newton_options())
        })
    }

    pub fn continuation_steps(&self, eps: f64) -> usize {
        ((eps.abs() / self.cfg.continuation_step).ceil() as usize).max(1)
    }

    /// Steady state on the `eps` torus by continuation from `base`.
    pub fn steady_from(&self, base: &SteadyState, eps: f64) -> Result<SteadyState> {
        if eps == 0.0 {
            return Ok(base.clone());
        }
        let grid = base.field.grid;
        self.cached(&grid, eps, || {
            let br = newton::continuation(
                base,
                &self.params,
                self.nl(),
                eps,
                self.continuation_steps(eps),
                &self.newton_options(),
            )?;
            Ok(br.last().clone())
        })
    }

    pub fn steady(&self, grid: &PeriodicGrid, eps: f64) -> Result<SteadyState> {
        let base = self.base(grid)?;
        self.steady_from(&base, eps)
    }

    pub fn spectrum(&self, state: &SteadyState, lambda_est: Option<f64>) -> Result<SpectralResult> {
        let op = assemble_laplacian(&state.params, &state.field.grid)?;
        spectral::principal_eigpair(&state.field, &op, self.nl(), lambda_est, &self.eigen_options())
    }

    /// Coefficients from closed forms along the profile on `grid.n_phi` points.
    pub fn perturbation(&self) -> Result<PerturbationSolution> {
        let c = perturbation::coefficients_ab(
            &self.construction.profile,
            self.nl(),
            &self.params,
            self.params.n_waves,
            self.cfg.perturbation_points,
        );
        PerturbationSolution::solve(c, self.construction.threshold.n, self.tol.get("ode_pivot_tol"))
    }

    /// Coefficients consistent with the surface discretization around `base`.
    pub fn perturbation_on_grid(&self, base: &SteadyState) -> Result<PerturbationSolution> {
        let g = base.field.grid;
        let column: Vec<f64> = (0..g.n_phi).map(|i| base.field.at(i, 0)).collect();
        let c = perturbation::grid_consistent_coefficients(&column, self.nl(), &self.params, &g, self.params.n_waves)?;
        PerturbationSolution::solve(c, self.construction.threshold.n, self.tol.get("ode_pivot_tol"))
    }

    pub fn census(&self, state: &SteadyState) -> Result<(CriticalPointReport, CountVerdict)> {
        let report = census::locate_critical_points(&state.field, &state.params, &self.census_options())?;
        let margin = if state.params.epsilon != 0.0 {
            census::off_set_margin(&state.field, &state.params, self.tol.get("census_margin_cells"))
        } else {
            0.0
        };
        let verdict = census::verify_count(&report, &state.params, margin, self.tol.get("census_match_cells"));
        Ok((report, verdict))
    }

    pub fn probe(&self, state: &SteadyState, seed: u64) -> Result<(f64, EvolutionTrace)> {
        let op = assemble_laplacian(&state.params, &state.field.grid)?;
        let delta = self.tol.get("probe_delta_fraction") * state.field.max_abs();
        let trace = dynamics::stability_probe(&state.field, &op, self.nl(), delta, seed, &self.probe_options())?;
        Ok((delta, trace))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorStudy {
    pub sizes: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})` for consecutive doublings.
    pub orders: Vec<f64>,
}

/// Max-norm error of the assembled operator on `cos phi` at `eps = 0` over `n x n` grids.
pub fn operator_study(params: &TorusParams, sizes: &[usize]) -> Result<OperatorStudy> {
    let p0 = params.with_epsilon(0.0)?;
    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let g = PeriodicGrid::new(n, n)?;
        let op = assemble_laplacian(&p0, &g)?;
        let u = ScalarField::from_fn(g, |phi, _| phi.cos());
        let lu = op.laplacian(&u);
        let exact = ScalarField::from_fn(g, |phi, theta| {
            let c = laplace_coefficients(&p0, phi, theta);
            -c.c_pp * phi.cos() - c.c_p * phi.sin()
        });
        errors.push(lu.dist_inf(&exact));
    }
    let orders = errors
        .windows(2)
        .zip(sizes.windows(2))
        .map(|(e, s)| (e[0] / e[1]).ln() / (s[1] as f64 / s[0] as f64).ln())
        .collect();
    Ok(OperatorStudy {
        sizes: sizes.to_vec(),
        errors,
        orders,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Claim {
    pub id: String,
    /// Acceptance criterion number; `None` for supplementary rows.
    pub criterion: Option<u32>,
    pub passed: bool,
    pub measured: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub report_version: u32,
    /// Digest of the configuration with `output_dir` removed.
    pub config_digest: String,
    pub n_waves: u32,
    pub threshold_n: u32,
    pub n_phi: usize,
    pub n_theta: usize,
    pub all_passed: bool,
    pub claims: Vec<Claim>,
}

impl VerificationReport {
    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    /// One `PASS`/`FAIL` line per claim.
    pub fn summary_lines(&self) -> Vec<String> {
        self.claims
            .iter()
            .map(|c| {
                let tag = c.criterion.map(|k| format!("[{k:>2}]")).unwrap_or_else(|| "[ -]".into());
                format!("{} {tag} {}", if c.passed { "PASS" } else { "FAIL" }, c.id)
            })
            .collect()
    }
}

pub fn config_digest(cfg: &RunConfig) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Value::Object(m) = &mut v {
        m.remove("output_dir");
    }
    io::sha256_hex(v.to_string().as_bytes())
}

fn measured(pairs: Vec<(&str, Value)>) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn claim(id: &str, criterion: Option<u32>, passed: bool, m: Vec<(&str, Value)>) -> Claim {
    Claim {
        id: id.to_string(),
        criterion,
        passed,
        measured: measured(m),
        note: None,
    }
}

fn kind_counts(r: &CriticalPointReport) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for k in [CriticalKind::Max, CriticalKind::Min, CriticalKind::Saddle, CriticalKind::Degenerate] {
        m.insert(k.as_str().to_string(), r.points.iter().filter(|p| p.kind == k).count());
    }
    m
}

fn row_kinds(r: &CriticalPointReport, phi: f64) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for p in &r.points {
        let d = (p.phi - phi).abs().min(2.0 * std::f64::consts::PI - (p.phi - phi).abs());
        if d < 0.5 {
            *m.entry(p.kind.as_str().to_string()).or_insert(0) += 1;
        }
    }
    m
}

/// Artifacts kept in memory for callers that inspect more than the report.
pub struct VerifyOutcome {
    pub report: VerificationReport,
    pub timings: Vec<(String, f64)>,
    pub lambda0: f64,
    pub comparison: ComparisonTable,
    pub convergence: ConvergenceTable,
    pub closed_form: PerturbationVerdict,
}

/// Full verification run; writes artifacts, `report.json` and `timings.json` into `out`.
pub fn verify(s: &Session, out: &Path) -> Result<VerifyOutcome> {
    io::ensure_dir(out)?;
    let tol = s.tol;
    let cfg = s.cfg;
    let grid = s.grid;
    let n = s.params.n_waves;
    let mut claims = Vec::new();

    // operator consistency
    let t = Instant::now();
    s.say("operator convergence study");
    let study = operator_study(&s.params, &cfg.operator_grids)?;
    let (omin, omax) = (tol.get("operator_order_min"), tol.get("operator_order_max"));
    claims.push(claim(
        "operator_consistency",
        Some(1),
        study.orders.iter().all(|o| *o >= omin && *o <= omax),
        vec![
            ("sizes", json!(study.sizes)),
            ("errors", json!(study.errors)),
            ("orders", json!(study.orders)),
        ],
    ));
    io::write_table(
        &out.join("operator_convergence.csv"),
        "n,h,error",
        study
            .sizes
            .iter()
            .zip(&study.errors)
            .map(|(&k, &e)| vec![k as f64, 2.0 * std::f64::consts::PI / k as f64, e]),
    )?;
    s.record("operator_study", t);

    // construction
    let c = &s.construction.summary;
    claims.push(claim(
        "construction_exactness",
        Some(2),
        c.ode_residual < tol.get("construction_residual")
            && c.f_at_0 < 0.0
            && c.f_at_pi > 0.0
            && c.f_integral.abs() < tol.get("construction_integral"),
        vec![
            ("ode_residual", json!(c.ode_residual)),
            ("f_at_0", json!(c.f_at_0)),
            ("f_at_pi", json!(c.f_at_pi)),
            ("f_integral", json!(c.f_integral)),
            ("max_abs_fprime", json!(c.max_abs_fprime)),
            ("threshold_n", json!(c.threshold_n)),
        ],
    ));
    io::write_profile_csv(&out.join("profile.csv"), &s.construction.profile)?;
    io::write_nonlinearity_csv(&out.join("nonlinearity.csv"), s.nl())?;
    io::write_json(&out.join("nonlinearity.json"), &NonlinearityDoc::new(&cfg.profile, s.nl()))?;

    // stability of the standard-torus pattern
    let t = Instant::now();
    s.say("standard-torus steady state and principal eigenpair");
    let base = s.base(&grid)?;
    let sp0 = s.spectrum(&base, None)?;
    let column: Vec<f64> = (0..grid.n_phi).map(|i| base.field.at(i, 0)).collect();
    let q: Vec<f64> = column.iter().map(|&v| s.nl().derivative(v)).collect();
    let eo = s.eigen_options();
    let sl = spectral::sl_reduction_eigpair(&s.params, q, &eo)?;
    let half = spectral::half_torus_normalization_check(&s.params, &sl.values, tol.get("normalization_tol"));
    let agreement = (sl.lambda1 - sp0.lambda1).abs() / sp0.lambda1.abs();
    let min_phi = sp0.eigenfield.min();
    claims.push(claim(
        "theorem_2_2",
        Some(3),
        sp0.lambda1 > 0.0
            && sp0.residual < tol.get("eigen_residual_max")
            && min_phi > 0.0
            && (sp0.normalization - 1.0).abs() < tol.get("normalization_tol")
            && agreement < tol.get("eigen_agreement"),
        vec![
            ("lambda1", json!(sp0.lambda1)),
            ("residual", json!(sp0.residual)),
            ("min_eigenfield", json!(min_phi)),
            ("normalization", json!(sp0.normalization)),
            ("lambda1_1d", json!(sl.lambda1)),
            ("relative_agreement", json!(agreement)),
            ("half_torus_rescaled_norm", json!(half.rescaled_norm)),
            ("half_torus_passed", json!(half.passed)),
            ("newton_residual", json!(base.residual_norm)),
            ("newton_iters", json!(base.newton_iters)),
        ],
    ));
    io::write_json(&out.join("spectrum.json"), &sp0.summary())?;
    s.record("base_and_spectrum", t);

    let t = Instant::now();
    let (rep0, _) = s.census(&base)?;
    let circles: Vec<f64> = rep0.circles.iter().map(|c| c.phi).collect();
    let pi = std::f64::consts::PI;
    let h = grid.h_phi();
    claims.push(claim(
        "theorem_2_2_critical_set",
        None,
        rep0.count == 0
            && circles.len() == 2
            && circles.iter().any(|p| p.abs() < 0.5 * h)
            && circles.iter().any(|p| (p - pi).abs() < 0.5 * h),
        vec![("circles", json!(circles)), ("isolated_points", json!(rep0.count))],
    ));
    s.record("census_eps0", t);

    // branch over epsilon_list
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    let mut sym: Vec<(f64, SymmetryReport)> = Vec::new();
    let mut newton_rows = Vec::new();
    for &eps in &cfg.epsilon_list {
        s.say(&format!("continuation to epsilon = {eps}"));
        let st = s.steady_from(&base, eps)?;
        let spe = s.spectrum(&st, Some(sp0.lambda1))?;
        sym.push((eps, newton::symmetry_check(&st.field, n)?));
        rows.push(ConvergenceRow {
            epsilon: eps,
            lambda1: spe.lambda1,
            deviation_inf: st.field.dist_inf(&base.field),
            gap: 0.0,
        });
        newton_rows.push(json!({"epsilon": eps, "newton_iters": st.newton_iters, "residual": st.residual_norm}));
        fields.push((eps, st.field));
    }
    let table = ConvergenceTable::build(sp0.lambda1, rows);
    let dev_order = table.deviation_order.unwrap_or(f64::NAN);
    let max_sym = sym.iter().map(|(_, r)| r.max_defect).fold(0.0, f64::max);
    let planes = sym.iter().map(|(_, r)| r.plane_defects.len() + 1).min().unwrap_or(0);
    claims.push(claim(
        "lemma_apl",
        Some(4),
        (dev_order - 1.0).abs() <= tol.get("deviation_order_tol")
            && max_sym < tol.get("symmetry_factor") * tol.get("newton_tol")
            && planes == n as usize + 1,
        vec![
            ("continuations", json!(newton_rows)),
            ("deviation_order", json!(dev_order)),
            ("deviations", json!(table.rows.iter().map(|r| r.deviation_inf).collect::<Vec<_>>())),
            ("max_symmetry_defect", json!(max_sym)),
            ("planes_checked", json!(planes)),
        ],
    ));
    claims.push(claim(
        "lemma_uni",
        Some(5),
        !table.gap_ratios.is_empty() && table.gap_ratios.iter().all(|r| *r >= tol.get("gap_ratio_min")),
        vec![
            ("lambda1", json!(table.rows.iter().map(|r| r.lambda1).collect::<Vec<_>>())),
            ("gaps", json!(table.rows.iter().map(|r| r.gap).collect::<Vec<_>>())),
            ("gap_ratios", json!(table.gap_ratios)),
            ("gap_order", json!(table.gap_order)),
        ],
    ));
    io::write_table(
        &out.join("lambda_vs_eps.csv"),
        "epsilon,lambda1,gap,deviation_inf",
        std::iter::once(vec![0.0, sp0.lambda1, 0.0, 0.0])
            .chain(table.rows.iter().map(|r| vec![r.epsilon, r.lambda1, r.gap, r.deviation_inf])),
    )?;
    s.record("branch", t);

    // perturbation structure
    let t = Instant::now();
    s.say("first-order perturbation");
    let ptol = s.perturbation_tolerances();
    let closed = s.perturbation()?;
    let v = closed.verdict(&ptol);
    io::write_with(&out.join("perturbation.csv"), |w| closed.write_csv(w))?;
    io::write_json(&out.join("perturbation.json"), &v)?;
    let pre = json!(v.n_waves >= v.threshold_n);
    claims.push(claim("b_positive", Some(6), v.b_positive, vec![("min_b", json!(v.min_b)), ("n_at_least_threshold", pre.clone())]));
    claims.push(claim("c1_vanishes", Some(6), v.c1_vanishes, vec![("c1_max", json!(v.c1_max))]));
    claims.push(claim(
        "c2_boundary_slopes",
        Some(6),
        v.c2_boundary_slopes,
        vec![
            ("c2_slope_at_0", json!(v.c2_slope_at_0)),
            ("c2_slope_at_pi", json!(v.c2_slope_at_pi)),
            ("c2_symmetry_defect", json!(v.c2_symmetry_defect)),
        ],
    ));
    claims.push(claim(
        "c2_nonzero",
        Some(6),
        v.c2_nonzero_at_poles,
        vec![
            ("c2_at_0", json!(v.c2_at_0)),
            ("c2_at_pi", json!(v.c2_at_pi)),
            ("c2_max", json!(v.c2_max)),
        ],
    ));
    claims.push(claim(
        "zero_integral",
        Some(6),
        v.zero_integral,
        vec![("value", json!(v.zero_integral_value)), ("a_integral", json!(v.a_integral))],
    ));
    claims.push(claim(
        "negativity_integral",
        Some(6),
        v.negativity_integral,
        vec![("value", json!(v.negativity_integral_value))],
    ));

    // first-order accuracy against the branch
    let on_grid = s.perturbation_on_grid(&base)?;
    let vfield = perturbation::first_order_field(&on_grid.c2, n, &grid)?;
    let refs: Vec<(f64, &ScalarField)> = fields.iter().map(|(e, f)| (*e, f)).collect();
    let cmp = perturbation::compare_with_newton(&base.field, &refs, &vfield, n);
    let c2norm = on_grid.c2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cos_ok = cmp
        .rows
        .iter()
        .filter(|r| r.epsilon != 0.0)
        .all(|r| r.cos_content.unwrap_or(f64::INFINITY) <= tol.get("cos_content_factor") * r.epsilon.abs() * c2norm);
    let (emin, emax) = (tol.get("e_ratio_min"), tol.get("e_ratio_max"));
    claims.push(claim(
        "first_order_accuracy",
        Some(7),
        !cmp.e_ratios.is_empty() && cmp.e_ratios.iter().all(|r| *r >= emin && *r <= emax) && cos_ok,
        vec![
            ("e", json!(cmp.rows.iter().map(|r| r.e).collect::<Vec<_>>())),
            ("e_ratios", json!(cmp.e_ratios)),
            ("e_order", json!(cmp.e_order)),
            ("cos_content", json!(cmp.rows.iter().map(|r| r.cos_content).collect::<Vec<_>>())),
            ("cos_order", json!(cmp.cos_order)),
            ("c2_max_on_grid", json!(c2norm)),
        ],
    ));
    io::write_table(
        &out.join("e_vs_eps.csv"),
        "epsilon,E,cos_content,sin_content",
        cmp.rows.iter().filter(|r| r.e.is_some()).map(|r| {
            vec![r.epsilon, r.e.unwrap(), r.cos_content.unwrap(), r.sin_content.unwrap()]
        }),
    )?;
    s.record("perturbation", t);

    // census at the census epsilon, on the grid and on the doubled grid
    let t = Instant::now();
    let ce = cfg.census_epsilon;
    s.say(&format!("census at epsilon = {ce}"));
    let state = s.steady_from(&base, ce)?;
    let (rep, ver) = s.census(&state)?;
    let certs = census::theta_certificates(&state.field, &state.params, on_grid.c2[0], on_grid.c2[grid.pi_row()])?;
    let cert_dev = certs
        .iter()
        .map(|c| ((c.measured - c.predicted) / c.predicted).abs())
        .fold(0.0, f64::max);
    io::write_with(&out.join("critical_points.csv"), |w| rep.write_csv(w))?;
    io::write_json(&out.join("census.json"), &CensusDoc::new(&rep, &ver, &state.params))?;
    s.say("census on the doubled grid");
    let fine = grid.doubled();
    let state2 = s.steady(&fine, ce)?;
    let (rep2, ver2) = s.census(&state2)?;
    claims.push(claim(
        "theorem_1_1_count",
        Some(8),
        ver.verdict && ver2.verdict && rep.count == rep2.count,
        vec![
            ("epsilon", json!(ce)),
            ("count", json!(rep.count)),
            ("expected", json!(4 * n)),
            ("max_match_cells", json!(ver.max_match_cells)),
            ("off_set_margin", json!(ver.off_set_margin)),
            ("kinds", json!(kind_counts(&rep))),
            ("kinds_phi_0", json!(row_kinds(&rep, 0.0))),
            ("kinds_phi_pi", json!(row_kinds(&rep, pi))),
            ("reasons", json!(ver.reasons)),
            ("doubled_count", json!(rep2.count)),
            ("doubled_max_match_cells", json!(ver2.max_match_cells)),
            ("doubled_off_set_margin", json!(ver2.off_set_margin)),
            ("doubled_reasons", json!(ver2.reasons)),
            ("theta_certificate_max_relative_deviation", json!(cert_dev)),
        ],
    ));
    s.record("census", t);

    let t = Instant::now();
    let spe = s.spectrum(&state, Some(sp0.lambda1))?;
    claims.push(claim(
        "stability_perturbed",
        None,
        spe.lambda1 > 0.0 && spe.residual < tol.get("eigen_residual_max") && spe.eigenfield.min() > 0.0,
        vec![("epsilon", json!(ce)), ("lambda1", json!(spe.lambda1)), ("residual", json!(spe.residual))],
    ));

    // Lyapunov probe around the census-epsilon state
    let mut seeds = Vec::new();
    let mut ok = true;
    for k in 0..cfg.probe.seeds as u64 {
        let seed = cfg.seed + k;
        s.say(&format!("stability probe, seed {seed}"));
        let (delta, tr) = s.probe(&state, seed)?;
        let max_ratio = tr.max_sup_distance() / delta;
        let final_ratio = tr.final_sup_distance() / delta;
        let de = tr.max_energy_increase();
        let pass = max_ratio <= tol.get("probe_max_factor") && final_ratio < 1.0 && de <= tol.get("probe_energy_tol");
        ok &= pass;
        io::write_with(&out.join(format!("trace_seed{seed}.csv")), |w| tr.write_csv(w))?;
        seeds.push(json!({
            "seed": seed,
            "delta": delta,
            "max_sup_over_delta": max_ratio,
            "final_sup_over_delta": final_ratio,
            "max_energy_increase": de,
            "steps": tr.times.len() - 1,
            "passed": pass,
        }));
    }
    claims.push(claim("lyapunov_probe", Some(9), ok, vec![("epsilon", json!(ce)), ("seeds", json!(seeds))]));
    s.record("probe", t);

    // determinism: recompute construction and base state without the cache
    let t = Instant::now();
    s.say("determinism check");
    let again = Session::new(cfg, None, |_| {})?;
    let base2 = again.base(&grid)?;
    let d1 = io::field_digest(&base.field);
    let d2 = io::field_digest(&base2.field);
    let nl_same = again.nl().f == s.nl().f && again.nl().fprime == s.nl().fprime;
    claims.push(claim(
        "determinism",
        Some(10),
        d1 == d2 && nl_same,
        vec![("base_digest", json!(d1)), ("recomputed_digest", json!(d2)), ("nonlinearity_identical", json!(nl_same))],
    ));
    s.record("determinism", t);

    let report = VerificationReport {
        report_version: REPORT_VERSION,
        config_digest: config_digest(cfg),
        n_waves: n,
        threshold_n: s.construction.threshold.n,
        n_phi: grid.n_phi,
        n_theta: grid.n_theta,
        all_passed: claims.iter().all(|c| c.passed),
        claims,
    };
    io::write_json(&out.join("report.json"), &report)?;
    let timings = s.timings();
    let tmap: BTreeMap<&str, f64> = timings.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    io::write_json(&out.join("timings.json"), &tmap)?;
    Ok(VerifyOutcome {
        report,
        timings,
        lambda0: sp0.lambda1,
        comparison: cmp,
        convergence: table,
        closed_form: v,
    })
}
