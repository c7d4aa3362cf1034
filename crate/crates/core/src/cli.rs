//! Command-line front end of `torus-lab`.

use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::config::{parse_grid, Overrides, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, Cache};
use crate::perturbation;
use crate::pipeline::{self, Session};
use crate::spectral;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "torus-lab", version, about = "Stable patterns on standard and wavy tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration (built-in defaults when omitted).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Epsilon of the steady/spectrum/evolve/census stage.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Number of waves n.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Grid as NPHIxNTHETA.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress progress messages and summaries.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Build the profile and forge the nonlinearity.
    Construct,
    /// Steady state at --epsilon (default: census_epsilon).
    Steady,
    /// Principal eigenpair at --epsilon (default: 0).
    Spectrum,
    /// Stability probe around the steady state at --epsilon (default: census_epsilon).
    Evolve,
    /// First-order perturbation ODEs and comparison with the Newton branch.
    Perturb,
    /// Critical-point census at --epsilon (default: census_epsilon).
    Census,
    /// Full pipeline with a pass/fail report.
    Verify,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

pub fn error_json(e: &Error) -> String {
    json!({"error": {"kind": e.kind(), "message": e.to_string()}, "exit_code": exit_code(e)}).to_string()
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let grid = cli.grid.as_deref().map(parse_grid).transpose()?;
    cfg.apply(&Overrides {
        epsilon: match cli.command {
            Command::Census | Command::Verify | Command::Steady | Command::Evolve => cli.epsilon,
            _ => None,
        },
        n_waves: cli.n,
        grid,
        seed: cli.seed,
        output_dir: cli.out.clone(),
    })?;
    if let Some(e) = cli.epsilon {
        crate::geometry::TorusParams::standard(cfg.params.major_radius, cfg.params.tube_radius)?.with_epsilon(e)?;
    }
    Ok(cfg)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    let out = cfg.output_dir.clone();
    io::ensure_dir(&out)?;
    let quiet = cli.quiet;
    let progress = move |m: &str| {
        if !quiet {
            eprintln!("{m}");
        }
    };
    let say = |m: String| {
        if !quiet {
            println!("{m}");
        }
    };
    if cli.command == Command::Construct {
        return construct(&cfg, &out, &say);
    }
    let session = Session::new(&cfg, Some(Cache::locate(&out)), progress)?;
    match cli.command {
        Command::Construct => unreachable!(),
        Command::Steady => {
            let eps = cfg.census_epsilon;
            let st = session.steady(&session.grid, eps)?;
            io::write_field(&out, "steady", &st.field)?;
            io::write_json(&out.join("steady.json"), &st.sidecar())?;
            say(format!(
                "steady state at epsilon = {eps}: residual {:e}, {} Newton iterations",
                st.residual_norm, st.newton_iters
            ));
            Ok(EXIT_OK)
        }
        Command::Spectrum => {
            let eps = cli.epsilon.unwrap_or(0.0);
            let st = session.steady(&session.grid, eps)?;
            let sp = session.spectrum(&st, None)?;
            let mut doc = serde_json::to_value(sp.summary())?;
            doc["epsilon"] = json!(eps);
            if eps == 0.0 {
                let g = session.grid;
                let q: Vec<f64> = (0..g.n_phi).map(|i| session.nl().derivative(st.field.at(i, 0))).collect();
                let sl = spectral::sl_reduction_eigpair(&session.params, q, &session.eigen_options())?;
                doc["lambda1_1d"] = json!(sl.lambda1);
                doc["relative_agreement_1d"] = json!((sl.lambda1 - sp.lambda1).abs() / sp.lambda1.abs());
            }
            io::write_json(&out.join("spectrum.json"), &doc)?;
            io::write_field(&out, "eigenfield", &sp.eigenfield)?;
            say(format!("lambda1 = {:e} (residual {:e}) at epsilon = {eps}", sp.lambda1, sp.residual));
            Ok(EXIT_OK)
        }
        Command::Evolve => {
            let eps = cfg.census_epsilon;
            let st = session.steady(&session.grid, eps)?;
            let mut rows = Vec::new();
            for k in 0..cfg.probe.seeds as u64 {
                let seed = cfg.seed + k;
                let (delta, tr) = session.probe(&st, seed)?;
                io::write_with(&out.join(format!("trace_seed{seed}.csv")), |w| tr.write_csv(w))?;
                say(format!(
                    "seed {seed}: max sup/delta {:.4}, final sup/delta {:.4}, max energy increase {:e}",
                    tr.max_sup_distance() / delta,
                    tr.final_sup_distance() / delta,
                    tr.max_energy_increase()
                ));
                rows.push(json!({
                    "seed": seed,
                    "delta": delta,
                    "max_sup_distance": tr.max_sup_distance(),
                    "final_sup_distance": tr.final_sup_distance(),
                    "max_energy_increase": tr.max_energy_increase(),
                }));
            }
            io::write_json(&out.join("evolve.json"), &json!({"epsilon": eps, "probes": rows}))?;
            Ok(EXIT_OK)
        }
        Command::Perturb => {
            let sol = session.perturbation()?;
            let v = sol.verdict(&session.perturbation_tolerances());
            io::write_with(&out.join("perturbation.csv"), |w| sol.write_csv(w))?;
            io::write_json(&out.join("perturbation.json"), &v)?;
            let base = session.base(&session.grid)?;
            let on_grid = session.perturbation_on_grid(&base)?;
            let vf = perturbation::first_order_field(&on_grid.c2, session.params.n_waves, &session.grid)?;
            let mut states = Vec::new();
            for &e in &cfg.epsilon_list {
                states.push((e, session.steady_from(&base, e)?.field));
            }
            let refs: Vec<_> = states.iter().map(|(e, f)| (*e, f)).collect();
            let table = perturbation::compare_with_newton(&base.field, &refs, &vf, session.params.n_waves);
            io::write_json(&out.join("comparison.json"), &table)?;
            io::write_table(
                &out.join("e_vs_eps.csv"),
                "epsilon,E,cos_content,sin_content",
                table.rows.iter().filter(|r| r.e.is_some()).map(|r| {
                    vec![r.epsilon, r.e.unwrap(), r.cos_content.unwrap(), r.sin_content.unwrap()]
                }),
            )?;
            say(format!(
                "six facts {}: min B {:e}, C2(0) {:e}, C2(pi) {:e}; E order {:?}",
                if v.all_pass() { "hold" } else { "FAIL" },
                v.min_b,
                v.c2_at_0,
                v.c2_at_pi,
                table.e_order
            ));
            Ok(EXIT_OK)
        }
        Command::Census => {
            let eps = cfg.census_epsilon;
            let st = session.steady(&session.grid, eps)?;
            let (rep, ver) = session.census(&st)?;
            io::write_with(&out.join("critical_points.csv"), |w| rep.write_csv(w))?;
            io::write_json(&out.join("census.json"), &crate::census::CensusDoc::new(&rep, &ver, &st.params))?;
            say(format!(
                "epsilon = {eps}, n = {}: {} critical points (expected {}), {} circles, verdict {}",
                st.params.n_waves,
                rep.count,
                4 * st.params.n_waves,
                rep.circles.len(),
                ver.verdict
            ));
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let outcome = pipeline::verify(&session, &out)?;
            for line in outcome.report.summary_lines() {
                say(line);
            }
            Ok(if outcome.report.all_passed { EXIT_OK } else { EXIT_VERIFICATION })
        }
    }
}

fn construct(cfg: &RunConfig, out: &Path, say: &dyn Fn(String)) -> Result<i32> {
    let c = pipeline::construct(cfg)?;
    io::write_json(&out.join("construction.json"), &c.summary)?;
    io::write_json(
        &out.join("nonlinearity.json"),
        &crate::nonlinearity::NonlinearityDoc::new(&cfg.profile, &c.nl),
    )?;
    io::write_nonlinearity_csv(&out.join("nonlinearity.csv"), &c.nl)?;
    io::write_profile_csv(&out.join("profile.csv"), &c.profile)?;
    say(format!(
        "forged f: residual {:e}, threshold N = {}, max |f'| = {:.6}",
        c.summary.ode_residual, c.summary.threshold_n, c.summary.max_abs_fprime
    ));
    Ok(EXIT_OK)
}
