//! Runs the shipped default configuration end to end and prints one
//! PASS/FAIL line per acceptance criterion.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use torus_patterns::config::RunConfig;
use torus_patterns::pipeline::{verify, Claim, Session};

struct Line {
    criterion: u32,
    title: &'static str,
    passed: bool,
    detail: String,
}

const TITLES: [&str; 10] = [
    "operator consistency",
    "construction exactness",
    "stability of the unperturbed pattern",
    "continuation and symmetry",
    "eigenvalue convergence",
    "perturbation structure",
    "first-order accuracy",
    "critical point count",
    "empirical Lyapunov stability",
    "determinism",
];

/// Seconds; `None` means no budget.
fn budget(criterion: u32) -> Option<(&'static [&'static str], f64)> {
    match criterion {
        1 => Some((&["operator_study"], 10.0)),
        3 => Some((&["base_and_spectrum"], 60.0)),
        8 => Some((&["census"], 120.0)),
        _ => None,
    }
}

fn failed_ids(claims: &[&Claim]) -> String {
    let ids: Vec<&str> = claims.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
    if ids.is_empty() {
        String::new()
    } else {
        format!(" failed: {}", ids.join(", "))
    }
}

fn cli_verify_bytes(config: &Path, out: &Path) -> (Option<i32>, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_torus-lab"))
        .args(["verify", "--quiet", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env_remove("TORUS_LAB_CACHE")
        .output()
        .unwrap();
    (o.status.code(), std::fs::read(out.join("report.json")).unwrap_or_default())
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.json")).unwrap();
    let session = Session::new(&cfg, None, |m: &str| eprintln!("  .. {m}")).unwrap();
    let outcome = verify(&session, dir.path()).unwrap();
    let report = &outcome.report;
    let timings: BTreeMap<&str, f64> = outcome.timings.iter().map(|(k, v)| (k.as_str(), *v)).collect();

    let mut lines = Vec::new();
    for k in 1..=10u32 {
        let claims: Vec<&Claim> = report.claims.iter().filter(|c| c.criterion == Some(k)).collect();
        let mut passed = !claims.is_empty() && claims.iter().all(|c| c.passed);
        let mut detail = format!("{} claim(s){}", claims.len(), failed_ids(&claims));
        if let Some((stages, limit)) = budget(k) {
            let secs: f64 = stages.iter().map(|s| timings.get(s).copied().unwrap_or(f64::INFINITY)).sum();
            passed &= secs < limit;
            detail.push_str(&format!("; runtime {secs:.2} s (limit {limit} s)"));
        }
        if k == 10 {
            // two CLI runs of the same config into separate directories
            let cfg_dir = tempfile::tempdir().unwrap();
            let small = common::reduced_config(cfg_dir.path());
            let path = cfg_dir.path().join("config.json");
            std::fs::write(&path, small.to_json()).unwrap();
            let (ca, a) = cli_verify_bytes(&path, &cfg_dir.path().join("a"));
            let (cb, b) = cli_verify_bytes(&path, &cfg_dir.path().join("b"));
            let same = !a.is_empty() && a == b && ca == cb;
            passed &= same;
            detail.push_str(&format!("; cli reports bit-identical: {same} (exit {ca:?}/{cb:?}, {} bytes)", a.len()));
        }
        lines.push(Line {
            criterion: k,
            title: TITLES[k as usize - 1],
            passed,
            detail,
        });
    }

    println!();
    for c in report.claims.iter().filter(|c| c.criterion.is_none()) {
        println!("info  {} {}", if c.passed { "pass" } else { "fail" }, c.id);
    }
    for l in &lines {
        println!(
            "{} criterion {:>2} {}: {}",
            if l.passed { "PASS" } else { "FAIL" },
            l.criterion,
            l.title,
            l.detail
        );
    }
    let failures = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failures, lines.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
