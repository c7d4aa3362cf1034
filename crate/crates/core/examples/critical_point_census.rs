//! Counts critical points of the perturbed pattern and compares with the 4n prediction.
use torus_patterns::census::{locate_critical_points, off_set_margin, verify_count, CensusOptions, CriticalKind};
use torus_patterns::config::RunConfig;
use torus_patterns::newton::{base_state, continuation, NewtonOptions};
use torus_patterns::pipeline::construct;
use torus_patterns::{PeriodicGrid, Result, ScalarField};

fn main() -> Result<()> {
    let c = construct(&RunConfig::default())?;
    let n = c.threshold.n;
    let params = c.standard.with_waves(n)?;
    let grid = PeriodicGrid::new(64, 8 * n as usize)?;
    let ext = c.profile.extend_symmetric();
    let init = ScalarField::from_fn(grid, |phi, _| ext.value(phi));
    let opts = NewtonOptions::default();
    let base = base_state(&init, &params, &c.nl, &opts)?;
    let u = continuation(&base, &params, &c.nl, 0.02, 4, &opts)?.last().clone();
    let rep = locate_critical_points(&u.field, &u.params, &CensusOptions::default())?;
    let v = verify_count(&rep, &u.params, off_set_margin(&u.field, &u.params, 3.0), 2.0);
    for k in [CriticalKind::Max, CriticalKind::Min, CriticalKind::Saddle, CriticalKind::Degenerate] {
        println!("{:>10}: {}", k.as_str(), rep.points.iter().filter(|p| p.kind == k).count());
    }
    println!("found {} of {} expected, verdict {}", rep.count, 4 * n, v.verdict);
    for q in rep.points.iter().take(4) {
        println!("  ({:.4}, {:.4}) {}", q.phi, q.theta, q.kind.as_str());
    }
    Ok(())
}
