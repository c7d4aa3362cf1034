//! Kicks the steady state with smooth noise and watches it relax.
use torus_patterns::config::RunConfig;
use torus_patterns::dynamics::{stability_probe, ProbeOptions};
use torus_patterns::linalg::SolverKind;
use torus_patterns::newton::{base_state, NewtonOptions};
use torus_patterns::pipeline::construct;
use torus_patterns::{assemble_laplacian, PeriodicGrid, Result, ScalarField};

fn main() -> Result<()> {
    let c = construct(&RunConfig::default())?;
    let params = c.standard.with_waves(c.threshold.n)?;
    let grid = PeriodicGrid::new(64, 16)?;
    let ext = c.profile.extend_symmetric();
    let init = ScalarField::from_fn(grid, |phi, _| ext.value(phi));
    let u = base_state(&init, &params, &c.nl, &NewtonOptions::default())?;
    let op = assemble_laplacian(&c.standard, &grid)?;
    let opts = ProbeOptions {
        t_end: 20.0,
        dt: 0.5 / c.nl.max_abs_fprime,
        max_mode: 8,
        solver: SolverKind::Auto,
        linear_tol: 1e-13,
    };
    let delta = 1e-2 * u.field.max_abs();
    let tr = stability_probe(&u.field, &op, &c.nl, delta, 1, &opts)?;
    let every = tr.times.len() / 10;
    for k in (0..tr.times.len()).step_by(every.max(1)) {
        println!("t {:7.3}  sup/delta {:.4}  energy {:.8}", tr.times[k], tr.sup_distance[k] / delta, tr.energy[k]);
    }
    println!("largest energy increase {:.2e}", tr.max_energy_increase());
    Ok(())
}
