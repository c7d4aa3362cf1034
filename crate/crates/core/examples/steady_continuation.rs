//! Newton solve on the standard torus, then continuation in epsilon.
use torus_patterns::config::RunConfig;
use torus_patterns::newton::{base_state, continuation, symmetry_check, NewtonOptions};
use torus_patterns::pipeline::construct;
use torus_patterns::{PeriodicGrid, Result, ScalarField};

fn main() -> Result<()> {
    let c = construct(&RunConfig::default())?;
    let n = c.threshold.n;
    let params = c.standard.with_waves(n)?;
    let grid = PeriodicGrid::new(64, 4 * n as usize * 2)?;
    let ext = c.profile.extend_symmetric();
    let init = ScalarField::from_fn(grid, |phi, _| ext.value(phi));
    let opts = NewtonOptions::default();
    let base = base_state(&init, &params, &c.nl, &opts)?;
    println!("n = {n}, grid {}x{}", grid.n_phi, grid.n_theta);
    println!("base: {} Newton iterations, residual history {:?}", base.newton_iters, base.history);
    let branch = continuation(&base, &params, &c.nl, 0.02, 4, &opts)?;
    for (s, d) in branch.states.iter().zip(branch.deviations()) {
        println!("eps {:.4}  |U^eps - U| {d:.4e}  iters {}", s.params.epsilon, s.newton_iters);
    }
    let sym = symmetry_check(&branch.last().field, n)?;
    println!("largest reflection defect {:.2e}", sym.max_defect);
    Ok(())
}
