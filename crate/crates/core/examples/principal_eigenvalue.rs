//! Principal eigenvalue of the linearization around the standard-torus pattern.
use torus_patterns::config::RunConfig;
use torus_patterns::newton::{base_state, NewtonOptions};
use torus_patterns::pipeline::construct;
use torus_patterns::spectral::{principal_eigpair, sl_reduction_eigpair, EigenOptions};
use torus_patterns::{assemble_laplacian, PeriodicGrid, Result, ScalarField};

fn main() -> Result<()> {
    let c = construct(&RunConfig::default())?;
    let params = c.standard.with_waves(c.threshold.n)?;
    let grid = PeriodicGrid::new(128, 16)?;
    let ext = c.profile.extend_symmetric();
    let init = ScalarField::from_fn(grid, |phi, _| ext.value(phi));
    let u = base_state(&init, &params, &c.nl, &NewtonOptions::default())?;
    let op = assemble_laplacian(&c.standard, &grid)?;
    let opts = EigenOptions::default();
    let e = principal_eigpair(&u.field, &op, &c.nl, None, &opts)?;
    println!("lambda1 (2-D)  {:.10}  residual {:.1e}  iterations {}", e.lambda1, e.residual, e.iterations);
    let q = (0..grid.n_phi).map(|i| c.nl.derivative(u.field.at(i, 0))).collect();
    let sl = sl_reduction_eigpair(&c.standard, q, &opts)?;
    println!("lambda1 (1-D)  {:.10}", sl.lambda1);
    println!("eigenfield min {:.4e}, stable: {}", e.eigenfield.min(), e.lambda1 > 0.0);
    Ok(())
}
