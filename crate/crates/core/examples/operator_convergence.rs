//! Grid refinement of the assembled Laplace-Beltrami operator on cos(phi).
use torus_patterns::pipeline::operator_study;
use torus_patterns::{assemble_laplacian, PeriodicGrid, Result, ScalarField, TorusParams};

fn main() -> Result<()> {
    let p = TorusParams::standard(5.0, 1.0)?;
    let s = operator_study(&p, &[32, 64, 128, 256])?;
    for (k, e) in s.sizes.iter().zip(&s.errors) {
        println!("{k:>4}x{k:<4} max error {e:.3e}");
    }
    println!("orders {:?}", s.orders);

    let wavy = TorusParams::new(5.0, 1.0, 0.2, 4)?;
    let g = PeriodicGrid::new(64, 64)?;
    let op = assemble_laplacian(&wavy, &g)?;
    let one = ScalarField::constant(g, 1.0);
    println!("wavy torus: area {:.6}, max |L 1| {:.1e}", op.area(), op.laplacian(&one).max_abs());
    Ok(())
}
