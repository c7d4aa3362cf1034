//! Metric, area element and Laplacian coefficients on a wavy torus.
use std::f64::consts::PI;

use torus_patterns::geometry::{laplace_coefficients, metric_at, stas_indicator};
use torus_patterns::{Result, TorusParams};

fn main() -> Result<()> {
    let p = TorusParams::new(5.0, 1.0, 0.1, 3)?;
    println!("{:>8} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "phi", "theta", "sqrt_det", "c_pp", "c_tt", "c_p", "c_t");
    for phi in [0.0, PI / 2.0, PI] {
        for theta in [0.0, PI / 6.0, PI / 3.0] {
            let m = metric_at(&p, phi, theta);
            let c = laplace_coefficients(&p, phi, theta);
            println!(
                "{phi:8.4} {theta:8.4} {:10.6} {:10.6} {:10.6} {:10.6} {:10.6}",
                m.sqrt_det, c.c_pp, c.c_tt, c.c_p, c.c_t
            );
        }
    }
    let x = p.embed(0.0, PI / 6.0);
    println!("embedding at (0, pi/6): {x:?}");
    let std = TorusParams::standard(5.0, 1.0)?;
    for phi in [1.0, 2.0, 2.5] {
        println!("stas indicator at phi = {phi}: {:.6}", stas_indicator(&std, phi));
    }
    // the tube touches the axis once r + eps reaches R
    println!("eps = 4.5 rejected: {}", p.with_epsilon(4.5).is_err());
    Ok(())
}
