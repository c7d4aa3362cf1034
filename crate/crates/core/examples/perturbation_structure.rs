//! First-order coefficients C1, C2 of the response to the wavy tube radius.
use torus_patterns::config::RunConfig;
use torus_patterns::perturbation::{coefficients_ab, PerturbationSolution, PerturbationTolerances};
use torus_patterns::pipeline::construct;
use torus_patterns::Result;

fn main() -> Result<()> {
    let c = construct(&RunConfig::default())?;
    let n = c.threshold.n;
    let coeffs = coefficients_ab(&c.profile, &c.nl, &c.standard, n, 1024);
    let sol = PerturbationSolution::solve(coeffs, n, 1e-14)?;
    let v = sol.verdict(&PerturbationTolerances {
        c1_max: 1e-8,
        slope_max: 1e-8,
        nonzero_fraction: 1e-3,
        integral_zero: 1e-8,
        symmetry: 1e-9,
    });
    println!("n = {n}: min B {:.4}, max |C1| {:.1e}", v.min_b, v.c1_max);
    println!("C2(0) {:.4e}, C2(pi) {:.4e}, max |C2| {:.4e}", v.c2_at_0, v.c2_at_pi, v.c2_max);
    println!("integral of psi (B C2 + A) {:.2e}", v.zero_integral_value);
    println!("integral of psi B C2      {:.4e}", v.negativity_integral_value);
    println!("all six facts hold: {}", v.all_pass());
    Ok(())
}
