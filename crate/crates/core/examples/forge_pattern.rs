//! Builds the default profile, forges f and reports the wave-number threshold.
use torus_patterns::config::RunConfig;
use torus_patterns::pipeline::construct;
use torus_patterns::Result;

fn main() -> Result<()> {
    let c = construct(&RunConfig::default())?;
    let s = &c.summary;
    println!("ODE residual       {:e}", s.ode_residual);
    println!("f integral         {:e}", s.f_integral);
    println!("f(U(0)), f(U(pi))  {:.6}, {:.6}", s.f_at_0, s.f_at_pi);
    println!("max |f'|           {:.6}", s.max_abs_fprime);
    println!("threshold N        {} (bound {:.4})", s.threshold_n, s.threshold_bound);
    let step = c.profile.samples.len() / 8;
    println!("{:>8} {:>12} {:>12} {:>12}", "phi", "U", "f(U)", "f'(U)");
    for q in c.profile.samples.iter().step_by(step) {
        println!("{:8.4} {:12.6} {:12.6} {:12.6}", q.phi, q.u, c.nl.value(q.u), c.nl.derivative(q.u));
    }
    Ok(())
}
