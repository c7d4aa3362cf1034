#![allow(dead_code)]

use torus_patterns::nonlinearity::forge_nonlinearity;
use torus_patterns::{Nonlinearity, PeriodicGrid, Profile, ProfileConfig, ScalarField, TorusParams};

pub struct Fixture {
    pub params: TorusParams,
    pub profile: Profile,
    pub nl: Nonlinearity,
}

/// Default construction on R = 5, r = 1 with `n = N = 27` waves.
pub fn fixture() -> Fixture {
    let p = TorusParams::standard(5.0, 1.0).unwrap();
    let profile = Profile::build(&ProfileConfig::default(), &p).unwrap();
    let nl = forge_nonlinearity(&profile, &p).unwrap();
    let params = p.with_waves(nl.threshold(&p).n).unwrap();
    Fixture { params, profile, nl }
}

impl Fixture {
    pub fn sampled(&self, grid: PeriodicGrid) -> ScalarField {
        let ext = self.profile.extend_symmetric();
        ScalarField::from_fn(grid, |phi, _| ext.value(phi))
    }
}

/// Small verify run: n = 27 on a 64 x 216 grid with one short probe.
pub fn reduced_config(out: &std::path::Path) -> torus_patterns::config::RunConfig {
    let mut cfg = torus_patterns::config::RunConfig::default();
    cfg.params.n_waves = Some(27);
    cfg.grid.n_phi = 64;
    cfg.grid.n_theta = Some(216);
    cfg.operator_grids = vec![16, 32];
    cfg.perturbation_points = 512;
    cfg.probe.seeds = 1;
    cfg.probe.t_end = 1.0;
    cfg.output_dir = out.to_path_buf();
    cfg.validate().unwrap();
    cfg
}
