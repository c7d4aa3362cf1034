//! Run configuration: torus, profile, grid, epsilon schedule, probe settings
//! and every named tolerance, read from JSON with unknown keys rejected.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geometry::TorusParams;
use crate::grid::PeriodicGrid;
use crate::linalg::SolverKind;
use crate::profile::ProfileConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Every tolerance the pipeline reads, with its default.
pub const TOLERANCE_REGISTRY: &[(&str, f64)] = &[
    ("newton_tol", 1e-10),
    ("linear_tol", 1e-13),
    ("eigen_tol", 1e-10),
    ("eigen_linear_tol", 1e-14),
    ("eigen_pivot_tol", 1e-14),
    ("eigen_shift_margin", 1e-6),
    ("eigen_residual_max", 1e-8),
    ("normalization_tol", 1e-10),
    ("eigen_agreement", 1e-6),
    ("operator_order_min", 1.8),
    ("operator_order_max", 2.2),
    ("construction_residual", 1e-9),
    ("construction_integral", 1e-8),
    ("deviation_order_tol", 0.2),
    ("symmetry_factor", 10.0),
    ("gap_ratio_min", 1.5),
    ("ode_pivot_tol", 1e-14),
    ("c1_max", 1e-8),
    ("c2_slope_max", 1e-8),
    ("c2_nonzero_fraction", 1e-3),
    ("integral_zero", 1e-8),
    ("c2_symmetry", 1e-9),
    ("e_ratio_min", 1.5),
    ("e_ratio_max", 2.5),
    ("cos_content_factor", 1.0),
    ("census_threshold", 1e-6),
    ("census_zero_band", 1e-10),
    ("census_degenerate_det", 1e-10),
    ("census_match_cells", 2.0),
    ("census_margin_cells", 3.0),
    ("probe_delta_fraction", 1e-2),
    ("probe_max_factor", 3.0),
    ("probe_energy_tol", 1e-10),
];

/// Named tolerances; records which names were read.
#[derive(Debug, Default)]
pub struct Tolerances {
    values: BTreeMap<String, f64>,
    used: Mutex<BTreeSet<String>>,
}

impl Clone for Tolerances {
    fn clone(&self) -> Self {
        Tolerances {
            values: self.values.clone(),
            used: Mutex::new(self.used.lock().unwrap().clone()),
        }
    }
}

impl Tolerances {
    pub fn defaults() -> Self {
        Tolerances {
            values: TOLERANCE_REGISTRY.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            used: Mutex::default(),
        }
    }

    pub fn from_map(values: BTreeMap<String, f64>) -> Result<Self> {
        let known: BTreeSet<&str> = TOLERANCE_REGISTRY.iter().map(|(k, _)| *k).collect();
        for (k, v) in &values {
            if !known.contains(k.as_str()) {
                return Err(Error::Config(format!("unknown tolerance \"{k}\"")));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance \"{k}\" = {v} must be positive")));
            }
        }
        for k in &known {
            if !values.contains_key(*k) {
                return Err(Error::Config(format!("missing tolerance \"{k}\"")));
            }
        }
        Ok(Tolerances {
            values,
            used: Mutex::default(),
        })
    }

    /// Panics on a name outside the registry; `from_map` guarantees the rest are present.
    pub fn get(&self, name: &str) -> f64 {
        let v = *self
            .values
            .get(name)
            .unwrap_or_else(|| panic!("tolerance \"{name}\" is not registered"));
        self.used.lock().unwrap().insert(name.to_string());
        v
    }

    pub fn used(&self) -> BTreeSet<String> {
        self.used.lock().unwrap().clone()
    }

    pub fn map(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

impl PartialEq for Tolerances {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Serialize for Tolerances {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tolerances {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, f64>::deserialize(d)?;
        Tolerances::from_map(m).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub major_radius: f64,
    pub tube_radius: f64,
    /// Defaults to `max(threshold N, 4)`.
    #[serde(default)]
    pub n_waves: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_phi: usize,
    /// Defaults to the smallest multiple of `4 n` not below `min_theta`.
    #[serde(default)]
    pub n_theta: Option<usize>,
    pub min_theta: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub seeds: usize,
    pub t_end: f64,
    /// Defaults to `dt_factor / max |f'|`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub dt_factor: f64,
    pub max_mode: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub newton_max_iter: usize,
    pub eigen_max_iter: usize,
    pub census_max_refine: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub params: TorusConfig,
    pub profile: ProfileConfig,
    pub grid: GridConfig,
    /// Epsilons for the branch, eigenvalue and first-order comparisons.
    pub epsilon_list: Vec<f64>,
    /// Epsilon of the critical-point census and the stability probe.
    pub census_epsilon: f64,
    /// Largest epsilon increment of one continuation step.
    pub continuation_step: f64,
    /// Grid sizes `n` (n x n) of the operator convergence study.
    pub operator_grids: Vec<usize>,
    /// Points on the circle for the first-order ODEs.
    pub perturbation_points: usize,
    pub probe: ProbeConfig,
    pub limits: Limits,
    pub solver: SolverKind,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            params: TorusConfig {
                major_radius: 5.0,
                tube_radius: 1.0,
                n_waves: None,
            },
            profile: ProfileConfig::default(),
            grid: GridConfig {
                n_phi: 128,
                n_theta: None,
                min_theta: 512,
            },
            epsilon_list: vec![2.5e-5, 5e-5, 1e-4, 2e-4],
            census_epsilon: 0.02,
            continuation_step: 0.005,
            operator_grids: vec![64, 128, 256],
            perturbation_points: 4096,
            probe: ProbeConfig {
                seeds: 5,
                t_end: 50.0,
                dt: None,
                dt_factor: 0.5,
                max_mode: 8,
            },
            limits: Limits {
                newton_max_iter: 25,
                eigen_max_iter: 400,
                census_max_refine: 40,
            },
            solver: SolverKind::Auto,
            tolerances: Tolerances::defaults(),
            seed: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Command-line overrides applied on top of a file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub n_waves: Option<u32>,
    pub grid: Option<(usize, usize)>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Parse `NPHIxNTHETA`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("grid \"{s}\" is not of the form NPHIxNTHETA")))?;
    let p = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("grid \"{s}\" is not of the form NPHIxNTHETA")))
    };
    Ok((p(a)?, p(b)?))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(e) = o.epsilon {
            self.census_epsilon = e;
        }
        if let Some(n) = o.n_waves {
            self.params.n_waves = Some(n);
            if o.grid.is_none() {
                self.grid.n_theta = None;
            }
        }
        if let Some((a, b)) = o.grid {
            self.grid.n_phi = a;
            self.grid.n_theta = Some(b);
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        self.validate()
    }

    /// Checks that need no construction; `resolve` completes the rest.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let base = TorusParams::standard(self.params.major_radius, self.params.tube_radius)?;
        self.profile.validate(&base)?;
        for &e in self.epsilon_list.iter().chain([&self.census_epsilon]) {
            base.with_epsilon(e)?;
        }
        if self.epsilon_list.len() < 2 {
            return Err(Error::Config("epsilon_list needs at least two entries".into()));
        }
        if !(self.continuation_step > 0.0) {
            return Err(Error::Config("continuation_step must be positive".into()));
        }
        if self.operator_grids.len() < 2 || self.operator_grids.iter().any(|&g| g < 16 || g % 2 != 0) {
            return Err(Error::Config("operator_grids needs at least two even sizes >= 16".into()));
        }
        if self.perturbation_points < 16 || self.perturbation_points % 2 != 0 {
            return Err(Error::Config("perturbation_points must be even and at least 16".into()));
        }
        if self.probe.seeds == 0 || !(self.probe.t_end > 0.0) || !(self.probe.dt_factor > 0.0) {
            return Err(Error::Config("probe needs seeds >= 1, t_end > 0 and dt_factor > 0".into()));
        }
        if let Some(dt) = self.probe.dt {
            if !(dt > 0.0) {
                return Err(Error::Config("probe dt must be positive".into()));
            }
        }
        if self.limits.newton_max_iter == 0 || self.limits.eigen_max_iter == 0 || self.limits.census_max_refine == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if let Some(n) = self.params.n_waves {
            if n == 0 {
                return Err(Error::Config("n_waves must be at least 1".into()));
            }
            if let Some(nt) = self.grid.n_theta {
                PeriodicGrid::new(self.grid.n_phi, nt)?.check_params(&base.with_waves(n)?.with_epsilon(self.census_epsilon)?)?;
            }
        }
        Ok(())
    }

    /// Torus with waves and the grid, given the threshold from construction.
    pub fn resolve(&self, threshold_n: u32) -> Result<(TorusParams, PeriodicGrid)> {
        let n = self.params.n_waves.unwrap_or(threshold_n.max(4));
        let params = TorusParams::standard(self.params.major_radius, self.params.tube_radius)?.with_waves(n)?;
        let nt = self
            .grid
            .n_theta
            .unwrap_or_else(|| PeriodicGrid::auto_theta(n, self.grid.min_theta));
        let grid = PeriodicGrid::new(self.grid.n_phi, nt)?;
        grid.check_params(&params.with_epsilon(self.census_epsilon)?)?;
        Ok((params, grid))
    }
}
