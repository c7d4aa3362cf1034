//! Output files and the on-disk cache of steady states.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::newton::SteadyState;
use crate::nonlinearity::Nonlinearity;
use crate::profile::Profile;

/// Overrides the cache directory (default `<output_dir>/cache`).
pub const CACHE_ENV: &str = "TORUS_LAB_CACHE";

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes a CSV with the given header; each row is formatted with `{:e}`.
pub fn write_table(path: &Path, header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `phi,u,du,d2u` on the profile's samples.
pub fn write_profile_csv(path: &Path, profile: &Profile) -> Result<()> {
    write_table(
        path,
        "phi,u,du,d2u",
        profile.samples.iter().map(|s| vec![s.phi, s.u, s.du, s.d2u]),
    )
}

/// `s,f,fprime` at the knots.
pub fn write_nonlinearity_csv(path: &Path, nl: &Nonlinearity) -> Result<()> {
    write_table(
        path,
        "s,f,fprime",
        (0..nl.s.len()).map(|k| vec![nl.s[k], nl.f[k], nl.fprime[k]]),
    )
}

/// Field as `<stem>.bin` and `<stem>.csv`.
pub fn write_field(dir: &Path, stem: &str, field: &ScalarField) -> Result<()> {
    write_with(&dir.join(format!("{stem}.bin")), |w| field.write_binary(w))?;
    write_with(&dir.join(format!("{stem}.csv")), |w| field.write_csv(w))
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    ScalarField::read_binary(BufReader::new(File::open(path)?))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of the exact bit patterns of a field.
pub fn field_digest(field: &ScalarField) -> String {
    let mut bytes = Vec::with_capacity(8 * field.values.len() + 8);
    bytes.extend_from_slice(&(field.grid.n_phi as u32).to_le_bytes());
    bytes.extend_from_slice(&(field.grid.n_theta as u32).to_le_bytes());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    sha256_hex(&bytes)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CacheMeta {
    key: String,
    residual_norm: f64,
    newton_iters: usize,
    history: Vec<f64>,
}

/// Steady states keyed by a digest of everything that determines them.
#[derive(Clone, Debug)]
pub struct Cache {
    pub dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir }
    }

    /// `$TORUS_LAB_CACHE` if set and non-empty, else `<output_dir>/cache`.
    pub fn locate(output_dir: &Path) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Cache::new(PathBuf::from(d)),
            _ => Cache::new(output_dir.join("cache")),
        }
    }

    pub fn key(description: &impl Serialize) -> String {
        let text = serde_json::to_string(description).expect("cache key serializes");
        sha256_hex(text.as_bytes())
    }

    pub fn load(&self, key: &str, params: &crate::geometry::TorusParams) -> Option<SteadyState> {
        let meta: CacheMeta = read_json(&self.dir.join(format!("{key}.json"))).ok()?;
        if meta.key != key {
            return None;
        }
        let field = read_field(&self.dir.join(format!("{key}.bin"))).ok()?;
        Some(SteadyState {
            field,
            residual_norm: meta.residual_norm,
            params: *params,
            newton_iters: meta.newton_iters,
            history: meta.history,
        })
    }

    /// Best effort: a cache that cannot be written is skipped.
    pub fn store(&self, key: &str, state: &SteadyState) {
        let meta = CacheMeta {
            key: key.to_string(),
            residual_norm: state.residual_norm,
            newton_iters: state.newton_iters,
            history: state.history.clone(),
        };
        let bin = self.dir.join(format!("{key}.bin"));
        let ok = write_with(&bin, |w| state.field.write_binary(w)).is_ok();
        if ok {
            let _ = write_json(&self.dir.join(format!("{key}.json")), &meta);
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))
}
