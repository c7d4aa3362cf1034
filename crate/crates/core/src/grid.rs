//! Uniform doubly periodic grid on the angle square and fields sampled on it.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::geometry::TorusParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    pub n_phi: usize,
    pub n_theta: usize,
}

impl PeriodicGrid {
    pub fn new(n_phi: usize, n_theta: usize) -> Result<Self> {
        for (name, n) in [("n_phi", n_phi), ("n_theta", n_theta)] {
            if n < 16 || n % 2 != 0 {
                return Err(Error::Grid(format!("{name} = {n} must be even and >= 16")));
            }
        }
        Ok(PeriodicGrid { n_phi, n_theta })
    }

    /// Check the reflection-plane invariant for a perturbed torus.
    pub fn check_params(&self, params: &TorusParams) -> Result<()> {
        let q = 4 * params.n_waves as usize;
        if params.epsilon != 0.0 && self.n_theta % q != 0 {
            return Err(Error::Grid(format!(
                "n_theta = {} must be divisible by 4 n = {q}",
                self.n_theta
            )));
        }
        Ok(())
    }

    /// Smallest multiple of `4 n` that is at least `min_theta`.
    pub fn auto_theta(n_waves: u32, min_theta: usize) -> usize {
        let q = 4 * n_waves as usize;
        min_theta.div_ceil(q) * q
    }

    pub fn h_phi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn h_theta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    pub fn phi(&self, i: usize) -> f64 {
        i as f64 * self.h_phi()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_theta()
    }

    pub fn len(&self) -> usize {
        self.n_phi * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn ip(&self, i: usize) -> usize {
        if i + 1 == self.n_phi { 0 } else { i + 1 }
    }

    pub fn im(&self, i: usize) -> usize {
        if i == 0 { self.n_phi - 1 } else { i - 1 }
    }

    pub fn jp(&self, j: usize) -> usize {
        if j + 1 == self.n_theta { 0 } else { j + 1 }
    }

    pub fn jm(&self, j: usize) -> usize {
        if j == 0 { self.n_theta - 1 } else { j - 1 }
    }

    pub fn doubled(&self) -> Self {
        PeriodicGrid {
            n_phi: 2 * self.n_phi,
            n_theta: 2 * self.n_theta,
        }
    }

    /// Row index of `phi = pi`.
    pub fn pi_row(&self) -> usize {
        self.n_phi / 2
    }
}

/// Row-major (phi, then theta) table of finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: PeriodicGrid,
    pub values: Vec<f64>,
}

pub const BINARY_MAGIC: &[u8; 4] = b"TPF1";

impl ScalarField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: (grid.n_phi, grid.n_theta),
                got: (values.len(), 1),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite field value".into()));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_phi {
            let phi = grid.phi(i);
            for j in 0..grid.n_theta {
                values.push(f(phi, grid.theta(j)));
            }
        }
        ScalarField { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check_shape(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape {
                expected: (self.grid.n_phi, self.grid.n_theta),
                got: (other.grid.n_phi, other.grid.n_theta),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn axpy(&self, a: f64, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Max-norm distance.
    pub fn dist_inf(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi,theta,value")?;
        for i in 0..self.grid.n_phi {
            for j in 0..self.grid.n_theta {
                writeln!(w, "{:e},{:e},{:e}", self.grid.phi(i), self.grid.theta(j), self.at(i, j))?;
            }
        }
        Ok(())
    }

    /// Reads a CSV dump; the grid is inferred from the distinct angles.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "phi,theta,value" => {}
            _ => return Err(Error::Format("missing header phi,theta,value".into())),
        }
        let mut values = Vec::new();
        let mut n_theta = 0usize;
        let mut first_phi = None;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Format(format!("bad row: {line}")));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{e}: {s}")))
            };
            let phi = parse(cols[0])?;
            if first_phi.is_none() {
                first_phi = Some(phi);
            }
            if Some(phi) == first_phi {
                n_theta += 1;
            }
            values.push(parse(cols[2])?);
        }
        if n_theta == 0 || values.len() % n_theta != 0 {
            return Err(Error::Format("ragged field table".into()));
        }
        let grid = PeriodicGrid::new(values.len() / n_theta, n_theta)?;
        ScalarField::from_values(grid, values)
    }

    /// 16-byte header (`TPF1`, n_phi u32 LE, n_theta u32 LE, 4 reserved zero bytes)
    /// followed by f64 LE values in row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.grid.n_phi as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n_theta as u32).to_le_bytes())?;
        w.write_all(&[0u8; 4])?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[0..4] != BINARY_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let n_phi = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let n_theta = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let grid = PeriodicGrid::new(n_phi, n_theta)?;
        let mut buf = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        ScalarField::from_values(grid, values)
    }
}
