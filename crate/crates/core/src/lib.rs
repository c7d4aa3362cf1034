//! Stable reaction-diffusion patterns on the standard torus and on tori with
//! a wavy tube radius.
//!
//! The pipeline forges a nonlinearity `f` from a monotone profile so that the
//! profile is a stationary solution of `u_t = Δu + f(u)` on the standard torus,
//! follows that solution onto perturbed tori by Newton continuation, and checks
//! stability, the first-order perturbation structure and the critical points
//! of the perturbed pattern.

pub mod census;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod jet;
pub mod linalg;
pub mod newton;
pub mod nonlinearity;
pub mod operator;
pub mod perturbation;
pub mod pipeline;
pub mod profile;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::TorusParams;
pub use grid::{PeriodicGrid, ScalarField};
pub use nonlinearity::Nonlinearity;
pub use operator::{assemble_laplacian, DiscreteOperator};
pub use profile::{Profile, ProfileConfig, ProfileFamily};
