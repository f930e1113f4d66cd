//! Time-domain solver for the linearized and nonlinear perturbation systems
//! on the truncated half plane.
//!
//! Velocity and magnetic perturbations are carried per Fourier mode as
//! stream functions, u = (∂₂ψ, −∂₁ψ) and b = (∂₂φ, −∂₁φ), so both fields are
//! discretely divergence-free by construction and the pressure never enters
//! the update.

mod checkpoint;
mod init;
mod run;
mod solver;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointMeta};
pub use init::{check_compatibility, make_initial_data, CompatibilityReport, FieldRelation, InitSpec};
pub use run::{run, RunOptions, RunOutput, WallSample};
pub use solver::{Solver, SolverStats};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub div_tol: f64,
    /// Steps between monitor samples.
    pub monitor_stride: usize,
    /// Apply the 2/3 rule to the nonlinear products.
    pub dealias: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 0.05, scheme: Scheme::Linear, cfl_safety: 0.5, div_tol: 1e-10, monitor_stride: 10, dealias: true }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("solver.dt", "must be positive"));
        }
        if !(self.cfl_safety > 0.0) {
            return Err(Error::config("solver.cfl_safety", "must be positive"));
        }
        if !(self.div_tol > 0.0) {
            return Err(Error::config("solver.div_tol", "must be positive"));
        }
        if self.monitor_stride == 0 {
            return Err(Error::config("solver.monitor_stride", "must be at least 1"));
        }
        Ok(())
    }
}

/// Physical fields at one time.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: VectorField,
    pub b: VectorField,
    /// Present only when requested from the solver.
    pub p: Option<ScalarField>,
}

impl State {
    pub fn zeros(grid: &std::sync::Arc<crate::spectral::Grid>) -> Self {
        Self { t: 0.0, u: VectorField::zeros(grid), b: VectorField::zeros(grid), p: None }
    }
}

#[cfg(test)]
mod tests;
