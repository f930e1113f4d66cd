//! Grids, fields, horizontal transforms, x₂ differences, norms and the
//! Helmholtz projection.

pub mod deriv;
pub mod field;
pub mod grid;
pub mod norms;
pub mod project;

pub use deriv::Diff2;
pub use field::{
    d1_modes, d2_modes, derivative_x1, derivative_x2, derivative_x2_profile, fft_x1, ifft_x1, ModeProfile, ModeStack,
    ScalarField, VectorField,
};
pub use grid::{Grid, GridSpec};
pub use norms::{mixed_derivative, norm, NormSpec};
pub use project::{divergence, divergence_norm_interior, helmholtz_project, helmholtz_project_with_potential};
