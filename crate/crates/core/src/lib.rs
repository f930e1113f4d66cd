//! Linearized and nonlinear MHD in the half plane with a horizontal
//! background field: dispersion relation, resolvent, inverse Laplace
//! evaluation, a time-stepping solver and decay-rate fitting.

pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod resolvent;
pub mod acceptance;
pub mod cli;
pub mod config;
pub mod decay;
pub mod dispersion;
pub mod ibvp;
pub mod inverse_laplace;
pub mod spectral;

pub use error::{Error, Result};
