//! Preconditioned Runge-Kutta and additive-W multigrid smoothers for
//! compressible flow: a discrete Fourier analysis engine for the linearized
//! 2D Euler equations with the JST scheme, and a small nonlinear
//! finite-volume FAS multigrid solver to validate the predictions.

pub mod config;
pub mod error;
pub mod euler;
pub mod lfa;
pub mod linalg;
pub mod precond;
pub mod smoothers;
pub mod solver;
pub mod symbols;
pub mod tables;

pub use error::{Error, Result};
