//! Spectral laboratory for the resolvent problem of a linearized compressible
//! free-surface flow in a half space.
//!
//! The crate evaluates the closed-form Fourier symbols of the problem, solves
//! it per tangential Fourier mode, and checks the resulting solutions, symbol
//! bounds and semigroup behaviour numerically.

pub mod error;
pub mod grid;
pub mod halfspace;
pub mod params;
pub mod symbols;
pub mod verification;
pub mod evolution;
pub mod bent;
pub mod io;
pub mod cli;

pub use error::{LabError, Result};
