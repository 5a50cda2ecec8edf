//! Simulation and verification toolkit for mixed SDEs driven by Brownian
//! motion and fractional Brownian motion with Hurst index in `(1/2, 1)`.

pub mod analysis;
pub mod coeffs;
pub mod error;
pub mod fraccalc;
pub mod grid;
pub mod par;
pub mod paths;
pub mod quad;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{SampledPath, TimeGrid};
pub use par::Execution;
