//! Random matrix laboratory: Gaussian ensembles, spectral measures, determinantal
//! kernels, Dyson-type particle systems, mean-field Stieltjes flows and log-gas energies.

pub mod cli;
pub mod dyson;
pub mod ensembles;
pub mod error;
pub mod kernels;
pub mod ldp;
pub mod meanfield;
pub mod measures;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version string embedded in every CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
