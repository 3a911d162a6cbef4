//! Siegel–Radon and Zak transforms on aperiodic point sets.
//!
//! The crate builds cut-and-project sets, random unimodular lattices and
//! Heisenberg approximate lattices, evaluates (twisted) Siegel transforms on
//! them and checks the mean-value, duality and isometry identities by
//! Monte Carlo and quadrature. Each capability has a runnable program under
//! `examples/`.

pub mod azak;
pub mod cli;
pub mod cps;
pub mod eigen;
pub mod error;
pub mod heisenberg;
pub mod lattice2d;
pub mod numerics;
pub mod siegel;

pub use error::{Error, Result};

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
