//! Self-exciting point processes: kernels, simulation, likelihood fitting and
//! cascade size prediction.

pub mod cascade_io;
pub mod error;
pub mod inference;
pub mod kernels;
pub mod poisson;
pub mod prediction;
pub mod process;
pub mod rng;
pub mod simulation;
pub mod stats;
pub mod verify;

pub use error::{HawkesError, Result};
