//! Single-excitation dynamics of a one-dimensional chirally coupled emitter
//! array with a clean zone next to a disordered zone.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod evolve;
pub mod model;
pub mod observables;
pub mod output;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
