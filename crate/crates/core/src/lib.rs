//! Simulation of small stabilizer codes under bare, flagged and Shor-style
//! syndrome extraction, with subset-sampled logical error rates.

pub mod analysis;
pub mod circuits;
pub mod codes;
pub mod decoder;
pub mod engine;
pub mod error;
pub mod gf2;
pub mod noise;
pub mod pauli;
pub mod runner;

pub use error::{Error, Result};
