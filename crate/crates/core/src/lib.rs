//! Persistent homology of scalar time series through delay embeddings and
//! persistent Dirac operators, with a classical exact reduction to check
//! against.

pub mod classical;
pub mod complex;
pub mod dirac;
pub mod embedding;
pub mod error;
pub mod ingest;
pub mod oracles;
pub mod persistence;

pub use error::{Error, Result};
