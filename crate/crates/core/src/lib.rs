//! Ecological inference on aggregate election returns.
//!
//! Given per-precinct marginals (electors per age bracket, votes per
//! option) the estimators recover the bracket × option probability matrix.
//! The same machinery estimates round-to-round transfer matrices and
//! party × referendum cross-tabulations.

pub mod analyses;
pub mod error;
pub mod estimators;
pub mod io;
pub mod model;
pub mod synth;

pub use error::{Error, Result};
