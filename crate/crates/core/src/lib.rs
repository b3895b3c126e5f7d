//! Learning quantum states from few two-outcome measurements.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod learner;
pub mod protocols;
pub mod qmatrix;

pub use error::{Error, Result};
