//! States, measurement distributions, and measurement data.

mod rng;
mod sampling;
mod source;

pub use rng::RngStream;
pub(crate) use sampling::bernoulli;
pub use sampling::{
    copies_for_accuracy, estimate_probability, reduce_k_outcome, sample_mixed_state,
    sample_outcome, sample_pure_state,
};
pub use source::{pauli, pauli_effect, pauli_string, MeasurementSource, SourceKind, MAX_QUBITS};
