//! Dense complex Hermitian linear algebra and the quantum objects built on it.

mod eigen;
mod matrix;
mod measure;
mod simplex;
mod state;

pub use eigen::{hermitian_eig, hermitian_eig_from, Eigen};
pub use matrix::{CMatrix, HermitianMatrix, MatrixLiteral};
pub use measure::{post_measurement_state, Instrument};
pub use num_complex::Complex64;
pub use simplex::simplex_project;
pub use state::{
    expectation, expectations, project_to_density, psd_sqrt, DensityMatrix, Effect,
    SpectrahedronProjector,
};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Entrywise Hermiticity check on construction.
    pub const HERMITIAN: f64 = 1e-12;
    /// Spectrum and trace checks for states and effects.
    pub const VALIDATION: f64 = 1e-9;
    /// Reconstruction accuracy expected from the eigensolver.
    pub const RECONSTRUCTION: f64 = 1e-10;
    /// Branches with probability at or below this are treated as impossible.
    pub const BRANCH: f64 = 1e-12;
    /// Off-diagonal Frobenius norm at which Jacobi sweeps stop (relative for large matrices).
    pub const JACOBI_OFF_DIAGONAL: f64 = 1e-12;
    pub const JACOBI_MAX_SWEEPS: usize = 100;
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}
