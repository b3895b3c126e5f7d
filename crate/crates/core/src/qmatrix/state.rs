use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmatrix::eigen::{hermitian_eig, hermitian_eig_from, Eigen};
use crate::qmatrix::matrix::{CMatrix, HermitianMatrix};
use crate::qmatrix::simplex::simplex_project;
use crate::qmatrix::tol;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianMatrix", into = "HermitianMatrix")]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        check_density(&h)?;
        Ok(DensityMatrix(h))
    }

    /// Caller guarantees the invariants (e.g. the matrix was built as `AA†/Tr`).
    pub(crate) fn new_unchecked(h: HermitianMatrix) -> Self {
        DensityMatrix(h)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(HermitianMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Pure state `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::validation(
                "pure state vector must be nonzero and finite",
            ));
        }
        Ok(DensityMatrix(
            HermitianMatrix::outer(psi).scale(1.0 / norm2),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0)
    }

    /// `self ⊗ other`
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kron(&other.0))
    }

    /// Re-checks all invariants; used by property tests.
    pub fn validate(&self) -> Result<()> {
        check_density(&self.0)
    }
}

impl TryFrom<HermitianMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(h: HermitianMatrix) -> Result<Self> {
        DensityMatrix::new(h)
    }
}

impl From<DensityMatrix> for HermitianMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.0
    }
}

fn check_density(h: &HermitianMatrix) -> Result<()> {
    let trace = h.trace();
    if (trace - 1.0).abs() > tol::VALIDATION {
        return Err(Error::validation(format!(
            "density matrix trace is {trace}, expected 1"
        )));
    }
    let min = min_eigenvalue(h)?;
    if min < -tol::VALIDATION {
        return Err(Error::validation(format!(
            "density matrix has negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

fn min_eigenvalue(h: &HermitianMatrix) -> Result<f64> {
    if h.is_diagonal() {
        return Ok(h
            .diagonal_values()
            .into_iter()
            .fold(f64::INFINITY, f64::min));
    }
    Ok(hermitian_eig(h)?.values[0])
}

fn max_eigenvalue(h: &HermitianMatrix) -> Result<f64> {
    if h.is_diagonal() {
        return Ok(h
            .diagonal_values()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(*hermitian_eig(h)?.values.last().expect("dim >= 1"))
}

/// Two-outcome measurement element: Hermitian with spectrum in `[0, 1]`.
///
/// Cloning is cheap; clones share the underlying matrix, which the learner
/// uses to merge repeated draws of the same effect.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "HermitianMatrix", into = "HermitianMatrix")]
pub struct Effect(Arc<HermitianMatrix>);

impl Effect {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let lo = min_eigenvalue(&h)?;
        let hi = max_eigenvalue(&h)?;
        if lo < -tol::VALIDATION || hi > 1.0 + tol::VALIDATION {
            return Err(Error::validation(format!(
                "effect spectrum [{lo}, {hi}] is outside [0, 1]"
            )));
        }
        Ok(Effect(Arc::new(h)))
    }

    pub(crate) fn new_unchecked(h: HermitianMatrix) -> Self {
        Effect(Arc::new(h))
    }

    pub fn identity(dim: usize) -> Self {
        Effect::new_unchecked(HermitianMatrix::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Effect::new_unchecked(HermitianMatrix::zeros(dim))
    }

    /// Projector onto the normalized `psi`.
    pub fn projector(psi: &[num_complex::Complex64]) -> Result<Self> {
        Ok(Effect::new_unchecked(DensityMatrix::pure(psi)?.0))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    /// The other outcome, `I - E`.
    pub fn complement(&self) -> Effect {
        Effect::new_unchecked(self.0.complement())
    }

    pub fn kron(&self, other: &Effect) -> Effect {
        Effect::new_unchecked(self.0.kron(&other.0))
    }

    pub fn same_instance(&self, other: &Effect) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn instance_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        Effect::new((*self.0).clone()).map(|_| ())
    }
}

impl PartialEq for Effect {
    fn eq(&self, other: &Self) -> bool {
        self.same_instance(other) || *self.0 == *other.0
    }
}

impl TryFrom<HermitianMatrix> for Effect {
    type Error = Error;

    fn try_from(h: HermitianMatrix) -> Result<Self> {
        Effect::new(h)
    }
}

impl From<Effect> for HermitianMatrix {
    fn from(e: Effect) -> Self {
        Arc::unwrap_or_clone(e.0)
    }
}

/// `Tr(Eρ)`, clamped into `[0, 1]` when within tolerance outside it.
pub fn expectation(effect: &Effect, state: &DensityMatrix) -> Result<f64> {
    Error::check_dim(state.dim(), effect.dim())?;
    let p = effect.matrix().trace_product(state.matrix());
    clamp_probability(p)
}

/// `Tr(E_i ρ)` for every effect, evaluating each shared instance once.
pub fn expectations(effects: &[Effect], state: &DensityMatrix) -> Result<Vec<f64>> {
    let mut seen: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
    effects
        .iter()
        .map(|e| match seen.get(&e.instance_key()) {
            Some(&p) => Ok(p),
            None => {
                let p = expectation(e, state)?;
                seen.insert(e.instance_key(), p);
                Ok(p)
            }
        })
        .collect()
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || !(-tol::VALIDATION..=1.0 + tol::VALIDATION).contains(&p) {
        return Err(Error::numerical(format!(
            "probability {p} is outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Frobenius-nearest density matrix: eigendecompose, project the spectrum onto
/// the simplex, reassemble.
pub fn project_to_density(h: &HermitianMatrix) -> Result<DensityMatrix> {
    SpectrahedronProjector::default().project(h)
}

/// Projection onto the density matrices that reuses the previous eigenbasis as
/// a starting point, for iterative solvers whose iterates move slowly.
#[derive(Clone, Debug, Default)]
pub struct SpectrahedronProjector {
    basis: Option<CMatrix>,
}

impl SpectrahedronProjector {
    pub fn project(&mut self, h: &HermitianMatrix) -> Result<DensityMatrix> {
        if h.is_diagonal() {
            let spectrum = simplex_project(&h.diagonal_values())?;
            return Ok(DensityMatrix(HermitianMatrix::diagonal(&spectrum)));
        }
        let eig = match &self.basis {
            Some(b) if b.dim() == h.dim() => hermitian_eig_from(h, b)?,
            _ => hermitian_eig(h)?,
        };
        let spectrum = simplex_project(&eig.values)?;
        let out = HermitianMatrix::weighted_projector_sum(&eig.vectors, &spectrum);
        self.basis = Some(eig.vectors);
        Ok(DensityMatrix(out))
    }
}

/// PSD square root of an effect. Eigenvalues within tolerance below zero are clamped.
pub fn psd_sqrt(effect: &Effect) -> Result<HermitianMatrix> {
    let h = effect.matrix();
    if h.is_diagonal() {
        let d: Vec<f64> = h
            .diagonal_values()
            .iter()
            .map(|&x| x.max(0.0).sqrt())
            .collect();
        return Ok(HermitianMatrix::diagonal(&d));
    }
    let eig: Eigen = hermitian_eig(h)?;
    Ok(eig.reassemble(|l| l.max(0.0).sqrt()))
}
