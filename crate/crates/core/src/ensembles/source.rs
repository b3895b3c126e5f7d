use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::sampling::{gaussian_hermitian, haar_unitary, orthonormal_columns};
use crate::error::{Error, Result};
use crate::qmatrix::{hermitian_eig, Complex64, Effect, HermitianMatrix};

pub const MAX_QUBITS: usize = 10;

/// Which distribution over effects to draw from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceKind {
    /// Rank-`rank` projector onto a Haar-random subspace.
    HaarProjector { rank: usize },
    /// `(I + P)/2` for a uniformly random non-identity Pauli string `P`.
    PauliLocal,
    /// `U·diag(u)·U†`, `u_i ~ U[0,1]`, `U` Haar.
    Spectral,
    /// Weighted choice from a fixed list.
    FiniteList {
        effects: Vec<Effect>,
        weights: Vec<f64>,
    },
    /// Draw from `inner`, add a Gaussian Hermitian perturbation of size
    /// `noise_scale`, clamp the spectrum back into `[0, 1]`.
    Noisy {
        inner: Box<SourceKind>,
        noise_scale: f64,
    },
}

/// A sampleable distribution `D` over two-outcome measurements on `n_qubits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SourceFields", into = "SourceFields")]
pub struct MeasurementSource {
    n_qubits: usize,
    kind: SourceKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceFields {
    n_qubits: usize,
    kind: SourceKind,
}

impl TryFrom<SourceFields> for MeasurementSource {
    type Error = Error;

    fn try_from(f: SourceFields) -> Result<Self> {
        MeasurementSource::new(f.n_qubits, f.kind)
    }
}

impl From<MeasurementSource> for SourceFields {
    fn from(s: MeasurementSource) -> Self {
        SourceFields {
            n_qubits: s.n_qubits,
            kind: s.kind,
        }
    }
}

impl MeasurementSource {
    pub fn new(n_qubits: usize, kind: SourceKind) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::validation(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        validate_kind(n_qubits, &kind)?;
        Ok(MeasurementSource { n_qubits, kind })
    }

    pub fn haar_projector(n_qubits: usize, rank: usize) -> Result<Self> {
        Self::new(n_qubits, SourceKind::HaarProjector { rank })
    }

    pub fn pauli_local(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, SourceKind::PauliLocal)
    }

    pub fn spectral(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, SourceKind::Spectral)
    }

    pub fn finite_list(effects: Vec<Effect>, weights: Vec<f64>) -> Result<Self> {
        let dim = effects.first().map(Effect::dim).unwrap_or(0);
        let n_qubits = crate::qmatrix::qubits_for_dim(dim).ok_or_else(|| {
            Error::validation("finite_list effects must have a power-of-two dimension")
        })?;
        Self::new(n_qubits, SourceKind::FiniteList { effects, weights })
    }

    /// Uniform weights over `effects`.
    pub fn uniform_list(effects: Vec<Effect>) -> Result<Self> {
        let w = 1.0 / effects.len().max(1) as f64;
        let weights = vec![w; effects.len()];
        Self::finite_list(effects, weights)
    }

    pub fn noisy(inner: MeasurementSource, noise_scale: f64) -> Result<Self> {
        Self::new(
            inner.n_qubits,
            SourceKind::Noisy {
                inner: Box::new(inner.kind),
                noise_scale,
            },
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    /// Weighted support when the distribution is finite.
    pub fn support(&self) -> Option<Vec<(f64, Effect)>> {
        match &self.kind {
            SourceKind::FiniteList { effects, weights } => Some(
                weights
                    .iter()
                    .copied()
                    .zip(effects.iter().cloned())
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Effect> {
        sample_kind(self.n_qubits, &self.kind, rng)
    }
}

fn validate_kind(n_qubits: usize, kind: &SourceKind) -> Result<()> {
    let dim = 1usize << n_qubits;
    match kind {
        SourceKind::HaarProjector { rank } => {
            if !(1..=dim).contains(rank) {
                return Err(Error::validation(format!(
                    "haar_projector rank must be in 1..={dim}, got {rank}"
                )));
            }
        }
        SourceKind::PauliLocal | SourceKind::Spectral => {}
        SourceKind::FiniteList { effects, weights } => {
            if effects.is_empty() {
                return Err(Error::validation("finite_list needs at least one effect"));
            }
            if effects.len() != weights.len() {
                return Err(Error::validation(format!(
                    "finite_list has {} effects but {} weights",
                    effects.len(),
                    weights.len()
                )));
            }
            for e in effects {
                Error::check_dim(dim, e.dim())?;
            }
            if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
                return Err(Error::validation("finite_list weights must be nonnegative"));
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::validation(format!(
                    "finite_list weights sum to {total}, expected 1"
                )));
            }
        }
        SourceKind::Noisy { inner, noise_scale } => {
            if !(*noise_scale >= 0.0 && noise_scale.is_finite()) {
                return Err(Error::validation(
                    "noise_scale must be finite and nonnegative",
                ));
            }
            validate_kind(n_qubits, inner)?;
        }
    }
    Ok(())
}

fn sample_kind<R: Rng + ?Sized>(n_qubits: usize, kind: &SourceKind, rng: &mut R) -> Result<Effect> {
    let dim = 1usize << n_qubits;
    match kind {
        SourceKind::HaarProjector { rank } => {
            let q = orthonormal_columns(dim, *rank, rng);
            let mut weights = vec![0.0; dim];
            weights[..*rank].fill(1.0);
            Ok(Effect::new_unchecked(
                HermitianMatrix::weighted_projector_sum(&q, &weights),
            ))
        }
        SourceKind::PauliLocal => {
            let strings = 1u64 << (2 * n_qubits);
            let index = rng.gen_range(1..strings);
            Ok(pauli_effect(n_qubits, index))
        }
        SourceKind::Spectral => {
            let u = haar_unitary(dim, rng);
            let spectrum: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            Ok(Effect::new_unchecked(
                HermitianMatrix::weighted_projector_sum(&u, &spectrum),
            ))
        }
        SourceKind::FiniteList { effects, weights } => {
            let pick = WeightedIndex::new(weights)
                .map_err(|e| Error::validation(format!("finite_list weights: {e}")))?;
            Ok(effects[pick.sample(rng)].clone())
        }
        SourceKind::Noisy { inner, noise_scale } => {
            let clean = sample_kind(n_qubits, inner, rng)?;
            if *noise_scale == 0.0 {
                return Ok(clean);
            }
            let noise = gaussian_hermitian(dim, rng);
            let perturbed = clean.matrix().add(&noise.scale(*noise_scale));
            let eig = hermitian_eig(&perturbed)?;
            Ok(Effect::new_unchecked(eig.reassemble(|l| l.clamp(0.0, 1.0))))
        }
    }
}

/// Single-qubit Pauli by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(which: u8) -> HermitianMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let rows = match which {
        0 => [[one, z], [z, one]],
        1 => [[z, one], [one, z]],
        2 => [[z, -i], [i, z]],
        3 => [[one, z], [z, -one]],
        _ => panic!("Pauli index must be 0..=3"),
    };
    HermitianMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()])
        .expect("Pauli matrices are Hermitian")
}

/// Pauli string from base-4 digits of `index`, most significant digit on qubit 0.
pub fn pauli_string(n_qubits: usize, index: u64) -> HermitianMatrix {
    let mut out = HermitianMatrix::identity(1);
    for q in 0..n_qubits {
        let digit = ((index >> (2 * (n_qubits - 1 - q))) & 3) as u8;
        out = out.kron(&pauli(digit));
    }
    out
}

/// Projector `(I + P)/2` onto the +1 eigenspace of a Pauli string.
pub fn pauli_effect(n_qubits: usize, index: u64) -> Effect {
    let p = pauli_string(n_qubits, index);
    let dim = p.dim();
    Effect::new_unchecked(HermitianMatrix::identity(dim).add(&p).scale(0.5))
}
