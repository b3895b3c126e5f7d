use crate::error::{Error, Result};
use crate::qmatrix::eigen::hermitian_eig;
use crate::qmatrix::matrix::HermitianMatrix;
use crate::qmatrix::state::{clamp_probability, DensityMatrix, Effect};
use crate::qmatrix::tol;

/// Kraus pair `(√E, √(I−E))` realizing a two-outcome measurement.
#[derive(Clone, Debug)]
pub struct Instrument {
    effect: Effect,
    accept: HermitianMatrix,
    reject: HermitianMatrix,
}

impl Instrument {
    pub fn new(effect: &Effect) -> Result<Self> {
        let h = effect.matrix();
        let (accept, reject) = if h.is_diagonal() {
            let d = h.diagonal_values();
            let acc: Vec<f64> = d.iter().map(|&x| x.clamp(0.0, 1.0).sqrt()).collect();
            let rej: Vec<f64> = d
                .iter()
                .map(|&x| (1.0 - x).clamp(0.0, 1.0).sqrt())
                .collect();
            (
                HermitianMatrix::diagonal(&acc),
                HermitianMatrix::diagonal(&rej),
            )
        } else {
            let eig = hermitian_eig(h)?;
            (
                eig.reassemble(|l| l.clamp(0.0, 1.0).sqrt()),
                eig.reassemble(|l| (1.0 - l).clamp(0.0, 1.0).sqrt()),
            )
        };
        Ok(Instrument {
            effect: effect.clone(),
            accept,
            reject,
        })
    }

    pub fn effect(&self) -> &Effect {
        &self.effect
    }

    pub fn kraus(&self, outcome: bool) -> &HermitianMatrix {
        if outcome {
            &self.accept
        } else {
            &self.reject
        }
    }

    /// Probability of `outcome` on `state`.
    pub fn probability(&self, state: &DensityMatrix, outcome: bool) -> Result<f64> {
        Error::check_dim(self.effect.dim(), state.dim())?;
        let p = clamp_probability(self.effect.matrix().trace_product(state.matrix()))?;
        Ok(if outcome { p } else { 1.0 - p })
    }

    /// Unnormalized branch `K·ρ·K` for the Kraus operator of `outcome`.
    pub fn apply_unnormalized(&self, state: &HermitianMatrix, outcome: bool) -> HermitianMatrix {
        state.sandwich(self.kraus(outcome))
    }

    /// `(probability, normalized post-measurement state)` for `outcome`.
    pub fn measure(&self, state: &DensityMatrix, outcome: bool) -> Result<(f64, DensityMatrix)> {
        let p = self.probability(state, outcome)?;
        if p <= tol::BRANCH {
            return Err(Error::DegenerateBranch { probability: p });
        }
        let post = self
            .apply_unnormalized(state.matrix(), outcome)
            .scale(1.0 / p);
        Ok((p, DensityMatrix::new_unchecked(post)))
    }
}

/// State update after observing `outcome` of the two-outcome measurement `{E, I−E}`.
pub fn post_measurement_state(
    state: &DensityMatrix,
    effect: &Effect,
    outcome: bool,
) -> Result<(f64, DensityMatrix)> {
    Error::check_dim(state.dim(), effect.dim())?;
    Instrument::new(effect)?.measure(state, outcome)
}
