use rand::Rng;

use crate::ensembles::bernoulli;
use crate::error::{Error, Result};
use crate::qmatrix::{DensityMatrix, Effect, HermitianMatrix, Instrument};

/// Probability that at least one of `effects`, applied in order to `rho` with
/// the `√E` update, rejects. Exact: `1 − Tr(√E_m⋯√E_1 ρ √E_1⋯√E_m)`.
pub fn sequential_survival(rho: &DensityMatrix, effects: &[Effect]) -> Result<f64> {
    let mut state: HermitianMatrix = rho.matrix().clone();
    for e in effects {
        Error::check_dim(rho.dim(), e.dim())?;
        state = Instrument::new(e)?.apply_unnormalized(&state, true);
    }
    Ok((1.0 - state.trace()).clamp(0.0, 1.0))
}

/// Monte Carlo estimate of [`sequential_survival`] from `trials` trajectories.
pub fn sequential_survival_sampled<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    effects: &[Effect],
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let instruments = effects
        .iter()
        .map(|e| {
            Error::check_dim(rho.dim(), e.dim())?;
            Instrument::new(e)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures = 0usize;
    for _ in 0..trials {
        let mut state = rho.clone();
        for inst in &instruments {
            let p = inst.probability(&state, true)?;
            if !bernoulli(p, rng) {
                failures += 1;
                break;
            }
            state = inst.measure(&state, true)?.1;
        }
    }
    Ok(failures as f64 / trials as f64)
}
