use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::MeasurementSource;
use crate::error::{Error, Result};
use crate::qmatrix::{expectation, DensityMatrix, Effect};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics {
    /// Mean probability that outcomes drawn independently from `σ` and `ρ` differ.
    pub mean_delta: f64,
    pub agreement: f64,
    /// Best achievable success when predicting a single outcome of `ρ`.
    pub guess_rule_success: f64,
}

/// `Δ_{σ,ρ}(E) = Tr(Eσ)(1 − Tr(Eρ)) + (1 − Tr(Eσ))Tr(Eρ)`.
pub fn prediction_delta(e: &Effect, sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    let s = expectation(e, sigma)?;
    let r = expectation(e, rho)?;
    Ok(s * (1.0 - r) + (1.0 - s) * r)
}

fn check_pair(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    source: &MeasurementSource,
) -> Result<()> {
    Error::check_dim(rho.dim(), sigma.dim())?;
    Error::check_dim(source.dim(), rho.dim())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::validation(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(())
}

fn deviates(e: &Effect, sigma: &DensityMatrix, rho: &DensityMatrix, gamma: f64) -> Result<bool> {
    Ok((expectation(e, sigma)? - expectation(e, rho)?).abs() > gamma)
}

/// Fraction of `n_test` fresh effects with `|Tr(Eσ) − Tr(Eρ)| > γ`.
pub fn evaluate_generalization<R: Rng + ?Sized>(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    source: &MeasurementSource,
    gamma: f64,
    n_test: usize,
    rng: &mut R,
) -> Result<f64> {
    check_pair(sigma, rho, source)?;
    check_gamma(gamma)?;
    if n_test == 0 {
        return Err(Error::validation("n_test must be at least 1"));
    }
    let mut bad = 0usize;
    for _ in 0..n_test {
        if deviates(&source.sample(rng)?, sigma, rho, gamma)? {
            bad += 1;
        }
    }
    Ok(bad as f64 / n_test as f64)
}

/// Exact `Pr_{E∈D}[|Tr(Eσ) − Tr(Eρ)| > γ]` for a finite source.
pub fn generalization_error_exact(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    source: &MeasurementSource,
    gamma: f64,
) -> Result<f64> {
    check_pair(sigma, rho, source)?;
    check_gamma(gamma)?;
    let support = source
        .support()
        .ok_or_else(|| Error::validation("exact evaluation needs a finite_list source"))?;
    let mut total = 0.0;
    for (w, e) in &support {
        if deviates(e, sigma, rho, gamma)? {
            total += w;
        }
    }
    Ok(total.min(1.0))
}

fn metrics_from(mean_delta: f64, guess: f64) -> PredictionMetrics {
    let mean_delta = mean_delta.clamp(0.0, 1.0);
    PredictionMetrics {
        mean_delta,
        agreement: 1.0 - mean_delta,
        guess_rule_success: guess.clamp(0.0, 1.0),
    }
}

fn guess_success(e: &Effect, rho: &DensityMatrix) -> Result<f64> {
    let r = expectation(e, rho)?;
    Ok(0.5 * (1.0 + (2.0 * r - 1.0).abs()))
}

pub fn prediction_metrics<R: Rng + ?Sized>(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    source: &MeasurementSource,
    n_test: usize,
    rng: &mut R,
) -> Result<PredictionMetrics> {
    check_pair(sigma, rho, source)?;
    if n_test == 0 {
        return Err(Error::validation("n_test must be at least 1"));
    }
    let (mut delta, mut guess) = (0.0, 0.0);
    for _ in 0..n_test {
        let e = source.sample(rng)?;
        delta += prediction_delta(&e, sigma, rho)?;
        guess += guess_success(&e, rho)?;
    }
    Ok(metrics_from(delta / n_test as f64, guess / n_test as f64))
}

/// Closed-form weighted sums over a finite source.
pub fn prediction_metrics_exact(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    source: &MeasurementSource,
) -> Result<PredictionMetrics> {
    check_pair(sigma, rho, source)?;
    let support = source
        .support()
        .ok_or_else(|| Error::validation("exact evaluation needs a finite_list source"))?;
    let (mut delta, mut guess) = (0.0, 0.0);
    for (w, e) in &support {
        delta += w * prediction_delta(e, sigma, rho)?;
        guess += w * guess_success(e, rho)?;
    }
    Ok(metrics_from(delta, guess))
}
