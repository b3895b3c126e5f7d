use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::solver::{
    merge_terms, projected_gradient_minimize, LearnerConfig, MeasurementLoss, Minimized, Objective,
    Penalty, StopReason,
};
use crate::learner::training::{Labels, TrainingSet};
use crate::qmatrix::{hermitian_eig, DensityMatrix, HermitianMatrix, SpectrahedronProjector};

/// The feasibility search aims at `η·(1 − FEASIBILITY_MARGIN)` so that its
/// iterates reach the `η` box in finitely many steps instead of approaching it
/// from outside.
pub const FEASIBILITY_MARGIN: f64 = 0.1;

/// Loss at or below which the feasibility loss counts as zero.
pub const ZERO_LOSS: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnedHypothesis {
    pub sigma: DensityMatrix,
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
    /// The training set was empty and `sigma` is the initial state.
    pub vacuous: bool,
    pub stop: StopReason,
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

fn require_probabilities(train: &TrainingSet) -> Result<&[f64]> {
    match train.labels() {
        Labels::Probability(p) => Ok(p),
        other => Err(Error::validation(format!(
            "this learner needs probability labels, got {} labels",
            other.tag()
        ))),
    }
}

fn require_bits(train: &TrainingSet) -> Result<&[bool]> {
    match train.labels() {
        Labels::Bit(b) => Ok(b),
        other => Err(Error::validation(format!(
            "this learner needs bit labels, got {} labels",
            other.tag()
        ))),
    }
}

fn vacuous(
    train: &TrainingSet,
    config: &LearnerConfig,
    converged: bool,
) -> Result<LearnedHypothesis> {
    Ok(LearnedHypothesis {
        sigma: config.initial_state(train.dim())?,
        final_loss: 0.0,
        iterations: 0,
        converged,
        max_residual: 0.0,
        vacuous: true,
        stop: StopReason::Tolerance,
        loss_history: vec![0.0],
    })
}

/// Finds `σ` with `|Tr(E_i σ) − p_i| ≤ η` for every training pair by driving
/// `Σ_i max(0, |Tr(E_i σ) − p_i| − η)²` to zero.
///
/// `converged` is set when every residual is within `η` (equivalently, the
/// loss is zero). An empty training set is vacuously satisfied by the initial
/// state.
pub fn learn_feasible(train: &TrainingSet, config: &LearnerConfig) -> Result<LearnedHypothesis> {
    config.validate()?;
    let p = require_probabilities(train)?;
    if train.is_empty() {
        return vacuous(train, config, true);
    }
    let eta = config.eta;
    let pairs = || train.effects().iter().zip(p.iter().copied());
    let search = MeasurementLoss::new(
        train.dim(),
        merge_terms(pairs()),
        Penalty::SquaredHinge {
            slack: eta * (1.0 - FEASIBILITY_MARGIN),
        },
    )
    .accept_within(eta);
    // below this loss every excess is within the margin, so all residuals are within η
    let search_config = LearnerConfig {
        tol: config.tol.min(0.5 * (FEASIBILITY_MARGIN * eta).powi(2)),
        ..config.clone()
    };
    let run = projected_gradient_minimize(&search, &search_config)?;

    let reported = MeasurementLoss::new(
        train.dim(),
        merge_terms(pairs()),
        Penalty::SquaredHinge { slack: eta },
    );
    let final_loss = reported.value(&run.sigma);
    let max_residual = train.max_residual(&run.sigma)?;
    let converged = max_residual <= eta || final_loss <= ZERO_LOSS;
    Ok(wrap(run, final_loss, max_residual, converged))
}

/// Minimizes `Σ_i (Tr(E_i σ) − b_i)²` over single-shot bits.
pub fn learn_quadratic(train: &TrainingSet, config: &LearnerConfig) -> Result<LearnedHypothesis> {
    config.validate()?;
    let b = require_bits(train)?;
    if train.is_empty() {
        return vacuous(train, config, false);
    }
    let terms = merge_terms(
        train
            .effects()
            .iter()
            .zip(b.iter().map(|&x| f64::from(u8::from(x)))),
    );
    let loss = MeasurementLoss::new(train.dim(), terms, Penalty::Squared);
    let run = projected_gradient_minimize(&loss, config)?;
    let max_residual = train.max_residual(&run.sigma)?;
    let converged = run.converged();
    let final_loss = run.final_loss;
    Ok(wrap(run, final_loss, max_residual, converged))
}

fn wrap(run: Minimized, final_loss: f64, max_residual: f64, converged: bool) -> LearnedHypothesis {
    LearnedHypothesis {
        sigma: run.sigma,
        final_loss,
        iterations: run.iterations,
        converged,
        max_residual,
        vacuous: false,
        stop: run.stop,
        loss_history: run.history,
    }
}

/// `Σ_i |Tr(E_i σ) − b_i|` and one subgradient.
fn absolute_loss(train: &TrainingSet, b: &[bool], sigma: &DensityMatrix) -> (f64, HermitianMatrix) {
    let mut value = 0.0;
    let mut grad = HermitianMatrix::zeros(train.dim());
    for (e, &bit) in train.effects().iter().zip(b) {
        let r = e.matrix().trace_product(sigma.matrix()) - f64::from(u8::from(bit));
        value += r.abs();
        // a subgradient of |r| at r = 0 is anything in [-1, 1]; pick the label's side
        let s = if r > 0.0 || (r == 0.0 && !bit) {
            1.0
        } else {
            -1.0
        };
        grad.add_scaled_in_place(s, e.matrix());
    }
    (value, grad)
}

/// Minimizes `Σ_i |Tr(E_i σ) − b_i|` by projected subgradient steps of length
/// `step_init/√t` along the normalized subgradient, keeping the best iterate.
///
/// Every subgradient `g` at `σ_t` gives the lower bound
/// `f* ≥ f(σ_t) + λ_min(g) − Tr(g σ_t)`; the run stops once the best value is
/// within `tol` (relative) of the best lower bound, and reports `converged`.
pub fn learn_absolute(train: &TrainingSet, config: &LearnerConfig) -> Result<LearnedHypothesis> {
    config.validate()?;
    let b = require_bits(train)?;
    if train.is_empty() {
        return vacuous(train, config, false);
    }
    let mut projector = SpectrahedronProjector::default();
    let mut sigma = config.initial_state(train.dim())?;
    let (mut value, mut grad) = absolute_loss(train, b, &sigma);
    let mut best = (sigma.clone(), value);
    let mut lower = f64::NEG_INFINITY;
    let mut history = vec![value];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIters;

    while iterations < config.max_iters {
        let gnorm = grad.frobenius_norm();
        if gnorm == 0.0 {
            stop = StopReason::Stationary;
            break;
        }
        let lambda_min = hermitian_eig(&grad)?.values[0];
        lower = lower.max(value + lambda_min - grad.trace_product(sigma.matrix()));
        if best.1 - lower <= config.tol * best.1.abs().max(1.0) {
            stop = StopReason::Tolerance;
            break;
        }
        iterations += 1;
        let step = config.step_init / (iterations as f64).sqrt();
        let mut trial = sigma.matrix().clone();
        trial.add_scaled_in_place(-step / gnorm, &grad);
        sigma = projector.project(&trial)?;
        (value, grad) = absolute_loss(train, b, &sigma);
        if !value.is_finite() {
            return Err(Error::numerical("absolute loss became non-finite"));
        }
        if value < best.1 {
            best = (sigma.clone(), value);
        }
        history.push(best.1);
    }

    let (sigma, final_loss) = best;
    let max_residual = train.max_residual(&sigma)?;
    Ok(LearnedHypothesis {
        sigma,
        final_loss,
        iterations,
        converged: stop != StopReason::MaxIters,
        max_residual,
        vacuous: false,
        stop,
        loss_history: history,
    })
}

/// Exact minimizer of the absolute loss for bit labels.
///
/// With bits, `|Tr(Eσ) − b|` is linear in `σ`, so the loss equals
/// `#{b_i = 1} + Tr(σ·Σ_i (1 − 2b_i) E_i)` and is minimized by the pure state on
/// the principal eigenvector of `Σ_i (2b_i − 1) E_i`.
pub fn principal_eigenvector_hypothesis(train: &TrainingSet) -> Result<DensityMatrix> {
    let b = require_bits(train)?;
    if train.is_empty() {
        return Ok(DensityMatrix::maximally_mixed(train.dim()));
    }
    let mut m = HermitianMatrix::zeros(train.dim());
    for (e, &bit) in train.effects().iter().zip(b) {
        m.add_scaled_in_place(if bit { 1.0 } else { -1.0 }, e.matrix());
    }
    let eig = hermitian_eig(&m)?;
    let top = eig.vectors.column(train.dim() - 1);
    DensityMatrix::pure(&top)
}
