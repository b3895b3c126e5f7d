use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmatrix::{DensityMatrix, Effect, HermitianMatrix, SpectrahedronProjector};

/// Stop when one accepted step improves the loss by less than this fraction.
pub const RELATIVE_IMPROVEMENT_STOP: f64 = 1e-9;
const MAX_HALVINGS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    /// Feasibility slack: accept `σ` with every `|Tr(E_i σ) − p_i| ≤ eta`.
    pub eta: f64,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_state: Option<DensityMatrix>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            eta: 0.01,
            max_iters: 5000,
            step_init: 1.0,
            tol: 1e-10,
            init_state: None,
        }
    }
}

impl LearnerConfig {
    pub fn with_eta(eta: f64) -> Self {
        LearnerConfig {
            eta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::validation("max_iters must be at least 1"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::validation("tol must be positive"));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::validation("step_init must be positive and finite"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::validation("eta must be finite and nonnegative"));
        }
        Ok(())
    }

    pub(crate) fn initial_state(&self, dim: usize) -> Result<DensityMatrix> {
        match &self.init_state {
            Some(s) => {
                Error::check_dim(dim, s.dim())?;
                Ok(s.clone())
            }
            None => Ok(DensityMatrix::maximally_mixed(dim)),
        }
    }
}

/// A differentiable functional over density matrices.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, sigma: &DensityMatrix) -> f64;

    /// Value and Hermitian gradient.
    fn value_and_gradient(&self, sigma: &DensityMatrix) -> (f64, HermitianMatrix);

    /// Early exit once `sigma` is good enough for the caller's purpose.
    fn satisfied(&self, _sigma: &DensityMatrix) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    Satisfied,
    Stalled,
    Stationary,
    MaxIters,
}

/// Result of [`projected_gradient_minimize`]; the learners wrap it into a
/// [`super::LearnedHypothesis`].
#[derive(Clone, Debug)]
pub struct Minimized {
    pub sigma: DensityMatrix,
    pub final_loss: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Loss after each accepted step, starting with the initial loss.
    pub history: Vec<f64>,
}

impl Minimized {
    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIters
    }
}

/// Accelerated projected gradient descent over the trace-one PSD matrices.
///
/// Momentum follows the convex-combination scheme `y = (1−θ)x + θz`,
/// `z ← Π(z − (t/θ)∇f(y))`, `x ← (1−θ)x + θz`, so every point stays a density
/// matrix. The step `t` is halved until `f(x⁺) ≤ f(y) + ⟨∇f(y), x⁺−y⟩ + ‖x⁺−y‖²/(2t)`;
/// the next trial starts at twice the last accepted one, capped at `step_init`.
/// A step that would raise the loss resets the momentum and the step (`θ = 1`,
/// `t = step_init`, a plain projected gradient step), so the loss history
/// never increases.
pub fn projected_gradient_minimize(
    objective: &dyn Objective,
    config: &LearnerConfig,
) -> Result<Minimized> {
    config.validate()?;
    let mut x = config.initial_state(objective.dim())?;
    let mut projector = SpectrahedronProjector::default();
    let (mut loss, mut grad) = objective.value_and_gradient(&x);
    check_finite(loss, &grad)?;
    let mut history = vec![loss];
    let mut step = config.step_init;
    let mut iterations = 0;
    let mut z = x.clone();
    let mut theta: f64 = 1.0;

    let stop = loop {
        if loss <= config.tol {
            break StopReason::Tolerance;
        }
        if objective.satisfied(&x) {
            break StopReason::Satisfied;
        }
        if iterations == config.max_iters {
            break StopReason::MaxIters;
        }

        let momentum = theta < 1.0;
        let (y, fy, gy) = if momentum {
            let y = blend(&x, &z, theta);
            let (fy, gy) = objective.value_and_gradient(&y);
            check_finite(fy, &gy)?;
            (y, fy, gy)
        } else {
            (x.clone(), loss, grad.clone())
        };

        let mut t = step;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = z.matrix().clone();
            trial.add_scaled_in_place(-t / theta, &gy);
            let z_next = projector.project(&trial)?;
            let x_next = blend(&x, &z_next, theta);
            let delta = x_next.matrix().sub(y.matrix());
            let moved = delta.frobenius_norm();
            if moved == 0.0 {
                break;
            }
            let next_loss = objective.value(&x_next);
            if !next_loss.is_finite() {
                return Err(Error::numerical("loss became non-finite"));
            }
            if next_loss <= fy + gy.trace_product(&delta) + moved * moved / (2.0 * t) {
                accepted = Some((z_next, x_next, next_loss));
                break;
            }
            t *= 0.5;
        }

        let (z_next, x_next, next_loss) = match accepted {
            Some(a) if a.2 <= loss => a,
            _ if momentum => {
                theta = 1.0;
                z = x.clone();
                step = config.step_init;
                continue;
            }
            _ => break StopReason::Stationary,
        };
        iterations += 1;
        step = (2.0 * t).min(config.step_init);
        let improvement = (loss - next_loss) / loss.max(f64::MIN_POSITIVE);
        x = x_next;
        z = z_next;
        (loss, grad) = objective.value_and_gradient(&x);
        check_finite(loss, &grad)?;
        history.push(loss);
        if improvement < RELATIVE_IMPROVEMENT_STOP {
            break StopReason::Stalled;
        }
        let t2 = theta * theta;
        theta = 0.5 * ((t2 * t2 + 4.0 * t2).sqrt() - t2);
    };

    Ok(Minimized {
        sigma: x,
        final_loss: loss,
        iterations,
        stop,
        history,
    })
}

/// `(1−θ)·x + θ·z`, a density matrix for `θ ∈ [0, 1]`.
fn blend(x: &DensityMatrix, z: &DensityMatrix, theta: f64) -> DensityMatrix {
    if theta == 1.0 {
        return z.clone();
    }
    let mut m = x.matrix().scale(1.0 - theta);
    m.add_scaled_in_place(theta, z.matrix());
    DensityMatrix::new_unchecked(m)
}

fn check_finite(loss: f64, grad: &HermitianMatrix) -> Result<()> {
    if !loss.is_finite() || !grad.frobenius_norm().is_finite() {
        return Err(Error::numerical("loss or gradient is not finite"));
    }
    Ok(())
}

/// Per-measurement penalty `φ(Tr(Eσ) − target)`.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Penalty {
    /// `max(0, |r| − slack)²`
    SquaredHinge { slack: f64 },
    /// `r²`
    Squared,
}

impl Penalty {
    fn value(self, r: f64) -> f64 {
        match self {
            Penalty::SquaredHinge { slack } => {
                let excess = (r.abs() - slack).max(0.0);
                excess * excess
            }
            Penalty::Squared => r * r,
        }
    }

    fn derivative(self, r: f64) -> f64 {
        match self {
            Penalty::SquaredHinge { slack } => 2.0 * r.signum() * (r.abs() - slack).max(0.0),
            Penalty::Squared => 2.0 * r,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub effect: Effect,
    pub target: f64,
    pub multiplicity: f64,
    /// Diagonal of `effect` when it has no off-diagonal entries.
    diagonal: Option<Vec<f64>>,
}

impl Term {
    fn trace_with(&self, sigma: &DensityMatrix) -> f64 {
        match &self.diagonal {
            Some(d) => d
                .iter()
                .enumerate()
                .map(|(k, x)| x * sigma.matrix().get(k, k).re)
                .sum(),
            None => self.effect.matrix().trace_product(sigma.matrix()),
        }
    }

    fn add_to(&self, grad: &mut HermitianMatrix, s: f64) {
        match &self.diagonal {
            Some(d) => grad.add_diagonal_in_place(s, d),
            None => grad.add_scaled_in_place(s, self.effect.matrix()),
        }
    }
}

/// Merge repeated `(effect instance, target)` pairs, keeping first-seen order.
pub(crate) fn merge_terms<'a>(pairs: impl Iterator<Item = (&'a Effect, f64)>) -> Vec<Term> {
    let mut index: HashMap<(usize, u64), usize> = HashMap::new();
    let mut terms: Vec<Term> = Vec::new();
    for (effect, target) in pairs {
        let key = (effect.instance_key(), target.to_bits());
        match index.get(&key) {
            Some(&i) => terms[i].multiplicity += 1.0,
            None => {
                index.insert(key, terms.len());
                let m = effect.matrix();
                terms.push(Term {
                    effect: effect.clone(),
                    target,
                    multiplicity: 1.0,
                    diagonal: m.is_diagonal().then(|| m.diagonal_values()),
                });
            }
        }
    }
    terms
}

/// `Σ_i φ(Tr(E_i σ) − target_i)` over a training set.
pub(crate) struct MeasurementLoss {
    dim: usize,
    terms: Vec<Term>,
    penalty: Penalty,
    /// When set, `satisfied` holds once every residual is within this bound.
    accept_within: Option<f64>,
}

impl MeasurementLoss {
    pub fn new(dim: usize, terms: Vec<Term>, penalty: Penalty) -> Self {
        MeasurementLoss {
            dim,
            terms,
            penalty,
            accept_within: None,
        }
    }

    pub fn accept_within(mut self, bound: f64) -> Self {
        self.accept_within = Some(bound);
        self
    }
}

impl Objective for MeasurementLoss {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, sigma: &DensityMatrix) -> f64 {
        self.terms
            .iter()
            .map(|t| t.multiplicity * self.penalty.value(t.trace_with(sigma) - t.target))
            .sum()
    }

    fn value_and_gradient(&self, sigma: &DensityMatrix) -> (f64, HermitianMatrix) {
        let mut value = 0.0;
        let mut grad = HermitianMatrix::zeros(self.dim);
        for t in &self.terms {
            let r = t.trace_with(sigma) - t.target;
            value += t.multiplicity * self.penalty.value(r);
            let d = t.multiplicity * self.penalty.derivative(r);
            if d != 0.0 {
                t.add_to(&mut grad, d);
            }
        }
        (value, grad)
    }

    fn satisfied(&self, sigma: &DensityMatrix) -> bool {
        let Some(bound) = self.accept_within else {
            return false;
        };
        self.terms
            .iter()
            .all(|t| (t.trace_with(sigma) - t.target).abs() <= bound)
    }
}
