use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmatrix::{expectations, DensityMatrix, Effect};

/// Labels attached to the training effects; one tag per set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labels {
    /// Estimates of `Tr(E_i ρ)`.
    Probability(Vec<f64>),
    /// Single-shot outcomes.
    Bit(Vec<bool>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Probability(p) => p.len(),
            Labels::Bit(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Label `i` as a number in `[0, 1]`.
    pub fn value(&self, i: usize) -> f64 {
        match self {
            Labels::Probability(p) => p[i],
            Labels::Bit(b) => f64::from(u8::from(b[i])),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Labels::Probability(_) => "probability",
            Labels::Bit(_) => "bit",
        }
    }
}

/// `m` effects paired with labels, all acting on a `dim`-dimensional space.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TrainingFields", into = "TrainingFields")]
pub struct TrainingSet {
    dim: usize,
    effects: Vec<Effect>,
    labels: Labels,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingFields {
    dim: usize,
    effects: Vec<Effect>,
    labels: Labels,
}

impl TryFrom<TrainingFields> for TrainingSet {
    type Error = Error;

    fn try_from(f: TrainingFields) -> Result<Self> {
        TrainingSet::new(f.dim, f.effects, f.labels)
    }
}

impl From<TrainingSet> for TrainingFields {
    fn from(t: TrainingSet) -> Self {
        TrainingFields {
            dim: t.dim,
            effects: t.effects,
            labels: t.labels,
        }
    }
}

impl TrainingSet {
    pub fn new(dim: usize, effects: Vec<Effect>, labels: Labels) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation(
                "training set dimension must be at least 1",
            ));
        }
        if effects.len() != labels.len() {
            return Err(Error::validation(format!(
                "training set has {} effects but {} labels",
                effects.len(),
                labels.len()
            )));
        }
        for e in &effects {
            Error::check_dim(dim, e.dim())?;
        }
        if let Labels::Probability(p) = &labels {
            if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::validation(format!(
                    "probability label {bad} is outside [0, 1]"
                )));
            }
        }
        Ok(TrainingSet {
            dim,
            effects,
            labels,
        })
    }

    pub fn probabilities(dim: usize, effects: Vec<Effect>, p: Vec<f64>) -> Result<Self> {
        Self::new(dim, effects, Labels::Probability(p))
    }

    pub fn bits(dim: usize, effects: Vec<Effect>, b: Vec<bool>) -> Result<Self> {
        Self::new(dim, effects, Labels::Bit(b))
    }

    /// Labels `p_i = Tr(E_i ρ)` exactly.
    pub fn exact(effects: Vec<Effect>, state: &DensityMatrix) -> Result<Self> {
        let p = effects
            .iter()
            .map(|e| crate::qmatrix::expectation(e, state))
            .collect::<Result<Vec<_>>>()?;
        Self::probabilities(state.dim(), effects, p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    /// Largest `|Tr(E_i σ) − label_i|`; 0 for an empty set.
    pub fn max_residual(&self, sigma: &DensityMatrix) -> Result<f64> {
        Error::check_dim(self.dim, sigma.dim())?;
        let predicted = expectations(&self.effects, sigma)?;
        Ok(predicted
            .iter()
            .enumerate()
            .map(|(i, p)| (p - self.labels.value(i)).abs())
            .fold(0.0, f64::max))
    }
}
