//! Sample-complexity and dimension bounds.
//!
//! All logarithms are natural. Upper bounds are rounded up, lower bounds down.
//! `k` is the unspecified leading constant and is always echoed back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningModel {
    ProbabilityLabels,
    MeasureOnce,
    Prediction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundQuery {
    pub n_qubits: u32,
    pub gamma: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub eta: f64,
    pub delta: f64,
    #[serde(default = "default_k", rename = "K", alias = "k")]
    pub k: f64,
    #[serde(default = "default_model")]
    pub model: LearningModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn default_k() -> f64 {
    1.0
}

fn default_model() -> LearningModel {
    LearningModel::ProbabilityLabels
}

impl BoundQuery {
    pub fn new(n_qubits: u32, gamma: f64, epsilon: f64, eta: f64, delta: f64) -> Self {
        BoundQuery {
            n_qubits,
            gamma,
            epsilon,
            eta,
            delta,
            k: 1.0,
            model: LearningModel::ProbabilityLabels,
            alpha: None,
        }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_model(mut self, model: LearningModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    fn check_common(&self) -> Result<()> {
        open_unit("gamma", self.gamma)?;
        open_unit("epsilon", self.epsilon)?;
        open_unit("delta", self.delta)?;
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::validation(format!(
                "eta must be in [0, 1), got {}",
                self.eta
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::validation(format!(
                "K must be positive and finite, got {}",
                self.k
            )));
        }
        if self.n_qubits == 0 {
            return Err(Error::validation("n_qubits must be at least 1"));
        }
        Ok(())
    }
}

fn open_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::validation(format!(
            "{name} must be in (0, 1), got {x}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub m: u64,
    /// Formula value before rounding.
    pub value: f64,
    pub formula_id: String,
    pub inputs: BoundQuery,
}

pub mod formula {
    pub const UPPER_FEASIBILITY: &str = "upper_feasibility";
    pub const UPPER_FEASIBILITY_IMPROVED: &str = "upper_feasibility_improved";
    pub const UPPER_MEASURE_ONCE: &str = "upper_measure_once";
    pub const UPPER_PREDICTION: &str = "upper_prediction";
    pub const LOWER_PROBABILITY_LABELS: &str = "lower_probability_labels";
    pub const LOWER_MEASURE_ONCE: &str = "lower_measure_once";
}

fn to_count(value: f64, round: fn(f64) -> f64) -> Result<u64> {
    let r = round(value);
    // 2^64 is exactly representable; anything at or above it does not fit
    if !r.is_finite() || r >= 18_446_744_073_709_551_616.0 {
        return Err(Error::numerical(format!(
            "bound {value:e} does not fit in 64 bits"
        )));
    }
    Ok(r.max(0.0) as u64)
}

fn upper(value: f64, id: &str, q: &BoundQuery) -> Result<BoundResult> {
    Ok(BoundResult {
        m: to_count(value, f64::ceil)?,
        value,
        formula_id: id.to_owned(),
        inputs: *q,
    })
}

/// `K/(γ²ε²)·(n/(γ²ε²)·ln²(1/(γε)) + ln(1/δ))`, valid when `γε ≥ 7η`.
pub fn m_upper_qoccam(q: &BoundQuery) -> Result<BoundResult> {
    q.check_common()?;
    let ge = q.gamma * q.epsilon;
    if ge < 7.0 * q.eta {
        return Err(Error::Constraint {
            constraint: "γε ≥ 7η",
            detail: format!("γε = {ge} but 7η = {}", 7.0 * q.eta),
        });
    }
    let a = ge * ge;
    let l = (1.0 / ge).ln();
    let value = q.k / a * (q.n_qubits as f64 / a * l * l + (1.0 / q.delta).ln());
    upper(value, formula::UPPER_FEASIBILITY, q)
}

/// `K/ε·(n/(γ−η)²·ln²(n/((γ−η)ε)) + ln(1/δ))`, valid when `γ > η`.
pub fn m_upper_qoccam2(q: &BoundQuery) -> Result<BoundResult> {
    q.check_common()?;
    let gap = q.gamma - q.eta;
    if gap <= 0.0 {
        return Err(Error::Constraint {
            constraint: "γ > η",
            detail: format!("γ = {} and η = {}", q.gamma, q.eta),
        });
    }
    let n = q.n_qubits as f64;
    let l = (n / (gap * q.epsilon)).ln();
    let value = q.k / q.epsilon * (n / (gap * gap) * l * l + (1.0 / q.delta).ln());
    upper(value, formula::UPPER_FEASIBILITY_IMPROVED, q)
}

/// `K/(γ⁴ε²)·(n/(γ⁴ε²)·ln²(1/(γε)) + ln(1/δ))`.
pub fn m_upper_measure_once(q: &BoundQuery) -> Result<BoundResult> {
    q.check_common()?;
    let a = q.gamma.powi(4) * q.epsilon * q.epsilon;
    let l = (1.0 / (q.gamma * q.epsilon)).ln();
    let value = q.k / a * (q.n_qubits as f64 / a * l * l + (1.0 / q.delta).ln());
    upper(value, formula::UPPER_MEASURE_ONCE, q)
}

/// `K/α²·(n/α²·ln²(1/α) + ln(1/δ))` for `α ∈ (0, 1]`.
pub fn m_upper_prediction(q: &BoundQuery) -> Result<BoundResult> {
    open_unit("delta", q.delta)?;
    if q.n_qubits == 0 {
        return Err(Error::validation("n_qubits must be at least 1"));
    }
    if !(q.k > 0.0 && q.k.is_finite()) {
        return Err(Error::validation(format!(
            "K must be positive and finite, got {}",
            q.k
        )));
    }
    let alpha = q
        .alpha
        .ok_or_else(|| Error::validation("the prediction bound needs alpha"))?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::validation(format!(
            "alpha must be in (0, 1], got {alpha}"
        )));
    }
    let a = alpha * alpha;
    let l = (1.0 / alpha).ln();
    let value = q.k / a * (q.n_qubits as f64 / a * l * l + (1.0 / q.delta).ln());
    upper(value, formula::UPPER_PREDICTION, q)
}

/// `K/ε·(n/γ^c + ln(1/δ))` with `c = 2` for probability labels and `c = 4`
/// for single-shot bits, rounded down.
pub fn m_lower(q: &BoundQuery) -> Result<BoundResult> {
    q.check_common()?;
    let (c, id) = match q.model {
        LearningModel::ProbabilityLabels => (2, formula::LOWER_PROBABILITY_LABELS),
        LearningModel::MeasureOnce => (4, formula::LOWER_MEASURE_ONCE),
        LearningModel::Prediction => {
            return Err(Error::validation(
                "no lower bound is available for the prediction model",
            ))
        }
    };
    let value = q.k / q.epsilon * (q.n_qubits as f64 / q.gamma.powi(c) + (1.0 / q.delta).ln());
    Ok(BoundResult {
        m: to_count(value, f64::floor)?,
        value,
        formula_id: id.to_owned(),
        inputs: *q,
    })
}

/// `⌊n·ln2/(2γ²)⌋` for `γ ∈ (0, ½]`.
pub fn fat_dim_upper(n: u32, gamma: f64) -> Result<u64> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(Error::validation(format!(
            "gamma must be in (0, 1/2], got {gamma}"
        )));
    }
    to_count(
        n as f64 * std::f64::consts::LN_2 / (2.0 * gamma * gamma),
        f64::floor,
    )
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(format!("p must be in [0, 1], got {p}")));
    }
    let h = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    Ok(h(p) + h(1.0 - p))
}

/// `4^n`, the number of real parameters of an `n`-qubit density matrix.
pub fn tomography_param_count(n: u32) -> Result<u64> {
    if n > 31 {
        return Err(Error::validation(format!(
            "4^{n} overflows 64 bits (n must be at most 31)"
        )));
    }
    Ok(1u64 << (2 * n))
}

/// Cartesian parameter grid evaluated by the `bounds` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundGrid {
    pub n_qubits: Vec<u32>,
    pub gamma: Vec<f64>,
    pub epsilon: Vec<f64>,
    #[serde(default = "zero_list")]
    pub eta: Vec<f64>,
    pub delta: Vec<f64>,
    #[serde(default = "one_list", rename = "K", alias = "k")]
    pub k: Vec<f64>,
    /// Formula ids to evaluate; all when absent.
    #[serde(default)]
    pub formulas: Option<Vec<String>>,
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

fn one_list() -> Vec<f64> {
    vec![1.0]
}

/// Grid formulas; the prediction bound is parameterized by `α` and is not part
/// of the grid.
pub const GRID_FORMULAS: [&str; 5] = [
    formula::UPPER_FEASIBILITY,
    formula::UPPER_FEASIBILITY_IMPROVED,
    formula::UPPER_MEASURE_ONCE,
    formula::LOWER_PROBABILITY_LABELS,
    formula::LOWER_MEASURE_ONCE,
];

pub const CSV_HEADER: &str = "formula_id,n,gamma,epsilon,eta,delta,K,m";

impl BoundResult {
    pub fn csv_row(&self) -> String {
        let q = &self.inputs;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.formula_id, q.n_qubits, q.gamma, q.epsilon, q.eta, q.delta, q.k, self.m
        )
    }
}

/// Outcome of one grid point for one formula.
#[derive(Debug)]
pub struct GridEntry {
    pub formula_id: &'static str,
    pub query: BoundQuery,
    pub result: Result<BoundResult>,
}

impl BoundGrid {
    pub fn evaluate(&self) -> Result<Vec<GridEntry>> {
        let selected: Vec<&'static str> = match &self.formulas {
            None => GRID_FORMULAS.to_vec(),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    GRID_FORMULAS
                        .iter()
                        .copied()
                        .find(|f| f == id)
                        .ok_or_else(|| {
                            Error::validation(format!(
                                "unknown formula id {id:?}; expected one of {}",
                                GRID_FORMULAS.join(", ")
                            ))
                        })
                })
                .collect::<Result<_>>()?,
        };
        let mut out = Vec::new();
        for &id in &selected {
            for &n in &self.n_qubits {
                for &gamma in &self.gamma {
                    for &epsilon in &self.epsilon {
                        for &eta in &self.eta {
                            for &delta in &self.delta {
                                for &k in &self.k {
                                    let q =
                                        BoundQuery::new(n, gamma, epsilon, eta, delta).with_k(k);
                                    out.push(GridEntry {
                                        formula_id: id,
                                        query: q,
                                        result: evaluate_formula(id, q),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn evaluate_formula(id: &str, q: BoundQuery) -> Result<BoundResult> {
    match id {
        formula::UPPER_FEASIBILITY => m_upper_qoccam(&q),
        formula::UPPER_FEASIBILITY_IMPROVED => m_upper_qoccam2(&q),
        formula::UPPER_MEASURE_ONCE => m_upper_measure_once(&q),
        formula::LOWER_PROBABILITY_LABELS => {
            m_lower(&q.with_model(LearningModel::ProbabilityLabels))
        }
        formula::LOWER_MEASURE_ONCE => m_lower(&q.with_model(LearningModel::MeasureOnce)),
        other => Err(Error::validation(format!("unknown formula id {other:?}"))),
    }
}
