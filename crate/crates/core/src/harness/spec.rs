use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensembles::{SourceKind, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Qubit budget of the adaptive experiment, `rounds · n_qubits`.
pub const ADAPTIVE_QUBIT_BUDGET: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GeneralizationSweep,
    MeasureOnceSweep,
    Adaptive,
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Pure,
    Mixed {
        rank: usize,
    },
    HardInstance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LabelSpec {
    /// `p_i = Tr(E_i ρ)`.
    Exact,
    /// Frequencies over `copies` copies, or over the Hoeffding count for
    /// `(m, η, δ)` when `copies` is absent.
    Estimated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        copies: Option<usize>,
        #[serde(default = "default_label_delta")]
        delta: f64,
    },
}

fn default_label_delta() -> f64 {
    0.01
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerRule {
    Feasible,
    Quadratic,
    Absolute,
}

/// Boolean function of the outcomes `z_1 … z_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BooleanFunction {
    Parity,
    And,
    Or,
    /// `z_1`.
    First,
    Constant(bool),
    /// Entry `z` for outcomes packed as `z = Σ_j z_j 2^{r−1−j}`.
    TruthTable(Vec<bool>),
}

impl BooleanFunction {
    pub fn eval(&self, z: &[bool]) -> bool {
        match self {
            BooleanFunction::Parity => z.iter().filter(|&&b| b).count() % 2 == 1,
            BooleanFunction::And => z.iter().all(|&b| b),
            BooleanFunction::Or => z.iter().any(|&b| b),
            BooleanFunction::First => z.first().copied().unwrap_or(false),
            BooleanFunction::Constant(c) => *c,
            BooleanFunction::TruthTable(t) => {
                t[z.iter().fold(0usize, |acc, &b| 2 * acc + usize::from(b))]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSpec {
    pub rounds: usize,
    pub function: BooleanFunction,
    /// Source for the measurement after outcome prefix `key` (a string of
    /// `0`/`1`); prefixes without an entry use the experiment's source.
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub branch_sources: std::collections::BTreeMap<String, SourceKind>,
}

/// Either an explicit list or `count` consecutive seeds from `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(s) => s.clone(),
            SeedSpec::Range { start, count } => (*start..start.saturating_add(*count)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub version: u32,
    pub kind: ExperimentKind,
    pub n_qubits: usize,
    #[serde(default = "default_state")]
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceKind>,
    pub m_values: Vec<usize>,
    pub gamma: f64,
    /// Feasibility slack; overrides `learner.eta`.
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<LearnerRule>,
    #[serde(default = "default_labels")]
    pub labels: LabelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveSpec>,
    /// Replace the learned hypothesis by the true state.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub control: bool,
    /// Include hypothesis matrices in report rows.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub report_states: bool,
}

/// Top-level keys accepted in an experiment spec.
pub const SPEC_KEYS: [&str; 17] = [
    "version",
    "kind",
    "n_qubits",
    "state",
    "source",
    "m_values",
    "gamma",
    "eta",
    "epsilon",
    "n_test",
    "seeds",
    "learner",
    "rule",
    "labels",
    "adaptive",
    "control",
    "report_states",
];

fn default_state() -> StateSpec {
    StateSpec::Pure
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_n_test() -> usize {
    1000
}

fn default_labels() -> LabelSpec {
    LabelSpec::Exact
}

impl ExperimentSpec {
    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.seeds()
    }

    pub fn rule(&self) -> LearnerRule {
        self.rule.unwrap_or(match self.kind {
            ExperimentKind::MeasureOnceSweep => LearnerRule::Quadratic,
            _ => LearnerRule::Feasible,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::validation(msg));
        if self.version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported spec version {}, expected {SCHEMA_VERSION}",
                self.version
            ));
        }
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return bad(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            ));
        }
        if self.m_values.is_empty() {
            return bad("m_values must not be empty".into());
        }
        if self.seeds().is_empty() {
            return bad("seeds must not be empty".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must be in (0, 1), got {}", self.gamma));
        }
        if !(self.eta >= 0.0 && self.eta < 1.0) {
            return bad(format!("eta must be in [0, 1), got {}", self.eta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must be in (0, 1), got {}", self.epsilon));
        }
        if self.n_test == 0 {
            return bad("n_test must be at least 1".into());
        }
        self.learner.validate()?;
        if let LabelSpec::Estimated { copies, delta } = &self.labels {
            if *copies == Some(0) {
                return bad("labels.estimated.copies must be at least 1".into());
            }
            if !(*delta > 0.0 && *delta < 1.0) {
                return bad(format!(
                    "labels.estimated.delta must be in (0, 1), got {delta}"
                ));
            }
            if copies.is_none() && self.eta <= 0.0 {
                return bad("estimated labels without copies need eta > 0".into());
            }
        }
        let hard = matches!(self.state, StateSpec::HardInstance { .. });
        if hard != (self.kind == ExperimentKind::LowerBound) {
            return bad(
                "the hard_instance state is used exactly by lower_bound experiments".into(),
            );
        }
        if let StateSpec::Mixed { rank } = self.state {
            if !(1..=1usize << self.n_qubits).contains(&rank) {
                return bad(format!(
                    "mixed rank must be in 1..={}, got {rank}",
                    1usize << self.n_qubits
                ));
            }
        }
        if self.kind == ExperimentKind::LowerBound {
            if self.source.is_some() {
                return bad(
                    "lower_bound experiments draw from the hard instance; remove source".into(),
                );
            }
        } else if self.source.is_none() {
            return bad("source is required for this experiment kind".into());
        }
        match (&self.adaptive, self.kind) {
            (Some(a), ExperimentKind::Adaptive) => {
                if a.rounds == 0 || a.rounds * self.n_qubits > ADAPTIVE_QUBIT_BUDGET {
                    return bad(format!(
                        "adaptive rounds · n_qubits must be in 1..={ADAPTIVE_QUBIT_BUDGET}, got {} · {}",
                        a.rounds, self.n_qubits
                    ));
                }
                if let BooleanFunction::TruthTable(t) = &a.function {
                    if t.len() != 1 << a.rounds {
                        return bad(format!(
                            "truth table needs {} entries, got {}",
                            1 << a.rounds,
                            t.len()
                        ));
                    }
                }
                for key in a.branch_sources.keys() {
                    if key.len() >= a.rounds || key.chars().any(|c| c != '0' && c != '1') {
                        return bad(format!("branch_sources key {key:?} is not an outcome prefix shorter than rounds"));
                    }
                }
            }
            (None, ExperimentKind::Adaptive) => {
                return bad("adaptive experiments need an adaptive section".into())
            }
            (Some(_), _) => {
                return bad("the adaptive section is only valid for adaptive experiments".into())
            }
            (None, _) => {}
        }
        Ok(())
    }
}

/// Parses and validates a spec. Unknown top-level keys are reported
/// together; other schema errors carry the JSON path of the offending value.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(obj) = value.as_object() {
        let known: BTreeSet<&str> = SPEC_KEYS.into_iter().collect();
        let unknown: Vec<String> = obj
            .keys()
            .filter(|k| !known.contains(k.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownKeys(unknown));
        }
    }
    let spec: ExperimentSpec =
        serde_path_to_error::deserialize(value).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    parse_spec(&std::fs::read_to_string(path)?)
}

/// Normalized form: pretty JSON with defaults filled in.
pub fn spec_to_json(spec: &ExperimentSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "kind": "generalization_sweep",
        "n_qubits": 2,
        "source": {"haar_projector": {"rank": 1}},
        "m_values": [25],
        "gamma": 0.1,
        "eta": 0.05,
        "seeds": [0, 1]
    }"#;

    #[test]
    fn minimal_round_trip() {
        let spec = parse_spec(MINIMAL).unwrap();
        let text = spec_to_json(&spec).unwrap();
        let again = parse_spec(&text).unwrap();
        assert_eq!(spec, again);
        assert_eq!(text, spec_to_json(&again).unwrap());
    }

    #[test]
    fn unknown_keys_are_listed() {
        let text = MINIMAL
            .replace("\"gamma\"", "\"gama\"")
            .replace("\"seeds\"", "\"seed\"");
        match parse_spec(&text) {
            Err(Error::UnknownKeys(keys)) => {
                assert_eq!(keys, vec!["gama".to_string(), "seed".to_string()])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_errors_are_located() {
        let text = MINIMAL.replace("\"rank\": 1", "\"rank\": \"one\"");
        match parse_spec(&text) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("source"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_range() {
        let spec = parse_spec(&MINIMAL.replace("[0, 1]", r#"{"start": 5, "count": 3}"#)).unwrap();
        assert_eq!(spec.seeds(), vec![5, 6, 7]);
    }

    #[test]
    fn boolean_functions() {
        let z = [true, false, true];
        assert!(!BooleanFunction::Parity.eval(&z));
        assert!(BooleanFunction::Or.eval(&z));
        assert!(!BooleanFunction::And.eval(&z));
        assert!(BooleanFunction::First.eval(&z));
        let mut t = vec![false; 8];
        t[0b101] = true;
        assert!(BooleanFunction::TruthTable(t).eval(&z));
    }
}
