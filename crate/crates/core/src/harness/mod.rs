//! Declarative experiments and their reports.

mod adaptive;
mod hard;
mod report;
mod run;
mod spec;

pub use adaptive::{tensor_power, AdaptiveTree};
pub use hard::{make_hard_instance, HardInstance};
pub use report::{
    emit_report, median, write_atomic, Aggregate, Report, RngProvenance, Row, REPORT_FILE,
    ROWS_FILE,
};
pub use run::run_experiment;
pub use spec::{
    load_spec, parse_spec, spec_to_json, AdaptiveSpec, BooleanFunction, ExperimentKind,
    ExperimentSpec, LabelSpec, LearnerRule, SeedSpec, StateSpec, ADAPTIVE_QUBIT_BUDGET,
    SCHEMA_VERSION, SPEC_KEYS,
};
