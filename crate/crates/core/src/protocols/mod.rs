//! Sequential measurement procedures and communication simulations.

mod oneway;
mod survival;
mod witness;

pub use oneway::{
    make_fingerprint_protocol, simulate_one_way, CommProblem, FingerprintCode, OneWayOptions,
    OneWayRecord,
};
pub use survival::{sequential_survival, sequential_survival_sampled};
pub use witness::{
    register_effect, verify_advice, verify_advice_exact, witness_protect_exact,
    witness_protect_run, witness_protect_stats, AdviceTest, Verdict, VerdictDistribution,
    WitnessConfig, WitnessMethod, WitnessOutcome, WitnessStats, ENUMERATION_LIMIT,
};
