use std::time::Instant;

use rayon::prelude::*;

use crate::ensembles::{
    copies_for_accuracy, estimate_probability, sample_mixed_state, sample_outcome,
    sample_pure_state, MeasurementSource, RngStream,
};
use crate::error::{Error, Result};
use crate::harness::adaptive::{tensor_power, AdaptiveTree};
use crate::harness::hard::{make_hard_instance, HardInstance};
use crate::harness::report::{aggregate, Report, RngProvenance, Row};
use crate::harness::spec::{
    ExperimentKind, ExperimentSpec, LabelSpec, LearnerRule, StateSpec, SCHEMA_VERSION,
};
use crate::learner::{
    evaluate_generalization, learn_absolute, learn_feasible, learn_quadratic, LearnedHypothesis,
    LearnerConfig, TrainingSet,
};
use crate::qmatrix::{expectation, expectations, DensityMatrix, Effect};

/// Runs every `(seed, m)` row of `spec`, in parallel, and aggregates per `m`.
///
/// Row randomness comes from `RngStream(seed, 0)`: its child stream 0 draws
/// the target state and child `1 + j` drives the row for `m_values[j]`, so a
/// row's output does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let rule = spec.rule();
    match (spec.kind, rule) {
        (ExperimentKind::MeasureOnceSweep, LearnerRule::Feasible) => {
            return Err(Error::validation(
                "measure_once_sweep needs a bit-label rule (quadratic or absolute)",
            ))
        }
        (ExperimentKind::GeneralizationSweep | ExperimentKind::Adaptive, r)
            if r != LearnerRule::Feasible =>
        {
            return Err(Error::validation(
                "this experiment kind learns from probability labels; use rule feasible",
            ))
        }
        _ => {}
    }
    let hard = match spec.state {
        StateSpec::HardInstance { k, gamma } => Some(make_hard_instance(
            k.unwrap_or(spec.n_qubits),
            gamma.unwrap_or(spec.gamma),
            spec.epsilon,
        )?),
        _ => None,
    };

    let seeds = spec.seeds();
    let cells: Vec<(usize, u64, usize, usize)> = seeds
        .iter()
        .flat_map(|&seed| {
            spec.m_values
                .iter()
                .enumerate()
                .map(move |(j, &m)| (seed, j, m))
        })
        .enumerate()
        .map(|(row, (seed, j, m))| (row, seed, j, m))
        .collect();

    let rows: Vec<Row> = cells
        .par_iter()
        .map(|&(row, seed, j, m)| {
            let start = Instant::now();
            let base = RngStream::new(seed, 0);
            let mut state_rng = base.derive(0);
            let mut rng = base.derive(1 + j as u64);
            let result = match spec.kind {
                ExperimentKind::GeneralizationSweep | ExperimentKind::MeasureOnceSweep => {
                    sweep_row(spec, rule, m, &mut state_rng, &mut rng)
                }
                ExperimentKind::Adaptive => adaptive_row(spec, m, &mut state_rng, &mut rng),
                ExperimentKind::LowerBound => lower_bound_row(
                    spec,
                    rule,
                    hard.as_ref().expect("validated"),
                    m,
                    &mut state_rng,
                    &mut rng,
                ),
            };
            let mut out = result.unwrap_or_else(|e| Row {
                error: Some(e.to_string()),
                ..Row::default()
            });
            out.row = row;
            out.seed = seed;
            out.m = m;
            out.wall_time = start.elapsed().as_secs_f64();
            out
        })
        .collect();

    Ok(Report {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
        spec: spec.clone(),
        rng: RngProvenance {
            generator: "ChaCha20".to_owned(),
            keying:
                "key = seed; state from stream derive(0), row for m_values[j] from derive(1 + j)"
                    .to_owned(),
        },
        aggregates: aggregate(&spec.m_values, &rows),
        rows,
    })
}

fn draw_state(spec: &ExperimentSpec, rng: &mut RngStream) -> Result<DensityMatrix> {
    match spec.state {
        StateSpec::Pure => sample_pure_state(spec.n_qubits, rng),
        StateSpec::Mixed { rank } => sample_mixed_state(spec.n_qubits, rank, rng),
        StateSpec::HardInstance { .. } => {
            Err(Error::validation("hard_instance states are drawn by label"))
        }
    }
}

fn learner_config(spec: &ExperimentSpec) -> LearnerConfig {
    LearnerConfig {
        eta: spec.eta,
        ..spec.learner.clone()
    }
}

/// Labels `effects` against `state` as the rule requires and fits a hypothesis.
fn fit(
    spec: &ExperimentSpec,
    rule: LearnerRule,
    effects: Vec<Effect>,
    state: &DensityMatrix,
    rng: &mut RngStream,
) -> Result<LearnedHypothesis> {
    let config = learner_config(spec);
    let dim = state.dim();
    match rule {
        LearnerRule::Feasible => {
            let labels = match &spec.labels {
                LabelSpec::Exact => expectations(&effects, state)?,
                LabelSpec::Estimated { copies, delta } => {
                    let copies = match copies {
                        Some(c) => *c,
                        None => copies_for_accuracy(effects.len().max(1), spec.eta, *delta)?,
                    };
                    effects
                        .iter()
                        .map(|e| estimate_probability(e, state, copies, rng))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            learn_feasible(&TrainingSet::probabilities(dim, effects, labels)?, &config)
        }
        LearnerRule::Quadratic | LearnerRule::Absolute => {
            let bits = effects
                .iter()
                .map(|e| sample_outcome(e, state, rng))
                .collect::<Result<Vec<_>>>()?;
            let train = TrainingSet::bits(dim, effects, bits)?;
            if rule == LearnerRule::Quadratic {
                learn_quadratic(&train, &config)
            } else {
                learn_absolute(&train, &config)
            }
        }
    }
}

fn hypothesis_row(h: &LearnedHypothesis, report_states: bool) -> Row {
    Row {
        final_loss: Some(h.final_loss),
        converged: Some(h.converged),
        max_residual: Some(h.max_residual),
        iterations: Some(h.iterations),
        sigma_valid: Some(h.sigma.validate().is_ok()),
        sigma: report_states.then(|| h.sigma.clone()),
        ..Row::default()
    }
}

fn control_hypothesis(state: &DensityMatrix) -> LearnedHypothesis {
    LearnedHypothesis {
        sigma: state.clone(),
        final_loss: 0.0,
        iterations: 0,
        converged: true,
        max_residual: 0.0,
        vacuous: false,
        stop: crate::learner::StopReason::Tolerance,
        loss_history: Vec::new(),
    }
}

fn sweep_row(
    spec: &ExperimentSpec,
    rule: LearnerRule,
    m: usize,
    state_rng: &mut RngStream,
    rng: &mut RngStream,
) -> Result<Row> {
    let rho = draw_state(spec, state_rng)?;
    let source = MeasurementSource::new(spec.n_qubits, spec.source.clone().expect("validated"))?;
    let effects = (0..m)
        .map(|_| source.sample(rng))
        .collect::<Result<Vec<_>>>()?;
    let h = if spec.control {
        control_hypothesis(&rho)
    } else {
        fit(spec, rule, effects, &rho, rng)?
    };
    let test_error =
        evaluate_generalization(&h.sigma, &rho, &source, spec.gamma, spec.n_test, rng)?;
    Ok(Row {
        test_error: Some(test_error),
        ..hypothesis_row(&h, spec.report_states)
    })
}

fn adaptive_row(
    spec: &ExperimentSpec,
    m: usize,
    state_rng: &mut RngStream,
    rng: &mut RngStream,
) -> Result<Row> {
    let a = spec.adaptive.as_ref().expect("validated");
    let source = spec.source.as_ref().expect("validated");
    let rho = draw_state(spec, state_rng)?;
    let product = tensor_power(&rho, a.rounds);
    let draw = |rng: &mut RngStream| {
        AdaptiveTree::sample(spec.n_qubits, a.rounds, source, &a.branch_sources, rng)
    };

    let effects = (0..m)
        .map(|_| draw(rng)?.assemble(&a.function))
        .collect::<Result<Vec<_>>>()?;
    let h = if spec.control {
        control_hypothesis(&product)
    } else {
        fit(spec, LearnerRule::Feasible, effects, &product, rng)?
    };

    let (mut est_sum, mut exact_sum, mut abs_sum, mut misses) = (0.0, 0.0, 0.0, 0usize);
    for _ in 0..spec.n_test {
        let tree = draw(rng)?;
        let est = expectation(&tree.assemble(&a.function)?, &h.sigma)?;
        let exact = tree.exact_probability(&rho, &a.function)?;
        est_sum += est;
        exact_sum += exact;
        abs_sum += (est - exact).abs();
        if (est - exact).abs() > spec.gamma {
            misses += 1;
        }
    }
    let n = spec.n_test as f64;
    Ok(Row {
        test_error: Some(misses as f64 / n),
        estimate: Some(est_sum / n),
        exact: Some(exact_sum / n),
        mean_abs_error: Some(abs_sum / n),
        ..hypothesis_row(&h, spec.report_states)
    })
}

fn lower_bound_row(
    spec: &ExperimentSpec,
    rule: LearnerRule,
    instance: &HardInstance,
    m: usize,
    state_rng: &mut RngStream,
    rng: &mut RngStream,
) -> Result<Row> {
    use rand::Rng;
    let y: u64 = state_rng.gen_range(0..1u64 << instance.k());
    let rho = instance.state(y)?;
    let source = instance.source()?;
    let effects = (0..m)
        .map(|_| source.sample(rng))
        .collect::<Result<Vec<_>>>()?;
    let h = if spec.control {
        control_hypothesis(&rho)
    } else {
        fit(spec, rule, effects, &rho, rng)?
    };
    let mass = instance.deviation_mass(&h.sigma, y)?;
    Ok(Row {
        test_error: Some(mass),
        failed: Some(mass > spec.epsilon),
        ..hypothesis_row(&h, spec.report_states)
    })
}
