use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use pgt_core::bounds::{BoundGrid, CSV_HEADER};
use pgt_core::ensembles::RngStream;
use pgt_core::harness::{emit_report, load_spec, run_experiment, LearnerRule};
use pgt_core::learner::{
    learn_absolute, learn_feasible, learn_quadratic, Labels, LearnerConfig, TrainingSet,
};
use pgt_core::protocols::{
    make_fingerprint_protocol, simulate_one_way, verify_advice, verify_advice_exact,
    witness_protect_stats, AdviceTest, OneWayOptions, Verdict, VerdictDistribution, WitnessConfig,
    WitnessMethod,
};
use pgt_core::qmatrix::{DensityMatrix, Effect};
use pgt_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pgt",
    version,
    about = "Learn quantum states from two-outcome measurements"
)]
struct Cli {
    /// Seed used when a spec does not set one.
    #[arg(long, global = true, env = "PGT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a hypothesis state to a training set.
    Learn { spec: PathBuf },
    /// Evaluate sample-complexity bounds over a parameter grid (CSV on stdout).
    Bounds {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Simulate a measurement or communication protocol.
    Protocol {
        #[command(subcommand)]
        which: ProtocolCommand,
    },
    /// Run an experiment spec and write report.json and rows.csv.
    Experiment {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProtocolCommand {
    /// Success statistics of the witness-protection procedure.
    Witness { spec: PathBuf },
    /// Verdict distribution of the advice verifier, exact and sampled.
    Verify { spec: PathBuf },
    /// Classical simulation of a one-way fingerprinting protocol.
    Oneway { spec: PathBuf },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnSpec {
    training: TrainingSet,
    #[serde(default)]
    learner: LearnerConfig,
    rule: Option<LearnerRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessSpec {
    state: DensityMatrix,
    witness: WitnessConfig,
    #[serde(default = "auto")]
    method: WitnessMethod,
    seed: Option<u64>,
}

fn auto() -> WitnessMethod {
    WitnessMethod::Auto
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifySpec {
    advice: DensityMatrix,
    decision: Effect,
    tests: Vec<AdviceTest>,
    #[serde(rename = "T", alias = "t")]
    t_max: usize,
    #[serde(default = "default_runs")]
    runs: usize,
    seed: Option<u64>,
}

fn default_runs() -> usize {
    1000
}

#[derive(Serialize)]
struct VerifyOutput {
    exact: VerdictDistribution,
    sampled: VerdictDistribution,
    runs: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OneWaySpec {
    input_bits: usize,
    codeword_length: usize,
    #[serde(default)]
    code_seed: u64,
    x: usize,
    k: usize,
    /// `y` values drawn uniformly; all inputs when absent.
    y_support: Option<Vec<usize>>,
    #[serde(default)]
    options: OneWayOptions,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct OneWayOutput {
    eta_protocol: f64,
    code_min_distance: usize,
    code_length: usize,
    #[serde(flatten)]
    record: pgt_core::protocols::OneWayRecord,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn learn(path: &Path) -> Result<()> {
    let spec: LearnSpec = read_json(path)?;
    let rule = spec.rule.unwrap_or(match spec.training.labels() {
        Labels::Probability(_) => LearnerRule::Feasible,
        Labels::Bit(_) => LearnerRule::Quadratic,
    });
    let h = match rule {
        LearnerRule::Feasible => learn_feasible(&spec.training, &spec.learner)?,
        LearnerRule::Quadratic => learn_quadratic(&spec.training, &spec.learner)?,
        LearnerRule::Absolute => learn_absolute(&spec.training, &spec.learner)?,
    };
    print_json(&h)
}

fn bounds(path: &Path) -> Result<()> {
    let grid: BoundGrid = read_json(path)?;
    println!("{CSV_HEADER}");
    for entry in grid.evaluate()? {
        match entry.result {
            Ok(r) => println!("{}", r.csv_row()),
            Err(e) => eprintln!(
                "skipped {} at n={} gamma={} epsilon={} eta={} delta={}: {e}",
                entry.formula_id,
                entry.query.n_qubits,
                entry.query.gamma,
                entry.query.epsilon,
                entry.query.eta,
                entry.query.delta
            ),
        }
    }
    Ok(())
}

fn witness(path: &Path, default_seed: u64) -> Result<()> {
    let spec: WitnessSpec = read_json(path)?;
    let mut rng = RngStream::new(spec.seed.unwrap_or(default_seed), 0);
    print_json(&witness_protect_stats(
        &spec.state,
        &spec.witness,
        spec.method,
        &mut rng,
    )?)
}

fn verify(path: &Path, default_seed: u64) -> Result<()> {
    let spec: VerifySpec = read_json(path)?;
    if spec.runs == 0 {
        return Err(Error::Validation("runs must be at least 1".into()));
    }
    let exact = verify_advice_exact(&spec.decision, &spec.advice, &spec.tests, spec.t_max)?;
    let mut rng = RngStream::new(spec.seed.unwrap_or(default_seed), 0);
    let mut counts = [0usize; 3];
    for _ in 0..spec.runs {
        let v = verify_advice(
            &spec.decision,
            &spec.advice,
            &spec.tests,
            spec.t_max,
            &mut rng,
        )?;
        counts[match v {
            Verdict::Accept => 0,
            Verdict::Reject => 1,
            Verdict::DontKnow => 2,
        }] += 1;
    }
    let n = spec.runs as f64;
    print_json(&VerifyOutput {
        exact,
        sampled: VerdictDistribution {
            accept: counts[0] as f64 / n,
            reject: counts[1] as f64 / n,
            dont_know: counts[2] as f64 / n,
        },
        runs: spec.runs,
    })
}

fn oneway(path: &Path, default_seed: u64) -> Result<()> {
    let spec: OneWaySpec = read_json(path)?;
    let (mut problem, code) =
        make_fingerprint_protocol(spec.input_bits, spec.codeword_length, spec.code_seed)?;
    if let Some(support) = &spec.y_support {
        problem = problem.with_y_support(support)?;
    }
    let mut rng = RngStream::new(spec.seed.unwrap_or(default_seed), 0);
    let record = simulate_one_way(&problem, spec.x, spec.k, &spec.options, &mut rng)?;
    print_json(&OneWayOutput {
        eta_protocol: problem.eta_protocol(),
        code_min_distance: code.min_distance,
        code_length: code.length,
        record,
    })
}

fn experiment(path: &Path, out: &Path) -> Result<()> {
    let spec = load_spec(path)?;
    let report = run_experiment(&spec)?;
    let (json, csv) = emit_report(&report, out)?;
    let failed: usize = report.aggregates.iter().map(|a| a.failed_rows).sum();
    eprintln!(
        "{} rows ({} failed); wrote {} and {}",
        report.rows.len(),
        failed,
        json.display(),
        csv.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Learn { spec } => learn(spec),
        Command::Bounds { grid } => bounds(grid),
        Command::Protocol { which } => match which {
            ProtocolCommand::Witness { spec } => witness(spec, cli.seed),
            ProtocolCommand::Verify { spec } => verify(spec, cli.seed),
            ProtocolCommand::Oneway { spec } => oneway(spec, cli.seed),
        },
        Command::Experiment { spec, out } => experiment(spec, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
