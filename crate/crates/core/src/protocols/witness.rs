use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::bernoulli;
use crate::error::{Error, Result};
use crate::qmatrix::{expectation, tol, DensityMatrix, Effect, HermitianMatrix, Instrument};

/// Largest `m^T` for which [`WitnessMethod::Auto`] computes statistics exactly.
pub const ENUMERATION_LIMIT: f64 = 1e6;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub effects: Vec<Effect>,
    #[serde(rename = "T", alias = "t")]
    pub t_max: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_lambda() -> f64 {
    1.0 / 3.0
}

fn default_trials() -> usize {
    10_000
}

impl WitnessConfig {
    pub fn new(effects: Vec<Effect>, t_max: usize) -> Self {
        WitnessConfig {
            effects,
            t_max,
            lambda: default_lambda(),
            trials: default_trials(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .effects
            .first()
            .ok_or_else(|| Error::validation("witness protection needs at least one effect"))?;
        for e in &self.effects {
            Error::check_dim(first.dim(), e.dim())?;
        }
        if self.t_max == 0 {
            return Err(Error::validation("T must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::validation(format!(
                "lambda must be in (0, 1], got {}",
                self.lambda
            )));
        }
        if self.trials == 0 {
            return Err(Error::validation("trials must be at least 1"));
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        self.effects[0].dim()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessOutcome {
    Success(DensityMatrix),
    /// The measurement at 1-based position `step` rejected.
    Failure {
        step: usize,
    },
}

/// A test the advice must pass: `effect` measured, `expected` outcome required.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdviceTest {
    pub effect: Effect,
    pub expected: bool,
}

struct Check {
    instrument: Instrument,
    expected: bool,
}

impl Check {
    fn new(effect: &Effect, expected: bool) -> Result<Self> {
        Ok(Check {
            instrument: Instrument::new(effect)?,
            expected,
        })
    }

    /// Measures and returns the outcome and the post-measurement state. A
    /// sampled branch of probability at most the branch threshold is replaced
    /// by the opposite outcome.
    fn sample<R: Rng + ?Sized>(
        &self,
        state: &DensityMatrix,
        rng: &mut R,
    ) -> Result<(bool, DensityMatrix)> {
        let p = self.instrument.probability(state, true)?;
        let mut outcome = bernoulli(p, rng);
        let chosen = if outcome { p } else { 1.0 - p };
        if chosen <= tol::BRANCH {
            outcome = !outcome;
        }
        let (_, post) = self.instrument.measure(state, outcome)?;
        Ok((outcome, post))
    }

    fn pass_branch(&self, s: &HermitianMatrix) -> HermitianMatrix {
        self.instrument.apply_unnormalized(s, self.expected)
    }
}

fn checks_for(effects: impl IntoIterator<Item = (Effect, bool)>, dim: usize) -> Result<Vec<Check>> {
    effects
        .into_iter()
        .map(|(e, b)| {
            Error::check_dim(dim, e.dim())?;
            Check::new(&e, b)
        })
        .collect()
}

/// Phase shared by the witness procedure and the advice verifier: draw
/// `t ∈ {1, …, T}`, then `t` times pick a check uniformly and apply it.
fn run_checks<R: Rng + ?Sized>(
    start: &DensityMatrix,
    checks: &[Check],
    t_max: usize,
    rng: &mut R,
) -> Result<WitnessOutcome> {
    let t = rng.gen_range(1..=t_max);
    let mut state = start.clone();
    for step in 1..=t {
        let check = &checks[rng.gen_range(0..checks.len())];
        let (outcome, post) = check.sample(&state, rng)?;
        if outcome != check.expected {
            return Ok(WitnessOutcome::Failure { step });
        }
        state = post;
    }
    Ok(WitnessOutcome::Success(state))
}

/// `(1/T)·Σ_{t=1..T} Φ^t(ρ)` with `Φ(S) = (1/m)·Σ_i K_i S K_i` over the passing
/// Kraus operators: the unnormalized output averaged over all runs that pass.
fn surviving_mixture(start: &HermitianMatrix, checks: &[Check], t_max: usize) -> HermitianMatrix {
    let m = checks.len() as f64;
    let mut layer = start.clone();
    let mut acc = HermitianMatrix::zeros(start.dim());
    for _ in 0..t_max {
        let mut next = HermitianMatrix::zeros(start.dim());
        for c in checks {
            next.add_scaled_in_place(1.0 / m, &c.pass_branch(&layer));
        }
        acc.add_scaled_in_place(1.0 / t_max as f64, &next);
        layer = next;
    }
    acc
}

/// One execution of the witness-protection test procedure on `rho0`.
pub fn witness_protect_run<R: Rng + ?Sized>(
    rho0: &DensityMatrix,
    cfg: &WitnessConfig,
    rng: &mut R,
) -> Result<WitnessOutcome> {
    cfg.validate()?;
    Error::check_dim(cfg.dim(), rho0.dim())?;
    let checks = checks_for(cfg.effects.iter().map(|e| (e.clone(), true)), rho0.dim())?;
    run_checks(rho0, &checks, cfg.t_max, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMethod {
    /// Exact when `m^T` is at most [`ENUMERATION_LIMIT`], sampled otherwise.
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessStats {
    pub success_prob: f64,
    /// `min_i Tr(E_i σ)` for the output conditioned on success; absent when no
    /// run succeeds.
    pub conditional_min_expectation: Option<f64>,
    /// `max_i (1 − Tr(E_i ρ0))`.
    pub epsilon: f64,
    /// `1 − T√ε`.
    pub bound_ii: f64,
    /// `1 − 2√(m/(λT))`.
    pub bound_iii: f64,
    pub method: WitnessMethod,
    /// Standard error of `success_prob`; zero when exact.
    pub std_error: f64,
    pub trials: usize,
}

impl WitnessStats {
    /// Success probability is at least `1 − T√ε`, allowing `slack` standard errors.
    pub fn success_bound_holds(&self, slack: f64) -> bool {
        self.success_prob >= self.bound_ii - slack * self.std_error - 1e-12
    }

    /// When success probability reaches `λ`, the conditional output passes
    /// every test with probability at least `1 − 2√(m/(λT))`.
    pub fn conditional_bound_holds(&self, lambda: f64) -> bool {
        if self.success_prob < lambda {
            return true;
        }
        self.conditional_min_expectation
            .is_some_and(|v| v >= self.bound_iii - 1e-12)
    }
}

fn bounds_for(rho0: &DensityMatrix, cfg: &WitnessConfig) -> Result<(f64, f64, f64)> {
    let mut epsilon: f64 = 0.0;
    for e in &cfg.effects {
        epsilon = epsilon.max(1.0 - expectation(e, rho0)?);
    }
    let t = cfg.t_max as f64;
    let m = cfg.effects.len() as f64;
    Ok((
        epsilon,
        1.0 - t * epsilon.sqrt(),
        1.0 - 2.0 * (m / (cfg.lambda * t)).sqrt(),
    ))
}

fn min_expectation(effects: &[Effect], sigma: &HermitianMatrix) -> f64 {
    effects
        .iter()
        .map(|e| e.matrix().trace_product(sigma))
        .fold(f64::INFINITY, f64::min)
}

/// Exact success probability and conditional output state.
pub fn witness_protect_exact(
    rho0: &DensityMatrix,
    cfg: &WitnessConfig,
) -> Result<(f64, Option<DensityMatrix>)> {
    cfg.validate()?;
    Error::check_dim(cfg.dim(), rho0.dim())?;
    let checks = checks_for(cfg.effects.iter().map(|e| (e.clone(), true)), rho0.dim())?;
    let mix = surviving_mixture(rho0.matrix(), &checks, cfg.t_max);
    let success = mix.trace().clamp(0.0, 1.0);
    let sigma = if success > tol::BRANCH {
        Some(DensityMatrix::new_unchecked(mix.scale(1.0 / mix.trace())))
    } else {
        None
    };
    Ok((success, sigma))
}

pub fn witness_protect_stats<R: Rng + ?Sized>(
    rho0: &DensityMatrix,
    cfg: &WitnessConfig,
    method: WitnessMethod,
    rng: &mut R,
) -> Result<WitnessStats> {
    cfg.validate()?;
    Error::check_dim(cfg.dim(), rho0.dim())?;
    let (epsilon, bound_ii, bound_iii) = bounds_for(rho0, cfg)?;
    let paths = (cfg.effects.len() as f64).powf(cfg.t_max as f64);
    let method = match method {
        WitnessMethod::Auto if paths <= ENUMERATION_LIMIT => WitnessMethod::Exact,
        WitnessMethod::Auto => WitnessMethod::MonteCarlo,
        other => other,
    };
    if method == WitnessMethod::Exact {
        let (success_prob, sigma) = witness_protect_exact(rho0, cfg)?;
        return Ok(WitnessStats {
            success_prob,
            conditional_min_expectation: sigma.map(|s| min_expectation(&cfg.effects, s.matrix())),
            epsilon,
            bound_ii,
            bound_iii,
            method,
            std_error: 0.0,
            trials: 0,
        });
    }

    let checks = checks_for(cfg.effects.iter().map(|e| (e.clone(), true)), rho0.dim())?;
    let mut successes = 0usize;
    let mut acc = HermitianMatrix::zeros(rho0.dim());
    for _ in 0..cfg.trials {
        if let WitnessOutcome::Success(sigma) = run_checks(rho0, &checks, cfg.t_max, rng)? {
            successes += 1;
            acc = acc.add(sigma.matrix());
        }
    }
    let n = cfg.trials as f64;
    let p = successes as f64 / n;
    let conditional =
        (successes > 0).then(|| min_expectation(&cfg.effects, &acc.scale(1.0 / successes as f64)));
    Ok(WitnessStats {
        success_prob: p,
        conditional_min_expectation: conditional,
        epsilon,
        bound_ii,
        bound_iii,
        method,
        std_error: (p * (1.0 - p) / n).sqrt(),
        trials: cfg.trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
    DontKnow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictDistribution {
    pub accept: f64,
    pub reject: f64,
    pub dont_know: f64,
}

fn check_advice(
    decision: &Effect,
    advice: &DensityMatrix,
    tests: &[AdviceTest],
    t_max: usize,
) -> Result<Vec<Check>> {
    if tests.is_empty() {
        return Err(Error::validation(
            "advice verification needs at least one test",
        ));
    }
    if t_max == 0 {
        return Err(Error::validation("T must be at least 1"));
    }
    Error::check_dim(advice.dim(), decision.dim())?;
    checks_for(
        tests.iter().map(|t| (t.effect.clone(), t.expected)),
        advice.dim(),
    )
}

/// Two-phase advice verification. Phase 1 runs the randomized-length test
/// sequence on the advice and answers [`Verdict::DontKnow`] on the first test
/// that disagrees with its expected outcome; phase 2 measures `decision` on the
/// surviving state and accepts on outcome 1.
pub fn verify_advice<R: Rng + ?Sized>(
    decision: &Effect,
    advice: &DensityMatrix,
    tests: &[AdviceTest],
    t_max: usize,
    rng: &mut R,
) -> Result<Verdict> {
    let checks = check_advice(decision, advice, tests, t_max)?;
    match run_checks(advice, &checks, t_max, rng)? {
        WitnessOutcome::Failure { .. } => Ok(Verdict::DontKnow),
        WitnessOutcome::Success(state) => {
            let p = expectation(decision, &state)?;
            Ok(if bernoulli(p, rng) {
                Verdict::Accept
            } else {
                Verdict::Reject
            })
        }
    }
}

/// Exact verdict probabilities of [`verify_advice`].
pub fn verify_advice_exact(
    decision: &Effect,
    advice: &DensityMatrix,
    tests: &[AdviceTest],
    t_max: usize,
) -> Result<VerdictDistribution> {
    let checks = check_advice(decision, advice, tests, t_max)?;
    let mix = surviving_mixture(advice.matrix(), &checks, t_max);
    let survive = mix.trace().clamp(0.0, 1.0);
    let accept = decision.matrix().trace_product(&mix).clamp(0.0, survive);
    Ok(VerdictDistribution {
        accept,
        reject: survive - accept,
        dont_know: 1.0 - survive,
    })
}

/// `I ⊗ ⋯ ⊗ E ⊗ ⋯ ⊗ I` with `effect` on register `index` of `registers`
/// equally sized registers.
pub fn register_effect(effect: &Effect, index: usize, registers: usize) -> Result<Effect> {
    if index >= registers {
        return Err(Error::validation(format!(
            "register {index} out of range for {registers} registers"
        )));
    }
    let id = Effect::identity(effect.dim());
    let mut out = Effect::identity(1);
    for r in 0..registers {
        out = out.kron(if r == index { effect } else { &id });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::RngStream;

    fn ket(bit: usize) -> DensityMatrix {
        let mut d = [0.0, 0.0];
        d[bit] = 1.0;
        DensityMatrix::new(HermitianMatrix::diagonal(&d)).unwrap()
    }

    fn proj(bit: usize) -> Effect {
        let mut d = [0.0, 0.0];
        d[bit] = 1.0;
        Effect::new(HermitianMatrix::diagonal(&d)).unwrap()
    }

    #[test]
    fn perfect_witness_always_succeeds() {
        let cfg = WitnessConfig::new(vec![proj(0), Effect::identity(2)], 10);
        let mut rng = RngStream::new(0, 0);
        for _ in 0..50 {
            assert_eq!(
                witness_protect_run(&ket(0), &cfg, &mut rng).unwrap(),
                WitnessOutcome::Success(ket(0))
            );
        }
        let stats = witness_protect_stats(&ket(0), &cfg, WitnessMethod::Auto, &mut rng).unwrap();
        assert_eq!(stats.method, WitnessMethod::Exact);
        assert!((stats.success_prob - 1.0).abs() < 1e-12);
        assert!((stats.conditional_min_expectation.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_effect_always_fails() {
        let cfg = WitnessConfig::new(vec![Effect::zero(2)], 5);
        let mut rng = RngStream::new(1, 0);
        for _ in 0..20 {
            assert_eq!(
                witness_protect_run(&ket(0), &cfg, &mut rng).unwrap(),
                WitnessOutcome::Failure { step: 1 }
            );
        }
        let (p, sigma) = witness_protect_exact(&ket(0), &cfg).unwrap();
        assert_eq!(p, 0.0);
        assert!(sigma.is_none());
    }

    #[test]
    fn orthogonal_advice_is_dont_know() {
        let tests = vec![AdviceTest {
            effect: proj(0),
            expected: true,
        }];
        let mut rng = RngStream::new(2, 0);
        for _ in 0..20 {
            assert_eq!(
                verify_advice(&proj(0), &ket(1), &tests, 4, &mut rng).unwrap(),
                Verdict::DontKnow
            );
        }
        let d = verify_advice_exact(&proj(0), &ket(1), &tests, 4).unwrap();
        assert_eq!(d.dont_know, 1.0);
        let honest = verify_advice_exact(&proj(0), &ket(0), &tests, 4).unwrap();
        assert!((honest.accept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn register_embedding() {
        let e = register_effect(&proj(1), 1, 2).unwrap();
        assert_eq!(e.matrix().diagonal_values(), vec![0.0, 1.0, 0.0, 1.0]);
        assert!(register_effect(&proj(1), 2, 2).is_err());
    }
}
