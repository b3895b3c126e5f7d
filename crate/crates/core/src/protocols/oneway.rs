use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{RngStream, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::learner::{learn_feasible, LearnerConfig, TrainingSet};
use crate::qmatrix::{expectation, Complex64, DensityMatrix, Effect};

const MAX_DIM: usize = 1 << MAX_QUBITS;

/// A one-way quantum protocol for a Boolean function `f(x, y)`: Alice sends
/// `ρ_x`, Bob measures `E_y` and outputs 1 on acceptance.
#[derive(Clone, Debug)]
pub struct CommProblem {
    alice_state: Vec<DensityMatrix>,
    bob_effect: Vec<Effect>,
    truth: Vec<Vec<bool>>,
    y_distribution: Vec<f64>,
    eta_protocol: f64,
}

impl CommProblem {
    /// Checks `Tr(E_y ρ_x) ≥ 1 − η` where `f(x, y) = 1` and `≤ η` where
    /// `f(x, y) = 0` for every pair. `y_distribution` starts uniform.
    pub fn new(
        alice_state: Vec<DensityMatrix>,
        bob_effect: Vec<Effect>,
        truth: Vec<Vec<bool>>,
        eta_protocol: f64,
    ) -> Result<Self> {
        if alice_state.is_empty() || bob_effect.is_empty() {
            return Err(Error::validation(
                "a protocol needs at least one x and one y",
            ));
        }
        if !(0.0..0.5).contains(&eta_protocol) {
            return Err(Error::validation(format!(
                "eta_protocol must be in [0, 1/2), got {eta_protocol}"
            )));
        }
        if truth.len() != alice_state.len() || truth.iter().any(|row| row.len() != bob_effect.len())
        {
            return Err(Error::validation(
                "truth table must be |X| rows of |Y| entries",
            ));
        }
        let dim = alice_state[0].dim();
        for s in &alice_state {
            Error::check_dim(dim, s.dim())?;
        }
        for e in &bob_effect {
            Error::check_dim(dim, e.dim())?;
        }
        let worst = achieved_eta(&alice_state, &bob_effect, &truth);
        if worst > eta_protocol + 1e-9 {
            return Err(Error::Constraint {
                constraint: "Tr(E_y ρ_x) within η of f(x, y)",
                detail: format!("worst pair deviates by {worst}, η = {eta_protocol}"),
            });
        }
        let ny = bob_effect.len();
        Ok(CommProblem {
            alice_state,
            bob_effect,
            truth,
            y_distribution: vec![1.0 / ny as f64; ny],
            eta_protocol,
        })
    }

    pub fn with_y_distribution(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.bob_effect.len() {
            return Err(Error::validation(format!(
                "y distribution has {} weights for {} inputs",
                weights.len(),
                self.bob_effect.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::validation(
                "y distribution weights must be nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "y distribution sums to {total}, expected 1"
            )));
        }
        self.y_distribution = weights;
        Ok(self)
    }

    /// Uniform over `support`.
    pub fn with_y_support(self, support: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; self.bob_effect.len()];
        if support.is_empty() {
            return Err(Error::validation("y support must be nonempty"));
        }
        for &y in support {
            *w.get_mut(y)
                .ok_or_else(|| Error::validation(format!("y = {y} is out of range")))? +=
                1.0 / support.len() as f64;
        }
        self.with_y_distribution(w)
    }

    pub fn x_count(&self) -> usize {
        self.alice_state.len()
    }

    pub fn y_count(&self) -> usize {
        self.bob_effect.len()
    }

    pub fn dim(&self) -> usize {
        self.alice_state[0].dim()
    }

    pub fn alice_state(&self, x: usize) -> &DensityMatrix {
        &self.alice_state[x]
    }

    pub fn bob_effect(&self, y: usize) -> &Effect {
        &self.bob_effect[y]
    }

    pub fn truth(&self, x: usize, y: usize) -> bool {
        self.truth[x][y]
    }

    pub fn y_distribution(&self) -> &[f64] {
        &self.y_distribution
    }

    pub fn eta_protocol(&self) -> f64 {
        self.eta_protocol
    }
}

fn achieved_eta(states: &[DensityMatrix], effects: &[Effect], truth: &[Vec<bool>]) -> f64 {
    states
        .par_iter()
        .zip(truth.par_iter())
        .map(|(rho, row)| {
            effects
                .iter()
                .zip(row)
                .map(|(e, &f)| {
                    let p = e.matrix().trace_product(rho.matrix());
                    if f {
                        1.0 - p
                    } else {
                        p
                    }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Binary linear code `C(x) = x·G` over GF(2) used for fingerprints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintCode {
    pub input_bits: usize,
    pub length: usize,
    /// Row `j` of the generator, one bool per code position.
    pub generator: Vec<Vec<bool>>,
    pub min_distance: usize,
    pub max_distance: usize,
    /// Index of the seed attempt that produced this code.
    pub attempt: u64,
}

/// Smallest and largest allowed relative distance between distinct codewords.
pub const MIN_RELATIVE_DISTANCE: f64 = 0.3;
pub const MAX_RELATIVE_DISTANCE: f64 = 0.7;
const CODE_ATTEMPTS: u64 = 20;

impl FingerprintCode {
    pub fn codeword(&self, x: usize) -> Vec<bool> {
        let mut c = vec![false; self.length];
        for (j, row) in self.generator.iter().enumerate() {
            if (x >> j) & 1 == 1 {
                c.iter_mut().zip(row).for_each(|(a, &b)| *a ^= b);
            }
        }
        c
    }

    pub fn distance(&self, x: usize, y: usize) -> usize {
        self.codeword(x ^ y).iter().filter(|&&b| b).count()
    }

    /// `(1/√L)·Σ_j (−1)^{C(x)_j} |j⟩`.
    pub fn fingerprint(&self, x: usize) -> Vec<Complex64> {
        let a = 1.0 / (self.length as f64).sqrt();
        self.codeword(x)
            .into_iter()
            .map(|b| Complex64::new(if b { -a } else { a }, 0.0))
            .collect()
    }

    fn draw(input_bits: usize, length: usize, seed: u64, attempt: u64) -> Self {
        let mut rng = RngStream::new(seed, attempt);
        let generator = (0..input_bits)
            .map(|_| (0..length).map(|_| rng.gen::<bool>()).collect())
            .collect();
        let mut code = FingerprintCode {
            input_bits,
            length,
            generator,
            min_distance: 0,
            max_distance: 0,
            attempt,
        };
        // the distance between C(x) and C(y) is the weight of C(x ⊕ y)
        let weights: Vec<usize> = (1..1usize << input_bits)
            .map(|z| code.distance(z, 0))
            .collect();
        code.min_distance = weights.iter().copied().min().unwrap_or(length);
        code.max_distance = weights.iter().copied().max().unwrap_or(0);
        code
    }

    fn acceptable(&self) -> bool {
        let l = self.length as f64;
        self.min_distance as f64 >= MIN_RELATIVE_DISTANCE * l
            && self.max_distance as f64 <= MAX_RELATIVE_DISTANCE * l
    }
}

/// Equality on `input_bits`-bit strings with fingerprint states over a
/// seeded random linear code of length `codeword_length`.
///
/// `Tr(E_y ρ_x) = (1 − 2·dist(C(x), C(y))/L)²`, which is 1 on the diagonal and
/// at most `(1 − 2·0.3)² = 0.16` off it.
pub fn make_fingerprint_protocol(
    input_bits: usize,
    codeword_length: usize,
    seed: u64,
) -> Result<(CommProblem, FingerprintCode)> {
    if !(2..=12).contains(&input_bits) {
        return Err(Error::validation(format!(
            "input_bits must be in 2..=12, got {input_bits}"
        )));
    }
    if codeword_length < 16 || !codeword_length.is_power_of_two() || codeword_length > MAX_DIM {
        return Err(Error::validation(format!(
            "codeword_length must be a power of two in 16..={MAX_DIM}, got {codeword_length}"
        )));
    }
    let code = (0..CODE_ATTEMPTS)
        .map(|a| FingerprintCode::draw(input_bits, codeword_length, seed, a))
        .find(FingerprintCode::acceptable)
        .ok_or_else(|| {
            Error::Construction(format!(
                "no code with relative distance in [{MIN_RELATIVE_DISTANCE}, {MAX_RELATIVE_DISTANCE}] after {CODE_ATTEMPTS} attempts"
            ))
        })?;

    let l = codeword_length as f64;
    let overlap = |d: usize| (1.0 - 2.0 * d as f64 / l).powi(2);
    let eta = overlap(code.min_distance).max(overlap(code.max_distance));

    let xs = 1usize << input_bits;
    let vectors: Vec<Vec<Complex64>> = (0..xs).map(|x| code.fingerprint(x)).collect();
    let states = vectors
        .iter()
        .map(|v| DensityMatrix::pure(v))
        .collect::<Result<Vec<_>>>()?;
    let effects = states
        .iter()
        .map(|s| Effect::new(s.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    let truth = (0..xs).map(|x| (0..xs).map(|y| x == y).collect()).collect();
    let problem = CommProblem::new(states, effects, truth, eta)?;
    Ok((problem, code))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OneWayOptions {
    /// Feasibility slack for Bob's learner.
    pub eta: f64,
    /// Fresh `y` draws used to estimate the error; `0` skips sampling.
    pub n_test: usize,
    pub learner: LearnerConfig,
}

impl Default for OneWayOptions {
    fn default() -> Self {
        OneWayOptions {
            eta: 0.01,
            n_test: 1000,
            learner: LearnerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneWayRecord {
    /// Error on `n_test` fresh draws from the `y` distribution.
    pub test_error_rate: f64,
    /// Error averaged exactly over the `y` distribution.
    pub exact_error_rate: f64,
    pub k_used: usize,
    pub learner_converged: bool,
    pub max_residual: f64,
}

/// Classical simulation: Alice sends `k` samples `(y_i, f(x, y_i))` with
/// `y_i` drawn from the `y` distribution; Bob finds `σ` with
/// `|Tr(E_{y_i} σ) − f(x, y_i)| ≤ η` and answers `Tr(E_y σ) ≥ ½`.
pub fn simulate_one_way<R: Rng + ?Sized>(
    problem: &CommProblem,
    x: usize,
    k: usize,
    options: &OneWayOptions,
    rng: &mut R,
) -> Result<OneWayRecord> {
    if x >= problem.x_count() {
        return Err(Error::validation(format!(
            "x = {x} is out of range for {} inputs",
            problem.x_count()
        )));
    }
    let pick = WeightedIndex::new(problem.y_distribution())
        .map_err(|e| Error::validation(format!("y distribution: {e}")))?;
    let ys: Vec<usize> = (0..k).map(|_| pick.sample(rng)).collect();
    let effects = ys.iter().map(|&y| problem.bob_effect(y).clone()).collect();
    let labels = ys
        .iter()
        .map(|&y| f64::from(u8::from(problem.truth(x, y))))
        .collect();
    let train = TrainingSet::probabilities(problem.dim(), effects, labels)?;
    let mut config = options.learner.clone();
    config.eta = options.eta;
    let h = learn_feasible(&train, &config)?;

    let wrong = |y: usize| -> Result<bool> {
        let predict = expectation(problem.bob_effect(y), &h.sigma)? >= 0.5;
        Ok(predict != problem.truth(x, y))
    };
    let mut exact = 0.0;
    for (y, &w) in problem.y_distribution().iter().enumerate() {
        if w > 0.0 && wrong(y)? {
            exact += w;
        }
    }
    let test_error_rate = if options.n_test == 0 {
        exact
    } else {
        let mut errs = 0usize;
        for _ in 0..options.n_test {
            if wrong(pick.sample(rng))? {
                errs += 1;
            }
        }
        errs as f64 / options.n_test as f64
    };
    Ok(OneWayRecord {
        test_error_rate,
        exact_error_rate: exact.min(1.0),
        k_used: k,
        learner_converged: h.converged,
        max_residual: h.max_residual,
    })
}
