use serde::{Deserialize, Serialize};

use crate::ensembles::{MeasurementSource, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::qmatrix::{DensityMatrix, Effect, HermitianMatrix};

/// Product-state family on `k` qubits that is fine-shattered with margin
/// `gamma` and zero window: `ρ_y` has qubit `i` in `|1⟩` with probability
/// `½ + γ(2y_i − 1)`, and `E_i = |1⟩⟨1|` on qubit `i`. The sampling
/// distribution puts weight `1 − 4ε` on `E_1` and spreads the rest evenly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HardInstance {
    k: usize,
    gamma: f64,
    epsilon: f64,
    effects: Vec<Effect>,
    weights: Vec<f64>,
}

/// Bit of basis index `b` on qubit `i` (qubit 0 is the leftmost factor).
fn qubit_bit(b: usize, i: usize, k: usize) -> bool {
    (b >> (k - 1 - i)) & 1 == 1
}

pub fn make_hard_instance(k: usize, gamma: f64, epsilon: f64) -> Result<HardInstance> {
    if !(2..=MAX_QUBITS).contains(&k) {
        return Err(Error::validation(format!(
            "k must be in 2..={MAX_QUBITS}, got {k}"
        )));
    }
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::validation(format!(
            "gamma must be in (0, 1/2), got {gamma}"
        )));
    }
    if !(0.0..0.25).contains(&epsilon) {
        return Err(Error::validation(format!(
            "epsilon must be in [0, 1/4), got {epsilon}"
        )));
    }
    let dim = 1usize << k;
    let effects = (0..k)
        .map(|i| {
            let diag: Vec<f64> = (0..dim)
                .map(|b| f64::from(u8::from(qubit_bit(b, i, k))))
                .collect();
            Effect::new(HermitianMatrix::diagonal(&diag))
        })
        .collect::<Result<Vec<_>>>()?;
    let rest = 4.0 * epsilon / (k - 1) as f64;
    let mut weights = vec![rest; k];
    weights[0] = 1.0 - 4.0 * epsilon;
    Ok(HardInstance {
        k,
        gamma,
        epsilon,
        effects,
        weights,
    })
}

impl HardInstance {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Tr(E_i ρ_y)` from the construction, where `y_i` is bit `i` of `y`.
    pub fn value(&self, y: u64, i: usize) -> f64 {
        let yi = (y >> i) & 1 == 1;
        if yi {
            0.5 + self.gamma
        } else {
            0.5 - self.gamma
        }
    }

    /// `ρ_y = ⊗_i diag(1 − q_i, q_i)` with `q_i = Tr(E_i ρ_y)`.
    pub fn state(&self, y: u64) -> Result<DensityMatrix> {
        if self.k < 64 && y >> self.k != 0 {
            return Err(Error::validation(format!(
                "label {y} has more than {} bits",
                self.k
            )));
        }
        let q: Vec<f64> = (0..self.k).map(|i| self.value(y, i)).collect();
        let diag: Vec<f64> = (0..self.dim())
            .map(|b| {
                (0..self.k)
                    .map(|i| {
                        if qubit_bit(b, i, self.k) {
                            q[i]
                        } else {
                            1.0 - q[i]
                        }
                    })
                    .product()
            })
            .collect();
        DensityMatrix::new(HermitianMatrix::diagonal(&diag))
    }

    pub fn source(&self) -> Result<MeasurementSource> {
        MeasurementSource::finite_list(self.effects.clone(), self.weights.clone())
    }

    /// `Pr_{E∈D}[|Tr(Eσ) − Tr(Eρ_y)| ≥ γ]`, exact over the finite distribution.
    /// Deviations within `1e-9` below `γ` count as reaching it.
    pub fn deviation_mass(&self, sigma: &DensityMatrix, y: u64) -> Result<f64> {
        Error::check_dim(self.dim(), sigma.dim())?;
        let mut mass = 0.0;
        for (i, (e, w)) in self.effects.iter().zip(&self.weights).enumerate() {
            let dev = (e.matrix().trace_product(sigma.matrix()) - self.value(y, i)).abs();
            if dev >= self.gamma - 1e-9 {
                mass += w;
            }
        }
        Ok(mass)
    }

    /// Checks fine-shattering with window `eta` by brute force over all `2^k`
    /// labelings, computing every `Tr(E_i ρ_y)` from the matrices.
    pub fn is_fine_shattered(&self, eta: f64) -> Result<bool> {
        for y in 0..1u64 << self.k {
            let rho = self.state(y)?;
            for (i, e) in self.effects.iter().enumerate() {
                let f = e.matrix().trace_product(rho.matrix());
                let ok = if (y >> i) & 1 == 1 {
                    (0.5 + self.gamma - 1e-10..=0.5 + self.gamma + eta + 1e-10).contains(&f)
                } else {
                    (0.5 - self.gamma - eta - 1e-10..=0.5 - self.gamma + 1e-10).contains(&f)
                };
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
