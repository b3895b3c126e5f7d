use std::collections::BTreeMap;

use rand::Rng;

use crate::ensembles::{MeasurementSource, SourceKind};
use crate::error::{Error, Result};
use crate::harness::spec::BooleanFunction;
use crate::qmatrix::{expectation, DensityMatrix, Effect, HermitianMatrix};

/// One draw of an `r`-round adaptive procedure: the measurement applied to
/// copy `j` depends on the outcomes `z_1 … z_{j−1}` seen so far.
#[derive(Clone, Debug)]
pub struct AdaptiveTree {
    rounds: usize,
    /// Node for prefix `z` of length `j` sits at `2^j − 1 + value(z)`.
    nodes: Vec<Effect>,
}

fn prefix_key(prefix: &[bool]) -> String {
    prefix.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn node_index(prefix: &[bool]) -> usize {
    (1usize << prefix.len()) - 1
        + prefix
            .iter()
            .fold(0usize, |acc, &b| 2 * acc + usize::from(b))
}

impl AdaptiveTree {
    pub fn sample<R: Rng + ?Sized>(
        n_qubits: usize,
        rounds: usize,
        default_source: &SourceKind,
        branch_sources: &BTreeMap<String, SourceKind>,
        rng: &mut R,
    ) -> Result<Self> {
        let mut nodes = Vec::with_capacity((1 << rounds) - 1);
        for depth in 0..rounds {
            for v in 0..1usize << depth {
                let prefix: Vec<bool> = (0..depth)
                    .map(|j| (v >> (depth - 1 - j)) & 1 == 1)
                    .collect();
                let kind = branch_sources
                    .get(&prefix_key(&prefix))
                    .unwrap_or(default_source);
                let source = MeasurementSource::new(n_qubits, kind.clone())?;
                nodes.push(source.sample(rng)?);
            }
        }
        Ok(AdaptiveTree { rounds, nodes })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn effect(&self, prefix: &[bool]) -> &Effect {
        &self.nodes[node_index(prefix)]
    }

    fn outcomes(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        let r = self.rounds;
        (0..1usize << r).map(move |z| (0..r).map(|j| (z >> (r - 1 - j)) & 1 == 1).collect())
    }

    /// `F = Σ_z f(z)·⊗_j M_j(z_j | z_{<j})` on `r` copies, where
    /// `M(1) = E` and `M(0) = I − E`. `Tr(F ρ^{⊗r}) = Pr[f(z) = 1]`.
    pub fn assemble(&self, f: &BooleanFunction) -> Result<Effect> {
        let copy_dim = self.nodes[0].dim();
        let dim = copy_dim.pow(self.rounds as u32);
        let mut total = HermitianMatrix::zeros(dim);
        for z in self.outcomes() {
            if !f.eval(&z) {
                continue;
            }
            let mut term = HermitianMatrix::identity(1);
            for j in 0..self.rounds {
                let e = self.effect(&z[..j]).matrix();
                let factor = if z[j] { e.clone() } else { e.complement() };
                term = term.kron(&factor);
            }
            total = total.add(&term);
        }
        Effect::new(total)
    }

    /// `Pr[f(z) = 1]` on independent copies of `rho`, summed over outcome paths.
    pub fn exact_probability(&self, rho: &DensityMatrix, f: &BooleanFunction) -> Result<f64> {
        Error::check_dim(self.nodes[0].dim(), rho.dim())?;
        let mut total = 0.0;
        for z in self.outcomes() {
            if !f.eval(&z) {
                continue;
            }
            let mut p = 1.0;
            for j in 0..self.rounds {
                let q = expectation(self.effect(&z[..j]), rho)?;
                p *= if z[j] { q } else { 1.0 - q };
            }
            total += p;
        }
        Ok(total)
    }
}

/// `ρ^{⊗r}`.
pub fn tensor_power(rho: &DensityMatrix, r: usize) -> DensityMatrix {
    let mut out = rho.clone();
    for _ in 1..r {
        out = out.kron(rho);
    }
    out
}
