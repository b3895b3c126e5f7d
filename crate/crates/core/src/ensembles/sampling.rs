use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensembles::source::MAX_QUBITS;
use crate::error::{Error, Result};
use crate::qmatrix::{expectation, CMatrix, Complex64, DensityMatrix, Effect, HermitianMatrix};

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim).map(|_| complex_gaussian(rng)).collect()
}

/// First `count` columns are orthonormal (modified Gram-Schmidt on Gaussian
/// vectors); the remaining columns are zero.
pub(crate) fn orthonormal_columns<R: Rng + ?Sized>(
    dim: usize,
    count: usize,
    rng: &mut R,
) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < count {
        let mut v = gaussian_vector(dim, rng);
        for q in &cols {
            let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= overlap * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // a Gaussian draw lands in the span of earlier columns with probability 0
        if norm > 1e-10 {
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
    }
    cols.resize(dim, vec![Complex64::new(0.0, 0.0); dim]);
    CMatrix::from_columns(dim, &cols)
}

pub(crate) fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    orthonormal_columns(dim, dim, rng)
}

/// Hermitian part of a matrix of i.i.d. standard complex Gaussians.
pub(crate) fn gaussian_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let data = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
    HermitianMatrix::hermitian_part(CMatrix::from_vec(dim, data).expect("dim >= 1"))
}

fn check_qubits(n_qubits: usize) -> Result<usize> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::validation(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(1 << n_qubits)
}

/// Haar-random pure state.
pub fn sample_pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<DensityMatrix> {
    let dim = check_qubits(n_qubits)?;
    DensityMatrix::pure(&gaussian_vector(dim, rng))
}

/// `AA†/Tr(AA†)` for a `2^n × rank` complex Gaussian `A`.
pub fn sample_mixed_state<R: Rng + ?Sized>(
    n_qubits: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = check_qubits(n_qubits)?;
    if !(1..=dim).contains(&rank) {
        return Err(Error::validation(format!(
            "rank must be in 1..={dim}, got {rank}"
        )));
    }
    let mut acc = HermitianMatrix::zeros(dim);
    for _ in 0..rank {
        acc = acc.add(&HermitianMatrix::outer(&gaussian_vector(dim, rng)));
    }
    let tr = acc.trace();
    Ok(DensityMatrix::new_unchecked(acc.scale(1.0 / tr)))
}

/// One single-shot outcome: `true` with probability `Tr(Eρ)`.
pub fn sample_outcome<R: Rng + ?Sized>(
    effect: &Effect,
    state: &DensityMatrix,
    rng: &mut R,
) -> Result<bool> {
    let p = expectation(effect, state)?;
    Ok(bernoulli(p, rng))
}

pub(crate) fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() < p
}

/// Empirical frequency of accepting outcomes over `copies` fresh copies.
pub fn estimate_probability<R: Rng + ?Sized>(
    effect: &Effect,
    state: &DensityMatrix,
    copies: usize,
    rng: &mut R,
) -> Result<f64> {
    if copies == 0 {
        return Err(Error::validation("copies must be at least 1"));
    }
    let p = expectation(effect, state)?;
    let hits = (0..copies).filter(|_| bernoulli(p, rng)).count();
    Ok(hits as f64 / copies as f64)
}

/// Copies per measurement so that, by Hoeffding and a union bound over `m`
/// measurements, every estimate is within `eta/2` with probability `1 − delta`:
/// `⌈2·ln(2m/δ)/η²⌉`.
pub fn copies_for_accuracy(m: usize, eta: f64, delta: f64) -> Result<usize> {
    if !(eta > 0.0 && delta > 0.0 && delta < 1.0) || m == 0 {
        return Err(Error::validation(
            "copies_for_accuracy needs m >= 1, eta > 0, delta in (0,1)",
        ));
    }
    Ok((2.0 * (2.0 * m as f64 / delta).ln() / (eta * eta)).ceil() as usize)
}

/// Reduces a k-outcome POVM to a two-outcome one by picking an element
/// uniformly at random. Returns the 0-based index and the element; the
/// caller treats it as the pair `{E_j, I − E_j}`.
pub fn reduce_k_outcome<R: Rng + ?Sized>(povm: &[Effect], rng: &mut R) -> Result<(usize, Effect)> {
    let first = povm
        .first()
        .ok_or_else(|| Error::validation("POVM must have at least one element"))?;
    let dim = first.dim();
    let mut total = HermitianMatrix::zeros(dim);
    for e in povm {
        Error::check_dim(dim, e.dim())?;
        total = total.add(e.matrix());
    }
    let deviation = total
        .as_matrix()
        .sub(&CMatrix::identity(dim))
        .as_slice()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if deviation > 1e-8 {
        return Err(Error::InvalidPovm { deviation });
    }
    let j = rng.gen_range(0..povm.len());
    Ok((j, povm[j].clone()))
}
