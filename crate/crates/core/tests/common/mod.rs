//! Reference implementations used as oracles by the integration tests. Each
//! one takes a different route from the library code it checks.
#![allow(dead_code)]

use pgt_core::bounds::LearningModel;
use pgt_core::ensembles::{sample_pure_state, RngStream};
use pgt_core::qmatrix::{expectation, Complex64, DensityMatrix, Effect, HermitianMatrix};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Euclidean projection onto the probability simplex by trying every support.
pub fn simplex_brute(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let theta = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = vec![0.0; n];
        for &i in &support {
            x[i] = v[i] - theta;
        }
        if x.iter().any(|&xi| xi < -1e-15) {
            continue;
        }
        let d: f64 = x.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.expect("the full support is always a candidate when clipped")
        .1
}

/// Closest qubit density matrix to a 2×2 Hermitian `h`: write
/// `h = h₀I + h⃗·σ⃗`, clip `h⃗` to the Bloch ball of radius ½.
pub fn bloch_projection(h: &HermitianMatrix) -> HermitianMatrix {
    assert_eq!(h.dim(), 2);
    let (a, d, b) = (h.get(0, 0).re, h.get(1, 1).re, h.get(0, 1));
    let mut r = [b.re, -b.im, 0.5 * (a - d)];
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.5 {
        for x in &mut r {
            *x *= 0.5 / norm;
        }
    }
    bloch_state(r)
}

/// `I/2 + r⃗·σ⃗` for `|r⃗| ≤ ½`.
pub fn bloch_state(r: [f64; 3]) -> HermitianMatrix {
    HermitianMatrix::from_rows(&[
        vec![c(0.5 + r[2], 0.0), c(r[0], -r[1])],
        vec![c(r[0], r[1]), c(0.5 - r[2], 0.0)],
    ])
    .unwrap()
}

/// Bloch vectors on a cubic grid of spacing `step` inside the ball of radius ½.
pub fn bloch_grid(step: f64) -> Vec<[f64; 3]> {
    let k = (0.5 / step).floor() as i64;
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            for l in -k..=k {
                let r = [i as f64 * step, j as f64 * step, l as f64 * step];
                if r.iter().map(|x| x * x).sum::<f64>() <= 0.25 {
                    out.push(r);
                }
            }
        }
    }
    out
}

/// `Tr(E·bloch_state(r))` without forming the state.
pub fn bloch_expectation(e: &HermitianMatrix, r: [f64; 3]) -> f64 {
    let (a, d, b) = (e.get(0, 0).re, e.get(1, 1).re, e.get(0, 1));
    0.5 * (a + d) + 2.0 * (b.re * r[0] - b.im * r[1]) + (a - d) * r[2]
}

fn matvec(h: &HermitianMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let n = h.dim();
    (0..n)
        .map(|i| (0..n).map(|j| h.get(i, j) * x[j]).sum())
        .collect()
}

fn rayleigh(h: &HermitianMatrix, x: &[Complex64]) -> f64 {
    let hx = matvec(h, x);
    let num: Complex64 = x.iter().zip(&hx).map(|(a, b)| a.conj() * b).sum();
    num.re / x.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Largest eigenvalue by shifted power iteration from several starts.
pub fn lambda_max(h: &HermitianMatrix) -> f64 {
    let n = h.dim();
    let shift = h.frobenius_norm();
    let mut best = f64::NEG_INFINITY;
    for start in 0..3 {
        let mut x: Vec<Complex64> = (0..n)
            .map(|k| {
                c(
                    1.0 + 0.37 * ((k + start) as f64).sin(),
                    0.21 * ((k * (start + 2)) as f64).cos(),
                )
            })
            .collect();
        for _ in 0..4000 {
            let mut y = matvec(h, &x);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += xi * shift;
            }
            let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            x = y.into_iter().map(|z| z / norm).collect();
        }
        best = best.max(rayleigh(h, &x));
    }
    best
}

pub fn lambda_min(h: &HermitianMatrix) -> f64 {
    -lambda_max(&h.scale(-1.0))
}

/// Optimality gap of `sigma` as the projection of `h` onto density matrices:
/// `max_τ ⟨h − σ, τ − σ⟩ = λ_max(h − σ) − Tr((h − σ)σ)`. The distance from
/// `sigma` to the true projection is at most the square root of this gap.
pub fn projection_gap(h: &HermitianMatrix, sigma: &HermitianMatrix) -> f64 {
    let g = h.sub(sigma);
    lambda_max(&g) - g.trace_product(sigma)
}

/// Entrywise Hermiticity defect, trace error and most negative eigenvalue.
pub fn state_defects(sigma: &DensityMatrix) -> (f64, f64, f64) {
    let h = sigma.matrix();
    let n = h.dim();
    let mut herm: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((h.get(i, j) - h.get(j, i).conj()).norm());
        }
    }
    (herm, (h.trace() - 1.0).abs(), (-lambda_min(h)).max(0.0))
}

/// `√A` for a 2×2 positive semidefinite `A`: `(A + √det·I)/√(Tr A + 2√det)`.
pub fn sqrt_2x2(a: &HermitianMatrix) -> HermitianMatrix {
    assert_eq!(a.dim(), 2);
    let det = (a.get(0, 0).re * a.get(1, 1).re - a.get(0, 1).norm_sqr()).max(0.0);
    let s = det.sqrt();
    let t = (a.trace() + 2.0 * s).max(0.0).sqrt();
    if t == 0.0 {
        return HermitianMatrix::zeros(2);
    }
    a.add(&HermitianMatrix::identity(2).scale(s)).scale(1.0 / t)
}

/// `(√E, √(I − E))` for a qubit effect, lifted to register `index` of `registers`.
pub fn qubit_kraus(
    e: &Effect,
    index: usize,
    registers: usize,
) -> (HermitianMatrix, HermitianMatrix) {
    let id = HermitianMatrix::identity(2);
    let lift = |k: HermitianMatrix| {
        let mut out = HermitianMatrix::identity(1);
        for r in 0..registers {
            out = out.kron(if r == index { &k } else { &id });
        }
        out
    };
    (
        lift(sqrt_2x2(e.matrix())),
        lift(sqrt_2x2(&e.matrix().complement())),
    )
}

/// Failure probability of sequential measurements, summed along the single
/// all-accept path with normalized states.
pub fn survival_path(rho: &HermitianMatrix, accept: &[HermitianMatrix]) -> f64 {
    let mut state = rho.clone();
    let mut survive = 1.0;
    for k in accept {
        let next = state.sandwich(k);
        let p = next.trace();
        survive *= p;
        if p <= 0.0 {
            return 1.0;
        }
        state = next.scale(1.0 / p);
    }
    1.0 - survive
}

/// Unnormalized output of the randomized-length check sequence, summed over
/// every `(t, i_1, …, i_t)` path that passes: the trace is the success
/// probability.
pub fn passing_paths(
    rho: &HermitianMatrix,
    pass: &[HermitianMatrix],
    t_max: usize,
) -> HermitianMatrix {
    fn walk(
        state: &HermitianMatrix,
        weight: f64,
        depth: usize,
        pass: &[HermitianMatrix],
        t_max: usize,
        acc: &mut HermitianMatrix,
    ) {
        if depth > 0 {
            acc.add_scaled_in_place(weight / t_max as f64, state);
        }
        if depth == t_max {
            return;
        }
        for k in pass {
            walk(
                &state.sandwich(k),
                weight / pass.len() as f64,
                depth + 1,
                pass,
                t_max,
                acc,
            );
        }
    }
    let mut acc = HermitianMatrix::zeros(rho.dim());
    walk(rho, 1.0, 0, pass, t_max, &mut acc);
    acc
}

/// Haar-ish random unit vector from independent Gaussians (Box–Muller).
pub fn random_unit(dim: usize, rng: &mut RngStream) -> Vec<Complex64> {
    let mut gauss = || {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    let x: Vec<Complex64> = (0..dim).map(|_| c(gauss(), gauss())).collect();
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x.into_iter().map(|z| z / n).collect()
}

/// `a·I + (1 − a)·|φ⟩⟨φ|`, whose square root is `√a·I + (1 − √a)·|φ⟩⟨φ|`.
pub fn near_identity_effect(phi: &[Complex64], a: f64) -> (Effect, HermitianMatrix) {
    let p = HermitianMatrix::outer(phi);
    let id = HermitianMatrix::identity(phi.len());
    let e = id.scale(a).add(&p.scale(1.0 - a));
    let root = id.scale(a.sqrt()).add(&p.scale(1.0 - a.sqrt()));
    (Effect::new(e).unwrap(), root)
}

/// Second, independently written evaluation of every bound formula.
pub mod bounds_oracle {
    use super::LearningModel;

    fn ln_inv(x: f64) -> f64 {
        -x.ln()
    }

    pub fn qoccam(n: u32, gamma: f64, epsilon: f64, delta: f64, k: f64) -> f64 {
        let ge2 = (gamma * epsilon).powi(2);
        let log_term = ln_inv(gamma * epsilon).powi(2);
        k * f64::from(n) * log_term / (ge2 * ge2) + k * ln_inv(delta) / ge2
    }

    pub fn qoccam2(n: u32, gamma: f64, epsilon: f64, eta: f64, delta: f64, k: f64) -> f64 {
        let n = f64::from(n);
        let g = gamma - eta;
        let log_term = (n / (g * epsilon)).ln().powi(2);
        (k / epsilon) * (n * log_term / g.powi(2)) + (k / epsilon) * ln_inv(delta)
    }

    pub fn measure_once(n: u32, gamma: f64, epsilon: f64, delta: f64, k: f64) -> f64 {
        let denom = gamma.powi(4) * epsilon.powi(2);
        let log_term = ln_inv(gamma * epsilon).powi(2);
        k * f64::from(n) * log_term / (denom * denom) + k * ln_inv(delta) / denom
    }

    pub fn prediction(n: u32, alpha: f64, delta: f64, k: f64) -> f64 {
        let a2 = alpha.powi(2);
        k * f64::from(n) * ln_inv(alpha).powi(2) / (a2 * a2) + k * ln_inv(delta) / a2
    }

    pub fn lower(
        n: u32,
        gamma: f64,
        epsilon: f64,
        delta: f64,
        k: f64,
        model: LearningModel,
    ) -> f64 {
        let c = match model {
            LearningModel::ProbabilityLabels => 2,
            LearningModel::MeasureOnce => 4,
            LearningModel::Prediction => panic!("no lower bound for prediction"),
        };
        k * f64::from(n) / (epsilon * gamma.powi(c)) + k * ln_inv(delta) / epsilon
    }

    pub fn fat_dim(n: u32, gamma: f64) -> u64 {
        (f64::from(n) * 2f64.ln() / 2.0 / gamma.powi(2)).floor() as u64
    }

    pub fn entropy(p: f64) -> f64 {
        [p, 1.0 - p]
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    -x * x.ln() / 2f64.ln()
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Hermitian matrix with entries uniform in `[−scale, scale]` (real and imaginary parts).
#[allow(clippy::needless_range_loop)]
pub fn random_hermitian(dim: usize, scale: f64, rng: &mut RngStream) -> HermitianMatrix {
    let mut rows = vec![vec![c(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        rows[i][i] = c(rng.gen_range(-scale..scale), 0.0);
        for j in i + 1..dim {
            let z = c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            rows[i][j] = z;
            rows[j][i] = z.conj();
        }
    }
    HermitianMatrix::from_rows(&rows).unwrap()
}

pub fn within_3_sigma(sampled: f64, exact: f64, n: usize) -> bool {
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    (sampled - exact).abs() <= 3.0 * sigma + 1e-12
}

/// A pure state and `m` effects with `Tr(E_i ρ) ≥ 1 − δ`, plus their square roots.
pub fn near_identity_instance(
    dim: usize,
    m: usize,
    delta: f64,
    rng: &mut RngStream,
) -> (DensityMatrix, Vec<Effect>, Vec<HermitianMatrix>) {
    let rho = DensityMatrix::pure(&random_unit(dim, rng)).unwrap();
    let (effects, roots) = (0..m)
        .map(|_| {
            let a = 1.0 - delta * rng.gen_range(0.0..1.0);
            near_identity_effect(&random_unit(dim, rng), a)
        })
        .unzip();
    (rho, effects, roots)
}

pub fn epsilon(rho: &DensityMatrix, effects: &[Effect]) -> f64 {
    effects
        .iter()
        .map(|e| 1.0 - expectation(e, rho).unwrap())
        .fold(0.0, f64::max)
}

/// Qubit witness instances: honest-but-noisy and adversarial.
pub fn witness_fixtures() -> Vec<(DensityMatrix, Vec<Effect>)> {
    let mut rng = RngStream::new(103, 0);
    let mut out = Vec::new();
    for delta in [1e-4, 1e-3, 1e-2, 0.1] {
        let (rho, effects, _) = near_identity_instance(2, 3, delta, &mut rng);
        out.push((rho, effects));
    }
    for _ in 0..3 {
        let rho = sample_pure_state(1, &mut rng).unwrap();
        let effects = (0..3)
            .map(|_| Effect::projector(&random_unit(2, &mut rng)).unwrap())
            .collect();
        out.push((rho, effects));
    }
    out
}

/// Three effects with `1 − Tr(E_i ρ0) = ε` exactly.
pub fn honest_noisy(eps: f64, rng: &mut RngStream) -> (DensityMatrix, Vec<Effect>) {
    let psi = random_unit(2, rng);
    let rho = DensityMatrix::pure(&psi).unwrap();
    let effects = (0..3)
        .map(|_| {
            let phi = random_unit(2, rng);
            let overlap: f64 = phi
                .iter()
                .zip(&psi)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .norm_sqr();
            near_identity_effect(&phi, 1.0 - eps / (1.0 - overlap)).0
        })
        .collect();
    (rho, effects)
}
