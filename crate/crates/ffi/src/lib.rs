//! C ABI over `pgt-core`.
//!
//! Objects cross the boundary as opaque handles created by `pgt_*_new` and
//! released by the matching `pgt_*_free`. Every fallible call returns a
//! [`PgtStatus`]; on failure, [`pgt_last_error_message`] describes the cause.
//! Matrices are passed as `dim * dim` row-major entries, each an adjacent
//! `(re, im)` pair of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pgt_core::bounds::{self, BoundQuery, LearningModel};
use pgt_core::learner::{self, LearnedHypothesis, LearnerConfig, TrainingSet};
use pgt_core::protocols;
use pgt_core::qmatrix::{self, CMatrix, Complex64, DensityMatrix, Effect, HermitianMatrix};
use pgt_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgtStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Numerical = 3,
    Constraint = 4,
    DimensionMismatch = 5,
    DegenerateBranch = 6,
    Construction = 7,
    Panic = 8,
}

pub struct PgtDensity(DensityMatrix);

pub struct PgtEffect(Effect);

pub struct PgtHypothesis(LearnedHypothesis);

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PgtLearnerConfig {
    pub eta: f64,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgtLearner {
    Feasible = 0,
    Quadratic = 1,
    Absolute = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PgtHypothesisSummary {
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
    pub vacuous: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgtBound {
    UpperFeasibility = 0,
    UpperFeasibilityImproved = 1,
    UpperMeasureOnce = 2,
    UpperPrediction = 3,
    LowerProbabilityLabels = 4,
    LowerMeasureOnce = 5,
}

/// `alpha` is read only by the prediction bound; `k` is the constant factor.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PgtBoundQuery {
    pub n_qubits: u32,
    pub gamma: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    pub k: f64,
    pub alpha: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PgtBoundResult {
    pub m: u64,
    pub value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> PgtStatus {
    match e {
        Error::Numerical(_) => PgtStatus::Numerical,
        Error::Constraint { .. } => PgtStatus::Constraint,
        Error::DimensionMismatch { .. } => PgtStatus::DimensionMismatch,
        Error::DegenerateBranch { .. } => PgtStatus::DegenerateBranch,
        Error::Construction(_) => PgtStatus::Construction,
        _ => PgtStatus::Validation,
    }
}

struct Failure(PgtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PgtStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PgtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PgtStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside pgt".into());
            PgtStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn hermitian(dim: usize, entries: *const f64) -> Result<HermitianMatrix, Failure> {
    let len = dim
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(2))
        .ok_or_else(|| {
            Failure(
                PgtStatus::Validation,
                format!("dimension {dim} is too large"),
            )
        })?;
    let raw = slice(entries, len, "entries")?;
    let data = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    Ok(HermitianMatrix::new(CMatrix::from_vec(dim, data)?)?)
}

unsafe fn effect_list(effects: *const *const PgtEffect, m: usize) -> Result<Vec<Effect>, Failure> {
    slice(effects, m, "effects")?
        .iter()
        .map(|&e| deref(e, "effect").map(|e| e.0.clone()))
        .collect()
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next `pgt_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pgt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn pgt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `entries` holds `2 * dim * dim` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_density_new(
    dim: usize,
    entries: *const f64,
    out: *mut *mut PgtDensity,
) -> PgtStatus {
    guard(|| {
        let rho = DensityMatrix::new(hermitian(dim, entries)?)?;
        write_out(out, Box::into_raw(Box::new(PgtDensity(rho))))
    })
}

/// Closest density matrix to the Hermitian matrix `entries` in Frobenius norm.
///
/// # Safety
/// As for [`pgt_density_new`].
#[no_mangle]
pub unsafe extern "C" fn pgt_project_to_density(
    dim: usize,
    entries: *const f64,
    out: *mut *mut PgtDensity,
) -> PgtStatus {
    guard(|| {
        let rho = qmatrix::project_to_density(&hermitian(dim, entries)?)?;
        write_out(out, Box::into_raw(Box::new(PgtDensity(rho))))
    })
}

/// # Safety
/// `state` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgt_density_dim(state: *const PgtDensity) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the `2 * dim * dim` entries into `out`, which holds `len` doubles.
///
/// # Safety
/// `state` is a live handle; `out` holds `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pgt_density_entries(
    state: *const PgtDensity,
    out: *mut f64,
    len: usize,
) -> PgtStatus {
    guard(|| {
        let m = deref(state, "state")?.0.matrix().as_matrix();
        let need = 2 * m.as_slice().len();
        if len < need {
            return Err(Failure(
                PgtStatus::Validation,
                format!("buffer holds {len} doubles, need {need}"),
            ));
        }
        let out = slice_mut(out, need, "out")?;
        for (pair, z) in out.chunks_exact_mut(2).zip(m.as_slice()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `state` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgt_density_free(state: *mut PgtDensity) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// As for [`pgt_density_new`].
#[no_mangle]
pub unsafe extern "C" fn pgt_effect_new(
    dim: usize,
    entries: *const f64,
    out: *mut *mut PgtEffect,
) -> PgtStatus {
    guard(|| {
        let e = Effect::new(hermitian(dim, entries)?)?;
        write_out(out, Box::into_raw(Box::new(PgtEffect(e))))
    })
}

/// # Safety
/// `effect` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgt_effect_free(effect: *mut PgtEffect) {
    if !effect.is_null() {
        drop(Box::from_raw(effect));
    }
}

/// `Tr(E ρ)`.
///
/// # Safety
/// Handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_expectation(
    effect: *const PgtEffect,
    state: *const PgtDensity,
    out: *mut f64,
) -> PgtStatus {
    guard(|| {
        let p = qmatrix::expectation(&deref(effect, "effect")?.0, &deref(state, "state")?.0)?;
        write_out(out, p)
    })
}

/// Euclidean projection of `v` onto the probability simplex.
///
/// # Safety
/// `v` and `out` each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pgt_simplex_project(v: *const f64, n: usize, out: *mut f64) -> PgtStatus {
    guard(|| {
        let x = qmatrix::simplex_project(slice(v, n, "v")?)?;
        slice_mut(out, n, "out")?.copy_from_slice(&x);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn pgt_learner_config_default() -> PgtLearnerConfig {
    let d = LearnerConfig::default();
    PgtLearnerConfig {
        eta: d.eta,
        max_iters: d.max_iters,
        step_init: d.step_init,
        tol: d.tol,
    }
}

/// Fits a hypothesis to `m` effects. The feasible learner reads `labels`
/// as probabilities; the others read them as bits (nonzero is 1).
///
/// # Safety
/// `effects` and `labels` hold `m` entries; `config` is null (defaults) or
/// readable; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_learn(
    rule: PgtLearner,
    dim: usize,
    effects: *const *const PgtEffect,
    labels: *const f64,
    m: usize,
    config: *const PgtLearnerConfig,
    out: *mut *mut PgtHypothesis,
) -> PgtStatus {
    guard(|| {
        let effects = effect_list(effects, m)?;
        let labels = slice(labels, m, "labels")?.to_vec();
        let config = match config.as_ref() {
            None => LearnerConfig::default(),
            Some(c) => LearnerConfig {
                eta: c.eta,
                max_iters: c.max_iters,
                step_init: c.step_init,
                tol: c.tol,
                init_state: None,
            },
        };
        let h = match rule {
            PgtLearner::Feasible => learner::learn_feasible(
                &TrainingSet::probabilities(dim, effects, labels)?,
                &config,
            )?,
            PgtLearner::Quadratic | PgtLearner::Absolute => {
                let bits = labels.iter().map(|&b| b != 0.0).collect();
                let train = TrainingSet::bits(dim, effects, bits)?;
                if rule == PgtLearner::Quadratic {
                    learner::learn_quadratic(&train, &config)?
                } else {
                    learner::learn_absolute(&train, &config)?
                }
            }
        };
        write_out(out, Box::into_raw(Box::new(PgtHypothesis(h))))
    })
}

/// # Safety
/// `h` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_hypothesis_summary(
    h: *const PgtHypothesis,
    out: *mut PgtHypothesisSummary,
) -> PgtStatus {
    guard(|| {
        let h = &deref(h, "hypothesis")?.0;
        write_out(
            out,
            PgtHypothesisSummary {
                final_loss: h.final_loss,
                iterations: h.iterations,
                converged: h.converged,
                max_residual: h.max_residual,
                vacuous: h.vacuous,
            },
        )
    })
}

/// A new density handle holding a copy of the hypothesis state.
///
/// # Safety
/// `h` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_hypothesis_state(
    h: *const PgtHypothesis,
    out: *mut *mut PgtDensity,
) -> PgtStatus {
    guard(|| {
        let sigma = deref(h, "hypothesis")?.0.sigma.clone();
        write_out(out, Box::into_raw(Box::new(PgtDensity(sigma))))
    })
}

/// # Safety
/// `h` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgt_hypothesis_free(h: *mut PgtHypothesis) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Probability that measuring `effects` in order on `state` rejects at
/// least once, accepting through `√E`.
///
/// # Safety
/// `state` is live; `effects` holds `m` live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_sequential_survival(
    state: *const PgtDensity,
    effects: *const *const PgtEffect,
    m: usize,
    out: *mut f64,
) -> PgtStatus {
    guard(|| {
        let effects = effect_list(effects, m)?;
        let p = protocols::sequential_survival(&deref(state, "state")?.0, &effects)?;
        write_out(out, p)
    })
}

/// # Safety
/// `query` is readable; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_bound(
    which: PgtBound,
    query: *const PgtBoundQuery,
    out: *mut PgtBoundResult,
) -> PgtStatus {
    guard(|| {
        let q = deref(query, "query")?;
        let base = BoundQuery::new(q.n_qubits, q.gamma, q.epsilon, q.eta, q.delta).with_k(q.k);
        let r = match which {
            PgtBound::UpperFeasibility => bounds::m_upper_qoccam(&base),
            PgtBound::UpperFeasibilityImproved => bounds::m_upper_qoccam2(&base),
            PgtBound::UpperMeasureOnce => bounds::m_upper_measure_once(&base),
            PgtBound::UpperPrediction => bounds::m_upper_prediction(&base.with_alpha(q.alpha)),
            PgtBound::LowerProbabilityLabels => {
                bounds::m_lower(&base.with_model(LearningModel::ProbabilityLabels))
            }
            PgtBound::LowerMeasureOnce => {
                bounds::m_lower(&base.with_model(LearningModel::MeasureOnce))
            }
        }?;
        write_out(
            out,
            PgtBoundResult {
                m: r.m,
                value: r.value,
            },
        )
    })
}

/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_fat_dim_upper(n_qubits: u32, gamma: f64, out: *mut u64) -> PgtStatus {
    guard(|| write_out(out, bounds::fat_dim_upper(n_qubits, gamma)?))
}

/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn pgt_binary_entropy(p: f64, out: *mut f64) -> PgtStatus {
    guard(|| write_out(out, bounds::binary_entropy(p)?))
}
