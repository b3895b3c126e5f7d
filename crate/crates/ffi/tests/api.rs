use std::ffi::CStr;
use std::ptr;

use pgt_ffi::*;

const KET0: [f64; 8] = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
const PLUS: [f64; 8] = [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0];

fn last_error() -> String {
    let p = pgt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn effect(entries: &[f64; 8]) -> *mut PgtEffect {
    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { pgt_effect_new(2, entries.as_ptr(), &mut e) },
        PgtStatus::Ok
    );
    e
}

fn density(entries: &[f64]) -> *mut PgtDensity {
    let mut d = ptr::null_mut();
    let dim = ((entries.len() / 2) as f64).sqrt() as usize;
    assert_eq!(
        unsafe { pgt_density_new(dim, entries.as_ptr(), &mut d) },
        PgtStatus::Ok
    );
    d
}

#[test]
fn expectation_round_trip() {
    let rho = density(&KET0);
    let plus = effect(&PLUS);
    let mut p = 0.0;
    assert_eq!(unsafe { pgt_expectation(plus, rho, &mut p) }, PgtStatus::Ok);
    assert!((p - 0.5).abs() < 1e-15);
    assert!(pgt_last_error_message().is_null());
    assert_eq!(unsafe { pgt_density_dim(rho) }, 2);
    let mut buf = [9.0; 8];
    assert_eq!(
        unsafe { pgt_density_entries(rho, buf.as_mut_ptr(), 8) },
        PgtStatus::Ok
    );
    assert_eq!(buf, KET0);
    assert_eq!(
        unsafe { pgt_density_entries(rho, buf.as_mut_ptr(), 7) },
        PgtStatus::Validation
    );
    unsafe {
        pgt_effect_free(plus);
        pgt_density_free(rho);
        pgt_density_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut d = ptr::null_mut();
    // trace 2
    let bad = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    assert_eq!(
        unsafe { pgt_density_new(2, bad.as_ptr(), &mut d) },
        PgtStatus::Validation
    );
    assert!(d.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { pgt_density_new(2, ptr::null(), &mut d) },
        PgtStatus::NullPointer
    );
    assert!(last_error().contains("entries"));

    let big = density(&[
        0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0,
    ]);
    let e = effect(&KET0);
    let mut p = 0.0;
    assert_eq!(
        unsafe { pgt_expectation(e, big, &mut p) },
        PgtStatus::DimensionMismatch
    );
    unsafe {
        pgt_effect_free(e);
        pgt_density_free(big);
    }
}

#[test]
fn projections() {
    let v = [0.3, 1.2, -0.4];
    let mut x = [0.0; 3];
    assert_eq!(
        unsafe { pgt_simplex_project(v.as_ptr(), 3, x.as_mut_ptr()) },
        PgtStatus::Ok
    );
    assert!((x[0] - 0.05).abs() < 1e-12 && (x[1] - 0.95).abs() < 1e-12 && x[2] == 0.0);

    // diag(2, -1) projects to |0⟩⟨0|
    let h = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0];
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { pgt_project_to_density(2, h.as_ptr(), &mut d) },
        PgtStatus::Ok
    );
    let mut buf = [0.0; 8];
    unsafe { pgt_density_entries(d, buf.as_mut_ptr(), 8) };
    for (a, b) in buf.iter().zip(KET0) {
        assert!((a - b).abs() < 1e-12);
    }
    unsafe { pgt_density_free(d) };
}

#[test]
fn learners_fit_labels() {
    let effects = [effect(&KET0), effect(&PLUS)];
    let ptrs: Vec<*const PgtEffect> = effects.iter().map(|&e| e as *const _).collect();
    let labels = [0.8, 0.8];
    let mut config = pgt_learner_config_default();
    config.eta = 0.01;
    let mut h = ptr::null_mut();
    let status = unsafe {
        pgt_learn(
            PgtLearner::Feasible,
            2,
            ptrs.as_ptr(),
            labels.as_ptr(),
            2,
            &config,
            &mut h,
        )
    };
    assert_eq!(status, PgtStatus::Ok);
    let mut s = PgtHypothesisSummary::default();
    assert_eq!(unsafe { pgt_hypothesis_summary(h, &mut s) }, PgtStatus::Ok);
    assert!(s.converged && s.max_residual <= 0.01);

    let mut sigma = ptr::null_mut();
    assert_eq!(
        unsafe { pgt_hypothesis_state(h, &mut sigma) },
        PgtStatus::Ok
    );
    for (e, want) in effects.iter().zip(labels) {
        let mut p = 0.0;
        unsafe { pgt_expectation(*e, sigma, &mut p) };
        assert!((p - want).abs() <= 0.01 + 1e-9);
    }

    for rule in [PgtLearner::Quadratic, PgtLearner::Absolute] {
        let mut hb = ptr::null_mut();
        let bits = [1.0, 0.0];
        let status = unsafe {
            pgt_learn(
                rule,
                2,
                ptrs.as_ptr(),
                bits.as_ptr(),
                2,
                ptr::null(),
                &mut hb,
            )
        };
        assert_eq!(status, PgtStatus::Ok);
        unsafe { pgt_hypothesis_free(hb) };
    }
    let status = unsafe {
        pgt_learn(
            PgtLearner::Feasible,
            4,
            ptrs.as_ptr(),
            labels.as_ptr(),
            2,
            ptr::null(),
            &mut h,
        )
    };
    assert_ne!(status, PgtStatus::Ok);
    unsafe {
        pgt_hypothesis_free(h);
        pgt_density_free(sigma);
        effects.iter().for_each(|&e| pgt_effect_free(e));
    }
}

#[test]
fn bounds_and_named_constraints() {
    let mut fat = 0;
    assert_eq!(
        unsafe { pgt_fat_dim_upper(10, 0.1, &mut fat) },
        PgtStatus::Ok
    );
    assert_eq!(fat, 346);
    let mut h = 0.0;
    assert_eq!(unsafe { pgt_binary_entropy(0.5, &mut h) }, PgtStatus::Ok);
    assert_eq!(h, 1.0);

    let q = PgtBoundQuery {
        n_qubits: 4,
        gamma: 0.1,
        epsilon: 0.1,
        eta: 0.01,
        delta: 0.1,
        k: 1.0,
        alpha: 0.5,
    };
    let mut r = PgtBoundResult::default();
    assert_eq!(
        unsafe { pgt_bound(PgtBound::UpperFeasibility, &q, &mut r) },
        PgtStatus::Constraint
    );
    assert!(last_error().contains("γε ≥ 7η"));
    let q = PgtBoundQuery { eta: 0.0, ..q };
    for which in [
        PgtBound::UpperFeasibility,
        PgtBound::UpperFeasibilityImproved,
        PgtBound::UpperMeasureOnce,
        PgtBound::UpperPrediction,
        PgtBound::LowerProbabilityLabels,
        PgtBound::LowerMeasureOnce,
    ] {
        assert_eq!(
            unsafe { pgt_bound(which, &q, &mut r) },
            PgtStatus::Ok,
            "{which:?}"
        );
        assert!(r.m >= 1 && r.value.is_finite());
    }
}

#[test]
fn survival_of_a_sure_pass_is_zero() {
    let rho = density(&KET0);
    let e = effect(&KET0);
    let effects = [e as *const PgtEffect, e];
    let mut p = 1.0;
    assert_eq!(
        unsafe { pgt_sequential_survival(rho, effects.as_ptr(), 2, &mut p) },
        PgtStatus::Ok
    );
    assert!(p.abs() < 1e-12);
    let plus = effect(&PLUS);
    let effects = [plus as *const PgtEffect];
    assert_eq!(
        unsafe { pgt_sequential_survival(rho, effects.as_ptr(), 1, &mut p) },
        PgtStatus::Ok
    );
    assert!((p - 0.5).abs() < 1e-12);
    unsafe {
        pgt_effect_free(e);
        pgt_effect_free(plus);
        pgt_density_free(rho);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(pgt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
