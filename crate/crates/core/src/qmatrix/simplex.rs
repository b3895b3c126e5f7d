use crate::error::{Error, Result};

/// Euclidean projection onto the probability simplex `{x ≥ 0, Σx = 1}`
/// by sorting and thresholding.
pub fn simplex_project(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::validation(
            "cannot project an empty vector onto the simplex",
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical(
            "simplex projection input has non-finite entries",
        ));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        } else {
            break;
        }
    }
    Ok(v.iter().map(|&x| (x - threshold).max(0.0)).collect())
}
