//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the classical real Jacobi rotation. The combined
//! unitary `G` acts on columns/rows `p, q` only, so one rotation is `O(n)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmatrix::matrix::{CMatrix, HermitianMatrix};
use crate::qmatrix::tol;

/// Eigenpairs of a Hermitian matrix. Eigenvalues ascend; column `j` of
/// `vectors` belongs to `values[j]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub sweeps: usize,
}

impl Eigen {
    /// `V · diag(f(λ)) · V†`
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        HermitianMatrix::weighted_projector_sum(&self.vectors, &weights)
    }
}

pub fn hermitian_eig(h: &HermitianMatrix) -> Result<Eigen> {
    jacobi(h.as_matrix().clone(), CMatrix::identity(h.dim()))
}

/// Eigendecomposition started from a previous eigenbasis. When `basis`
/// nearly diagonalizes `h`, only one or two sweeps are needed.
pub fn hermitian_eig_from(h: &HermitianMatrix, basis: &CMatrix) -> Result<Eigen> {
    Error::check_dim(h.dim(), basis.dim())?;
    let rotated = basis.adjoint_matmul(&h.as_matrix().matmul(basis));
    jacobi(rotated, basis.clone())
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let s = a.as_slice();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += s[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn jacobi(mut a: CMatrix, mut v: CMatrix) -> Result<Eigen> {
    let n = a.dim();
    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::numerical("eigensolver input has non-finite entries"));
    }
    // Absolute threshold for unit-scale input, relative beyond that.
    let threshold = tol::JACOBI_OFF_DIAGONAL * scale.max(1.0);

    let mut sweeps = 0;
    while off_diagonal_norm(&a) >= threshold {
        if sweeps == tol::JACOBI_MAX_SWEEPS {
            return Err(Error::numerical(format!(
                "Jacobi eigensolver did not converge in {} sweeps",
                tol::JACOBI_MAX_SWEEPS
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = a.dim();
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let omega = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let w = omega.conj();

    // G = [[c, s], [-s·w, c·w]] on (p, q); A ← A·G, then A ← G†·A, V ← V·G.
    let g_qp = -w * s;
    let g_qq = w * c;
    {
        let data = a.as_mut_slice();
        for k in 0..n {
            let akp = data[k * n + p];
            let akq = data[k * n + q];
            data[k * n + p] = akp * c + akq * g_qp;
            data[k * n + q] = akp * s + akq * g_qq;
        }
        let gd_pq = g_qp.conj();
        let gd_qq = g_qq.conj();
        for k in 0..n {
            let apk = data[p * n + k];
            let aqk = data[q * n + k];
            data[p * n + k] = apk * c + aqk * gd_pq;
            data[q * n + k] = apk * s + aqk * gd_qq;
        }
        data[p * n + q] = Complex64::new(0.0, 0.0);
        data[q * n + p] = Complex64::new(0.0, 0.0);
        data[p * n + p].im = 0.0;
        data[q * n + q].im = 0.0;
    }
    let vd = v.as_mut_slice();
    for k in 0..n {
        let vkp = vd[k * n + p];
        let vkq = vd[k * n + q];
        vd[k * n + p] = vkp * c + vkq * g_qp;
        vd[k * n + q] = vkp * s + vkq * g_qq;
    }
}
