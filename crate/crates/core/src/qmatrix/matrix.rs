use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmatrix::tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(CMatrix { dim, data })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(dim: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut m = Self::zeros(dim);
        for (j, col) in columns.iter().enumerate() {
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self† · other` without materializing the adjoint.
    pub fn adjoint_matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for k in 0..n {
            let self_row = &self.data[k * n..(k + 1) * n];
            let other_row = &other.data[k * n..(k + 1) * n];
            for (i, &a) in self_row.iter().enumerate() {
                let a = a.conj();
                if a == ZERO {
                    continue;
                }
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// A complex matrix equal to its own conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates Hermiticity entrywise at [`tol::HERMITIAN`] and stores the exact Hermitian part.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if !defect.is_finite() {
            return Err(Error::numerical("matrix has non-finite entries"));
        }
        if defect > tol::HERMITIAN {
            return Err(Error::validation(format!(
                "matrix is not Hermitian (max |a_jk - conj(a_kj)| = {defect:e})"
            )));
        }
        Ok(Self::hermitian_part(matrix))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let data: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Self::new(CMatrix::from_vec(dim, data)?)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// `(A + A†) / 2`, without validation.
    pub fn hermitian_part(mut m: CMatrix) -> Self {
        let n = m.dim;
        for i in 0..n {
            m.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = (m.data[i * n + j] + m.data[j * n + i].conj()) * 0.5;
                m.data[i * n + j] = avg;
                m.data[j * n + i] = avg.conj();
            }
        }
        HermitianMatrix(m)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMatrix::identity(dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = CMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        HermitianMatrix(m)
    }

    /// `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j].conj();
            }
        }
        HermitianMatrix(m)
    }

    /// `Σ_j w_j v_j v_j†` over the given columns of `basis`.
    pub fn weighted_projector_sum(basis: &CMatrix, weights: &[f64]) -> Self {
        let n = basis.dim();
        let mut m = CMatrix::zeros(n);
        for (j, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let col = basis.column(j);
            for i in 0..n {
                let a = col[i] * w;
                if a == ZERO {
                    continue;
                }
                let row = &mut m.data[i * n..(i + 1) * n];
                for (o, c) in row.iter_mut().zip(&col) {
                    *o += a * c.conj();
                }
            }
        }
        Self::hermitian_part(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    #[inline]
    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0.data[i * n + j] == ZERO))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn frobenius_distance(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .data
            .iter()
            .zip(&other.0.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `Re Tr(A·B)` for Hermitian A, B; the trace is real for such pairs.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        // Tr(AB) = Σ_jk A_jk B_kj = Σ_jk A_jk conj(B_jk)
        self.0
            .data
            .iter()
            .zip(&other.0.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(CMatrix {
            dim: self.dim(),
            data: self.0.data.iter().map(|z| z * s).collect(),
        })
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim(), other.dim());
        HermitianMatrix(CMatrix {
            dim: self.dim(),
            data: self
                .0
                .data
                .iter()
                .zip(&other.0.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.sub(&other.0))
    }

    /// `self += s · other`
    /// `self += s·diag(d)`.
    pub fn add_diagonal_in_place(&mut self, s: f64, d: &[f64]) {
        assert_eq!(self.dim(), d.len());
        for (k, x) in d.iter().enumerate() {
            self.0[(k, k)].re += s * x;
        }
    }

    pub fn add_scaled_in_place(&mut self, s: f64, other: &HermitianMatrix) {
        assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.data.iter_mut().zip(&other.0.data) {
            *a += b * s;
        }
    }

    /// `I - self`
    pub fn complement(&self) -> HermitianMatrix {
        HermitianMatrix::identity(self.dim()).sub(self)
    }

    /// `K·self·K` for Hermitian `K`; the result is Hermitian.
    pub fn sandwich(&self, k: &HermitianMatrix) -> HermitianMatrix {
        Self::hermitian_part(k.0.matmul(&self.0).matmul(&k.0))
    }

    /// `U·self·U†` for an arbitrary square `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> HermitianMatrix {
        Self::hermitian_part(u.matmul(&self.0).matmul(&u.adjoint()))
    }

    /// Tensor (Kronecker) product `self ⊗ other`.
    pub fn kron(&self, other: &HermitianMatrix) -> HermitianMatrix {
        let (a, b) = (self.dim(), other.dim());
        let n = a * b;
        let mut m = CMatrix::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let x = self.0[(i, j)];
                if x == ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        m.data[(i * b + k) * n + (j * b + l)] = x * other.0[(k, l)];
                    }
                }
            }
        }
        HermitianMatrix(m)
    }
}

/// Fixture/config literal: `dim` plus row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixLiteral {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixLiteral> for HermitianMatrix {
    type Error = Error;

    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        let data = lit
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        HermitianMatrix::new(CMatrix::from_vec(lit.dim, data)?)
    }
}

impl From<HermitianMatrix> for MatrixLiteral {
    fn from(h: HermitianMatrix) -> Self {
        MatrixLiteral {
            dim: h.dim(),
            entries: h.0.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}
