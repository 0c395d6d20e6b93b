//! Small dense square matrices.
//!
//! Everything in this crate works with n×n real matrices where n is a small
//! runtime value (2 to about 6). Storage is row-major: `data[i * n + j]`
//! holds entry (i, j). Entries are checked for finiteness at construction.
//!
//! Arithmetic operators (`+`, `-`, `*`) panic on dimension mismatch, like
//! most dense matrix libraries; the fallible entry points of the other
//! modules validate dimensions before reaching them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Dense square real matrix, n ≥ 2, finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

/// JSON shape: `{"n": 2, "entries": [[..], [..]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.entries.len() != repr.n {
            return Err(Error::InvalidMatrix(format!(
                "entries: expected {} rows, got {}",
                repr.n,
                repr.entries.len()
            )));
        }
        Matrix::from_rows(&repr.entries)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr {
            n: m.n,
            entries: m.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Matrix {
    /// Builds an n×n matrix from row-major data.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("dimension must be >= 2, got {n}")));
        }
        if data.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / n,
                pos % n
            )));
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Matrix::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "dimension must be >= 2");
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Matrix::new(n, data)
    }

    /// Rank-one matrix u vᵀ.
    pub fn outer(u: &[f64], v: &[f64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        let n = u.len();
        let data = u.iter().flat_map(|ui| v.iter().map(move |vj| ui * vj)).collect();
        Matrix::new(n, data)
    }

    /// Elementary matrix with a single one at (i, j).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(n);
        m.data[i * n + j] = 1.0;
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Errors unless `other` has the same dimension.
    pub fn check_dim(&self, other: &Matrix) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            })
        }
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, x.len(), "mat_vec dimension mismatch");
        self.rows().map(|row| dot(row, x)).collect()
    }

    /// uᵀ M v.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.mat_vec(v))
    }

    /// Frobenius inner product ⟨X, Y⟩ = tr XᵀY.
    pub fn dot(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "dot dimension mismatch");
        dot(&self.data, &other.data)
    }

    /// |X|² = Σᵢⱼ Xᵢⱼ².
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        (self - other).max_abs()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn det(&self) -> f64 {
        det_raw(self.n, &self.data)
    }

    /// Cofactor matrix, `(cof X)ᵢⱼ = (-1)^(i+j) det X'ᵢⱼ` with X'ᵢⱼ the
    /// submatrix without row i and column j. Satisfies X (cof X)ᵀ = det(X) I.
    pub fn cofactor(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            for j in 0..n {
                minor.clear();
                for r in (0..n).filter(|&r| r != i) {
                    for c in (0..n).filter(|&c| c != j) {
                        minor.push(self.get(r, c));
                    }
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                out.data[i * n + j] = sign * det_raw(n - 1, &minor);
            }
        }
        out
    }

    /// Sum of all principal 2×2 minors, Σ_{i<j} (XᵢᵢXⱼⱼ − XᵢⱼXⱼᵢ).
    pub fn s2(&self) -> f64 {
        let n = self.n;
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += self.get(i, i) * self.get(j, j) - self.get(i, j) * self.get(j, i);
            }
        }
        sum
    }

    /// ½(X + Xᵀ)
    pub fn sym_part(&self) -> Matrix {
        (self + &self.transpose()).scale(0.5)
    }

    /// ½(X − Xᵀ)
    pub fn skew_part(&self) -> Matrix {
        (self - &self.transpose()).scale(0.5)
    }

    pub fn svd(&self) -> Result<SvdResult> {
        svd(self)
    }
}

macro_rules! elementwise_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Matrix> for &Matrix {
            type Output = Matrix;
            fn $method(self, rhs: &Matrix) -> Matrix {
                assert_eq!(self.n, rhs.n, "dimension mismatch");
                Matrix {
                    n: self.n,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $trait<Matrix> for Matrix {
            type Output = Matrix;
            fn $method(self, rhs: Matrix) -> Matrix {
                &self $op &rhs
            }
        }
        impl $trait<&Matrix> for Matrix {
            type Output = Matrix;
            fn $method(self, rhs: &Matrix) -> Matrix {
                &self $op rhs
            }
        }
    };
}

elementwise_op!(Add, add, +);
elementwise_op!(Sub, sub, -);

impl Mul<&Matrix> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Determinant of a row-major k×k block, k ≥ 0.
fn det_raw(k: usize, data: &[f64]) -> f64 {
    match k {
        0 => 1.0,
        1 => data[0],
        2 => data[0] * data[3] - data[1] * data[2],
        _ => {
            let mut a = data.to_vec();
            let mut det = 1.0;
            for col in 0..k {
                let pivot = (col..k)
                    .max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()))
                    .unwrap();
                if a[pivot * k + col] == 0.0 {
                    return 0.0;
                }
                if pivot != col {
                    for c in 0..k {
                        a.swap(pivot * k + c, col * k + c);
                    }
                    det = -det;
                }
                let p = a[col * k + col];
                det *= p;
                for r in (col + 1)..k {
                    let factor = a[r * k + col] / p;
                    if factor != 0.0 {
                        for c in col..k {
                            a[r * k + c] -= factor * a[col * k + c];
                        }
                    }
                }
            }
            det
        }
    }
}

/// Singular value decomposition X = U diag(σ) Vᵀ.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    /// Descending, non-negative.
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let n = self.u.n();
        let mut us = self.u.clone();
        for i in 0..n {
            for j in 0..n {
                us.set(i, j, us.get(i, j) * self.sigma[j]);
            }
        }
        us.matmul(&self.v.transpose())
    }
}

/// Relative threshold below which two columns count as orthogonal.
const JACOBI_EPS: f64 = 1e-15;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of W = X V are rotated pairwise until mutually orthogonal; then
/// σⱼ = |Wⱼ| and Uⱼ = Wⱼ / σⱼ. Columns of U belonging to zero singular
/// values are completed to an orthonormal basis.
pub fn svd(x: &Matrix) -> Result<SvdResult> {
    let n = x.n();
    let max_sweeps = 100 * n * n;
    let floor = (1e-14 * x.frobenius_norm()).powi(2);
    let mut w = x.clone();
    let mut v = Matrix::identity(n);

    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let (wp, wq) = (w.get(i, p), w.get(i, q));
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() || gamma.abs() <= floor {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..n {
                        let (mp, mq) = (m.get(i, p), m.get(i, q));
                        m.set(i, p, c * mp - s * mq);
                        m.set(i, q, s * mp + c * mq);
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: max_sweeps });
    }

    let norms: Vec<f64> = (0..n).map(|j| norm_sq(&w.column(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut v_sorted = Matrix::zeros(n);
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            v_sorted.set(i, k, v.get(i, j));
        }
    }

    // Left vectors: normalized W columns, re-orthogonalized in descending σ
    // order. Lost columns (σ = 0 or swamped by roundoff) are filled from the
    // standard basis.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let candidate = if sigma[k] > 0.0 {
            orthonormalize_against(&basis, w.column(j).iter().map(|x| x / sigma[k]).collect())
        } else {
            None
        };
        let col = match candidate {
            Some(c) => c,
            None => (0..n)
                .filter_map(|e| {
                    let mut unit = vec![0.0; n];
                    unit[e] = 1.0;
                    orthonormalize_against(&basis, unit)
                })
                .next()
                .expect("standard basis spans R^n"),
        };
        basis.push(col);
    }
    let mut u = Matrix::zeros(n);
    for (k, col) in basis.iter().enumerate() {
        for (i, &value) in col.iter().enumerate() {
            u.set(i, k, value);
        }
    }

    Ok(SvdResult {
        u,
        sigma,
        v: v_sorted,
    })
}

/// Twice-iterated Gram–Schmidt of `vec` against orthonormal `basis`;
/// `None` if the remainder is too small to normalize reliably.
fn orthonormalize_against(basis: &[Vec<f64>], mut vec: Vec<f64>) -> Option<Vec<f64>> {
    let start = norm_sq(&vec).sqrt();
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, &vec);
            for (x, bi) in vec.iter_mut().zip(b) {
                *x -= proj * bi;
            }
        }
    }
    let norm = norm_sq(&vec).sqrt();
    if norm <= 1e-8 * start.max(f64::MIN_POSITIVE) || !norm.is_normal() {
        return None;
    }
    Some(vec.into_iter().map(|x| x / norm).collect())
}

/// Seeded rotation R ∈ SO(n): a Gaussian matrix orthonormalized column by
/// column, with the first column negated when the determinant is −1.
pub fn random_rotation(n: usize, seed: u64) -> Matrix {
    assert!(n >= 2, "dimension must be >= 2");
    let mut gen = rng::stream(seed, 0);
    loop {
        let g = rng::gaussian_matrix(&mut gen, n);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            match orthonormalize_against(&cols, g.column(j)) {
                Some(c) => cols.push(c),
                None => break,
            }
        }
        if cols.len() < n {
            continue;
        }
        let mut r = Matrix::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            for (i, &value) in col.iter().enumerate() {
                r.set(i, j, value);
            }
        }
        if r.det() < 0.0 {
            for i in 0..n {
                r.set(i, 0, -r.get(i, 0));
            }
        }
        return r;
    }
}
