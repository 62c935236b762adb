//! Row-major dense matrices and rank-1 factor pairs.

use super::LinalgError;

/// A dense real matrix stored in row-major order.
///
/// Every constructor rejects non-finite entries, so downstream kernels never
/// have to guard against NaN or infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// `value · 1 1ᵀ`
    pub fn constant(rows: usize, cols: usize, value: f64) -> Self {
        assert!(value.is_finite(), "constant matrix entry must be finite");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                op: "from_row_major",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix entry by entry.
    ///
    /// # Panics
    /// Panics if `f` produces a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                data.push(v);
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// # Panics
    /// Panics if `value` is not finite.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(value.is_finite(), "non-finite entry at ({i}, {j})");
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out.data[j * self.rows + i] = v;
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`
    pub fn t_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "t_matvec length mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| c * self.get(i, j))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub(crate) fn zip_with(
        &self,
        other: &DenseMatrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        let data: Vec<f64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        DenseMatrix::from_row_major(self.rows, self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise ℓ∞ norm, `max |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`, or `None` when the matrix is not square.
    pub fn asymmetry(&self) -> Option<f64> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Some(worst)
    }

    /// Permutes rows and columns: `out[i][j] = self[row_perm[i]][col_perm[j]]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        assert_eq!(row_perm.len(), self.rows);
        assert_eq!(col_perm.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self.get(row_perm[i], col_perm[j]))
    }
}

/// Rank-1 matrix `left · rightᵀ`, kept in factored form.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredVectorPair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl FactoredVectorPair {
    pub fn new(left: Vec<f64>, right: Vec<f64>) -> Self {
        Self { left, right }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::new(vec![1.0; rows], vec![1.0; cols])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.len(), self.right.len())
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.left[i] * self.right[j]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let (r, c) = self.shape();
        DenseMatrix::from_fn(r, c, |i, j| self.entry(i, j))
    }

    /// `(left · rightᵀ) ∘ a`, without materializing the rank-1 factor.
    pub fn hadamard_dense(&self, a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.shape() != a.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "hadamard",
                left: self.shape(),
                right: a.shape(),
            });
        }
        let mut out = a.clone();
        for (i, row) in out.data.chunks_mut(a.cols.max(1)).enumerate().take(a.rows) {
            let li = self.left[i];
            for (x, rj) in row.iter_mut().zip(&self.right) {
                *x *= li * rj;
            }
        }
        Ok(out)
    }

    /// Entrywise power of the represented matrix, computed factor by factor.
    pub fn hadamard_power(&self, exponent: f64) -> Result<FactoredVectorPair, LinalgError> {
        hadamard_power(self, exponent)
    }
}

/// Entrywise product of two equally shaped matrices.
pub fn hadamard(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    a.zip_with(b, "hadamard", |x, y| x * y)
}

/// `(w uᵀ)^(p)` entrywise equals `w^p (u^p)ᵀ`, so only the factors are raised.
///
/// Negative exponents need strictly positive factors; fractional exponents
/// need nonnegative ones.
pub fn hadamard_power(
    w: &FactoredVectorPair,
    exponent: f64,
) -> Result<FactoredVectorPair, LinalgError> {
    if !exponent.is_finite() {
        return Err(LinalgError::Domain(format!(
            "hadamard exponent must be finite, got {exponent}"
        )));
    }
    let raise = |v: &[f64], side: &str| -> Result<Vec<f64>, LinalgError> {
        v.iter()
            .enumerate()
            .map(|(idx, &x)| {
                if exponent < 0.0 && x <= 0.0 {
                    return Err(LinalgError::Domain(format!(
                        "{side} factor entry {idx} = {x} is not positive; cannot raise to {exponent}"
                    )));
                }
                if x < 0.0 && exponent.fract() != 0.0 {
                    return Err(LinalgError::Domain(format!(
                        "{side} factor entry {idx} = {x} is negative; fractional power {exponent} undefined"
                    )));
                }
                let y = x.powf(exponent);
                if !y.is_finite() {
                    return Err(LinalgError::Domain(format!(
                        "{side} factor entry {idx} = {x} overflows when raised to {exponent}"
                    )));
                }
                Ok(y)
            })
            .collect()
    };
    Ok(FactoredVectorPair {
        left: raise(&w.left, "left")?,
        right: raise(&w.right, "right")?,
    })
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
