//! Dense row-major matrix and vector containers.
//!
//! `RealMatrix` is a plain `Vec<f64>` behind a `(rows, cols)` shape; it holds
//! feature batches, activations, parameters, and gradients. No BLAS — layer
//! sizes here are tens of units, and a cache-friendly triple loop is plenty.

use crate::error::{Error, Result};

/// Dense vector of f64 values.
pub type RealVector = Vec<f64>;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from row-major data, checking length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested row slices; rows must have equal lengths.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_vec(nrows, ncols, data)
    }

    /// Identity matrix of size n.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self * other^T`, i.e. `(n x k) * (m x k) -> (n x m)`.
    ///
    /// Both operands are walked along contiguous rows.
    pub fn matmul_transpose_b(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "inner dims {}x{} vs {}x{}^T",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RealMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                let mut sum = 0.0;
                for k in 0..self.cols {
                    sum += a[k] * b[k];
                }
                out.data[i * other.rows + j] = sum;
            }
        }
        Ok(out)
    }

    /// `self^T * other`, i.e. `(n x k)^T * (n x m) -> (k x m)`.
    pub fn matmul_transpose_a(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "inner dims {}x{}^T vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RealMatrix::zeros(self.cols, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let b = other.row(i);
            for k in 0..self.cols {
                let aik = a[k];
                if aik == 0.0 {
                    continue;
                }
                let orow = &mut out.data[k * other.cols..(k + 1) * other.cols];
                for (o, &bv) in orow.iter_mut().zip(b) {
                    *o += aik * bv;
                }
            }
        }
        Ok(out)
    }

    /// Plain `self * other`, `(n x k) * (k x m) -> (n x m)`.
    pub fn matmul(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "inner dims {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RealMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let orow_start = i * other.cols;
            for k in 0..self.cols {
                let aik = a[k];
                if aik == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[orow_start..orow_start + other.cols];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += aik * bv;
                }
            }
        }
        Ok(out)
    }

    /// Element-wise sum; shapes must match.
    pub fn add(&self, other: &RealMatrix) -> Result<RealMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("add: shape mismatch".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Multiplies every entry by a scalar.
    pub fn scale(&self, s: f64) -> RealMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    /// Keeps the given column range, dropping the rest.
    pub fn columns(&self, range: std::ops::Range<usize>) -> RealMatrix {
        assert!(range.end <= self.cols);
        let ncols = range.len();
        let mut data = Vec::with_capacity(self.rows * ncols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[range.clone()]);
        }
        Self { rows: self.rows, cols: ncols, data }
    }

    /// Appends `extra` as one additional column.
    pub fn append_column(&self, extra: &[f64]) -> Result<RealMatrix> {
        if extra.len() != self.rows {
            return Err(Error::Shape("append_column: length mismatch".into()));
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.push(extra[r]);
        }
        Ok(Self { rows: self.rows, cols: self.cols + 1, data })
    }

    /// Gathers the given rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> RealMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: indices.len(), cols: self.cols, data }
    }

    /// Single-column matrices are vectors in disguise.
    pub fn as_column_slice(&self) -> &[f64] {
        assert_eq!(self.cols, 1, "as_column_slice requires a single column");
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_length_and_nan() {
        assert!(RealMatrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(RealMatrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn matmul_variants_agree() {
        let a = RealMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = RealMatrix::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab.data(), &[58.0, 64.0, 139.0, 154.0]);

        // (a * b) == (a * (b^T)^T) via matmul_transpose_b on b^T
        let bt = RealMatrix::from_vec(2, 3, vec![7.0, 9.0, 11.0, 8.0, 10.0, 12.0]).unwrap();
        let ab2 = a.matmul_transpose_b(&bt).unwrap();
        assert_eq!(ab.data(), ab2.data());

        // a^T * a through matmul_transpose_a
        let ata = a.matmul_transpose_a(&a).unwrap();
        let at = RealMatrix::from_vec(3, 2, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]).unwrap();
        assert_eq!(ata.data(), at.matmul(&a).unwrap().data());
    }

    #[test]
    fn column_ops() {
        let m = RealMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let with_extra = m.append_column(&[9.0, 10.0]).unwrap();
        assert_eq!(with_extra.row(0), &[1.0, 2.0, 9.0]);
        assert_eq!(with_extra.columns(0..2).data(), m.data());
        assert_eq!(with_extra.columns(2..3).as_column_slice(), &[9.0, 10.0]);
    }
}
