//! Dense row-major `f64` matrices and the kernels shared by the autodiff
//! graph and the plain (graph-free) forward paths.
//!
//! Every quantity is two-dimensional; a scalar is `1 x 1`, a row vector is
//! `1 x n`. Keeping the graph and the rollout code on the same kernels makes
//! a value computed on either path bit-identical.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor({}x{}, {:?})", self.rows, self.cols, self.data)
    }
}

impl Tensor {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "tensor data length {} does not match shape {}x{}",
            data.len(),
            rows,
            cols
        );
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::full(rows, cols, 0.0)
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::full(rows, cols, 1.0)
    }

    pub fn full(rows: usize, cols: usize, value: f64) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn scalar(value: f64) -> Self {
        Self { rows: 1, cols: 1, data: vec![value] }
    }

    pub fn row(data: Vec<f64>) -> Self {
        let cols = data.len();
        Self { rows: 1, cols, data }
    }

    pub fn column(data: Vec<f64>) -> Self {
        let rows = data.len();
        Self { rows, cols: 1, data }
    }

    /// Upper-triangular ones (`i <= j`); right-multiplying a `k x n` matrix by
    /// it produces running sums along each row.
    pub fn upper_ones(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                t.data[i * n + j] = 1.0;
            }
        }
        t
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
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Value of a `1 x 1` tensor.
    pub fn item(&self) -> f64 {
        assert!(self.rows == 1 && self.cols == 1, "item() on a {}x{} tensor", self.rows, self.cols);
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn reshape(&self, rows: usize, cols: usize) -> Self {
        assert_eq!(rows * cols, self.len(), "reshape changes element count");
        Self { rows, cols, data: self.data.clone() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.gemm(false, other, false)
    }

    /// `self * other^T` without materializing the transpose.
    pub fn matmul_nt(&self, other: &Self) -> Self {
        self.gemm(false, other, true)
    }

    /// `self^T * other` without materializing the transpose.
    pub fn matmul_tn(&self, other: &Self) -> Self {
        self.gemm(true, other, false)
    }

    fn gemm(&self, ta: bool, other: &Self, tb: bool) -> Self {
        let (m, k) = if ta { (self.cols, self.rows) } else { (self.rows, self.cols) };
        let (kb, n) = if tb { (other.cols, other.rows) } else { (other.rows, other.cols) };
        assert_eq!(
            k, kb,
            "matmul inner dimension mismatch: {}x{}{} * {}x{}{}",
            self.rows,
            self.cols,
            if ta { "^T" } else { "" },
            other.rows,
            other.cols,
            if tb { "^T" } else { "" }
        );
        if m == 0 || n == 0 || k == 0 {
            return Self::zeros(m, n);
        }
        let strides = |t: &Self, transposed: bool| {
            if transposed {
                (1, t.cols as isize)
            } else {
                (t.cols as isize, 1)
            }
        };
        let (rsa, csa) = strides(self, ta);
        let (rsb, csb) = strides(other, tb);
        let mut data = Vec::with_capacity(m * n);
        // SAFETY: the strides address exactly the row-major storage of each
        // operand (read as transposed when requested). With beta = 0 the
        // output is written without being read, so all m*n elements are
        // initialized before `set_len`.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                self.data.as_ptr(),
                rsa,
                csa,
                other.data.as_ptr(),
                rsb,
                csb,
                0.0,
                data.as_mut_ptr(),
                n as isize,
                1,
            );
            data.set_len(m * n);
        }
        Self { rows: m, cols: n, data }
    }

    /// `1 x 1` sum of all elements.
    pub fn sum_all(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Column totals: `r x c -> 1 x c`.
    pub fn sum_rows(&self) -> Self {
        let mut out = Self::zeros(1, self.cols);
        for r in 0..self.rows {
            for (o, v) in out.data.iter_mut().zip(self.row_slice(r)) {
                *o += v;
            }
        }
        out
    }

    /// Row totals: `r x c -> r x 1`.
    pub fn sum_cols(&self) -> Self {
        Self::column((0..self.rows).map(|r| self.row_slice(r).iter().sum()).collect())
    }

    /// Expands a `1 x 1`, `1 x c` or `r x 1` tensor to `rows x cols`.
    pub fn broadcast(&self, rows: usize, cols: usize) -> Self {
        assert!(
            broadcast_compatible(self.shape(), (rows, cols)),
            "cannot broadcast {}x{} to {}x{}",
            self.rows,
            self.cols,
            rows,
            cols
        );
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let sr = if self.rows == 1 { 0 } else { r };
                let sc = if self.cols == 1 { 0 } else { c };
                out.data[r * cols + c] = self.data[sr * self.cols + sc];
            }
        }
        out
    }

    /// Inverse of [`Tensor::broadcast`]: sums `rows x cols` back down to `shape`.
    pub fn reduce_to(&self, shape: (usize, usize)) -> Self {
        match shape {
            s if s == self.shape() => self.clone(),
            (1, 1) => Self::scalar(self.sum_all()),
            (1, c) if c == self.cols => self.sum_rows(),
            (r, 1) if r == self.rows => self.sum_cols(),
            _ => panic!("cannot reduce {}x{} to {}x{}", self.rows, self.cols, shape.0, shape.1),
        }
    }

    pub fn concat_cols(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "concat_cols row mismatch");
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row_slice(r));
            data.extend_from_slice(other.row_slice(r));
        }
        Self { rows: self.rows, cols, data }
    }

    pub fn concat_rows(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "concat_rows column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn slice_cols(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.cols, "column slice out of range");
        let mut data = Vec::with_capacity(self.rows * len);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row_slice(r)[start..start + len]);
        }
        Self { rows: self.rows, cols: len, data }
    }

    pub fn slice_rows(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.rows, "row slice out of range");
        Self {
            rows: len,
            cols: self.cols,
            data: self.data[start * self.cols..(start + len) * self.cols].to_vec(),
        }
    }

    /// Places `self` at column offset `start` of a zero matrix with `total` columns.
    pub fn pad_cols(&self, start: usize, total: usize) -> Self {
        assert!(start + self.cols <= total, "column pad out of range");
        let mut out = Self::zeros(self.rows, total);
        for r in 0..self.rows {
            out.data[r * total + start..r * total + start + self.cols].copy_from_slice(self.row_slice(r));
        }
        out
    }

    /// Places `self` at row offset `start` of a zero matrix with `total` rows.
    pub fn pad_rows(&self, start: usize, total: usize) -> Self {
        assert!(start + self.rows <= total, "row pad out of range");
        let mut out = Self::zeros(total, self.cols);
        out.data[start * self.cols..(start + self.rows) * self.cols].copy_from_slice(&self.data);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "dot length mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Adds a `1 x cols` row to every row.
    pub fn add_row(&self, bias: &Self) -> Self {
        assert_eq!(bias.shape(), (1, self.cols), "bias shape mismatch");
        let mut out = self.clone();
        for r in 0..self.rows {
            for (o, b) in out.data[r * self.cols..(r + 1) * self.cols].iter_mut().zip(&bias.data) {
                *o += b;
            }
        }
        out
    }

    pub fn tanh(&self) -> Self {
        self.map(fast_tanh)
    }

    pub fn exp(&self) -> Self {
        self.map(libm::exp)
    }

    pub fn ln(&self) -> Self {
        self.map(libm::log)
    }
}

pub(crate) fn broadcast_compatible(from: (usize, usize), to: (usize, usize)) -> bool {
    (from.0 == to.0 || from.0 == 1) && (from.1 == to.1 || from.1 == 1)
}

/// `sign(x) (1 - e^{-2|x|}) / (1 + e^{-2|x|})`: one `exp` instead of the
/// `expm1`-based routine; absolute error stays at rounding level.
pub(crate) fn fast_tanh(x: f64) -> f64 {
    let e = libm::exp(-2.0 * x.abs());
    let t = (1.0 - e) / (1.0 + e);
    if x < 0.0 {
        -t
    } else {
        t
    }
}
