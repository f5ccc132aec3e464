//! Row-major dense matrices of `f64` with the handful of kernels the
//! classifiers need.
//!
//! Kernels parallelize over output rows only. Every output element is summed
//! in the same order whatever the thread count, so results are bit-identical
//! across `--threads` settings.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Below this many multiply-adds a kernel runs on the calling thread.
const PAR_THRESHOLD: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} tensor",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
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

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
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

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn check(&self, cond: bool, op: &str, other: &Tensor) -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{op}: {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }

    /// `self · rhs`. Zero entries of `self` are skipped, which makes sparse
    /// multi-hot inputs cheap.
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        self.check(self.cols == rhs.rows, "matmul", rhs)?;
        let mut out = Tensor::zeros(self.rows, rhs.cols);
        let kernel = |(i, orow): (usize, &mut [f64])| {
            let arow = self.row(i);
            for (k, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let brow = rhs.row(k);
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        };
        if rhs.cols == 0 {
            return Ok(out);
        }
        if self.rows * self.cols * rhs.cols >= PAR_THRESHOLD {
            out.data.par_chunks_mut(rhs.cols).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(rhs.cols).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// `selfᵀ · rhs`.
    pub fn t_matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        self.check(self.rows == rhs.rows, "t_matmul", rhs)?;
        let mut out = Tensor::zeros(self.cols, rhs.cols);
        if rhs.cols == 0 {
            return Ok(out);
        }
        let kernel = |(k, orow): (usize, &mut [f64])| {
            for i in 0..self.rows {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(rhs.row(i)) {
                    *o += a * b;
                }
            }
        };
        if self.rows * self.cols * rhs.cols >= PAR_THRESHOLD {
            out.data.par_chunks_mut(rhs.cols).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(rhs.cols).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// `self · rhsᵀ`.
    pub fn matmul_t(&self, rhs: &Tensor) -> Result<Tensor> {
        self.check(self.cols == rhs.cols, "matmul_t", rhs)?;
        let mut out = Tensor::zeros(self.rows, rhs.rows);
        if rhs.rows == 0 {
            return Ok(out);
        }
        let kernel = |(i, orow): (usize, &mut [f64])| {
            let arow = self.row(i);
            for (j, o) in orow.iter_mut().enumerate() {
                *o = arow.iter().zip(rhs.row(j)).map(|(a, b)| a * b).sum();
            }
        };
        if self.rows * self.cols * rhs.rows >= PAR_THRESHOLD {
            out.data.par_chunks_mut(rhs.rows).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(rhs.rows).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// Add a `1 × cols` row vector to every row.
    pub fn add_row_vector(&mut self, bias: &Tensor) -> Result<()> {
        self.check(bias.rows == 1 && bias.cols == self.cols, "add_row_vector", bias)?;
        for row in self.data.chunks_mut(self.cols.max(1)) {
            for (x, b) in row.iter_mut().zip(&bias.data) {
                *x += b;
            }
        }
        Ok(())
    }

    /// Column sums as a `1 × cols` tensor.
    pub fn sum_rows(&self) -> Tensor {
        let mut out = Tensor::zeros(1, self.cols);
        for r in 0..self.rows {
            for (o, x) in out.data.iter_mut().zip(self.row(r)) {
                *o += x;
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.check(self.shape() == other.shape(), "zip_map", other)?;
        Ok(Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        self.check(self.shape() == other.shape(), "add_assign", other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Tensor {
        let mut out = Tensor::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }

    /// Concatenate along columns.
    pub fn hstack(parts: &[&Tensor]) -> Result<Tensor> {
        let rows = parts.first().map_or(0, |t| t.rows);
        if parts.iter().any(|t| t.rows != rows) {
            return Err(Error::Shape("hstack: row counts differ".into()));
        }
        let cols: usize = parts.iter().map(|t| t.cols).sum();
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let mut at = 0;
            let orow = out.row_mut(r);
            for t in parts {
                orow[at..at + t.cols].copy_from_slice(t.row(r));
                at += t.cols;
            }
        }
        Ok(out)
    }

    /// Columns `[from, to)` as a new tensor.
    pub fn col_slice(&self, from: usize, to: usize) -> Tensor {
        let mut out = Tensor::zeros(self.rows, to - from);
        for r in 0..self.rows {
            out.row_mut(r).copy_from_slice(&self.row(r)[from..to]);
        }
        out
    }

    /// Keep the first `cols` columns, padding with zeros when widening.
    pub fn resize_cols(&self, cols: usize) -> Tensor {
        let mut out = Tensor::zeros(self.rows, cols);
        let keep = cols.min(self.cols);
        for r in 0..self.rows {
            out.row_mut(r)[..keep].copy_from_slice(&self.row(r)[..keep]);
        }
        out
    }

    pub fn transpose(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Error naming `what` if any entry is NaN or infinite.
    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::Numerical(format!(
                "{what}: non-finite value {} at ({}, {})",
                self.data[i],
                i / self.cols.max(1),
                i % self.cols.max(1)
            ))),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}
