//! Small dense linear algebra: a column-major matrix and a Cholesky factor.
//!
//! Design matrices in this crate are tall (`m` samples by `n` atoms) and are
//! mostly accessed one column at a time, so columns are stored contiguously.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = T::one();
        }
        out
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return domain(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                ));
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn from_column_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return domain(format!(
                "buffer of {} entries cannot be {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
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
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact(0) panics
        let step = self.rows.max(1);
        self.data.chunks_exact(step).take(self.cols)
    }

    /// Copies the listed columns, in order, into a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: indices.len(),
            data,
        }
    }

    pub fn push_column(&mut self, column: &[T]) -> Result<()> {
        if column.len() != self.rows {
            return domain(format!(
                "column has length {}, expected {}",
                column.len(),
                self.rows
            ));
        }
        self.data.extend_from_slice(column);
        self.cols += 1;
        Ok(())
    }

    /// `A x`
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return domain(format!(
                "matvec: vector length {} != {} columns",
                x.len(),
                self.cols
            ));
        }
        let mut out = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (col, &xj) in self.columns().zip(x) {
            if xj == T::zero() {
                continue;
            }
            axpy(xj, col, out);
        }
    }

    /// `Aᵀ x`
    pub fn tr_matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.rows {
            return domain(format!(
                "tr_matvec: vector length {} != {} rows",
                x.len(),
                self.rows
            ));
        }
        let mut out = vec![T::zero(); self.cols];
        self.tr_matvec_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn tr_matvec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (o, col) in out.iter_mut().zip(self.columns()) {
            *o = dot(col, x);
        }
    }

    /// `AᵀA`, symmetric `cols x cols`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.col(i), self.col(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Negates column `j` in place.
    pub fn negate_column(&mut self, j: usize) {
        for v in self.col_mut(j) {
            *v = -*v;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc })
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    // independent accumulators let the compiler vectorize the reduction
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

pub fn norm_inf<T: Scalar>(x: &[T]) -> T {
    x.iter()
        .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc })
}

pub fn norm1<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|v| v.abs()).sum()
}

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    // row-major packed lower triangle, row i holds L[i][0..=i]
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(m: &Matrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return domain(format!(
                "cholesky of non-square {}x{} matrix",
                m.rows(),
                m.cols()
            ));
        }
        let n = m.rows();
        let mut lower = vec![T::zero(); n * (n + 1) / 2];
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m[(i, j)];
                let (ri, rj) = (idx(i, 0), idx(j, 0));
                for k in 0..j {
                    sum -= lower[ri + k] * lower[rj + k];
                }
                if i == j {
                    if !(sum > T::zero()) {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    lower[idx(i, i)] = sum.sqrt();
                } else {
                    lower[idx(i, j)] = sum / lower[idx(j, j)];
                }
            }
        }
        Ok(Self { n, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Extends the factor of `M` to that of `[[M, c], [cᵀ, d]]`.
    pub fn append(&mut self, cross: &[T], diag: T) -> Result<()> {
        if cross.len() != self.n {
            return domain(format!("cholesky append: {} cross terms for dimension {}", cross.len(), self.n));
        }
        let mut row = cross.to_vec();
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        for i in 0..self.n {
            let ri = idx(i, 0);
            let mut s = row[i];
            for k in 0..i {
                s -= self.lower[ri + k] * row[k];
            }
            row[i] = s / self.lower[idx(i, i)];
        }
        let pivot = diag - dot(&row, &row);
        if !(pivot > T::zero()) {
            return Err(Error::NotPositiveDefinite { pivot: self.n });
        }
        self.lower.extend_from_slice(&row);
        self.lower.push(pivot.sqrt());
        self.n += 1;
        Ok(())
    }

    /// Solves `M x = rhs`.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        if rhs.len() != self.n {
            return domain(format!(
                "cholesky solve: rhs length {} != {}",
                rhs.len(),
                self.n
            ));
        }
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub(crate) fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        // L z = b
        for i in 0..n {
            let row = idx(i, 0);
            let mut s = x[i];
            for k in 0..i {
                s -= self.lower[row + k] * x[k];
            }
            x[i] = s / self.lower[idx(i, i)];
        }
        // Lᵀ x = z
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lower[idx(k, i)] * x[k];
            }
            x[i] = s / self.lower[idx(i, i)];
        }
    }
}

/// Largest eigenvalue estimate of `AᵀA` by power iteration.
pub fn power_iteration_gram<T: Scalar>(a: &Matrix<T>, iterations: usize) -> T {
    let n = a.cols();
    if n == 0 {
        return T::zero();
    }
    // deterministic, generic start with components of both signs
    let mut x: Vec<T> = (0..n)
        .map(|j| T::one() + T::lit(0.5) * T::lit((j as f64 * 1.618_033_988_75).sin()))
        .collect();
    let mut ax = vec![T::zero(); a.rows()];
    let mut atax = vec![T::zero(); n];
    let mut lambda = T::zero();
    for _ in 0..iterations.max(1) {
        let nx = norm2(&x);
        if nx == T::zero() {
            return T::zero();
        }
        x.iter_mut().for_each(|v| *v /= nx);
        a.matvec_into(&x, &mut ax);
        a.tr_matvec_into(&ax, &mut atax);
        // Rayleigh quotient with unit x
        lambda = dot(&x, &atax);
        std::mem::swap(&mut x, &mut atax);
    }
    lambda
}
