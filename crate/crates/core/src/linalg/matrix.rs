use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{HfaError, Result};

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row-major storage.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(HfaError::input(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix whose rows are the given vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(HfaError::input(format!(
                    "ragged rows: row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        Ok(Matrix::from_rows(columns)?.transpose())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        let mut m = self.clone();
        m.scale(factor);
        m
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix { data, ..*self })
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(HfaError::input(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(HfaError::input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                axpy(a, other.row(k), out_row);
            }
        }
        Ok(out)
    }

    /// Product `self' * other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(HfaError::input(format!(
                "cannot multiply transpose of {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b = other.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                axpy(a, b, &mut out.data[i * other.cols..(i + 1) * other.cols]);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(HfaError::input(format!(
                "cannot multiply {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Product `self' * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(HfaError::input(format!(
                "cannot multiply transpose of {}x{} matrix by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Dense symmetric matrix. Every constructor symmetrizes, so `m[(i,j)] == m[(j,i)]` holds exactly.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn scaled_identity(n: usize, value: f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = value;
        }
        SymMatrix(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.0[(i, i)] = d;
        }
        m
    }

    /// Symmetrizes a square matrix as `(M + M') / 2`.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(HfaError::input(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let mut m = m;
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Ok(SymMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SymMatrix::from_matrix(Matrix::from_rows(rows)?)
    }

    /// Fills the upper triangle from `f(i, j)` with `i <= j` and mirrors it.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    /// Stacks symmetric blocks `[[a, b], [b', d]]`.
    pub fn from_blocks(a: &SymMatrix, b: &Matrix, d: &SymMatrix) -> Result<Self> {
        let (p, q) = (a.order(), d.order());
        if b.rows() != p || b.cols() != q {
            return Err(HfaError::input(format!(
                "off-diagonal block is {}x{}, expected {p}x{q}",
                b.rows(),
                b.cols()
            )));
        }
        let mut m = Matrix::zeros(p + q, p + q);
        for i in 0..p {
            m.row_mut(i)[..p].copy_from_slice(a.0.row(i));
            m.row_mut(i)[p..].copy_from_slice(b.row(i));
        }
        for i in 0..q {
            for j in 0..p {
                m[(p + i, j)] = b[(j, i)];
            }
            m.row_mut(p + i)[p..].copy_from_slice(d.0.row(i));
        }
        Ok(SymMatrix(m))
    }

    pub fn block_diagonal(a: &SymMatrix, d: &SymMatrix) -> Self {
        let b = Matrix::zeros(a.order(), d.order());
        SymMatrix::from_blocks(a, &b, d).expect("conforming blocks")
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn scale(&mut self, factor: f64) {
        self.0.scale(factor);
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix(self.0.scaled(factor))
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        Ok(SymMatrix(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        Ok(SymMatrix(self.0.sub(&other.0)?))
    }

    pub fn add_identity(&mut self, value: f64) {
        for i in 0..self.order() {
            self.0[(i, i)] += value;
        }
    }

    /// In-place rank-one update `self += coef * u u'`.
    pub fn add_outer(&mut self, coef: f64, u: &[f64]) {
        self.scale_add_outer(1.0, coef, u);
    }

    /// In-place `self = scale * self + coef * u u'`.
    pub fn scale_add_outer(&mut self, scale: f64, coef: f64, u: &[f64]) {
        let n = self.order();
        assert_eq!(u.len(), n, "rank-one update length mismatch");
        for i in 0..n {
            let ui = u[i];
            // u_i * u_j is commutative, so (i,j) and (j,i) stay bit-identical
            for (a, &uj) in self.0.row_mut(i).iter_mut().zip(u) {
                *a = scale * *a + coef * (ui * uj);
            }
        }
    }

    /// `offset + scale * self + coef * u u'` in one pass.
    pub fn affine_outer(
        &self,
        offset: &SymMatrix,
        scale: f64,
        coef: f64,
        u: &[f64],
    ) -> Result<SymMatrix> {
        let n = self.order();
        if offset.order() != n || u.len() != n {
            return Err(HfaError::input(format!(
                "affine update of order {n} with offset of order {} and vector of length {}",
                offset.order(),
                u.len()
            )));
        }
        let mut out = offset.clone();
        for i in 0..n {
            let ui = u[i];
            for ((o, &a), &uj) in out.0.row_mut(i).iter_mut().zip(self.0.row(i)).zip(u) {
                *o += scale * a + coef * (ui * uj);
            }
        }
        Ok(out)
    }

    pub fn outer(u: &[f64]) -> SymMatrix {
        let mut m = SymMatrix::zeros(u.len());
        m.add_outer(1.0, u);
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.matvec(x)
    }

    /// Quadratic form `x' M x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        Ok(dot(&self.matvec(x)?, x))
    }

    /// Frobenius inner product `<self, other>`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        dot(self.0.as_slice(), other.0.as_slice())
    }

    /// Principal submatrix on the index range `[start, start + len)`.
    pub fn principal_block(&self, start: usize, len: usize) -> SymMatrix {
        SymMatrix(Matrix::from_fn(len, len, |i, j| {
            self.0[(start + i, start + j)]
        }))
    }

    /// Rectangular block rows `[r0, r0+nr)` x cols `[c0, c0+nc)`.
    pub fn block(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> Matrix {
        Matrix::from_fn(nr, nc, |i, j| self.0[(r0 + i, c0 + j)])
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.0)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
