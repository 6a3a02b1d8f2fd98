//! Dense row-major matrices and the handful of kernels the learners need:
//! products (with either operand transposed), and Cholesky-based solves for
//! symmetric positive definite systems.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative asymmetry accepted by the SPD routines.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Knobs for the SPD routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpdOptions {
    /// Largest `|a[i,j] - a[j,i]|` accepted, relative to `max |a|`.
    pub symmetry_tol: f64,
}

impl Default for SpdOptions {
    fn default() -> Self {
        SpdOptions {
            symmetry_tol: SYMMETRY_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Wraps row-major storage. Rejects a wrong length or any non-finite entry.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                op: "from_vec",
                lhs: (rows, cols),
                rhs: (data.len(), 1),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("from_vec"));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape {
                    op: "from_rows",
                    lhs: (i, cols),
                    rhs: (i, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
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

    #[inline]
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

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let cols = self.cols.max(1);
        self.data.chunks_exact(cols).take(self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference. Panics on a shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|v| *v *= k);
    }

    /// `self += k * other`
    pub fn add_scaled(&mut self, k: f64, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                op: "add_scaled",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
        Ok(())
    }

    pub fn add_diag(&mut self, k: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += k;
        }
    }

    /// Replaces a square matrix by `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        debug_assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = m;
                self.data[j * n + i] = m;
            }
        }
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

#[derive(Clone, Copy)]
enum Side {
    Plain,
    Transposed,
}

// Logical (rows, cols, row stride, col stride) of an operand as seen by the product.
fn view(m: &Matrix, side: Side) -> (usize, usize, isize, isize) {
    match side {
        Side::Plain => (m.rows, m.cols, m.cols as isize, 1),
        Side::Transposed => (m.cols, m.rows, 1, m.cols as isize),
    }
}

fn gemm(op: &'static str, a: &Matrix, sa: Side, b: &Matrix, sb: Side) -> Result<Matrix> {
    let (m, k, rsa, csa) = view(a, sa);
    let (kb, n, rsb, csb) = view(b, sb);
    if k != kb {
        return Err(Error::Shape {
            op,
            lhs: (m, k),
            rhs: (kb, n),
        });
    }
    let mut c = Matrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return Ok(c);
    }
    // SAFETY: the strides describe `a` and `b` exactly as stored (or their
    // transposes), and `c` is a freshly allocated m×n row-major buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            0.0,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    if !c.is_finite() {
        return Err(Error::NonFinite(op));
    }
    Ok(c)
}

/// `a · b`
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    gemm("matmul", a, Side::Plain, b, Side::Plain)
}

/// `aᵀ · b`
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    gemm("matmul_tn", a, Side::Transposed, b, Side::Plain)
}

/// `a · bᵀ`
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    gemm("matmul_nt", a, Side::Plain, b, Side::Transposed)
}

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> Result<Self> {
        Cholesky::factor_with(a, &SpdOptions::default())
    }

    pub fn factor_with(a: &Matrix, opts: &SpdOptions) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape {
                op: "cholesky",
                lhs: a.shape(),
                rhs: (a.cols, a.rows),
            });
        }
        let n = a.rows;
        let tol = opts.symmetry_tol * a.max_abs();
        for i in 0..n {
            for j in (i + 1)..n {
                if (a[(i, j)] - a[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }

        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let dot: f64 = l.row(i)[..j]
                    .iter()
                    .zip(&l.row(j)[..j])
                    .map(|(x, y)| x * y)
                    .sum();
                let s = a[(i, j)] - dot;
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Singular {
                            pivot: i,
                            value: s,
                            hint: "",
                        });
                    }
                    l[(i, i)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor_l(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    /// Solves `L·Y = B` in place, row by row.
    fn forward(&self, y: &mut Matrix) {
        let n = self.dim();
        let k = y.cols;
        for i in 0..n {
            let (done, rest) = y.data.split_at_mut(i * k);
            let yi = &mut rest[..k];
            let li = self.l.row(i);
            for j in 0..i {
                let lij = li[j];
                if lij != 0.0 {
                    let yj = &done[j * k..(j + 1) * k];
                    for (a, b) in yi.iter_mut().zip(yj) {
                        *a -= lij * b;
                    }
                }
            }
            let d = li[i];
            yi.iter_mut().for_each(|v| *v /= d);
        }
    }

    /// Solves `Lᵀ·X = Y` in place.
    fn backward(&self, x: &mut Matrix) {
        let n = self.dim();
        let k = x.cols;
        for i in (0..n).rev() {
            let d = self.l[(i, i)];
            x.data[i * k..(i + 1) * k].iter_mut().for_each(|v| *v /= d);
            // eliminate x_i from rows above: row j gets -= L[i,j] * x_i
            let (head, tail) = x.data.split_at_mut(i * k);
            let xi = &tail[..k];
            let li = self.l.row(i);
            for j in 0..i {
                let lij = li[j];
                if lij != 0.0 {
                    for (a, b) in head[j * k..(j + 1) * k].iter_mut().zip(xi) {
                        *a -= lij * b;
                    }
                }
            }
        }
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows != self.dim() {
            return Err(Error::Shape {
                op: "cholesky_solve",
                lhs: self.l.shape(),
                rhs: b.shape(),
            });
        }
        let mut x = b.clone();
        self.forward(&mut x);
        self.backward(&mut x);
        if !x.is_finite() {
            return Err(Error::NonFinite("cholesky_solve"));
        }
        Ok(x)
    }

    /// `A⁻¹ = L⁻ᵀ·L⁻¹`, exactly symmetric.
    pub fn inverse(&self) -> Result<Matrix> {
        let mut linv = Matrix::identity(self.dim());
        self.forward(&mut linv);
        let mut inv = matmul_tn(&linv, &linv)?;
        inv.symmetrize();
        Ok(inv)
    }
}

/// Solves `a·X = b` for symmetric positive definite `a`.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    Cholesky::factor(a)?.solve(b)
}

pub fn solve_spd_with(a: &Matrix, b: &Matrix, opts: &SpdOptions) -> Result<Matrix> {
    Cholesky::factor_with(a, opts)?.solve(b)
}

pub fn invert_spd(a: &Matrix) -> Result<Matrix> {
    Cholesky::factor(a)?.inverse()
}

pub fn invert_spd_with(a: &Matrix, opts: &SpdOptions) -> Result<Matrix> {
    Cholesky::factor_with(a, opts)?.inverse()
}
