//! Small dense complex matrices, the real linear-operator abstraction used
//! by the solvers, and power-method spectral norm estimation.

use super::rng::SimRng;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Index, IndexMut};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim(format!("matrix dimensions must be positive, got {rows}x{cols}")));
        }
        Ok(CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = CMat::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut m = CMat::zeros(rows, cols)?;
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} entries do not form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> CMat {
        let mut out = CMat {
            rows: self.cols,
            cols: self.rows,
            data: vec![Complex64::new(0.0, 0.0); self.data.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMat) -> Result<CMat> {
        if self.cols != rhs.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, rhs.cols)?;
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::dim(format!("{}x{} matrix times vector of length {}", self.rows, self.cols, x.len())));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.rows {
            return Err(Error::dim(format!("adjoint of {}x{} matrix times vector of length {}", self.rows, self.cols, x.len())));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.cols];
        self.adjoint_mul_vec_into(x, &mut y);
        Ok(y)
    }

    // Unchecked kernels for the hot loops; callers guarantee the lengths.
    pub(crate) fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        const LANES: usize = 4;
        for (r, out) in y.iter_mut().enumerate() {
            let row = self.row(r);
            let (mut re, mut im) = ([0.0; LANES], [0.0; LANES]);
            let (row_chunks, x_chunks) = (row.chunks_exact(LANES), x.chunks_exact(LANES));
            let (row_tail, x_tail) = (row_chunks.remainder(), x_chunks.remainder());
            for (ac, bc) in row_chunks.zip(x_chunks) {
                for l in 0..LANES {
                    re[l] += ac[l].re * bc[l].re - ac[l].im * bc[l].im;
                    im[l] += ac[l].re * bc[l].im + ac[l].im * bc[l].re;
                }
            }
            for (a, b) in row_tail.iter().zip(x_tail) {
                re[0] += a.re * b.re - a.im * b.im;
                im[0] += a.re * b.im + a.im * b.re;
            }
            *out = Complex64::new(re.iter().sum(), im.iter().sum());
        }
    }

    pub(crate) fn adjoint_mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (r, xr) in x.iter().enumerate() {
            for (out, a) in y.iter_mut().zip(self.row(r)) {
                // conj(a) * xr
                out.re += a.re * xr.re + a.im * xr.im;
                out.im += a.re * xr.im - a.im * xr.re;
            }
        }
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Pseudo-inverse `H^H (H H^H)^{-1}` of a wide matrix with full row rank.
///
/// The Gram matrix is factored by Cholesky; a pivot below `1e-12` times the
/// largest diagonal entry is reported as [`Error::Singular`].
pub fn pinv_rows(h: &CMat) -> Result<CMat> {
    let (m, n) = (h.rows, h.cols);
    if m > n {
        return Err(Error::dim(format!("pinv_rows needs rows <= cols, got {m}x{n}")));
    }
    let gram = h.matmul(&h.conj_transpose())?;
    let chol = cholesky(&gram)?;
    // Solve gram * Y = H, then pinv = Y^H.
    let mut y = h.clone();
    for c in 0..n {
        let mut col: Vec<Complex64> = (0..m).map(|r| h[(r, c)]).collect();
        cholesky_solve(&chol, &mut col);
        for r in 0..m {
            y[(r, c)] = col[r];
        }
    }
    Ok(y.conj_transpose())
}

/// Lower-triangular `L` with `A = L L^H`.
fn cholesky(a: &CMat) -> Result<CMat> {
    let n = a.rows;
    let scale = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    let mut l = CMat::zeros(n, n)?;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 1e-12 * scale) {
            return Err(Error::Singular { context: None });
        }
        let d = d.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &CMat, b: &mut [Complex64]) {
    let n = l.rows;
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Real linear map `R^cols -> R^rows` with its transpose.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `y = A x`; `x.len() == cols`, `y.len() == rows`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = A^T y`.
    fn adjoint(&self, y: &[f64], x: &mut [f64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        (**self).adjoint(y, x)
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::dim(format!("{} entries do not form a {rows}x{cols} matrix", data.len())));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Matrix with i.i.d. standard normal entries.
    pub fn gaussian(rows: usize, cols: usize, rng: &mut SimRng) -> Result<Self> {
        let data = (0..rows * cols).map(|_| rng.gaussian()).collect();
        DenseMatrix::from_rows(rows, cols, data)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        DenseMatrix::from_rows(n, n, data)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn scaled(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
    fn adjoint(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (r, yr) in y.iter().enumerate() {
            for (out, a) in x.iter_mut().zip(self.row(r)) {
                *out += a * yr;
            }
        }
    }
}

/// Power-method settings.
#[derive(Debug, Clone, Copy)]
pub struct PowerMethod {
    /// Target relative accuracy of the estimate.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for PowerMethod {
    fn default() -> Self {
        PowerMethod {
            tol: 1e-6,
            max_iter: 20_000,
            seed: 0x5EED_0F_50_3A_u64,
        }
    }
}

/// Largest singular value of `op` by power iteration on `A^T A`.
///
/// Iterates `v ← A^T A v / ‖A^T A v‖` and stops once the relative change of
/// the estimate `‖A v‖` falls below `tol / 10`.
pub fn sigma_max<A: LinearOperator + ?Sized>(op: &A, opts: PowerMethod) -> Result<f64> {
    let (m, n) = (op.rows(), op.cols());
    if n == 0 || m == 0 {
        return Err(Error::dim("operator with an empty dimension"));
    }
    let mut v = SimRng::new(opts.seed).unit_vector(n);
    let mut av = vec![0.0; m];
    let mut atav = vec![0.0; n];
    let mut estimate = 0.0;
    for it in 1..=opts.max_iter {
        op.apply(&v, &mut av);
        let sigma = norm2(&av);
        op.adjoint(&av, &mut atav);
        let norm = norm2(&atav);
        if norm == 0.0 {
            // v in the null space: A = 0 on the Krylov space we can reach
            return Ok(0.0);
        }
        if it > 1 && (sigma - estimate).abs() <= 0.1 * opts.tol * sigma {
            return Ok(sigma);
        }
        estimate = sigma;
        for (vi, wi) in v.iter_mut().zip(&atav) {
            *vi = wi / norm;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        estimate,
    })
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
