//! Dense linear algebra for the small matrices met in patch denoising.
//!
//! Everything here is sized for similarity matrices of a few dozen rows and a
//! few hundred columns: a cyclic Jacobi eigensolver for symmetric matrices,
//! an SVD derived from the eigendecomposition of `A·Aᵀ`, singular-value hard
//! thresholding, and a brute-force solver for the rank-penalized problem
//!
//! ```text
//! min_X ‖Y − X‖²_F + μ·rank(X)
//! ```
//!
//! used to check that hard thresholding at `√μ` is its exact minimizer.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::{Error, Result};

/// Largest side accepted by [`eig_sym`].
pub const MAX_EIG_SIDE: usize = 256;
/// Largest side accepted by [`rank_min_oracle`].
pub const MAX_ORACLE_SIDE: usize = 16;

const SYMMETRY_TOL: f64 = 1e-9;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Singular values at or below this fraction of the largest get a zero row in `Qᵀ`.
const RANK_CUTOFF: f64 = 1e-9;

/// Row-major dense matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// `rows × cols` matrix with `diag` on the main diagonal.
    pub fn from_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in diag.iter().enumerate().take(rows.min(cols)) {
            m.data[i * cols + i] = v;
        }
        m
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
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols + j])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self · other`.
    ///
    /// Panics if the inner dimensions differ.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
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
        out
    }

    /// `self · selfᵀ`, exactly symmetric.
    pub fn gram(&self) -> Matrix {
        let n = self.rows;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            let ri = self.row(i);
            for j in i..n {
                let v = dot(ri, self.row(j));
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise absolute difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
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

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal eigenvectors (columns of `basis`) and eigenvalues sorted in
/// descending order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub basis: Matrix,
    pub eigenvalues: Vec<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector `k` as a contiguous vector.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.basis.column(k)
    }

    /// `P · diag(λ) · Pᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let pt = self.basis.transpose();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let g = pt.row(k);
            for i in 0..n {
                let c = lambda * g[i];
                for (o, &gj) in out.row_mut(i).iter_mut().zip(g) {
                    *o += c * gj;
                }
            }
        }
        out
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to `1e-12·‖A‖_F`
/// or after 100 sweeps. Eigenvalues come out sorted descending; each
/// eigenvector is signed so its largest-magnitude entry (the first one, on
/// ties) is positive. Negative eigenvalues no larger in magnitude than the
/// convergence tolerance are reported as exactly 0.
pub fn eig_sym(a: &Matrix) -> Result<EigenSystem> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!(
            "eig_sym needs a square matrix, got {}x{}",
            n,
            a.cols()
        )));
    }
    if n > MAX_EIG_SIDE {
        return Err(Error::Shape(format!(
            "eig_sym side {n} exceeds {MAX_EIG_SIDE}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(Error::NonSymmetric(asym));
    }

    let mut w = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    // Rows of `vt` are the eigenvector estimates.
    let mut vt = Matrix::identity(n);
    let tol = JACOBI_TOL * w.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&w) <= tol {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = w.data[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (c, s) = rotation(w.data[p * n + p], w.data[q * n + q], apq);
                rotate(&mut w, &mut vt, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.data[j * n + j].total_cmp(&w.data[i * n + i]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut basis = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let lambda = w.data[src * n + src];
        eigenvalues.push(if lambda < 0.0 && -lambda <= tol {
            0.0
        } else {
            lambda
        });

        let v = vt.row(src);
        let mut lead = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[lead].abs() {
                lead = i;
            }
        }
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        for (i, &x) in v.iter().enumerate() {
            basis[(i, k)] = sign * x;
        }
    }
    Ok(EigenSystem { basis, eigenvalues })
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            let v = w.data[p * n + q];
            sum += v * v;
        }
    }
    (2.0 * sum).sqrt()
}

/// Cosine and sine of the rotation annihilating `a_pq`.
#[inline]
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

/// `W ← Jᵀ·W·J` and `V ← V·J` (stored as rows of `vt`).
#[inline]
fn rotate(w: &mut Matrix, vt: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = w.rows();
    let d = &mut w.data;
    for k in 0..n {
        let akp = d[k * n + p];
        let akq = d[k * n + q];
        d[k * n + p] = c * akp - s * akq;
        d[k * n + q] = s * akp + c * akq;
    }
    {
        let (head, tail) = d.split_at_mut(q * n);
        let row_p = &mut head[p * n..(p + 1) * n];
        let row_q = &mut tail[..n];
        for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
            let (apk, aqk) = (*x, *y);
            *x = c * apk - s * aqk;
            *y = s * apk + c * aqk;
        }
    }
    d[p * n + q] = 0.0;
    d[q * n + p] = 0.0;

    let (head, tail) = vt.data.split_at_mut(q * n);
    let vp = &mut head[p * n..(p + 1) * n];
    let vq = &mut tail[..n];
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Thin SVD `A = P·diag(Σ)·Qᵀ` of a `rows × cols` matrix with `rows ≤ cols`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `P`, `rows × rows`, the eigenvector basis of `A·Aᵀ`.
    pub left: Matrix,
    /// Σ, descending.
    pub singular: Vec<f64>,
    /// `Qᵀ`, `rows × cols`.
    pub right_t: Matrix,
}

impl Svd {
    /// `P · diag(values) · Qᵀ`, skipping zero entries of `values`.
    pub fn compose(&self, values: &[f64]) -> Matrix {
        let (r, c) = (self.left.rows(), self.right_t.cols());
        let mut out = Matrix::zeros(r, c);
        for (k, &sv) in values.iter().enumerate() {
            if sv == 0.0 {
                continue;
            }
            let q = self.right_t.row(k);
            for i in 0..r {
                let coef = self.left[(i, k)] * sv;
                for (o, &qj) in out.row_mut(i).iter_mut().zip(q) {
                    *o += coef * qj;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.compose(&self.singular)
    }

    /// Best rank-`rank` approximation, as a sum of outer products.
    pub fn truncated(&self, rank: usize) -> Matrix {
        let (r, c) = (self.left.rows(), self.right_t.cols());
        let mut out = Matrix::zeros(r, c);
        for k in 0..rank.min(self.singular.len()) {
            add_outer(
                &mut out,
                self.singular[k],
                &self.left.column(k),
                self.right_t.row(k),
            );
        }
        out
    }
}

fn add_outer(out: &mut Matrix, scale: f64, u: &[f64], v: &[f64]) {
    for (i, &ui) in u.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            out[(i, j)] += scale * ui * vj;
        }
    }
}

/// SVD through the eigendecomposition of `A·Aᵀ`.
///
/// `Σ_k = √max(λ_k, 0)`; row `k` of `Qᵀ` is `g_kᵀ·A / Σ_k` when
/// `Σ_k > 1e-9·Σ_max` and zero otherwise.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows() > a.cols() {
        return Err(Error::Shape(format!(
            "svd expects rows <= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let eig = eig_sym(&a.gram())?;
    let singular: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let smax = singular.first().copied().unwrap_or(0.0);
    let (rows, cols) = a.shape();
    let mut right_t = Matrix::zeros(rows, cols);
    for (k, &sk) in singular.iter().enumerate() {
        if sk <= RANK_CUTOFF * smax || sk == 0.0 {
            continue;
        }
        let inv = 1.0 / sk;
        for i in 0..rows {
            let g = eig.basis[(i, k)] * inv;
            if g == 0.0 {
                continue;
            }
            for (o, &x) in right_t.row_mut(k).iter_mut().zip(a.row(i)) {
                *o += g * x;
            }
        }
    }
    Ok(Svd {
        left: eig.basis,
        singular,
        right_t,
    })
}

/// `P·H_τ(Σ)·Qᵀ`, keeping a singular value only if it strictly exceeds `tau`.
pub fn hard_threshold_svd(a: &Matrix, tau: f64) -> Result<Matrix> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidParams(format!(
            "threshold must be >= 0, got {tau}"
        )));
    }
    let decomposition = svd(a)?;
    Ok(decomposition.compose(&hard_threshold(&decomposition.singular, tau)))
}

/// Hard-thresholding operator on a vector of singular values.
pub fn hard_threshold(values: &[f64], tau: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&s| if s > tau { s } else { 0.0 })
        .collect()
}

/// Brute-force minimizer of `‖y − X‖²_F + μ·rank(X)`.
///
/// Every rank `r` from 0 to `min(rows, cols)` is tried with the rank-`r` SVD
/// truncation of `y`; the objective is evaluated from the explicit residual.
/// Returns the minimizing matrix and its objective, preferring the smaller
/// rank on ties.
pub fn rank_min_oracle(y: &Matrix, mu: f64) -> Result<(Matrix, f64)> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if y.rows() > MAX_ORACLE_SIDE || y.cols() > MAX_ORACLE_SIDE {
        return Err(Error::Shape(format!(
            "oracle limited to {MAX_ORACLE_SIDE}x{MAX_ORACLE_SIDE}, got {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    if !y.is_finite() {
        return Err(Error::NonFinite);
    }
    let wide = y.rows() <= y.cols();
    let work = if wide { y.clone() } else { y.transpose() };
    let decomposition = svd(&work)?;
    let (r, c) = work.shape();

    let mut current = Matrix::zeros(r, c);
    let mut best = (current.clone(), work.frobenius_norm().powi(2));
    for rank in 1..=r {
        let k = rank - 1;
        add_outer(
            &mut current,
            decomposition.singular[k],
            &decomposition.left.column(k),
            decomposition.right_t.row(k),
        );
        let objective = work.sub(&current).frobenius_norm().powi(2) + mu * rank as f64;
        if objective < best.1 {
            best = (current.clone(), objective);
        }
    }
    let (x, objective) = best;
    Ok((if wide { x } else { x.transpose() }, objective))
}
