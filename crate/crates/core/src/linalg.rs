//! Dense real linear algebra.
//!
//! Everything here is sized for desk-scale problems (a few thousand rows at most) and
//! stored row-major in a flat `Vec<f64>`. Symmetric matrices get their own newtype so the
//! eigensolver and the square root can rely on exact symmetry.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Default clamp for tiny negative eigenvalues in [`sqrt_psd`].
pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

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

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {cols}",
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product. Panics on a shape mismatch.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * other^T`, i.e. all pairwise row inner products.
    pub fn matmul_transpose(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "matmul_transpose shape mismatch");
        Matrix::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j)))
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mat_vec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Max-norm distance; panics on a shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `max |M^T M - I|`, the orthogonality defect of the columns.
    pub fn orthogonality_residual(&self) -> f64 {
        let mtm = self.transpose().matmul(self);
        mtm.max_abs_diff(&Matrix::identity(self.cols))
    }

    /// `max |M M^T - I|`, the orthonormality defect of the rows.
    pub fn row_orthonormality_residual(&self) -> f64 {
        self.matmul_transpose(self)
            .max_abs_diff(&Matrix::identity(self.rows))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
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

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Kronecker product of two vectors, first factor most significant.
pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

/// A square matrix with `m[i][j] == m[j][i]` exactly as stored.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] && !(m[(i, j)].is_nan() && m[(j, i)].is_nan()) {
                    return Err(Error::InvalidInput(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Averages `m` with its transpose.
    pub fn symmetrize(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput(
                "cannot symmetrize a non-square matrix".into(),
            ));
        }
        let n = m.rows();
        let mut out = m.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                out[(i, j)] = avg;
                out[(j, i)] = avg;
            }
        }
        SymMatrix::new(out)
    }

    /// Fills the upper triangle from `f` and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = f(i, j);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        SymMatrix::new(m)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.0)
    }
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomp {
    /// Rebuilds `Q diag(f(λ)) Q^T`, symmetrized.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let q = &self.vectors;
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| q[(i, k)] * mapped[k] * q[(j, k)]).sum()
        })
        .expect("square by construction")
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_values(|x| x)
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
pub fn eig_sym(m: &SymMatrix) -> Result<EigenDecomp> {
    if !m.as_matrix().is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);

    let frob: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = (f64::EPSILON * frob).powi(2);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Negligible against both diagonal entries: drop it.
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs().min(aqq.abs()))
                    && app != 0.0
                    && aqq != 0.0
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_sym(&mut a, p, q, c, s);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomp { values, vectors })
}

/// Applies `G^T A G` for the plane rotation in (p, q), skipping the (p,p), (q,q), (p,q)
/// entries which the caller sets directly.
fn rotate_sym(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[(k, p)] = new_p;
        a[(p, k)] = new_p;
        a[(k, q)] = new_q;
        a[(q, k)] = new_q;
    }
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-clamp_tol, 0)` are clamped to zero; anything below `-clamp_tol` is
/// reported as [`Error::NotPsd`].
pub fn sqrt_psd(m: &SymMatrix, clamp_tol: f64) -> Result<SymMatrix> {
    let eig = eig_sym(m)?;
    sqrt_from_eig(&eig, clamp_tol)
}

pub(crate) fn sqrt_from_eig(eig: &EigenDecomp, clamp_tol: f64) -> Result<SymMatrix> {
    let min = eig.min_value();
    if min < -clamp_tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map_values(|x| x.max(0.0).sqrt()))
}

/// Inverse square root of a positive definite matrix. Eigenvalues at or below
/// `tol * max(1, λ_max)` mean the underlying vectors are linearly dependent.
pub fn inv_sqrt_pd(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let eig = eig_sym(m)?;
    let scale = eig.values.last().copied().unwrap_or(1.0).abs().max(1.0);
    if eig.min_value() <= tol * scale {
        return Err(Error::LinearDependence(format!(
            "smallest Gram eigenvalue {:e} is not positive",
            eig.min_value()
        )));
    }
    Ok(eig.map_values(|x| 1.0 / x.sqrt()))
}

/// True iff the smallest eigenvalue exceeds `tol`.
pub fn is_positive_definite(m: &SymMatrix, tol: f64) -> bool {
    match eig_sym(m) {
        Ok(eig) => eig.min_value() > tol,
        Err(_) => false,
    }
}

/// A Sylvester-type ±1 matrix of power-of-two order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.order + j]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.order, self.order, |i, j| f64::from(self.get(i, j)))
    }

    /// `H H^T` in exact integer arithmetic.
    pub fn gram_integer(&self) -> Vec<i64> {
        let n = self.order;
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n)
                    .map(|k| i64::from(self.get(i, k)) * i64::from(self.get(j, k)))
                    .sum();
            }
        }
        out
    }
}

/// Builds `H_{2k} = [[H_k, H_k], [H_k, -H_k]]` starting from `H_1 = [1]`.
pub fn hadamard(order: usize) -> Result<HadamardMatrix> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "Hadamard order must be a power of two, got {order}"
        )));
    }
    let mut entries = vec![1i8];
    let mut k = 1;
    while k < order {
        let mut next = vec![0i8; 4 * k * k];
        for i in 0..k {
            for j in 0..k {
                let h = entries[i * k + j];
                next[i * 2 * k + j] = h;
                next[i * 2 * k + j + k] = h;
                next[(i + k) * 2 * k + j] = h;
                next[(i + k) * 2 * k + j + k] = -h;
            }
        }
        entries = next;
        k *= 2;
    }
    Ok(HadamardMatrix { order, entries })
}

/// In-place unnormalized Walsh–Hadamard transform; equals multiplication by
/// [`hadamard`]`(len)`.
pub fn walsh_hadamard_transform(data: &mut [f64]) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "transform length must be a power of two, got {n}"
        )));
    }
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let x = data[i];
                let y = data[i + h];
                data[i] = x + y;
                data[i + h] = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::InvalidInput(format!(
            "cannot solve {}x{} system with {}x{} right-hand side",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
            .expect("non-empty range");
        if lu[(pivot, col)].abs() <= 1e-13 * scale {
            return Err(Error::LinearDependence(format!(
                "matrix is singular at column {col}"
            )));
        }
        lu.swap_rows(col, pivot);
        x.swap_rows(col, pivot);
        let d = lu[(col, col)];
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                let v = lu[(col, c)];
                lu[(r, c)] -= f * v;
            }
            for c in 0..x.cols() {
                let v = x[(col, c)];
                x[(r, c)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for c in 0..x.cols() {
            let mut s = x[(col, c)];
            for k in (col + 1)..n {
                s -= lu[(col, k)] * x[(k, c)];
            }
            x[(col, c)] = s / d;
        }
    }
    Ok(x)
}

/// Lower-triangular `L` with `L L^T = m`.
pub fn cholesky(m: &SymMatrix) -> Result<Matrix> {
    let n = m.dim();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::LinearDependence(format!(
                "Cholesky pivot {j} is {d:e}"
            )));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(kappa: f64) -> SymMatrix {
        let k2 = kappa * kappa;
        SymMatrix::new(Matrix::from_rows(&[[1.0, k2], [k2, 1.0]]).unwrap()).unwrap()
    }

    fn gamma3(kappa: f64) -> SymMatrix {
        let k2 = kappa * kappa;
        SymMatrix::from_fn(4, |i, j| if i == j { 1.0 } else { k2 }).unwrap()
    }

    #[test]
    fn eig_identity() {
        let eig = eig_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
        assert!(eig.vectors.orthogonality_residual() < 1e-15);
    }

    #[test]
    fn eig_two_by_two() {
        let eig = eig_sym(&two_by_two(0.5)).unwrap();
        assert!((eig.values[0] - 0.75).abs() < 1e-15);
        assert!((eig.values[1] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn eig_gamma3_has_triple_and_single() {
        let eig = eig_sym(&gamma3(0.5)).unwrap();
        for v in &eig.values[..3] {
            assert!((v - 0.75).abs() < 1e-14);
        }
        assert!((eig.values[3] - 1.75).abs() < 1e-14);
        assert!(
            eig.reconstruct()
                .as_matrix()
                .max_abs_diff(gamma3(0.5).as_matrix())
                < 1e-14
        );
    }

    #[test]
    fn eig_rejects_non_finite() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { f64::NAN } else { 0.0 }).unwrap();
        assert!(matches!(eig_sym(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn symmetric_rejects_asymmetry() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0 + 1e-16 * 8.0, 1.0]]).unwrap();
        assert!(SymMatrix::new(m).is_err());
        assert!(SymMatrix::new(Matrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn sqrt_identity_is_identity() {
        let s = sqrt_psd(&SymMatrix::identity(4), DEFAULT_CLAMP_TOL).unwrap();
        assert!(s.as_matrix().max_abs_diff(&Matrix::identity(4)) < 1e-15);
    }

    #[test]
    fn sqrt_two_by_two_closed_form() {
        // Eigenbasis (1, ±1)/√2 with eigenvalues 1 ± κ².
        let s = sqrt_psd(&two_by_two(0.5), DEFAULT_CLAMP_TOL).unwrap();
        let diag = (1.25f64.sqrt() + 0.75f64.sqrt()) / 2.0;
        let off = (1.25f64.sqrt() - 0.75f64.sqrt()) / 2.0;
        assert!((s[(0, 0)] - diag).abs() < 1e-14);
        assert!((s[(1, 1)] - diag).abs() < 1e-14);
        assert!((s[(0, 1)] - off).abs() < 1e-14);
    }

    #[test]
    fn sqrt_gamma3_is_circulant_d_block() {
        let alpha = 1.75f64.sqrt();
        let beta = 0.75f64.sqrt();
        let mu = (alpha + 3.0 * beta) / 4.0;
        let nu = (alpha - beta) / 4.0;
        let s = sqrt_psd(&gamma3(0.5), DEFAULT_CLAMP_TOL).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { mu } else { nu };
                assert!((s[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sqrt_clamps_and_rejects() {
        let ones = SymMatrix::from_fn(2, |_, _| 1.0).unwrap();
        let s = sqrt_psd(&ones, DEFAULT_CLAMP_TOL).unwrap();
        let sq = s.as_matrix().matmul(s.as_matrix());
        assert!(sq.max_abs_diff(ones.as_matrix()) < 1e-12);

        let indefinite = SymMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
        assert!(matches!(
            sqrt_psd(&indefinite, DEFAULT_CLAMP_TOL),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn hadamard_small_orders() {
        assert_eq!(hadamard(1).unwrap().to_matrix(), Matrix::identity(1));
        let h2 = hadamard(2).unwrap().to_matrix();
        assert_eq!(h2, Matrix::from_rows(&[[1.0, 1.0], [1.0, -1.0]]).unwrap());
        let h4 = hadamard(4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let h = hadamard(2).unwrap().get(i, j);
                assert_eq!(h4.get(i, j), h);
                assert_eq!(h4.get(i, j + 2), h);
                assert_eq!(h4.get(i + 2, j), h);
                assert_eq!(h4.get(i + 2, j + 2), -h);
            }
        }
        assert!(hadamard(6).is_err());
        assert!(hadamard(0).is_err());
    }

    #[test]
    fn fwht_matches_matrix() {
        let h = hadamard(16).unwrap().to_matrix();
        let v: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut w = v.clone();
        walsh_hadamard_transform(&mut w).unwrap();
        let expect = h.mat_vec(&v);
        for (a, b) in w.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(walsh_hadamard_transform(&mut [1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn positive_definite_checks() {
        assert!(is_positive_definite(&SymMatrix::identity(2), 1e-12));
        let ones = SymMatrix::from_fn(2, |_, _| 1.0).unwrap();
        assert!(!is_positive_definite(&ones, 1e-12));
        let s = sqrt_psd(&gamma3(0.5), DEFAULT_CLAMP_TOL).unwrap();
        assert!(is_positive_definite(&s, 1e-12));
    }

    #[test]
    fn solve_and_cholesky() {
        let a = Matrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]).unwrap();
        let x_true = Matrix::from_rows(&[[1.0, -1.0], [2.0, 0.5], [-3.0, 4.0]]).unwrap();
        let b = a.matmul(&x_true);
        let x = solve(&a, &b).unwrap();
        assert!(x.max_abs_diff(&x_true) < 1e-14);

        let singular = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve(&singular, &Matrix::identity(2)),
            Err(Error::LinearDependence(_))
        ));

        let g = gamma3(0.7);
        let l = cholesky(&g).unwrap();
        assert!(l.matmul(&l.transpose()).max_abs_diff(g.as_matrix()) < 1e-14);
    }
}
