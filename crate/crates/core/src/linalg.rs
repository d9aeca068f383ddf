//! Small dense matrices over any [`Scalar`], plus f64 helpers for frames and
//! spectra. Dimensions here never exceed six, so everything is row-major
//! `Vec` storage without blocking.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn diag(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matmul shape mismatch");
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut s = S::zero();
            for k in 0..self.cols {
                s += self[(i, k)] * o[(k, j)];
            }
            s
        })
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut s = S::zero();
                for (k, &x) in v.iter().enumerate() {
                    s += self[(i, k)] * x;
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + o[(i, j)])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - o[(i, j)])
    }

    pub fn scale(&self, s: S) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    /// Quadratic form `aᵀ M b`.
    pub fn bilinear(&self, a: &[S], b: &[S]) -> S {
        let mb = self.matvec(b);
        dot(a, &mb)
    }

    pub fn map_re(&self) -> Mat<f64> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.re()).collect(),
        }
    }

    /// Gauss-Jordan inverse with partial pivoting on the real parts.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self
            .data
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.re().abs()))
            .max(f64::MIN_POSITIVE);
        for col in 0..n {
            let (piv, best) = (col..n)
                .map(|r| (r, a[(r, col)].re().abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 1e-14 * scale {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = S::one() / a[(col, col)];
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Some(inv)
    }

    /// Determinant by elimination with partial pivoting.
    pub fn det(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let (piv, best) = (col..n)
                .map(|r| (r, a[(r, col)].re().abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                // Exact zero pivot in the real part; the determinant's real
                // part vanishes but derivative parts need the full expansion.
                return cofactor_det(self);
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
            }
        }
        det
    }
}

fn cofactor_det<S: Scalar>(m: &Mat<S>) -> S {
    let n = m.rows();
    if n == 1 {
        return m[(0, 0)];
    }
    let mut acc = S::zero();
    for j in 0..n {
        let minor = Mat::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })]);
        let term = m[(0, j)] * cofactor_det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut s = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(&a, &b)| alpha * a + b).collect()
}

pub fn vsub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn vadd<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn vscale<S: Scalar>(s: S, a: &[S]) -> Vec<S> {
    a.iter().map(|&x| s * x).collect()
}

pub fn max_abs(m: &Mat<f64>) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn to_nalgebra(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_nalgebra(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of a symmetric f64 matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Vec<f64> {
    let sym = to_nalgebra(&symmetrize(m));
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Symmetric eigendecomposition (eigenvalues ascending, eigenvectors as
/// matching columns).
pub fn symmetric_eigen(m: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let eig = to_nalgebra(&symmetrize(m)).symmetric_eigen();
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(m.rows(), m.rows(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn symmetrize(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Number of negative eigenvalues of a symmetric matrix, or an error when an
/// eigenvalue is too close to zero to call.
pub fn metric_index(g: &Mat<f64>, zero_tol: f64) -> Result<usize> {
    let ev = symmetric_eigenvalues(g);
    if ev.iter().any(|v| v.abs() <= zero_tol) {
        return Err(Error::SignatureMismatch(format!(
            "degenerate metric, eigenvalues {ev:?}"
        )));
    }
    Ok(ev.iter().filter(|v| **v < 0.0).count())
}

/// Orthonormal frame for a nondegenerate symmetric bilinear form `g`.
///
/// Returns `(E, signs)` with `Eᵀ g E = diag(signs)`, columns of `E` being the
/// frame vectors. Built from the eigenbasis, so it works for any signature.
pub fn orthonormal_frame(g: &Mat<f64>) -> Result<(Mat<f64>, Vec<f64>)> {
    let (vals, vecs) = symmetric_eigen(g);
    let n = g.rows();
    let mut e = Mat::zeros(n, n);
    let mut signs = Vec::with_capacity(n);
    for (j, &lam) in vals.iter().enumerate() {
        if lam.abs() < 1e-300 {
            return Err(Error::SignatureMismatch("degenerate metric in frame".into()));
        }
        let s = 1.0 / lam.abs().sqrt();
        for i in 0..n {
            e[(i, j)] = vecs[(i, j)] * s;
        }
        signs.push(lam.signum());
    }
    Ok((e, signs))
}

/// Euclidean norm of the components of `v` in a `g`-orthonormal frame.
/// A positive-definite reference norm that is invariant under the choice of
/// chart scaling, used for all vector residuals.
pub fn frame_norm(g: &Mat<f64>, v: &[f64]) -> f64 {
    match orthonormal_frame(g).ok().and_then(|(e, _)| e.inverse()) {
        Some(einv) => norm2(&einv.matvec(v)),
        None => norm2(v),
    }
}

/// Largest absolute component of a (1,1) tensor `t` expressed in a
/// `g`-orthonormal frame.
pub fn frame_max_abs(g: &Mat<f64>, t: &Mat<f64>) -> f64 {
    match orthonormal_frame(g) {
        Ok((e, _)) => match e.inverse() {
            Some(einv) => max_abs(&einv.matmul(t).matmul(&e)),
            None => max_abs(t),
        },
        Err(_) => max_abs(t),
    }
}

/// Frobenius norm of a (1,1) tensor self-adjoint w.r.t. a Riemannian `g`,
/// i.e. `sqrt(tr(T²))` for self-adjoint `T`, computed robustly in a frame.
pub fn frame_frobenius(g: &Mat<f64>, t: &Mat<f64>) -> f64 {
    match orthonormal_frame(g) {
        Ok((e, _)) => match e.inverse() {
            Some(einv) => {
                let m = einv.matmul(t).matmul(&e);
                let mut s = 0.0;
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        s += m[(i, j)] * m[(i, j)];
                    }
                }
                s.sqrt()
            }
            None => max_abs(t),
        },
        Err(_) => max_abs(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;

    #[test]
    fn inverse_and_det_agree() {
        let m = Mat::from_fn(3, 3, |i, j| [[2.0, 1.0, 0.5], [0.0, -1.0, 3.0], [1.0, 0.0, 1.0]][i][j]);
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        assert!(max_abs(&id.sub(&Mat::identity(3))) < 1e-14);
        let det = m.det();
        let nd = to_nalgebra(&m).determinant();
        assert!((det - nd).abs() < 1e-13);
    }

    #[test]
    fn det_derivative_with_zero_pivot() {
        // d/ds det([[s, 1],[1, s]]) at s = 0 is 2s = 0; det = s^2 - 1.
        let s = Dual::variable(0.0);
        let one = Dual::constant(1.0);
        let m = Mat::from_fn(2, 2, |i, j| if i == j { s } else { one });
        let d = m.det();
        assert!((d.re + 1.0).abs() < 1e-15);
        assert!(d.eps.abs() < 1e-15);
        let m2 = Mat::from_fn(2, 2, |i, j| if i == j { Dual::new(0.0, 1.0) } else { Dual::new(0.0, 0.0) });
        // det = s^2 with zero real pivot
        assert_eq!(m2.det().re, 0.0);
    }

    #[test]
    fn lorentz_frame() {
        let g = Mat::diag(&[-4.0, 1.0, 9.0]);
        let (e, s) = orthonormal_frame(&g).unwrap();
        let h = e.transpose().matmul(&g).matmul(&e);
        assert!(max_abs(&h.sub(&Mat::diag(&s))) < 1e-14);
        assert_eq!(s.iter().filter(|v| **v < 0.0).count(), 1);
        assert_eq!(metric_index(&g, 1e-12).unwrap(), 1);
    }
}
