//! Generic maps and the derivative extractors built on nested duals.

use crate::error::Result;
use crate::linalg::Mat;
use crate::scalar::{seed, Dual, Scalar};

/// A scalar function `ℝᵐ → ℝ` evaluable at any scalar type.
pub trait ScalarFn: Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// A vector function `ℝᵐ → ℝᵏ` evaluable at any scalar type.
pub trait VectorFn: Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

impl<T: ScalarFn> ScalarFn for &T {
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        (*self).eval(x)
    }
}

impl<T: VectorFn> VectorFn for &T {
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        (*self).eval(x)
    }
}

/// Fallible scalar map; every [`ScalarFn`] is one.
pub trait TryScalarFn: Sync {
    fn try_eval<S: Scalar>(&self, x: &[S]) -> Result<S>;
}

/// Fallible vector map; every [`VectorFn`] is one.
pub trait TryVectorFn: Sync {
    fn try_eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>>;
}

impl<T: ScalarFn> TryScalarFn for T {
    fn try_eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        Ok(self.eval(x))
    }
}

impl<T: VectorFn> TryVectorFn for T {
    fn try_eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.eval(x))
    }
}

/// Seeds `x` for the mixed second partial `∂_i∂_j`.
fn seed2<S: Scalar>(x: &[S], i: usize, j: usize) -> Vec<Dual<Dual<S>>> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| {
            let inner = if k == i { Dual::variable(v) } else { Dual::constant(v) };
            let outer_eps = if k == j { S::one() } else { S::zero() };
            Dual::new(inner, Dual::constant(outer_eps))
        })
        .collect()
}

/// Value and gradient.
pub fn try_gradient<F: TryScalarFn, S: Scalar>(f: &F, x: &[S]) -> Result<(S, Vec<S>)> {
    if x.is_empty() {
        return Ok((f.try_eval(x)?, Vec::new()));
    }
    let mut value = S::zero();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let d: Dual<S> = f.try_eval(&seed(x, i))?;
        value = d.re;
        grad.push(d.eps);
    }
    Ok((value, grad))
}

/// Value, gradient and Hessian (coordinate second partials).
pub fn try_hessian<F: TryScalarFn, S: Scalar>(f: &F, x: &[S]) -> Result<(S, Vec<S>, Mat<S>)> {
    let n = x.len();
    if n == 0 {
        return Ok((f.try_eval(x)?, Vec::new(), Mat::zeros(0, 0)));
    }
    let mut value = S::zero();
    let mut grad = vec![S::zero(); n];
    let mut hess = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let r = f.try_eval(&seed2(x, i, j))?;
            value = r.re.re;
            grad[i] = r.re.eps;
            grad[j] = r.eps.re;
            hess[(i, j)] = r.eps.eps;
            hess[(j, i)] = r.eps.eps;
        }
    }
    Ok((value, grad, hess))
}

/// Value and Jacobian (`rows = outputs`, `cols = inputs`).
pub fn try_jacobian<F: TryVectorFn, S: Scalar>(f: &F, x: &[S]) -> Result<(Vec<S>, Mat<S>)> {
    let n = x.len();
    if n == 0 {
        let v = f.try_eval(x)?;
        let m = v.len();
        return Ok((v, Mat::zeros(m, 0)));
    }
    let mut value = Vec::new();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let d: Vec<Dual<S>> = f.try_eval(&seed(x, i))?;
        value = d.iter().map(|v| v.re).collect();
        cols.push(d.iter().map(|v| v.eps).collect::<Vec<S>>());
    }
    let m = value.len();
    let jac = Mat::from_fn(m, n, |r, c| cols[c][r]);
    Ok((value, jac))
}

/// Value, Jacobian and all second partials `second[i][j][out]`.
pub struct SecondOrder<S> {
    pub value: Vec<S>,
    pub jac: Mat<S>,
    pub second: Vec<Vec<Vec<S>>>,
}

pub fn try_second_order<F: TryVectorFn, S: Scalar>(f: &F, x: &[S]) -> Result<SecondOrder<S>> {
    let n = x.len();
    if n == 0 {
        let v = f.try_eval(x)?;
        let m = v.len();
        return Ok(SecondOrder { value: v, jac: Mat::zeros(m, 0), second: Vec::new() });
    }
    let mut value: Vec<S> = Vec::new();
    let mut first: Vec<Vec<S>> = vec![Vec::new(); n];
    let mut second: Vec<Vec<Vec<S>>> = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let r = f.try_eval(&seed2(x, i, j))?;
            value = r.iter().map(|v| v.re.re).collect();
            first[i] = r.iter().map(|v| v.re.eps).collect();
            first[j] = r.iter().map(|v| v.eps.re).collect();
            let s: Vec<S> = r.iter().map(|v| v.eps.eps).collect();
            second[i][j] = s.clone();
            second[j][i] = s;
        }
    }
    let m = value.len();
    let jac = Mat::from_fn(m, n, |r, c| first[c][r]);
    Ok(SecondOrder { value, jac, second })
}

pub fn gradient<F: ScalarFn, S: Scalar>(f: &F, x: &[S]) -> (S, Vec<S>) {
    try_gradient(f, x).expect("infallible map")
}

pub fn hessian<F: ScalarFn, S: Scalar>(f: &F, x: &[S]) -> (S, Vec<S>, Mat<S>) {
    try_hessian(f, x).expect("infallible map")
}

pub fn jacobian<F: VectorFn, S: Scalar>(f: &F, x: &[S]) -> (Vec<S>, Mat<S>) {
    try_jacobian(f, x).expect("infallible map")
}

pub fn second_order<F: VectorFn, S: Scalar>(f: &F, x: &[S]) -> SecondOrder<S> {
    try_second_order(f, x).expect("infallible map")
}

/// Directional derivative of a vector map along `v`.
pub fn directional<F: VectorFn, S: Scalar>(f: &F, x: &[S], v: &[S]) -> (Vec<S>, Vec<S>) {
    let p: Vec<Dual<S>> = x.iter().zip(v).map(|(&a, &b)| Dual::new(a, b)).collect();
    let r = f.eval(&p);
    (r.iter().map(|d| d.re).collect(), r.iter().map(|d| d.eps).collect())
}

/// Central finite differences on plain f64 closures; oracle use only.
pub mod fd {
    use crate::linalg::Mat;

    pub fn gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect()
    }

    pub fn hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Mat<f64> {
        let n = x.len();
        let f0 = f(x);
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f(&a) - 2.0 * f0 + f(&b)) / (h * h)
            } else {
                let eval = |si: f64, sj: f64| {
                    let mut p = x.to_vec();
                    p[i] += si * h;
                    p[j] += sj * h;
                    f(&p)
                };
                (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                    / (4.0 * h * h)
            }
        })
    }

    /// Jacobian of a vector closure, `rows = outputs`.
    pub fn jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Mat<f64> {
        let n = x.len();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                let fa = f(&a);
                let fb = f(&b);
                fa.iter().zip(&fb).map(|(p, q)| (p - q) / (2.0 * h)).collect()
            })
            .collect();
        let m = cols.first().map_or(0, |c| c.len());
        Mat::from_fn(m, n, |r, c| cols[c][r])
    }

    /// Derivative of a scalar function of one variable, Richardson-extrapolated
    /// central difference (fourth order).
    pub fn derivative(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
        let d2 = (f(t + h / 2.0) - f(t - h / 2.0)) / h;
        (4.0 * d2 - d1) / 3.0
    }

    /// Second derivative, Richardson-extrapolated (fourth order).
    pub fn second_derivative(f: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        let f0 = f(t);
        let s1 = (f(t + h) - 2.0 * f0 + f(t - h)) / (h * h);
        let h2 = h / 2.0;
        let s2 = (f(t + h2) - 2.0 * f0 + f(t - h2)) / (h2 * h2);
        (4.0 * s2 - s1) / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quartic;
    impl ScalarFn for Quartic {
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0] * x[0] * x[1] + x[1].sin() * x[2].exp()
        }
    }

    struct Polar;
    impl VectorFn for Polar {
        fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            vec![x[0] * x[1].cos(), x[0] * x[1].sin()]
        }
    }

    #[test]
    fn hessian_matches_closed_form() {
        let x = [0.3, -0.8, 0.5];
        let (v, g, h) = hessian(&Quartic, &x);
        let e = x[2].exp();
        assert!((v - (x[0] * x[0] * x[1] + x[1].sin() * e)).abs() < 1e-15);
        assert!((g[0] - 2.0 * x[0] * x[1]).abs() < 1e-15);
        assert!((g[1] - (x[0] * x[0] + x[1].cos() * e)).abs() < 1e-15);
        assert!((h[(0, 1)] - 2.0 * x[0]).abs() < 1e-15);
        assert!((h[(1, 1)] + x[1].sin() * e).abs() < 1e-15);
        assert!((h[(1, 2)] - x[1].cos() * e).abs() < 1e-15);
        let fdh = fd::hessian(&|p| Quartic.eval(p), &x, 1e-4);
        for i in 0..3 {
            for j in 0..3 {
                assert!((fdh[(i, j)] - h[(i, j)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn second_order_of_polar_map() {
        let x = [2.0, 0.4];
        let so = second_order(&Polar, &x);
        // d²/dθ² (r cos θ) = -r cos θ
        assert!((so.second[1][1][0] + x[0] * x[1].cos()).abs() < 1e-14);
        assert!((so.second[0][1][1] - x[1].cos()).abs() < 1e-14);
        assert!((so.jac[(0, 1)] + x[0] * x[1].sin()).abs() < 1e-14);
    }
}
