//! Tensor-product quadrature over parameter boxes.
//!
//! Periodic axes use the trapezoid rule (spectrally accurate for smooth
//! periodic integrands), the others Gauss-Legendre. Coarseness is detected by
//! comparing the requested mesh against the mesh with every axis halved.

use crate::error::{Error, Result};
use crate::par;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64) -> Axis {
        Axis { lo, hi, periodic: false }
    }

    pub fn periodic(lo: f64, hi: f64) -> Axis {
        Axis { lo, hi, periodic: true }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.periodic || (x >= self.lo && x <= self.hi)
    }

    /// Nodes and weights of the one-dimensional rule with `n` points.
    pub fn rule(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let n = n.max(1);
        if self.periodic {
            let h = self.len() / n as f64;
            ((0..n).map(|i| self.lo + h * i as f64).collect(), vec![h; n])
        } else {
            let (x, w) = gauss_legendre(n);
            let half = 0.5 * self.len();
            let mid = 0.5 * (self.lo + self.hi);
            (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect())
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor-product nodes (flattened, last axis fastest) and weights.
pub fn tensor_rule(axes: &[Axis], counts: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rules: Vec<(Vec<f64>, Vec<f64>)> =
        axes.iter().zip(counts).map(|(a, &n)| a.rule(n)).collect();
    let mut nodes = vec![Vec::new()];
    let mut weights = vec![1.0];
    for (xs, ws) in &rules {
        let mut nn = Vec::with_capacity(nodes.len() * xs.len());
        let mut nw = Vec::with_capacity(nodes.len() * xs.len());
        for (p, w0) in nodes.iter().zip(&weights) {
            for (x, w) in xs.iter().zip(ws) {
                let mut q = p.clone();
                q.push(*x);
                nn.push(q);
                nw.push(w0 * w);
            }
        }
        nodes = nn;
        weights = nw;
    }
    (nodes, weights)
}

/// Integrates `f` over the box with the given per-axis counts. Point
/// evaluations run through [`par::map`]; the sum is taken in node order.
pub fn integrate<F>(axes: &[Axis], counts: &[usize], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let (nodes, weights) = tensor_rule(axes, counts);
    let vals = par::try_map(&nodes, |p| f(p))?;
    Ok(vals.iter().zip(&weights).map(|(v, w)| v * w).sum())
}

/// Integrates several integrands sharing one point evaluation.
pub fn integrate_many<F>(axes: &[Axis], counts: &[usize], k: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync + Send,
{
    let (nodes, weights) = tensor_rule(axes, counts);
    let vals = par::try_map(&nodes, |p| f(p))?;
    let mut acc = vec![0.0; k];
    for (v, w) in vals.iter().zip(&weights) {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x * w;
        }
    }
    Ok(acc)
}

/// Estimate with a halving check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// `|fine − coarse|`.
    pub error: f64,
}

pub fn halved(counts: &[usize]) -> Vec<usize> {
    counts.iter().map(|&n| (n / 2).max(1)).collect()
}

/// Integrates on `counts` and on the halved mesh; fails with
/// [`Error::QuadratureTooCoarse`] when they disagree by more than
/// `tol · max(1, |value|)`.
pub fn integrate_checked<F>(axes: &[Axis], counts: &[usize], tol: f64, f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let fine = integrate(axes, counts, &f)?;
    let coarse = integrate(axes, &halved(counts), &f)?;
    let error = (fine - coarse).abs();
    if error > tol * fine.abs().max(1.0) {
        return Err(Error::QuadratureTooCoarse(error));
    }
    Ok(Estimate { value: fine, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - want).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn sphere_area() {
        let axes = [Axis::new(0.0, PI), Axis::periodic(0.0, 2.0 * PI)];
        let est = integrate_checked(&axes, &[16, 16], 1e-10, |u| Ok(u[0].sin())).unwrap();
        assert!((est.value - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn too_coarse_is_reported() {
        let axes = [Axis::new(0.0, 1.0)];
        let r = integrate_checked(&axes, &[2], 1e-12, |u| Ok((40.0 * u[0]).sin()));
        assert!(matches!(r, Err(Error::QuadratureTooCoarse(_))));
    }
}
