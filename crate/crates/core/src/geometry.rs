//! Charted semi-Riemannian spaces, Levi-Civita connection and curvature.

use crate::error::{Error, Result};
use crate::linalg::{dot, metric_index, Mat};
use crate::scalar::{seed, Dual, Scalar};

/// A semi-Riemannian manifold presented by a single chart.
pub trait ChartedSpace: Sync {
    fn dim(&self) -> usize;
    /// Declared eigenvalue signs, e.g. `[-1, 1, 1]` for a 3-dimensional
    /// Lorentz space. Only the count of `-1` entries is checked.
    fn signature(&self) -> Vec<i8>;
    fn contains(&self, p: &[f64]) -> bool;
    fn metric<S: Scalar>(&self, p: &[S]) -> Mat<S>;
    /// A future-pointing timelike vector at `p` (chart components).
    fn future_anchor(&self, p: &[f64]) -> Vec<f64>;
    /// Box from which random points are drawn; lies inside the chart.
    fn sample_bounds(&self) -> Vec<(f64, f64)>;

    fn index(&self) -> usize {
        self.signature().iter().filter(|s| **s < 0).count()
    }
}

impl<T: ChartedSpace> ChartedSpace for &T {
    fn dim(&self) -> usize {
        (*self).dim()
    }
    fn signature(&self) -> Vec<i8> {
        (*self).signature()
    }
    fn contains(&self, p: &[f64]) -> bool {
        (*self).contains(p)
    }
    fn metric<S: Scalar>(&self, p: &[S]) -> Mat<S> {
        (*self).metric(p)
    }
    fn future_anchor(&self, p: &[f64]) -> Vec<f64> {
        (*self).future_anchor(p)
    }
    fn sample_bounds(&self) -> Vec<(f64, f64)> {
        (*self).sample_bounds()
    }
}

/// A vector field given by chart components.
pub trait VectorField: Sync {
    fn eval<S: Scalar>(&self, p: &[S]) -> Vec<S>;
}

impl<T: VectorField> VectorField for &T {
    fn eval<S: Scalar>(&self, p: &[S]) -> Vec<S> {
        (*self).eval(p)
    }
}

/// How metric derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Nested dual numbers; `order` is the highest metric derivative offered.
    Exact { order: u8 },
    /// Central differences with the given step, nested for second order.
    FiniteDifference { step: f64 },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Exact { order: 3 }
    }
}

impl Backend {
    pub fn order(&self) -> u8 {
        match self {
            Backend::Exact { order } => *order,
            Backend::FiniteDifference { .. } => 2,
        }
    }

    pub fn require(&self, required: u8) -> Result<()> {
        if self.order() < required {
            return Err(Error::BackendOrderTooLow { required, available: self.order() });
        }
        Ok(())
    }
}

pub fn check_domain<M: ChartedSpace>(space: &M, p: &[f64]) -> Result<()> {
    if p.len() != space.dim() || !space.contains(p) || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::OutOfDomain(p.to_vec()));
    }
    Ok(())
}

/// Metric at `p` with symmetry and signature checks.
pub fn metric_at<M: ChartedSpace>(space: &M, p: &[f64]) -> Result<Mat<f64>> {
    check_domain(space, p)?;
    let g = space.metric(p);
    let n = g.rows();
    for i in 0..n {
        for j in 0..i {
            let d = (g[(i, j)] - g[(j, i)]).abs();
            if d > 1e-12 * (1.0 + g[(i, j)].abs()) {
                return Err(Error::SignatureMismatch(format!("metric not symmetric ({d:e})")));
            }
        }
    }
    let found = metric_index(&g, 1e-14)?;
    if found != space.index() {
        return Err(Error::SignatureMismatch(format!(
            "declared index {}, found {found} negative eigenvalues at {p:?}",
            space.index()
        )));
    }
    Ok(g)
}

/// `Γ^k_{ij}` stored as `data[(k * n + i) * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Christoffel<S> {
    pub fn zeros(n: usize) -> Self {
        Christoffel { n, data: vec![S::zero(); n * n * n] }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> S {
        self.data[(k * self.n + i) * self.n + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: S) {
        self.data[(k * self.n + i) * self.n + j] = v;
    }

    /// `Γ(X, Y)^k = Γ^k_{ij} X^i Y^j`.
    pub fn contract(&self, x: &[S], y: &[S]) -> Vec<S> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = S::zero();
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * x[i] * y[j];
                    }
                }
                s
            })
            .collect()
    }

    /// The matrix `M^k_j = Γ^k_{ij} X^i`, so `∇_X Y = X(Y) + M Y`.
    pub fn along(&self, x: &[S]) -> Mat<S> {
        let n = self.n;
        Mat::from_fn(n, n, |k, j| {
            let mut s = S::zero();
            for i in 0..n {
                s += self.get(k, i, j) * x[i];
            }
            s
        })
    }

    pub fn map_re(&self) -> Christoffel<f64> {
        Christoffel { n: self.n, data: self.data.iter().map(|v| v.re()).collect() }
    }
}

fn assemble<S: Scalar>(g: &Mat<S>, dg: &[Mat<S>]) -> Result<Christoffel<S>> {
    let n = g.rows();
    let ginv = g
        .inverse()
        .ok_or_else(|| Error::SignatureMismatch("singular metric".into()))?;
    let mut gamma = Christoffel::zeros(n);
    // first kind: [ij, l] = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
    for i in 0..n {
        for j in i..n {
            let first: Vec<S> = (0..n)
                .map(|l| (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]) * 0.5)
                .collect();
            for k in 0..n {
                let mut s = S::zero();
                for l in 0..n {
                    s += ginv[(k, l)] * first[l];
                }
                gamma.set(k, i, j, s);
                gamma.set(k, j, i, s);
            }
        }
    }
    Ok(gamma)
}

/// Exact Christoffel symbols at a generic point.
pub fn christoffel<M: ChartedSpace, S: Scalar>(space: &M, p: &[S]) -> Result<Christoffel<S>> {
    let n = space.dim();
    let mut g = Mat::zeros(n, n);
    let mut dg = Vec::with_capacity(n);
    for l in 0..n {
        let gl: Mat<Dual<S>> = space.metric(&seed(p, l));
        g = Mat::from_fn(n, n, |i, j| gl[(i, j)].re);
        dg.push(Mat::from_fn(n, n, |i, j| gl[(i, j)].eps));
    }
    if n == 0 {
        g = space.metric(p);
    }
    assemble(&g, &dg)
}

/// Christoffel symbols from central differences of the metric.
pub fn christoffel_fd<M: ChartedSpace>(space: &M, p: &[f64], h: f64) -> Result<Christoffel<f64>> {
    let n = space.dim();
    let g = space.metric(p);
    let dg: Vec<Mat<f64>> = (0..n)
        .map(|l| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[l] += h;
            b[l] -= h;
            let ga = space.metric(&a);
            let gb = space.metric(&b);
            Mat::from_fn(n, n, |i, j| (ga[(i, j)] - gb[(i, j)]) / (2.0 * h))
        })
        .collect();
    assemble(&g, &dg)
}

pub fn christoffel_at<M: ChartedSpace>(
    space: &M,
    p: &[f64],
    backend: Backend,
) -> Result<Christoffel<f64>> {
    check_domain(space, p)?;
    backend.require(1)?;
    match backend {
        Backend::Exact { .. } => christoffel(space, p),
        Backend::FiniteDifference { step } => christoffel_fd(space, p, step),
    }
}

/// `R^l_{kij}` stored as `data[((l * n + k) * n + i) * n + j]`, with
/// `R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Riemann<S> {
    #[inline]
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> S {
        let n = self.n;
        self.data[((l * n + k) * n + i) * n + j]
    }

    /// `R(X, Y)Z`.
    pub fn apply(&self, x: &[S], y: &[S], z: &[S]) -> Vec<S> {
        let n = self.n;
        (0..n)
            .map(|l| {
                let mut s = S::zero();
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            s += self.get(l, k, i, j) * z[k] * x[i] * y[j];
                        }
                    }
                }
                s
            })
            .collect()
    }

    /// `Ric_{jk} = R^i_{kij}`.
    pub fn ricci(&self) -> Mat<S> {
        let n = self.n;
        Mat::from_fn(n, n, |j, k| {
            let mut s = S::zero();
            for i in 0..n {
                s += self.get(i, k, i, j);
            }
            s
        })
    }

    pub fn map_re(&self) -> Riemann<f64> {
        Riemann { n: self.n, data: self.data.iter().map(|v| v.re()).collect() }
    }
}

fn riemann_from<S: Scalar>(gamma: &Christoffel<S>, dgamma: &[Christoffel<S>]) -> Riemann<S> {
    let n = gamma.n;
    let mut data = vec![S::zero(); n * n * n * n];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = dgamma[i].get(l, j, k) - dgamma[j].get(l, i, k);
                    for m in 0..n {
                        s += gamma.get(l, i, m) * gamma.get(m, j, k)
                            - gamma.get(l, j, m) * gamma.get(m, i, k);
                    }
                    data[((l * n + k) * n + i) * n + j] = s;
                }
            }
        }
    }
    Riemann { n, data }
}

/// Exact Riemann tensor at a generic point.
pub fn riemann<M: ChartedSpace, S: Scalar>(space: &M, p: &[S]) -> Result<Riemann<S>> {
    let n = space.dim();
    let mut gamma = Christoffel::zeros(n);
    let mut dgamma = Vec::with_capacity(n);
    for i in 0..n {
        let gi: Christoffel<Dual<S>> = christoffel(space, &seed(p, i))?;
        gamma = Christoffel { n, data: gi.data.iter().map(|d| d.re).collect() };
        dgamma.push(Christoffel { n, data: gi.data.iter().map(|d| d.eps).collect() });
    }
    Ok(riemann_from(&gamma, &dgamma))
}

/// Riemann tensor from nested central differences.
pub fn riemann_fd<M: ChartedSpace>(space: &M, p: &[f64], h: f64) -> Result<Riemann<f64>> {
    let n = space.dim();
    let gamma = christoffel_fd(space, p, h)?;
    let mut dgamma = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[i] += h;
        b[i] -= h;
        let ga = christoffel_fd(space, &a, h)?;
        let gb = christoffel_fd(space, &b, h)?;
        dgamma.push(Christoffel {
            n,
            data: ga.data.iter().zip(&gb.data).map(|(x, y)| (x - y) / (2.0 * h)).collect(),
        });
    }
    Ok(riemann_from(&gamma, &dgamma))
}

/// Curvature bundle at a point.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub metric: Mat<f64>,
    pub riemann: Riemann<f64>,
    pub ricci: Mat<f64>,
}

impl Curvature {
    /// `⟨R(X,Y)Y, X⟩ / (⟨X,X⟩⟨Y,Y⟩ − ⟨X,Y⟩²)`; refuses planes whose
    /// discriminant is below `tol` in absolute value.
    pub fn sectional(&self, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
        let g = &self.metric;
        let disc = g.bilinear(x, x) * g.bilinear(y, y) - g.bilinear(x, y).powi(2);
        if disc.abs() < tol {
            return Err(Error::DegeneratePlane(disc));
        }
        let r = self.riemann.apply(x, y, y);
        Ok(g.bilinear(&r, x) / disc)
    }

    pub fn scalar(&self) -> f64 {
        let ginv = self.metric.inverse().expect("metric checked nondegenerate");
        let n = ginv.rows();
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += ginv[(j, k)] * self.ricci[(j, k)];
            }
        }
        s
    }
}

pub fn curvature_at<M: ChartedSpace>(space: &M, p: &[f64], backend: Backend) -> Result<Curvature> {
    let metric = metric_at(space, p)?;
    backend.require(2)?;
    let riemann = match backend {
        Backend::Exact { .. } => riemann(space, p)?,
        Backend::FiniteDifference { step } => riemann_fd(space, p, step)?,
    };
    let ricci = riemann.ricci();
    Ok(Curvature { metric, riemann, ricci })
}

/// Largest violation of the algebraic Riemann symmetries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SymmetryResidual {
    pub antisym_last: f64,
    pub antisym_first: f64,
    pub pair: f64,
    pub bianchi: f64,
}

impl SymmetryResidual {
    pub fn max(&self) -> f64 {
        self.antisym_last.max(self.antisym_first).max(self.pair).max(self.bianchi)
    }
}

pub fn symmetry_residual(r: &Riemann<f64>, g: &Mat<f64>) -> SymmetryResidual {
    let n = r.n;
    // all-lower R_{lkij} = g_{lm} R^m_{kij}
    let low = |l: usize, k: usize, i: usize, j: usize| -> f64 {
        (0..n).map(|m| g[(l, m)] * r.get(m, k, i, j)).sum()
    };
    let mut out = SymmetryResidual::default();
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let v = low(l, k, i, j);
                    out.antisym_last = out.antisym_last.max((v + low(l, k, j, i)).abs());
                    out.antisym_first = out.antisym_first.max((v + low(k, l, i, j)).abs());
                    out.pair = out.pair.max((v - low(i, j, l, k)).abs());
                    let b = r.get(l, k, i, j) + r.get(l, i, j, k) + r.get(l, j, k, i);
                    out.bianchi = out.bianchi.max(b.abs());
                }
            }
        }
    }
    out
}

/// `sup |R^l_{kij} − c(g_{jk}δ^l_i − g_{ik}δ^l_j)|`, the constant-curvature
/// form `R(X,Y)Z = c(⟨Y,Z⟩X − ⟨X,Z⟩Y)` in components.
pub fn constant_curvature_residual(r: &Riemann<f64>, g: &Mat<f64>, c: f64) -> f64 {
    let n = r.n;
    let mut worst = 0.0_f64;
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let want = c * (g[(j, k)] * d(l, i) - g[(i, k)] * d(l, j));
                    worst = worst.max((r.get(l, k, i, j) - want).abs());
                }
            }
        }
    }
    worst
}

/// `sup |∇_k g_{ij}|` and `sup |Γ^k_{ij} − Γ^k_{ji}|`.
pub fn compatibility_residuals<M: ChartedSpace>(space: &M, p: &[f64]) -> Result<(f64, f64)> {
    let n = space.dim();
    let gamma = christoffel(space, p)?;
    let g = space.metric(p);
    let mut metricity = 0.0_f64;
    let mut torsion = 0.0_f64;
    for k in 0..n {
        let gk: Mat<Dual<f64>> = space.metric(&seed(p, k));
        for i in 0..n {
            for j in 0..n {
                let mut v = gk[(i, j)].eps;
                for l in 0..n {
                    v -= gamma.get(l, k, i) * g[(l, j)] + gamma.get(l, k, j) * g[(i, l)];
                }
                metricity = metricity.max(v.abs());
                torsion = torsion.max((gamma.get(k, i, j) - gamma.get(k, j, i)).abs());
            }
        }
    }
    Ok((metricity, torsion))
}

/// `(∇V)^k_i = ∂_i V^k + Γ^k_{ij} V^j`, so `∇_X V = (∇V) X`.
pub fn covariant_jacobian<M: ChartedSpace, F: VectorField, S: Scalar>(
    space: &M,
    field: &F,
    p: &[S],
) -> Result<Mat<S>> {
    let n = space.dim();
    let gamma = christoffel(space, p)?;
    let v = field.eval(p);
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        let d: Vec<Dual<S>> = field.eval(&seed(p, i));
        for k in 0..n {
            let mut s = d[k].eps;
            for j in 0..n {
                s += gamma.get(k, i, j) * v[j];
            }
            m[(k, i)] = s;
        }
    }
    Ok(m)
}

pub fn covariant_derivative<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    p: &[f64],
    direction: &[f64],
) -> Result<Vec<f64>> {
    check_domain(space, p)?;
    Ok(covariant_jacobian(space, field, p)?.matvec(direction))
}

/// Finite-difference covariant derivative (oracle).
pub fn covariant_derivative_fd<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    p: &[f64],
    direction: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    check_domain(space, p)?;
    let a: Vec<f64> = p.iter().zip(direction).map(|(x, d)| x + h * d).collect();
    let b: Vec<f64> = p.iter().zip(direction).map(|(x, d)| x - h * d).collect();
    let va = field.eval(&a);
    let vb = field.eval(&b);
    let v = field.eval(p);
    let gamma = christoffel_fd(space, p, h)?;
    let corr = gamma.contract(direction, &v);
    Ok((0..space.dim()).map(|k| (va[k] - vb[k]) / (2.0 * h) + corr[k]).collect())
}

pub fn divergence<M: ChartedSpace, F: VectorField, S: Scalar>(
    space: &M,
    field: &F,
    p: &[S],
) -> Result<S> {
    Ok(covariant_jacobian(space, field, p)?.trace())
}

pub fn divergence_at<M: ChartedSpace, F: VectorField>(space: &M, field: &F, p: &[f64]) -> Result<f64> {
    check_domain(space, p)?;
    divergence(space, field, p)
}

/// `⟨a, b⟩_g`.
pub fn inner<S: Scalar>(g: &Mat<S>, a: &[S], b: &[S]) -> S {
    g.bilinear(a, b)
}

/// Index raising: `g^{-1} ω`.
pub fn raise<S: Scalar>(g: &Mat<S>, covector: &[S]) -> Result<Vec<S>> {
    let ginv = g
        .inverse()
        .ok_or_else(|| Error::SignatureMismatch("singular metric".into()))?;
    Ok(ginv.matvec(covector))
}

/// Index lowering: `g v`.
pub fn lower<S: Scalar>(g: &Mat<S>, v: &[S]) -> Vec<S> {
    g.matvec(v)
}

pub fn norm_sq<S: Scalar>(g: &Mat<S>, v: &[S]) -> S {
    dot(v, &g.matvec(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Round 2-sphere of radius 1 in (θ, φ).
    struct Sphere2;
    impl ChartedSpace for Sphere2 {
        fn dim(&self) -> usize {
            2
        }
        fn signature(&self) -> Vec<i8> {
            vec![1, 1]
        }
        fn contains(&self, p: &[f64]) -> bool {
            p[0] > 0.0 && p[0] < std::f64::consts::PI
        }
        fn metric<S: Scalar>(&self, p: &[S]) -> Mat<S> {
            let s = p[0].sin();
            Mat::diag(&[S::one(), s * s])
        }
        fn future_anchor(&self, _p: &[f64]) -> Vec<f64> {
            vec![0.0, 0.0]
        }
        fn sample_bounds(&self) -> Vec<(f64, f64)> {
            vec![(0.3, 2.8), (0.0, 6.2)]
        }
    }

    #[test]
    fn sphere_christoffel_and_curvature() {
        let p = [0.8, 1.1];
        let g = christoffel(&Sphere2, &p).unwrap();
        assert!((g.get(0, 1, 1) + p[0].sin() * p[0].cos()).abs() < 1e-15);
        assert!((g.get(1, 0, 1) - p[0].cos() / p[0].sin()).abs() < 1e-15);
        let c = curvature_at(&Sphere2, &p, Backend::default()).unwrap();
        let k = c.sectional(&[1.0, 0.0], &[0.3, 2.0], 1e-10).unwrap();
        assert!((k - 1.0).abs() < 1e-13);
        assert!((c.scalar() - 2.0).abs() < 1e-12);
        assert!(symmetry_residual(&c.riemann, &c.metric).max() < 1e-13);
        assert!(constant_curvature_residual(&c.riemann, &c.metric, 1.0) < 1e-13);
    }

    #[test]
    fn fd_backend_agrees() {
        let p = [1.2, 0.4];
        let e = christoffel_at(&Sphere2, &p, Backend::default()).unwrap();
        let f = christoffel_at(&Sphere2, &p, Backend::FiniteDifference { step: 1e-5 }).unwrap();
        for (a, b) in e.data.iter().zip(&f.data) {
            assert!((a - b).abs() < 1e-8);
        }
        let re = riemann(&Sphere2, &p).unwrap();
        let rf = riemann_fd(&Sphere2, &p, 1e-3).unwrap();
        for (a, b) in re.data.iter().zip(&rf.data) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            metric_at(&Sphere2, &[4.0, 0.0]),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            curvature_at(&Sphere2, &[1.0, 0.0], Backend::Exact { order: 1 }),
            Err(Error::BackendOrderTooLow { required: 2, available: 1 })
        ));
        let c = curvature_at(&Sphere2, &[1.0, 0.0], Backend::default()).unwrap();
        assert!(matches!(
            c.sectional(&[1.0, 0.0], &[2.0, 0.0], 1e-10),
            Err(Error::DegeneratePlane(_))
        ));
    }
}
