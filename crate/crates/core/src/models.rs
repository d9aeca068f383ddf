//! Concrete ambient spaces: flat spaces, GRW warped products and
//! hyperquadrics.

use crate::config;
use crate::diff::{jacobian, VectorFn};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{curvature_at, Backend, ChartedSpace};
use crate::linalg::Mat;
use crate::scalar::{Dual, Scalar};
use std::f64::consts::PI;

/// Pseudo-Euclidean space `ℝ^dim_index`; the last `index` coordinates are
/// timelike and the last one is future-pointing.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSpace {
    pub dim: usize,
    pub index: usize,
}

pub fn make_flat(dim: usize, index: usize) -> Result<FlatSpace> {
    if !(1..=2).contains(&index) {
        return Err(Error::UnsupportedIndex(index));
    }
    if dim <= index {
        return Err(Error::InvalidArgument(format!("dimension {dim} too small for index {index}")));
    }
    Ok(FlatSpace { dim, index })
}

impl FlatSpace {
    fn eta(&self) -> Vec<f64> {
        (0..self.dim).map(|i| if i + self.index >= self.dim { -1.0 } else { 1.0 }).collect()
    }
}

impl ChartedSpace for FlatSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn signature(&self) -> Vec<i8> {
        self.eta().iter().map(|&s| s as i8).collect()
    }
    fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim
    }
    fn metric<S: Scalar>(&self, _p: &[S]) -> Mat<S> {
        let d: Vec<S> = self.eta().iter().map(|&v| S::from_f64(v)).collect();
        Mat::diag(&d)
    }
    fn future_anchor(&self, _p: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        v[self.dim - 1] = 1.0;
        v
    }
    fn sample_bounds(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); self.dim]
    }
}

/// Warping function of a GRW space.
#[derive(Debug, Clone, PartialEq)]
pub enum Warp {
    Cosh,
    Sinh,
    Sin,
    /// `φ(t) = t`.
    Linear,
    /// Expression in `t`.
    Expr(Expr),
}

impl Warp {
    pub fn parse(src: &str) -> Result<Warp> {
        Ok(match src.trim() {
            "cosh" | "cosh(t)" => Warp::Cosh,
            "sinh" | "sinh(t)" => Warp::Sinh,
            "sin" | "sin(t)" => Warp::Sin,
            "t" | "linear" => Warp::Linear,
            other => Warp::Expr(Expr::parse(other, &["t"])?),
        })
    }

    pub fn eval<S: Scalar>(&self, t: S) -> S {
        match self {
            Warp::Cosh => t.cosh(),
            Warp::Sinh => t.sinh(),
            Warp::Sin => t.sin(),
            Warp::Linear => t,
            Warp::Expr(e) => e.eval(&[t]),
        }
    }

    /// `(φ, φ′, φ″)` at `t`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let d: Dual<Dual<f64>> = self.eval(Dual::new(Dual::variable(t), Dual::constant(1.0)));
        (d.re.re, d.re.eps, d.eps.eps)
    }

    pub fn describe(&self) -> String {
        match self {
            Warp::Cosh => "cosh(t)".into(),
            Warp::Sinh => "sinh(t)".into(),
            Warp::Sin => "sin(t)".into(),
            Warp::Linear => "t".into(),
            Warp::Expr(e) => e.source().into(),
        }
    }
}

/// Riemannian fiber of a GRW space.
#[derive(Debug, Clone, PartialEq)]
pub enum Fiber {
    /// Unit sphere in hyperspherical angles `(θ_1, …, θ_{n−1}, φ)`.
    Sphere { n: usize },
    /// Hyperbolic space in the graph chart `y ↦ (y, √(1+|y|²))`.
    Hyperbolic { n: usize },
    Flat { n: usize },
    /// `e^{2f(y)} δ` with `f` an expression in `y0, y1, …`; no declared
    /// curvature.
    Conformal { n: usize, log_factor: Expr },
}

impl Fiber {
    pub fn dim(&self) -> usize {
        match self {
            Fiber::Sphere { n } | Fiber::Hyperbolic { n } | Fiber::Flat { n } => *n,
            Fiber::Conformal { n, .. } => *n,
        }
    }

    /// Declared constant sectional curvature.
    pub fn curvature(&self) -> Option<f64> {
        match self {
            Fiber::Sphere { .. } => Some(1.0),
            Fiber::Hyperbolic { .. } => Some(-1.0),
            Fiber::Flat { .. } => Some(0.0),
            Fiber::Conformal { .. } => None,
        }
    }

    pub fn metric<S: Scalar>(&self, y: &[S]) -> Mat<S> {
        let n = self.dim();
        match self {
            Fiber::Sphere { .. } => {
                let mut d = Vec::with_capacity(n);
                let mut acc = S::one();
                for i in 0..n {
                    d.push(acc);
                    if i + 1 < n {
                        let s = y[i].sin();
                        acc = acc * s * s;
                    }
                }
                Mat::diag(&d)
            }
            Fiber::Hyperbolic { .. } => {
                let mut r2 = S::one();
                for v in y {
                    r2 += *v * *v;
                }
                Mat::from_fn(n, n, |i, j| {
                    let base = if i == j { S::one() } else { S::zero() };
                    base - y[i] * y[j] / r2
                })
            }
            Fiber::Flat { .. } => Mat::identity(n),
            Fiber::Conformal { log_factor, .. } => {
                let f = (log_factor.eval(y) * 2.0).exp();
                Mat::identity(n).scale(f)
            }
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            Fiber::Sphere { n } => y[..n.saturating_sub(1)].iter().all(|&a| a > 0.0 && a < PI),
            _ => true,
        }
    }

    pub fn sample_bounds(&self) -> Vec<(f64, f64)> {
        let n = self.dim();
        match self {
            Fiber::Sphere { .. } => (0..n)
                .map(|i| if i + 1 < n { (0.35, PI - 0.35) } else { (0.0, 2.0 * PI) })
                .collect(),
            _ => vec![(-1.0, 1.0); n],
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Fiber::Sphere { n } => format!("S^{n}"),
            Fiber::Hyperbolic { n } => format!("H^{n}"),
            Fiber::Flat { n } => format!("R^{n}"),
            Fiber::Conformal { n, log_factor } => format!("(R^{n}, e^(2({log_factor}))δ)"),
        }
    }
}

/// `−I ×_φ F` in coordinates `(t, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrwModel {
    pub interval: (f64, f64),
    pub warp: Warp,
    pub fiber: Fiber,
}

pub fn make_grw(interval: (f64, f64), warp: Warp, fiber: Fiber) -> Result<GrwModel> {
    if interval.0.is_nan() || interval.1.is_nan() || interval.0 >= interval.1 {
        return Err(Error::InvalidArgument(format!("bad interval {interval:?}")));
    }
    let model = GrwModel { interval, warp, fiber };
    let (lo, hi) = model.t_bounds();
    for i in 0..=256 {
        let t = lo + (hi - lo) * i as f64 / 256.0;
        let v = model.warp.eval(t);
        if !(v > 0.0) {
            return Err(Error::NonpositiveWarp(t));
        }
    }
    Ok(model)
}

impl GrwModel {
    /// Range of `t` used for sampling: the interval with a margin.
    pub fn t_bounds(&self) -> (f64, f64) {
        let (a, b) = self.interval;
        match (a.is_finite(), b.is_finite()) {
            (true, true) => (a + 0.1 * (b - a), b - 0.1 * (b - a)),
            (true, false) => (a + 0.5, a + 3.0),
            (false, true) => (b - 3.0, b - 0.5),
            (false, false) => (-1.5, 1.5),
        }
    }

    pub fn in_interval(&self, t: f64) -> bool {
        t > self.interval.0 && t < self.interval.1
    }

    pub fn describe(&self) -> String {
        format!(
            "-({}, {}) x_[{}] {}",
            self.interval.0,
            self.interval.1,
            self.warp.describe(),
            self.fiber.describe()
        )
    }
}

impl ChartedSpace for GrwModel {
    fn dim(&self) -> usize {
        self.fiber.dim() + 1
    }
    fn signature(&self) -> Vec<i8> {
        let mut s = vec![-1];
        s.extend(std::iter::repeat_n(1, self.fiber.dim()));
        s
    }
    fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && self.in_interval(p[0])
            && self.warp.eval(p[0]) > 0.0
            && self.fiber.contains(&p[1..])
    }
    fn metric<S: Scalar>(&self, p: &[S]) -> Mat<S> {
        let n = self.dim();
        let phi = self.warp.eval(p[0]);
        let gf = self.fiber.metric(&p[1..]);
        let phi2 = phi * phi;
        Mat::from_fn(n, n, |i, j| match (i, j) {
            (0, 0) => -S::one(),
            (0, _) | (_, 0) => S::zero(),
            _ => phi2 * gf[(i - 1, j - 1)],
        })
    }
    fn future_anchor(&self, _p: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        v[0] = 1.0;
        v
    }
    fn sample_bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![self.t_bounds()];
        b.extend(self.fiber.sample_bounds());
        b
    }
}

/// `(sup |φ″/φ − c|, sup |((φ′)² + k)/φ² − c|)` over a uniform grid of the
/// sampling range of `t`.
pub fn grw_curvature_residual(model: &GrwModel, c_target: f64) -> Result<(f64, f64)> {
    let k = model.fiber.curvature().ok_or(Error::FiberCurvatureUnknown)?;
    let (lo, hi) = model.t_bounds();
    let mut r1 = 0.0_f64;
    let mut r2 = 0.0_f64;
    for i in 0..=64 {
        let t = lo + (hi - lo) * i as f64 / 64.0;
        let (p, dp, ddp) = model.warp.jet(t);
        r1 = r1.max((ddp / p - c_target).abs());
        r2 = r2.max(((dp * dp + k) / (p * p) - c_target).abs());
    }
    Ok((r1, r2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceData {
    pub umbilicity_factor: f64,
    /// `V = φ(t0) ∂_t` in chart components.
    pub v_at_slice: Vec<f64>,
    pub psi_at_slice: f64,
}

pub fn slice_data(model: &GrwModel, t0: f64) -> Result<SliceData> {
    if !model.in_interval(t0) {
        return Err(Error::OutOfInterval(t0));
    }
    let (p, dp, _) = model.warp.jet(t0);
    let mut v = vec![0.0; model.dim()];
    v[0] = p;
    Ok(SliceData { umbilicity_factor: -dp / p, v_at_slice: v, psi_at_slice: dp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadricKind {
    DeSitter,
    AntiDeSitter,
}

/// `S_1^n ⊂ 𝕃^{n+1}` (level +1) or `H_1^n ⊂ ℝ^{n+1}_2` (level −1), as a graph
/// over `n` ambient coordinates.
///
/// de Sitter: chart `(x_2, …, x_{n+1})`, `x_1 = √(1 + x_{n+1}² − Σ_{2≤i≤n} x_i²)`.
/// Anti-de Sitter: chart `(x_1, …, x_n)`, `x_{n+1} = √(1 + Σ_{i<n} x_i² − x_n²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperquadric {
    pub kind: QuadricKind,
    pub n: usize,
    pub ambient: FlatSpace,
}

pub fn make_hyperquadric(kind: QuadricKind, n: usize) -> Result<Hyperquadric> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("hyperquadric dimension {n} < 2")));
    }
    let index = match kind {
        QuadricKind::DeSitter => 1,
        QuadricKind::AntiDeSitter => 2,
    };
    Ok(Hyperquadric { kind, n, ambient: make_flat(n + 1, index)? })
}

struct Embed<'a>(&'a Hyperquadric);

impl VectorFn for Embed<'_> {
    fn eval<S: Scalar>(&self, c: &[S]) -> Vec<S> {
        self.0.embed(c)
    }
}

impl Hyperquadric {
    pub fn level(&self) -> f64 {
        match self.kind {
            QuadricKind::DeSitter => 1.0,
            QuadricKind::AntiDeSitter => -1.0,
        }
    }

    fn radicand<S: Scalar>(&self, c: &[S]) -> S {
        let n = self.n;
        let mut r = S::one();
        match self.kind {
            QuadricKind::DeSitter => {
                for v in &c[..n - 1] {
                    r -= *v * *v;
                }
                r += c[n - 1] * c[n - 1];
            }
            QuadricKind::AntiDeSitter => {
                for v in &c[..n - 1] {
                    r += *v * *v;
                }
                r -= c[n - 1] * c[n - 1];
            }
        }
        r
    }

    /// Point of the flat ambient space.
    pub fn embed<S: Scalar>(&self, c: &[S]) -> Vec<S> {
        let root = self.radicand(c).sqrt();
        match self.kind {
            QuadricKind::DeSitter => {
                let mut x = vec![root];
                x.extend_from_slice(c);
                x
            }
            QuadricKind::AntiDeSitter => {
                let mut x = c.to_vec();
                x.push(root);
                x
            }
        }
    }

    /// `⟨x, x⟩ − level` at the embedded chart point.
    pub fn level_residual(&self, c: &[f64]) -> f64 {
        let x = self.embed(c);
        let g = self.ambient.metric(&x);
        g.bilinear(&x, &x) - self.level()
    }
}

impl ChartedSpace for Hyperquadric {
    fn dim(&self) -> usize {
        self.n
    }
    fn signature(&self) -> Vec<i8> {
        let mut s = vec![1; self.n - 1];
        s.push(-1);
        s
    }
    fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.n && self.radicand(p) > 1e-6
    }
    fn metric<S: Scalar>(&self, c: &[S]) -> Mat<S> {
        let (x, j) = jacobian(&Embed(self), c);
        let eta = self.ambient.metric(&x);
        j.transpose().matmul(&eta).matmul(&j)
    }
    fn future_anchor(&self, p: &[f64]) -> Vec<f64> {
        let x = self.embed(p);
        let n = self.n;
        // tangential projection of the ambient time axis, read in the chart
        match self.kind {
            QuadricKind::DeSitter => {
                let s = x[n];
                (1..=n).map(|i| s * x[i] + if i == n { 1.0 } else { 0.0 }).collect()
            }
            QuadricKind::AntiDeSitter => {
                let s = x[n - 1];
                (0..n).map(|i| -s * x[i] + if i == n - 1 { 1.0 } else { 0.0 }).collect()
            }
        }
    }
    fn sample_bounds(&self) -> Vec<(f64, f64)> {
        vec![(-0.6, 0.6); self.n]
    }
}

/// Every ambient model behind one type.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceModel {
    Flat(FlatSpace),
    Grw(GrwModel),
    Hyperquadric(Hyperquadric),
}

impl SpaceModel {
    pub fn as_grw(&self) -> Option<&GrwModel> {
        match self {
            SpaceModel::Grw(m) => Some(m),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SpaceModel::Flat(f) => format!("R^{}_{}", f.dim, f.index),
            SpaceModel::Grw(g) => g.describe(),
            SpaceModel::Hyperquadric(h) => match h.kind {
                QuadricKind::DeSitter => format!("S_1^{} in L^{}", h.n, h.n + 1),
                QuadricKind::AntiDeSitter => format!("H_1^{} in R^{}_2", h.n, h.n + 1),
            },
        }
    }
}

impl ChartedSpace for SpaceModel {
    fn dim(&self) -> usize {
        match self {
            SpaceModel::Flat(m) => m.dim(),
            SpaceModel::Grw(m) => m.dim(),
            SpaceModel::Hyperquadric(m) => m.dim(),
        }
    }
    fn signature(&self) -> Vec<i8> {
        match self {
            SpaceModel::Flat(m) => m.signature(),
            SpaceModel::Grw(m) => m.signature(),
            SpaceModel::Hyperquadric(m) => m.signature(),
        }
    }
    fn contains(&self, p: &[f64]) -> bool {
        match self {
            SpaceModel::Flat(m) => m.contains(p),
            SpaceModel::Grw(m) => m.contains(p),
            SpaceModel::Hyperquadric(m) => m.contains(p),
        }
    }
    fn metric<S: Scalar>(&self, p: &[S]) -> Mat<S> {
        match self {
            SpaceModel::Flat(m) => m.metric(p),
            SpaceModel::Grw(m) => m.metric(p),
            SpaceModel::Hyperquadric(m) => m.metric(p),
        }
    }
    fn future_anchor(&self, p: &[f64]) -> Vec<f64> {
        match self {
            SpaceModel::Flat(m) => m.future_anchor(p),
            SpaceModel::Grw(m) => m.future_anchor(p),
            SpaceModel::Hyperquadric(m) => m.future_anchor(p),
        }
    }
    fn sample_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            SpaceModel::Flat(m) => m.sample_bounds(),
            SpaceModel::Grw(m) => m.sample_bounds(),
            SpaceModel::Hyperquadric(m) => m.sample_bounds(),
        }
    }
}

/// Named built-in ambients; `n` is the fiber dimension, so the ambient has
/// dimension `n + 1`.
pub const BUILTIN_SPACES: &[(&str, &str)] = &[
    ("anti-de-sitter-grw", "-(0,pi) x_sin H^n, constant curvature -1"),
    ("anti-de-sitter-hyperquadric", "H_1^(n+1) in R^(n+2)_2 as a graph chart"),
    ("de-sitter-grw", "-R x_cosh S^n, constant curvature 1"),
    ("de-sitter-hyperbolic-grw", "-(0,inf) x_sinh H^n, a de Sitter patch"),
    ("de-sitter-hyperquadric", "S_1^(n+1) in L^(n+2) as a graph chart"),
    ("linear-warp-grw", "-(0,inf) x_t R^n, Ric(t d/dt) = 0"),
    ("minkowski", "Lorentz space L^(n+1)"),
    ("pseudo-euclidean-2", "R^(n+1)_2, index 2"),
];

pub fn builtin_space(name: &str, n: usize) -> Result<SpaceModel> {
    if n == 0 {
        return Err(Error::InvalidArgument("fiber dimension must be positive".into()));
    }
    Ok(match name {
        "minkowski" => SpaceModel::Flat(make_flat(n + 1, 1)?),
        "pseudo-euclidean-2" => SpaceModel::Flat(make_flat(n + 1, 2)?),
        "de-sitter-grw" => {
            SpaceModel::Grw(make_grw((f64::NEG_INFINITY, f64::INFINITY), Warp::Cosh, Fiber::Sphere { n })?)
        }
        "de-sitter-hyperbolic-grw" => {
            SpaceModel::Grw(make_grw((0.0, f64::INFINITY), Warp::Sinh, Fiber::Hyperbolic { n })?)
        }
        "anti-de-sitter-grw" => SpaceModel::Grw(make_grw((0.0, PI), Warp::Sin, Fiber::Hyperbolic { n })?),
        "linear-warp-grw" => SpaceModel::Grw(make_grw((0.0, f64::INFINITY), Warp::Linear, Fiber::Flat { n })?),
        "de-sitter-hyperquadric" => SpaceModel::Hyperquadric(make_hyperquadric(QuadricKind::DeSitter, n + 1)?),
        "anti-de-sitter-hyperquadric" => {
            SpaceModel::Hyperquadric(make_hyperquadric(QuadricKind::AntiDeSitter, n + 1)?)
        }
        other => return Err(Error::UnresolvedReference(other.to_string())),
    })
}

/// Spread of sampled sectional curvatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSurvey {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl CurvatureSurvey {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// Sectional curvature on `count` seeded random points and planes.
pub fn survey_sectional<M: ChartedSpace>(space: &M, seed: u64, count: usize) -> Result<CurvatureSurvey> {
    if count == 0 {
        return Err(Error::SampleSetEmpty);
    }
    let pts = config::sample_box(seed, &space.sample_bounds(), count);
    let mut rng = config::rng(seed ^ 0x5eed);
    let planes: Vec<Vec<Vec<f64>>> =
        (0..count).map(|_| config::sample_vectors(&mut rng, space.dim(), 2)).collect();
    let vals = crate::par::try_map(&(0..count).collect::<Vec<_>>(), |&i| {
        let c = curvature_at(space, &pts[i], Backend::default())?;
        c.sectional(&planes[i][0], &planes[i][1], 1e-10)
    })?;
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CurvatureSurvey { mean: vals.iter().sum::<f64>() / count as f64, min, max })
}

/// Constant sectional curvature of the space if the survey spread is below
/// `tol`, otherwise [`Error::AmbientNotConstantCurvature`].
pub fn certify_constant_curvature<M: ChartedSpace>(space: &M, seed: u64, tol: f64) -> Result<f64> {
    let s = survey_sectional(space, seed, 24)?;
    if s.spread() > tol {
        return Err(Error::AmbientNotConstantCurvature(s.spread()));
    }
    Ok(s.mean)
}
