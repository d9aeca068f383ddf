//! Normal-geodesic variations of a closed spacelike hypersurface, the
//! volume, r-area and Jacobi functionals, and their variations.
//!
//! `X(u, t)` is the endpoint of the geodesic leaving `x(u)` with velocity
//! `t·f(u)·N(u)`, integrated by RK4 on `s ∈ [0, 1]` with a fixed step count.
//! The step mesh does not depend on `t`, so finite differences in `t` see a
//! smooth function, and `X(·, 0) = x` exactly.

pub mod stability;

pub use stability::{default_basis, stability_probe, StabilityReport};

use crate::diff::{fd, try_gradient, try_jacobian, TryScalarFn, TryVectorFn};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, ChartedSpace, VectorField};
use crate::hypersurface::frame::{frame, frame_from_parts};
use crate::hypersurface::immersion::{sample_params, Immersion};
use crate::hypersurface::newton::{b_r, binomial};
use crate::hypersurface::operators::{intrinsic_hessian, shape, SrFn};
use crate::hypersurface::support::SupportFn;
use crate::linalg::Mat;
use crate::ode::rk4;
use crate::par;
use crate::quadrature::{gauss_legendre, integrate_checked, integrate_many, Axis};
use crate::scalar::{to_f64, Scalar};
use serde::Serialize;

/// Tunables of a variation scenario.
#[derive(Debug, Clone, Serialize)]
pub struct VariationOptions {
    /// Half-width of the admissible `t` range.
    pub eps: f64,
    /// Quadrature counts over the parameter box.
    pub counts: Vec<usize>,
    /// Gauss nodes in the sweep direction for `𝒱`.
    pub sweep_nodes: usize,
    /// RK4 steps of the geodesic integration.
    pub steps: usize,
    /// Halving-check tolerance for every integral.
    pub quad_tol: f64,
    /// Base step of the Richardson-extrapolated differences in `t`.
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for VariationOptions {
    fn default() -> Self {
        VariationOptions {
            eps: 0.1,
            counts: vec![16, 16],
            sweep_nodes: 6,
            steps: 16,
            quad_tol: 1e-6,
            fd_step: 1e-2,
            seed: 0,
        }
    }
}

/// Base immersion, speed function and options.
pub struct VariationScenario<'a, M, I, F> {
    pub space: &'a M,
    pub base: &'a I,
    pub speed: &'a F,
    pub opts: VariationOptions,
    /// Constant sectional curvature of the ambient, when certified.
    pub curvature: Option<f64>,
}

impl<'a, M: ChartedSpace, I: Immersion, F: TryScalarFn> VariationScenario<'a, M, I, F> {
    /// Validates that `X(·, t)` is spacelike on the mesh for `t ∈ {−ε, 0, ε}`
    /// and tries to certify constant curvature.
    pub fn new(space: &'a M, base: &'a I, speed: &'a F, opts: VariationOptions) -> Result<Self> {
        if opts.counts.len() != base.param_dim() {
            return Err(Error::InvalidArgument(format!(
                "{} quadrature counts for a {}-dimensional base",
                opts.counts.len(),
                base.param_dim()
            )));
        }
        if !(opts.eps > 0.0) {
            return Err(Error::InvalidArgument("variation half-width must be positive".into()));
        }
        let curvature = crate::models::certify_constant_curvature(space, opts.seed, 1e-7).ok();
        let scn = VariationScenario { space, base, speed, opts, curvature };
        let nodes = sample_params(&base.axes(), scn.opts.seed, 8);
        for t in [-scn.opts.eps, 0.0, scn.opts.eps] {
            let slice = scn.at(t);
            par::try_map(&nodes, |u| frame(space, &slice, u).map(|_| ()))?;
        }
        Ok(scn)
    }

    pub fn n(&self) -> usize {
        self.base.param_dim()
    }

    fn constant_curvature(&self) -> Result<f64> {
        match self.curvature {
            Some(c) => Ok(c),
            None => crate::models::certify_constant_curvature(self.space, self.opts.seed, 1e-7),
        }
    }

    /// `X(·, t)` as an immersion.
    pub fn at(&self, t: f64) -> Varied<'_, 'a, M, I, F> {
        Varied { scn: self, t }
    }

    fn sweep(&self) -> Sweep<'_, 'a, M, I, F> {
        Sweep { scn: self }
    }
}

/// Geodesic endpoint `exp_x(v)`.
pub fn geodesic_endpoint<M: ChartedSpace, S: Scalar>(space: &M, x: &[S], v: &[S], steps: usize) -> Result<Vec<S>> {
    let m = x.len();
    let mut y0 = x.to_vec();
    y0.extend_from_slice(v);
    let rhs = |_s: f64, y: &[S]| -> Result<Vec<S>> {
        let gamma = christoffel(space, &y[..m])?;
        let acc = gamma.contract(&y[m..], &y[m..]);
        let mut out = y[m..].to_vec();
        out.extend(acc.into_iter().map(|a| -a));
        Ok(out)
    };
    let y = rk4(rhs, &y0, 0.0, 1.0, steps)?;
    let end = to_f64(&y[..m]);
    if !space.contains(&end) {
        return Err(Error::LeftChart(1.0));
    }
    Ok(y[..m].to_vec())
}

/// `(t, u) ↦ X(u, t)`.
struct Sweep<'s, 'a, M, I, F> {
    scn: &'s VariationScenario<'a, M, I, F>,
}

impl<M: ChartedSpace, I: Immersion, F: TryScalarFn> TryVectorFn for Sweep<'_, '_, M, I, F> {
    fn try_eval<S: Scalar>(&self, p: &[S]) -> Result<Vec<S>> {
        let scn = self.scn;
        let u = &p[1..];
        let fr = frame(scn.space, scn.base, u)?;
        let f = scn.speed.try_eval(u)?;
        let v: Vec<S> = fr.normal.iter().map(|&c| c * f * p[0]).collect();
        geodesic_endpoint(scn.space, &fr.point, &v, scn.opts.steps)
    }
}

/// `X(·, t)` for a fixed `t`.
pub struct Varied<'s, 'a, M, I, F> {
    scn: &'s VariationScenario<'a, M, I, F>,
    t: f64,
}

impl<M: ChartedSpace, I: Immersion, F: TryScalarFn> Immersion for Varied<'_, '_, M, I, F> {
    fn param_dim(&self) -> usize {
        self.scn.base.param_dim()
    }
    fn axes(&self) -> Vec<Axis> {
        self.scn.base.axes()
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        let mut p = vec![S::from_f64(self.t)];
        p.extend_from_slice(u);
        self.scn.sweep().try_eval(&p)
    }
}

/// Normal speed `f_t = −⟨∂X/∂t, N_t⟩` on `X(·, t)`.
pub struct SpeedAt<'s, 'a, M, I, F> {
    scn: &'s VariationScenario<'a, M, I, F>,
    t: f64,
}

struct SweepData<S> {
    dxdt: Vec<S>,
    frame: crate::hypersurface::frame::Frame<S>,
}

fn sweep_data<M: ChartedSpace, I: Immersion, F: TryScalarFn, S: Scalar>(
    scn: &VariationScenario<'_, M, I, F>,
    t: S,
    u: &[S],
) -> Result<SweepData<S>> {
    let mut p = vec![t];
    p.extend_from_slice(u);
    let (x, j) = try_jacobian(&scn.sweep(), &p)?;
    let n = u.len();
    let ju = Mat::from_fn(x.len(), n, |r, c| j[(r, c + 1)]);
    let frame = frame_from_parts(scn.space, &to_f64(u), x, ju)?;
    Ok(SweepData { dxdt: j.column(0), frame })
}

impl<M: ChartedSpace, I: Immersion, F: TryScalarFn> TryScalarFn for SpeedAt<'_, '_, M, I, F> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<S> {
        let d = sweep_data(self.scn, S::from_f64(self.t), u)?;
        Ok(-d.frame.inner(&d.dxdt, &d.frame.normal))
    }
}

/// `F_0, …, F_n` from `S_0, …, S_n` and the ambient curvature `c`:
/// `F_0 = 1`, `F_1 = −S_1`, `F_r = (−1)^r S_r − c(n−r+1)/(r−1) F_{r−2}`.
pub fn f_r_values(s: &[f64], c: f64) -> Vec<f64> {
    let n = s.len() - 1;
    let mut f = vec![1.0];
    if n >= 1 {
        f.push(-s[1]);
    }
    for r in 2..=n {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let v = sign * s[r] - c * (n - r + 1) as f64 / (r - 1) as f64 * f[r - 2];
        f.push(v);
    }
    f
}

/// `c_r`: zero for even `r`, `−[n(n−2)…(n−r+1)]/[(r−1)(r−3)…2]·(−c)^{(r+1)/2}`
/// for odd `r` (empty products are 1, so `c_1 = nc`).
pub fn c_r(n: usize, r: usize, c: f64) -> f64 {
    if r % 2 == 0 {
        return 0.0;
    }
    let num: f64 = (0..=(r - 1) / 2).map(|j| n as f64 - 2.0 * j as f64).product();
    let den: f64 = (1..=(r - 1) / 2).map(|j| 2.0 * j as f64).product();
    -num / den * (-c).powi(((r + 1) / 2) as i32)
}

fn require_r<M, I, F>(scn: &VariationScenario<'_, M, I, F>, r: usize) -> Result<()>
where
    I: Immersion,
{
    let n = scn.base.param_dim();
    if r + 1 > n {
        return Err(Error::InvalidArgument(format!("r = {r} requires r ≤ n − 1 = {}", n as i64 - 1)));
    }
    Ok(())
}

/// `𝒱(t) = ∫_M ∫_0^t X*(dM̄)`, oriented so that `d𝒱/dt = ∫ f_t dM_t`.
pub fn volume<M: ChartedSpace, I: Immersion, F: TryScalarFn>(scn: &VariationScenario<'_, M, I, F>, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let (xs, ws) = gauss_legendre(scn.opts.sweep_nodes);
    let density = |u: &[f64]| -> Result<f64> {
        let base = frame(scn.space, scn.base, u)?;
        let m = base.point.len();
        let orient = Mat::from_fn(m, m, |r, c| if c == 0 { base.normal[r] } else { base.jac[(r, c - 1)] }).det().signum();
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            let s = 0.5 * t * (x + 1.0);
            let d = sweep_data(scn, s, u)?;
            let cols = Mat::from_fn(m, m, |r, c| if c == 0 { d.dxdt[r] } else { d.frame.jac[(r, c - 1)] });
            acc += w * 0.5 * t * cols.det() * d.frame.g.det().abs().sqrt();
        }
        Ok(orient * acc)
    };
    Ok(integrate_checked(&scn.base.axes(), &scn.opts.counts, scn.opts.quad_tol, density)?.value)
}

/// `∫_M f_t dM_t`.
pub fn normal_flux<M: ChartedSpace, I: Immersion, F: TryScalarFn>(scn: &VariationScenario<'_, M, I, F>, t: f64) -> Result<f64> {
    let sp = SpeedAt { scn, t };
    let slice = scn.at(t);
    Ok(integrate_checked(&scn.base.axes(), &scn.opts.counts, scn.opts.quad_tol, |u| {
        let fr = frame(scn.space, &slice, u)?;
        Ok(sp.try_eval(u)? * fr.induced.det().sqrt())
    })?.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    pub t_grid: Vec<f64>,
    pub volume: Vec<f64>,
    pub volume_derivative_fd: Vec<f64>,
    pub normal_flux: Vec<f64>,
    /// `sup_t |d𝒱/dt (FD) − ∫ f_t dM_t|`.
    pub residual: f64,
    pub volume_preserving: bool,
}

/// Default `t` grid: `{−ε/2, 0, ε/2}`.
pub fn t_grid(eps: f64) -> Vec<f64> {
    vec![-0.5 * eps, 0.0, 0.5 * eps]
}

fn derivative_fd(f: &(dyn Fn(f64) -> Result<f64> + Sync), t: f64, h: f64) -> Result<f64> {
    let pts = [t + h, t - h, t + h / 2.0, t - h / 2.0];
    let v = par::try_map(&pts, |&s| f(s))?;
    let d1 = (v[0] - v[1]) / (2.0 * h);
    let d2 = (v[2] - v[3]) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

fn second_derivative_fd(f: &(dyn Fn(f64) -> Result<f64> + Sync), h: f64) -> Result<f64> {
    let pts = [0.0, h, -h, h / 2.0, -h / 2.0];
    let v = par::try_map(&pts, |&s| f(s))?;
    let s1 = (v[1] - 2.0 * v[0] + v[2]) / (h * h);
    let s2 = (v[3] - 2.0 * v[0] + v[4]) / (h * h / 4.0);
    Ok((4.0 * s2 - s1) / 3.0)
}

/// First variation of volume on the `t` grid.
pub fn first_variation_volume<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    tol: f64,
) -> Result<VolumeReport> {
    let grid = t_grid(scn.opts.eps);
    let h = scn.opts.fd_step.min(0.25 * scn.opts.eps);
    let mut volume_v = Vec::new();
    let mut dfd = Vec::new();
    let mut flux = Vec::new();
    for &t in &grid {
        volume_v.push(volume(scn, t)?);
        dfd.push(derivative_fd(&|s| volume(scn, s), t, h)?);
        flux.push(normal_flux(scn, t)?);
    }
    let residual = par::sup(dfd.iter().zip(&flux).map(|(a, b)| (a - b).abs()));
    let volume_preserving = flux.iter().all(|v| v.abs() < tol);
    Ok(VolumeReport { t_grid: grid, volume: volume_v, volume_derivative_fd: dfd, normal_flux: flux, residual, volume_preserving })
}

/// `𝒜_r(t) = ∫_M F_r dM_t`.
pub fn r_area<M: ChartedSpace, I: Immersion, F: TryScalarFn>(scn: &VariationScenario<'_, M, I, F>, r: usize, t: f64) -> Result<f64> {
    require_r(scn, r)?;
    let c = if r >= 2 { scn.constant_curvature()? } else { scn.curvature.unwrap_or(0.0) };
    let slice = scn.at(t);
    Ok(integrate_checked(&scn.base.axes(), &scn.opts.counts, scn.opts.quad_tol, |u| {
        let sh = shape(scn.space, &slice, u)?;
        Ok(f_r_values(&sh.s, c)[r] * sh.frame.induced.det().sqrt())
    })?.value)
}

/// `L_r f` in trace form on a given immersion.
fn lr_trace<M: ChartedSpace, J: Immersion, G: TryScalarFn>(space: &M, imm: &J, f: &G, p: &Mat<f64>, ginv: &Mat<f64>, u: &[f64]) -> Result<f64> {
    let (_, _, hess) = intrinsic_hessian(space, imm, f, u)?;
    Ok(p.matmul(ginv).matmul(&hess).trace())
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstVariationReport {
    pub r: usize,
    pub c: f64,
    pub c_r: f64,
    pub analytic: f64,
    pub fd: f64,
    /// `|FD 𝒜_r′(0) − ∫[(−1)^{r+1}(r+1)S_{r+1} + c_r] f dM|`.
    pub residual_integral: f64,
    /// Sup over samples and `t ∈ {0, ε/2}` of the pointwise `∂S_{r+1}/∂t` identity.
    pub residual_pointwise: f64,
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Pointwise `∂S_{r+1}/∂t` residual at `(u, t)`.
fn s_rate_residual<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
    c: f64,
    u: &[f64],
    t: f64,
) -> Result<f64> {
    let slice = scn.at(t);
    let sh = shape(scn.space, &slice, u)?;
    let ginv = sh.frame.induced.inverse().ok_or_else(|| Error::NotSpacelike(u.to_vec()))?;
    let p = &sh.newton()[r];
    let speed = SpeedAt { scn, t };
    let f = speed.try_eval(u)?;
    let lr = lr_trace(scn.space, &slice, &speed, p, &ginv, u)?;
    let a2p = sh.a.matmul(&sh.a).matmul(p).trace();
    let d = sweep_data(scn, t, u)?;
    let tang = d.frame.tangent_coords(&d.dxdt)?;
    let (_, ds) = try_gradient(&SrFn { space: scn.space, imm: &slice, r: r + 1 }, u)?;
    let drift: f64 = tang.iter().zip(&ds).map(|(a, b)| a * b).sum();
    let rhs = sign(r + 1) * (lr + c * p.trace() * f - a2p * f) + drift;
    let h = 1e-3 * scn.opts.eps.max(1e-3);
    let lhs = fd::derivative(
        &|s| shape(scn.space, &scn.at(s), u).map(|sh| sh.s[r + 1]).unwrap_or(f64::NAN),
        t,
        h,
    );
    Ok((lhs - rhs).abs())
}

pub fn first_variation_r_area<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
) -> Result<FirstVariationReport> {
    require_r(scn, r)?;
    let c = scn.constant_curvature()?;
    let n = scn.n();
    let cr = c_r(n, r, c);
    let analytic = integrate_checked(&scn.base.axes(), &scn.opts.counts, scn.opts.quad_tol, |u| {
        let sh = shape(scn.space, scn.base, u)?;
        let f = scn.speed.try_eval(u)?;
        Ok((sign(r + 1) * (r + 1) as f64 * sh.s[r + 1] + cr) * f * sh.frame.induced.det().sqrt())
    })?.value;
    let h = scn.opts.fd_step.min(0.25 * scn.opts.eps);
    let fdv = derivative_fd(&|t| r_area(scn, r, t), 0.0, h)?;
    let samples = sample_params(&scn.base.axes(), scn.opts.seed, 4);
    let mut pts = Vec::new();
    for u in &samples {
        for t in [0.0, 0.5 * scn.opts.eps] {
            pts.push((u.clone(), t));
        }
    }
    let res = par::try_map(&pts, |(u, t)| s_rate_residual(scn, r, c, u, *t))?;
    Ok(FirstVariationReport {
        r,
        c,
        c_r: cr,
        analytic,
        fd: fdv,
        residual_integral: (fdv - analytic).abs(),
        residual_pointwise: par::sup(res),
    })
}

/// `H̄_{r+1}(0) = (1/𝒜_0(0)) ∫ H_{r+1} dM`, plus the min and max of `H_{r+1}`
/// over the mesh.
fn mean_h<M: ChartedSpace, I: Immersion, F: TryScalarFn>(scn: &VariationScenario<'_, M, I, F>, r: usize) -> Result<(f64, f64, f64)> {
    let k = r + 1;
    let (nodes, _) = crate::quadrature::tensor_rule(&scn.base.axes(), &scn.opts.counts);
    let hs = par::try_map(&nodes, |u| Ok::<f64, Error>(shape(scn.space, scn.base, u)?.h_r()[k]))?;
    let v = integrate_many(&scn.base.axes(), &scn.opts.counts, 2, |u| {
        let sh = shape(scn.space, scn.base, u)?;
        let root = sh.frame.induced.det().sqrt();
        Ok(vec![sh.h_r()[k] * root, root])
    })?;
    let lo = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((v[0] / v[1], lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiReport {
    pub r: usize,
    pub b_r: f64,
    pub c_r: f64,
    pub h_bar: f64,
    pub lambda: f64,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative_analytic: Vec<f64>,
    pub derivative_fd: Vec<f64>,
    /// `sup_t |𝒥_r′ (FD) − b_r ∫ (H_{r+1} − H̄_{r+1}(0)) f_t dM_t|`.
    pub residual: f64,
    /// `𝒥_r′(0)` from the analytic formula.
    pub derivative_at_zero: f64,
}

/// `𝒥_r′(0) = b_r ∫ (H_{r+1} − H̄_{r+1}(0)) f dM` on the base.
pub fn jacobi_derivative_at_zero<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
) -> Result<f64> {
    let (hbar, _, _) = mean_h(scn, r)?;
    jacobi_derivative_with_mean(scn, r, hbar)
}

/// Same with an explicit `H̄_{r+1}(0)`; a shift `δ` changes the result by
/// `−b_r δ ∫ f dM` only.
pub fn jacobi_derivative_with_mean<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
    hbar: f64,
) -> Result<f64> {
    require_r(scn, r)?;
    let br = b_r(scn.n(), r);
    Ok(integrate_checked(&scn.base.axes(), &scn.opts.counts, scn.opts.quad_tol, |u| {
        let sh = shape(scn.space, scn.base, u)?;
        Ok(br * (sh.h_r()[r + 1] - hbar) * scn.speed.try_eval(u)? * sh.frame.induced.det().sqrt())
    })?
    .value)
}

/// `𝒥_r(t) = 𝒜_r(t) − λ𝒱(t)`.
pub fn jacobi_value<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
    lambda: f64,
    t: f64,
) -> Result<f64> {
    Ok(r_area(scn, r, t)? - lambda * volume(scn, t)?)
}

/// `λ = c_r + b_r H̄_{r+1}(0)`.
pub fn jacobi_lambda<M: ChartedSpace, I: Immersion, F: TryScalarFn>(scn: &VariationScenario<'_, M, I, F>, r: usize) -> Result<(f64, f64, f64)> {
    let c = if r % 2 == 1 { scn.constant_curvature()? } else { 0.0 };
    let cr = c_r(scn.n(), r, c);
    let (hbar, _, _) = mean_h(scn, r)?;
    Ok((cr + b_r(scn.n(), r) * hbar, cr, hbar))
}

pub fn jacobi_functional<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
) -> Result<JacobiReport> {
    require_r(scn, r)?;
    let n = scn.n();
    let br = b_r(n, r);
    let (lambda, cr, hbar) = jacobi_lambda(scn, r)?;
    let grid = t_grid(scn.opts.eps);
    let h = scn.opts.fd_step.min(0.25 * scn.opts.eps);
    let mut values = Vec::new();
    let mut an = Vec::new();
    let mut fdv = Vec::new();
    for &t in &grid {
        values.push(jacobi_value(scn, r, lambda, t)?);
        fdv.push(derivative_fd(&|s| jacobi_value(scn, r, lambda, s), t, h)?);
        let slice = scn.at(t);
        let sp = SpeedAt { scn, t };
        an.push(integrate_checked(&scn.base.axes(), &scn.opts.counts, scn.opts.quad_tol, |u| {
            let sh = shape(scn.space, &slice, u)?;
            Ok(br * (sh.h_r()[r + 1] - hbar) * sp.try_eval(u)? * sh.frame.induced.det().sqrt())
        })?.value);
    }
    let residual = par::sup(an.iter().zip(&fdv).map(|(a, b)| (a - b).abs()));
    let zero = grid.iter().position(|&t| t == 0.0).map(|i| an[i]).unwrap_or(f64::NAN);
    Ok(JacobiReport {
        r,
        b_r: br,
        c_r: cr,
        h_bar: hbar,
        lambda,
        t_grid: grid,
        values,
        derivative_analytic: an,
        derivative_fd: fdv,
        residual,
        derivative_at_zero: zero,
    })
}

/// `(r+1) ∫ [L_r f + c tr(P_r) f − tr(A²P_r) f] f dM` on the base, for an
/// arbitrary test function `f`.
pub fn second_variation_form<M: ChartedSpace, I: Immersion, G: TryScalarFn>(
    space: &M,
    base: &I,
    f: &G,
    r: usize,
    c: f64,
    counts: &[usize],
    quad_tol: f64,
) -> Result<f64> {
    let est = integrate_checked(&base.axes(), counts, quad_tol, |u| {
        let sh = shape(space, base, u)?;
        let ginv = sh.frame.induced.inverse().ok_or_else(|| Error::NotSpacelike(u.to_vec()))?;
        let p = &sh.newton()[r];
        let fv = f.try_eval(u)?;
        let lr = lr_trace(space, base, f, p, &ginv, u)?;
        let a2p = sh.a.matmul(&sh.a).matmul(p).trace();
        Ok((lr + c * p.trace() * fv - a2p * fv) * fv * sh.frame.induced.det().sqrt())
    })?;
    Ok((r + 1) as f64 * est.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondVariationReport {
    pub r: usize,
    pub analytic: f64,
    pub fd: f64,
    /// `|FD − analytic| / max(1, |analytic|)`.
    pub relative_error: f64,
    pub h_spread: f64,
}

/// Spread of `H_{r+1}` over the mesh; [`Error::NotConstantHr1`] above `tol`.
pub fn require_constant_h<M: ChartedSpace, I: Immersion>(space: &M, base: &I, r: usize, counts: &[usize], tol: f64) -> Result<f64> {
    let (nodes, _) = crate::quadrature::tensor_rule(&base.axes(), counts);
    let hs = par::try_map(&nodes, |u| Ok::<f64, Error>(shape(space, base, u)?.h_r()[r + 1]))?;
    let lo = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if !(spread < tol) {
        return Err(Error::NotConstantHr1(spread));
    }
    Ok(spread)
}

pub fn second_variation<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
) -> Result<SecondVariationReport> {
    require_r(scn, r)?;
    let h_spread = require_constant_h(scn.space, scn.base, r, &scn.opts.counts, 1e-6)?;
    let c = scn.constant_curvature()?;
    let analytic = second_variation_form(scn.space, scn.base, scn.speed, r, c, &scn.opts.counts, scn.opts.quad_tol)?;
    let (lambda, _, _) = jacobi_lambda(scn, r)?;
    let h = scn.opts.fd_step.max(1e-3).min(0.5 * scn.opts.eps);
    let fdv = second_derivative_fd(&|t| jacobi_value(scn, r, lambda, t), h)?;
    Ok(SecondVariationReport { r, analytic, fd: fdv, relative_error: (fdv - analytic).abs() / analytic.abs().max(1.0), h_spread })
}

#[derive(Debug, Clone, Serialize)]
pub struct LrSupportReport {
    pub r: usize,
    pub c: f64,
    /// `sup |L_r η − RHS|` with `η = ⟨V, N⟩`.
    pub residual: f64,
    pub sup_lhs: f64,
}

/// `L_r η = tr(A²P_r)η − c tr(P_r)η − b_r H_r N(ψ) + b_r H_{r+1} ψ
/// + b_r/(r+1) ⟨V, ∇H_{r+1}⟩` on the samples.
pub fn lr_support_identity_check<M: ChartedSpace, I: Immersion, V: VectorField>(
    space: &M,
    imm: &I,
    v: &V,
    r: usize,
    samples: &[Vec<f64>],
    seed: u64,
    tol: f64,
) -> Result<LrSupportReport> {
    if samples.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let n = imm.param_dim();
    if r + 1 > n {
        return Err(Error::InvalidArgument(format!("r = {r} requires r ≤ n − 1")));
    }
    let c = crate::models::certify_constant_curvature(space, seed, 1e-7)?;
    let br = b_r(n, r);
    let eta = SupportFn { space, imm, field: v };
    let rows = par::try_map(samples, |u| -> Result<(f64, f64)> {
        let sh = shape(space, imm, u)?;
        let x = &sh.frame.point;
        crate::conformal::require_closed(space, v, x, tol)?;
        let vv = v.eval(x);
        let q = sh.frame.inner(&vv, &vv);
        if !(q < 0.0) {
            return Err(Error::NotTimelike(q));
        }
        let ginv = sh.frame.induced.inverse().ok_or_else(|| Error::NotSpacelike(u.to_vec()))?;
        let p = &sh.newton()[r];
        let e = eta.try_eval(u)?;
        let lhs = lr_trace(space, imm, &eta, p, &ginv, u)?;
        let hs = sh.h_r();
        let psi = crate::conformal::psi_at(space, v, x)?;
        let grad_psi = crate::conformal::psi_gradient(space, v, x)?;
        let n_psi = sh.frame.inner(&sh.frame.normal, &grad_psi);
        let tang = sh.frame.tangent_coords(&vv)?;
        let (_, dh) = try_gradient(&crate::hypersurface::operators::HrFn { space, imm, r: r + 1 }, u)?;
        let v_dh: f64 = tang.iter().zip(&dh).map(|(a, b)| a * b).sum();
        let a2p = sh.a.matmul(&sh.a).matmul(p).trace();
        let rhs = a2p * e - c * p.trace() * e - br * hs[r] * n_psi + br * hs[r + 1] * psi + br / (r + 1) as f64 * v_dh;
        Ok(((lhs - rhs).abs(), lhs.abs()))
    })?;
    Ok(LrSupportReport {
        r,
        c,
        residual: par::sup(rows.iter().map(|r| r.0)),
        sup_lhs: par::sup(rows.iter().map(|r| r.1)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalReport {
    pub r: usize,
    pub volume: VolumeReport,
    pub first_variation: FirstVariationReport,
    pub jacobi: JacobiReport,
    /// Absent when `H_{r+1}` is not constant.
    pub second_variation: Option<SecondVariationReport>,
    pub area_0: f64,
}

/// Runs every functional check for one `r`.
pub fn functional_report<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    scn: &VariationScenario<'_, M, I, F>,
    r: usize,
    tol: f64,
) -> Result<FunctionalReport> {
    let second_variation = match second_variation(scn, r) {
        Ok(s) => Some(s),
        Err(Error::NotConstantHr1(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(FunctionalReport {
        r,
        volume: first_variation_volume(scn, tol)?,
        first_variation: first_variation_r_area(scn, r)?,
        jacobi: jacobi_functional(scn, r)?,
        second_variation,
        area_0: r_area(scn, 0, 0.0)?,
    })
}

/// `C(n, k)` as a float, re-exported for report builders.
pub fn binomial_f(n: usize, k: usize) -> f64 {
    binomial(n, k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::hypersurface::immersion::ExprImmersion;
    use crate::models::{builtin_space, SpaceModel};
    use std::f64::consts::PI;

    fn ds_slice(n: usize, t0: f64) -> (SpaceModel, ExprImmersion) {
        let ds = builtin_space("de-sitter-grw", n).unwrap();
        let imm = ExprImmersion::grw_slice(t0, &ds.as_grw().unwrap().fiber);
        (ds, imm)
    }

    #[test]
    fn c_r_and_f_r_conventions() {
        assert_eq!(c_r(2, 0, 1.0), 0.0);
        assert_eq!(c_r(2, 1, 1.0), 2.0);
        assert_eq!(c_r(5, 3, 1.0), -7.5);
        let f = f_r_values(&[1.0, 0.5, 0.25, 0.125], 1.0);
        assert_eq!(f[2], 0.25 - 2.0);
        assert_eq!(f[3], -0.125 - 0.5 * -0.5);
    }

    #[test]
    fn zero_speed_has_zero_volume() {
        let (ds, imm) = ds_slice(2, 0.5);
        let f = Expr::constant(0.0);
        let scn = VariationScenario::new(&ds, &imm, &f, VariationOptions::default()).unwrap();
        assert_eq!(volume(&scn, 0.05).unwrap(), 0.0);
        assert!(normal_flux(&scn, 0.05).unwrap().abs() < 1e-15);
    }

    #[test]
    fn slice_area_and_its_rate() {
        let t0: f64 = 0.5;
        let (ds, imm) = ds_slice(2, t0);
        let f = Expr::constant(1.0);
        let scn = VariationScenario::new(&ds, &imm, &f, VariationOptions::default()).unwrap();
        let a = r_area(&scn, 0, 0.0).unwrap();
        assert!((a - 4.0 * PI * t0.cosh().powi(2)).abs() < 1e-10);
        let rep = first_variation_volume(&scn, 1e-8).unwrap();
        assert!(rep.residual < 1e-6, "{rep:?}");
        assert!((rep.normal_flux[1] - a).abs() < 1e-10);
        assert!(!rep.volume_preserving);
    }

    #[test]
    fn second_variation_constant_speed() {
        let (ds, imm) = ds_slice(2, 1.0);
        let f = Expr::constant(1.0);
        let scn = VariationScenario::new(&ds, &imm, &f, VariationOptions::default()).unwrap();
        let s = second_variation(&scn, 0).unwrap();
        assert!((s.analytic - 8.0 * PI).abs() < 1e-9, "{s:?}");
        assert!(s.relative_error < 1e-3, "{s:?}");
    }
}
