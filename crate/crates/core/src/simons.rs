//! Lorentz immersions swept out by the flow of a closed conformal field
//! through a submanifold of one of its leaves, and their mean curvature.
//!
//! The flow `Ψ(t, p)` solves `y' = t·V(y)` on `s ∈ [0, 1]`, so `t` enters
//! the right-hand side and the flowed immersion `Φ(t, q) = Ψ(t, φ(q))` is
//! differentiable in all parameters with the same dual-number machinery as
//! everything else.

use crate::conformal::{psi_at, PsiFn};
use crate::diff::{try_jacobian, try_second_order, TryScalarFn, TryVectorFn};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, riemann, ChartedSpace, VectorField};
use crate::hypersurface::immersion::{sample_params, Immersion, MapOf};
use crate::linalg::{frame_norm, symmetric_eigenvalues, vadd, vscale, vsub, Mat};
use crate::ode::{dopri5, OdeOptions};
use crate::par;
use crate::quadrature::Axis;
use crate::scalar::{from_f64s, to_f64, Scalar};
use serde::Serialize;

/// State carried along a trajectory.
#[derive(Debug, Clone)]
pub struct FlowState<S> {
    pub point: Vec<S>,
    /// `∫_0^t ψ(Ψ(s, p)) ds`.
    pub integral_psi: S,
    /// Parallel transports of the supplied vectors.
    pub transported: Vec<Vec<S>>,
}

/// Integrates position, `∫ψ` and parallel transport of `vectors` along the
/// flow line of `field` through `p` for flow time `t`.
pub fn flow_state<M: ChartedSpace, F: VectorField, S: Scalar>(
    space: &M,
    field: &F,
    p: &[S],
    t: S,
    vectors: &[Vec<S>],
    opts: &OdeOptions,
) -> Result<FlowState<S>> {
    let m = space.dim();
    let k = vectors.len();
    let mut y0 = p.to_vec();
    y0.push(S::zero());
    for v in vectors {
        y0.extend_from_slice(v);
    }
    let psi = PsiFn { space, field };
    let rhs = |_s: f64, y: &[S]| -> Result<Vec<S>> {
        let x = &y[..m];
        let v = field.eval(x);
        let mut out: Vec<S> = v.iter().map(|&c| c * t).collect();
        out.push(psi.try_eval(x)? * t);
        if k > 0 {
            let gamma = christoffel(space, x)?;
            for j in 0..k {
                let w = &y[m + 1 + j * m..m + 1 + (j + 1) * m];
                out.extend(gamma.contract(&v, w).into_iter().map(|c| -(c * t)));
            }
        }
        Ok(out)
    };
    let y = dopri5(rhs, &y0, 0.0, 1.0, opts, |x| space.contains(&x[..m]))?;
    Ok(FlowState {
        point: y[..m].to_vec(),
        integral_psi: y[m],
        transported: (0..k).map(|j| y[m + 1 + j * m..m + 1 + (j + 1) * m].to_vec()).collect(),
    })
}

/// `Ψ(t, p)`.
pub fn flow_conformal_field<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    p: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    Ok(flow_state(space, field, p, t, &[], &OdeOptions::default())?.point)
}

/// `Φ(t, q) = Ψ(t, φ(q))` with parameters `(t, q)`.
pub struct FlowedImmersion<'a, M, F, B> {
    pub space: &'a M,
    pub field: &'a F,
    pub base: &'a B,
    pub eps: f64,
    pub eps_requested: f64,
    pub opts: OdeOptions,
}

impl<M: ChartedSpace, F: VectorField, B: Immersion> Immersion for FlowedImmersion<'_, M, F, B> {
    fn param_dim(&self) -> usize {
        self.base.param_dim() + 1
    }
    fn axes(&self) -> Vec<Axis> {
        let mut a = vec![Axis::new(-self.eps, self.eps)];
        a.extend(self.base.axes());
        a
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        let x = self.base.map(&u[1..])?;
        Ok(flow_state(self.space, self.field, &x, u[0], &[], &self.opts)?.point)
    }
}

const PSI_FLOOR: f64 = 1e-8;

/// Validates the base against the leaf hypotheses, clips `eps` so that flow
/// lines to `±1.1·eps` stay in the chart, and checks that the result is a
/// Lorentz immersion.
pub fn build_flowed_immersion<'a, M: ChartedSpace, F: VectorField, B: Immersion>(
    space: &'a M,
    field: &'a F,
    base: &'a B,
    eps: f64,
    seed: u64,
) -> Result<FlowedImmersion<'a, M, F, B>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("flow half-width must be positive, got {eps}")));
    }
    let qs = sample_params(&base.axes(), seed, 6);
    let mut min_psi = f64::INFINITY;
    for q in &qs {
        let (x, j) = try_jacobian(&MapOf(base), q)?;
        let g = space.metric(&x);
        let v = field.eval(&x);
        let vn = frame_norm(&g, &v);
        if !(vn > 1e-10) {
            return Err(Error::SingularV(format!("|V| = {vn:e} at {x:?}")));
        }
        let qv = g.bilinear(&v, &v);
        if !(qv < 0.0) {
            return Err(Error::NotTimelike(qv));
        }
        for c in 0..j.cols() {
            let col = j.column(c);
            let s = g.bilinear(&col, &v).abs() / (vn * frame_norm(&g, &col));
            if !(s < 1e-8) {
                return Err(Error::NotOrthogonalLeaf(s));
            }
        }
        min_psi = min_psi.min(psi_at(space, field, &x)?.abs());
    }
    if !(min_psi > PSI_FLOOR) {
        return Err(Error::ConformalFactorVanishes(min_psi));
    }
    let opts = OdeOptions::default();
    let mut e = eps;
    let mut ok = false;
    for _ in 0..40 {
        let fits = qs.iter().all(|q| {
            base.map(q).is_ok_and(|x| {
                [1.1 * e, -1.1 * e]
                    .iter()
                    .all(|&t| flow_state(space, field, &x, t, &[], &opts).is_ok())
            })
        });
        if fits {
            ok = true;
            break;
        }
        e *= 0.5;
    }
    if !ok {
        return Err(Error::LeftChart(e));
    }
    let phi = FlowedImmersion { space, field, base, eps: e, eps_requested: eps, opts };
    for q in &qs {
        for t in [-0.9 * e, 0.0, 0.9 * e] {
            let mut u = vec![t];
            u.extend_from_slice(q);
            let (x, j) = try_jacobian(&MapOf(&phi), &u)?;
            let g = space.metric(&x);
            let ev = symmetric_eigenvalues(&j.transpose().matmul(&g).matmul(&j));
            let top = ev.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            if ev.iter().any(|l| l.abs() < 1e-10 * top) {
                return Err(Error::DegenerateJacobian(u));
            }
            let neg = ev.iter().filter(|&&l| l < 0.0).count();
            if neg != 1 {
                return Err(Error::SignatureMismatch(format!(
                    "flowed immersion has {neg} timelike directions at {u:?}"
                )));
            }
        }
    }
    Ok(phi)
}

/// `v − J G⁻¹ Jᵀ g v`, the part of `v` normal to the columns of `J`.
fn normal_part<S: Scalar>(g: &Mat<S>, j: &Mat<S>, ginv: &Mat<S>, v: &[S]) -> Vec<S> {
    let t = j.matvec(&ginv.matvec(&j.transpose().matvec(&g.matvec(v))));
    vsub(v, &t)
}

/// `(G^{ab} ∇̄_{∂a}∂b x)` and the data used to build it.
struct Trace<S> {
    x: Vec<S>,
    g: Mat<S>,
    jac: Mat<S>,
    ginv: Mat<S>,
    trace: Vec<S>,
}

fn second_fundamental_trace<M: ChartedSpace, I: Immersion, S: Scalar>(
    space: &M,
    imm: &I,
    u: &[S],
) -> Result<Trace<S>> {
    let so = try_second_order(&MapOf(imm), u)?;
    let x = so.value;
    let g = space.metric(&x);
    let gamma = christoffel(space, &x)?;
    let k = u.len();
    let induced = so.jac.transpose().matmul(&g).matmul(&so.jac);
    let ginv = induced
        .inverse()
        .ok_or_else(|| Error::DegenerateJacobian(to_f64(u)))?;
    let m = x.len();
    let mut trace = vec![S::zero(); m];
    for a in 0..k {
        for b in 0..k {
            let ca = so.jac.column(a);
            let cb = so.jac.column(b);
            let corr = gamma.contract(&ca, &cb);
            for c in 0..m {
                trace[c] += ginv[(a, b)] * (so.second[a][b][c] + corr[c]);
            }
        }
    }
    Ok(Trace { x, g, jac: so.jac, ginv, trace })
}

/// `H̄ = (1/(n+1)) (G^{ab} II_ab)^⊥` of a flowed immersion.
struct HBar<'a, 'b, M, F, B>(&'a FlowedImmersion<'b, M, F, B>);

impl<M: ChartedSpace, F: VectorField, B: Immersion> TryVectorFn for HBar<'_, '_, M, F, B> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        let tr = second_fundamental_trace(self.0.space, self.0, u)?;
        let np = normal_part(&tr.g, &tr.jac, &tr.ginv, &tr.trace);
        Ok(vscale(S::one() / u.len() as f64, &np))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanCurvatureSample {
    pub params: Vec<f64>,
    pub point: Vec<f64>,
    pub h_bar: Vec<f64>,
    /// `sup_a |⟨H̄, ∂_a Φ⟩|`.
    pub tangency: f64,
    /// `|(∇̄_ν ν)^⊥|`.
    pub nu_nu_normal: f64,
}

/// Unit field `V/√(−⟨V,V⟩)`.
struct UnitField<'a, M, F> {
    space: &'a M,
    field: &'a F,
}

impl<M: ChartedSpace, F: VectorField> VectorField for UnitField<'_, M, F> {
    fn eval<S: Scalar>(&self, p: &[S]) -> Vec<S> {
        let v = self.field.eval(p);
        let q = self.space.metric(p).bilinear(&v, &v);
        vscale(S::one() / (-q).sqrt(), &v)
    }
}

pub fn mean_curvature_vector<M: ChartedSpace, F: VectorField, B: Immersion>(
    flowed: &FlowedImmersion<'_, M, F, B>,
    u: &[f64],
) -> Result<MeanCurvatureSample> {
    crate::hypersurface::immersion::check_params(&flowed.axes(), u)?;
    let tr = second_fundamental_trace(flowed.space, flowed, u)?;
    let h = HBar(flowed).try_eval(u)?;
    let tangency = (0..u.len())
        .map(|a| tr.g.bilinear(&h, &tr.jac.column(a)).abs())
        .fold(0.0_f64, f64::max);
    let unit = UnitField { space: flowed.space, field: flowed.field };
    let nu = unit.eval(&tr.x);
    let d = crate::geometry::covariant_jacobian(flowed.space, &unit, &tr.x)?;
    let nn = normal_part(&tr.g, &tr.jac, &tr.ginv, &d.matvec(&nu));
    Ok(MeanCurvatureSample {
        params: u.to_vec(),
        point: tr.x.clone(),
        h_bar: h,
        tangency,
        nu_nu_normal: frame_norm(&tr.g, &nn),
    })
}

/// Mean curvature vector of the base inside its leaf: the trace of its second
/// fundamental form with tangential and `ν` parts removed (`h^β_ii η_β`).
pub fn base_trace_vector<M: ChartedSpace, F: VectorField, B: Immersion>(
    space: &M,
    field: &F,
    base: &B,
    q: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let tr = second_fundamental_trace(space, base, q)?;
    let np = normal_part(&tr.g, &tr.jac, &tr.ginv, &tr.trace);
    let nu = UnitField { space, field }.eval(&tr.x);
    let c = tr.g.bilinear(&np, &nu);
    Ok((vadd(&np, &vscale(c, &nu)), tr.x))
}

/// Curvature hypothesis of the flow result: constant sectional curvature or `Ric(V) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureHypothesis {
    pub constant_curvature: Option<f64>,
    pub sup_ric_v: f64,
    pub label: String,
}

pub fn check_curvature_hypothesis<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    points: &[Vec<f64>],
    seed: u64,
) -> Result<CurvatureHypothesis> {
    let cc = crate::models::certify_constant_curvature(space, seed, 1e-7).ok();
    let ric = par::try_map(points, |p| -> Result<f64> {
        let g = space.metric(p);
        let r = riemann(space, p)?.ricci();
        let low = r.matvec(&field.eval(p));
        Ok(frame_norm(&g, &crate::geometry::raise(&g, &low)?))
    })?;
    let sup_ric_v = par::sup(ric);
    let label = if cc.is_some() {
        "constant_curvature"
    } else if sup_ric_v < 1e-7 {
        "ric_v_zero"
    } else {
        return Err(Error::HypothesisUnverified(format!(
            "no constant sectional curvature and sup |Ric(V)| = {sup_ric_v:e}"
        )));
    };
    Ok(CurvatureHypothesis { constant_curvature: cc, sup_ric_v, label: label.into() })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// `sup |H̄(t,q) − (1/(n+1)) e^{−∫ψ} h^β_ii N_β|`.
    pub residual: f64,
    /// `sup |⟨Σ ∇̄_{E_i}E_i, V⟩ + nψ|` over the slices `{t} × M`.
    pub trace_identity: f64,
    /// `sup |T_k(t) − e^{−∫ψ} T_k(0)|` for the tangential components
    /// `T_k = Σ⟨∇̄_{E_i}E_i, E_k⟩` of transported orthonormal frames.
    pub tangential_decay: f64,
    /// `sup |(∇̄_ν ν)^⊥|`.
    pub nu_nu_normal: f64,
    pub sup_h_bar: f64,
    pub hypothesis: CurvatureHypothesis,
}

/// Transported frame fields `E_i = e^{−z} c_i^j ∂_{q_j}Φ` on the flowed
/// immersion, `c` the Gram-Schmidt coefficients of the base metric.
struct TransportedFrame<'a, 'b, M, F, B> {
    flowed: &'a FlowedImmersion<'b, M, F, B>,
}

impl<M: ChartedSpace, F: VectorField, B: Immersion> TransportedFrame<'_, '_, M, F, B> {
    /// Columns are the ambient components of `E_1..E_n`, followed by the
    /// parameter components (first row is the `t` slot).
    fn eval<S: Scalar>(&self, u: &[S]) -> Result<(Mat<S>, Mat<S>)> {
        let fl = self.flowed;
        let q = &u[1..];
        let n = q.len();
        let (xb, jb) = try_jacobian(&MapOf(fl.base), q)?;
        let gb = fl.space.metric(&xb);
        let gq = jb.transpose().matmul(&gb).matmul(&jb);
        let c = gram_schmidt(&gq);
        let (_, jp) = try_jacobian(&MapOf(fl), u)?;
        let z = flow_state(fl.space, fl.field, &xb, u[0], &[], &fl.opts)?.integral_psi;
        let decay = (-z).exp();
        let m = xb.len();
        let amb = Mat::from_fn(m, n, |r, i| {
            let mut s = S::zero();
            for j in 0..n {
                s += c[(j, i)] * jp[(r, j + 1)];
            }
            s * decay
        });
        let par = Mat::from_fn(n + 1, n, |r, i| if r == 0 { S::zero() } else { c[(r - 1, i)] * decay });
        Ok((amb, par))
    }
}

/// Upper-triangular `C` with `Cᵀ G C = Id` (columns orthonormal).
fn gram_schmidt<S: Scalar>(g: &Mat<S>) -> Mat<S> {
    let n = g.rows();
    let mut c: Mat<S> = Mat::zeros(n, n);
    for i in 0..n {
        let mut v = vec![S::zero(); n];
        v[i] = S::one();
        for j in 0..i {
            let cj = c.column(j);
            let p = g.bilinear(&v, &cj);
            v = vsub(&v, &vscale(p, &cj));
        }
        let nrm = g.bilinear(&v, &v).sqrt();
        for r in 0..n {
            c[(r, i)] = v[r] / nrm;
        }
    }
    c
}

struct FrameColumn<'a, 'b, 'c, M, F, B> {
    tf: &'a TransportedFrame<'b, 'c, M, F, B>,
    i: usize,
}

impl<M: ChartedSpace, F: VectorField, B: Immersion> TryVectorFn for FrameColumn<'_, '_, '_, M, F, B> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        Ok(self.tf.eval(u)?.0.column(self.i))
    }
}

/// `T_k = Σ_i ⟨∇̄_{E_i}E_i, E_k⟩` at `u`.
fn tangential_components<M: ChartedSpace, F: VectorField, B: Immersion>(
    flowed: &FlowedImmersion<'_, M, F, B>,
    u: &[f64],
) -> Result<Vec<f64>> {
    let tf = TransportedFrame { flowed };
    let (amb, par) = tf.eval(u)?;
    let x = flowed.map(u)?;
    let g = flowed.space.metric(&x);
    let gamma = christoffel(flowed.space, &x)?;
    let n = amb.cols();
    let mut acc = vec![0.0; x.len()];
    for i in 0..n {
        let (_, d) = try_jacobian(&FrameColumn { tf: &tf, i }, u)?;
        let e = amb.column(i);
        let de = vadd(&d.matvec(&par.column(i)), &gamma.contract(&e, &e));
        acc = vadd(&acc, &de);
    }
    Ok((0..n).map(|k| g.bilinear(&acc, &amb.column(k))).collect())
}

/// Compares `H̄` with the transported, exponentially damped base trace on the
/// parameter samples `(t, q)`.
pub fn decay_law_check<M: ChartedSpace, F: VectorField, B: Immersion>(
    flowed: &FlowedImmersion<'_, M, F, B>,
    samples: &[Vec<f64>],
    seed: u64,
) -> Result<DecayReport> {
    if samples.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let space = flowed.space;
    let field = flowed.field;
    let n = flowed.base.param_dim();
    let pts = par::try_map(samples, |u| flowed.map(u))?;
    let hypothesis = check_curvature_hypothesis(space, field, &pts, seed)?;
    let rows = par::try_map(samples, |u| -> Result<[f64; 5]> {
        let q = &u[1..];
        let (hb, xb) = base_trace_vector(space, field, flowed.base, q)?;
        let st = flow_state(space, field, &xb, u[0], &[hb], &flowed.opts)?;
        let damp = (-st.integral_psi).exp();
        let pred = vscale(damp / (n + 1) as f64, &st.transported[0]);
        let mc = mean_curvature_vector(flowed, u)?;
        let g = space.metric(&mc.point);
        let residual = frame_norm(&g, &vsub(&mc.h_bar, &pred));

        // slice trace identity ⟨G_q^{ij} II_ij, V⟩ = −nψ
        let tr = second_fundamental_trace(space, &SliceOf { flowed, t: u[0] }, q)?;
        let psi = psi_at(space, field, &tr.x)?;
        let v = field.eval(&tr.x);
        let ident = (tr.g.bilinear(&tr.trace, &v) + n as f64 * psi).abs();

        let tk = tangential_components(flowed, u)?;
        let mut u0 = u.clone();
        u0[0] = 0.0;
        let tk0 = tangential_components(flowed, &u0)?;
        let tdec = tk.iter().zip(&tk0).map(|(a, b)| (a - damp * b).abs()).fold(0.0, f64::max);
        Ok([residual, ident, tdec, mc.nu_nu_normal, frame_norm(&g, &mc.h_bar)])
    })?;
    let col = |k: usize| par::sup(rows.iter().map(|r| r[k]));
    Ok(DecayReport {
        residual: col(0),
        trace_identity: col(1),
        tangential_decay: col(2),
        nu_nu_normal: col(3),
        sup_h_bar: col(4),
        hypothesis,
    })
}

/// The slice `q ↦ Φ(t, q)` at fixed `t`.
struct SliceOf<'a, 'b, M, F, B> {
    flowed: &'a FlowedImmersion<'b, M, F, B>,
    t: f64,
}

impl<M: ChartedSpace, F: VectorField, B: Immersion> Immersion for SliceOf<'_, '_, M, F, B> {
    fn param_dim(&self) -> usize {
        self.flowed.base.param_dim()
    }
    fn axes(&self) -> Vec<Axis> {
        self.flowed.base.axes()
    }
    fn map<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        let mut u = vec![S::from_f64(self.t)];
        u.extend_from_slice(q);
        self.flowed.map(&u)
    }
}

/// Sup over a frame of `|(∇̄_e H̄)^⊥|`.
pub fn normal_derivative_of_h_bar<M: ChartedSpace, F: VectorField, B: Immersion>(
    flowed: &FlowedImmersion<'_, M, F, B>,
    u: &[f64],
) -> Result<f64> {
    let (h, dh) = try_jacobian(&HBar(flowed), &from_f64s::<f64>(u))?;
    let tr = second_fundamental_trace(flowed.space, flowed, u)?;
    let gamma = christoffel(flowed.space, &tr.x)?;
    let k = u.len();
    let induced = tr.jac.transpose().matmul(&tr.g).matmul(&tr.jac);
    let (e, _) = crate::linalg::orthonormal_frame(&induced)?;
    let mut best: f64 = 0.0;
    for c in 0..k {
        let dir = e.column(c);
        let amb_dir = tr.jac.matvec(&dir);
        let d = vadd(&dh.matvec(&dir), &gamma.contract(&amb_dir, &h));
        let np = normal_part(&tr.g, &tr.jac, &tr.ginv, &d);
        best = best.max(frame_norm(&tr.g, &np));
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceVerdict {
    pub eps: f64,
    pub base_trace: f64,
    pub sup_h_bar: f64,
    pub sup_normal_derivative: f64,
    pub all_small: bool,
    pub all_large: bool,
    /// The three statements agree (all small or all large).
    pub equivalent: bool,
    pub hypothesis: CurvatureHypothesis,
}

pub const SMALL: f64 = 1e-6;
pub const LARGE: f64 = 1e-3;

/// `(t, q)` grid: `t_count` times evenly in `[−0.8ε, 0.8ε]`, base samples
/// seeded.
pub fn strip_samples(eps: f64, base_axes: &[Axis], t_count: usize, q_count: usize, seed: u64) -> Vec<Vec<f64>> {
    let qs = sample_params(base_axes, seed, q_count);
    let mut out = Vec::new();
    for i in 0..t_count {
        let t = if t_count == 1 { 0.0 } else { -0.8 * eps + 1.6 * eps * i as f64 / (t_count - 1) as f64 };
        for q in &qs {
            let mut u = vec![t];
            u.extend_from_slice(q);
            out.push(u);
        }
    }
    out
}

pub fn simons_equivalence_probe<M: ChartedSpace, F: VectorField, B: Immersion>(
    space: &M,
    field: &F,
    base: &B,
    eps: f64,
    seed: u64,
) -> Result<EquivalenceVerdict> {
    let flowed = build_flowed_immersion(space, field, base, eps, seed)?;
    let samples = strip_samples(flowed.eps, &base.axes(), 3, 3, seed);
    let pts = par::try_map(&samples, |u| flowed.map(u))?;
    let hypothesis = check_curvature_hypothesis(space, field, &pts, seed)?;
    let qs = sample_params(&base.axes(), seed, 3);
    let base_trace = par::sup(par::try_map(&qs, |q| -> Result<f64> {
        let (h, x) = base_trace_vector(space, field, base, q)?;
        Ok(frame_norm(&space.metric(&x), &h))
    })?);
    let rows = par::try_map(&samples, |u| -> Result<(f64, f64)> {
        let mc = mean_curvature_vector(&flowed, u)?;
        let g = space.metric(&mc.point);
        Ok((frame_norm(&g, &mc.h_bar), normal_derivative_of_h_bar(&flowed, u)?))
    })?;
    let sup_h_bar = par::sup(rows.iter().map(|r| r.0));
    let sup_normal_derivative = par::sup(rows.iter().map(|r| r.1));
    let vals = [base_trace, sup_h_bar, sup_normal_derivative];
    let all_small = vals.iter().all(|&v| v < SMALL);
    let all_large = vals.iter().all(|&v| v > LARGE);
    Ok(EquivalenceVerdict {
        eps: flowed.eps,
        base_trace,
        sup_h_bar,
        sup_normal_derivative,
        all_small,
        all_large,
        equivalent: all_small || all_large,
        hypothesis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldModel;
    use crate::hypersurface::immersion::ExprImmersion;
    use crate::models::{builtin_space, make_flat};
    use std::f64::consts::PI;

    #[test]
    fn flows_with_closed_forms() {
        let l = make_flat(3, 1).unwrap();
        let p = [0.3, -0.2, 1.0];
        let y = flow_conformal_field(&l, &FieldModel::Position, &p, 0.7).unwrap();
        for k in 0..3 {
            assert!((y[k] - p[k] * 0.7_f64.exp()).abs() < 1e-11);
        }
        let c = FieldModel::Constant(vec![0.1, 0.0, 0.5]);
        let y = flow_conformal_field(&l, &c, &p, 0.4).unwrap();
        assert!((y[2] - 1.2).abs() < 1e-13 && (y[0] - 0.34).abs() < 1e-13);
    }

    #[test]
    fn grw_flow_moves_time_only() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let y = flow_conformal_field(&ds, &v, &[0.2, 1.0, 2.0], 0.3).unwrap();
        // T' = cosh T has the solution gd(T) = gd(T0) + t
        let gd = |x: f64| x.sinh().atan();
        let want = (gd(0.2) + 0.3).tan().asinh();
        assert!((y[0] - want).abs() < 1e-11, "{} vs {want}", y[0]);
        assert!((y[1] - 1.0).abs() < 1e-14 && (y[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equator_and_parallel_field_rejected() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let eq = ExprImmersion::fiber_circle(0.0, PI / 2.0);
        assert!(matches!(build_flowed_immersion(&ds, &v, &eq, 0.5, 1), Err(Error::ConformalFactorVanishes(_))));
        let l = make_flat(3, 1).unwrap();
        let c = FieldModel::Constant(vec![0.0, 0.0, 1.0]);
        let line = ExprImmersion::parse(&["u0".into(), "0".into(), "0".into()], vec![Axis::new(-1.0, 1.0)]).unwrap();
        assert!(matches!(build_flowed_immersion(&l, &c, &line, 0.5, 1), Err(Error::ConformalFactorVanishes(_))));
    }

    #[test]
    fn great_circle_strip_is_maximal() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let base = ExprImmersion::fiber_circle(1.0, PI / 2.0);
        let fl = build_flowed_immersion(&ds, &v, &base, 0.5, 7).unwrap();
        assert_eq!(fl.eps, 0.5);
        let mc = mean_curvature_vector(&fl, &[0.4, 1.0]).unwrap();
        assert!(frame_norm(&ds.metric(&mc.point), &mc.h_bar) < 1e-9);
    }

    #[test]
    fn small_circle_decay_law() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let base = ExprImmersion::fiber_circle(1.0, PI / 3.0);
        let fl = build_flowed_immersion(&ds, &v, &base, 0.5, 7).unwrap();
        let samples = vec![vec![0.0, 0.3], vec![0.2, 1.7], vec![0.4, 4.0]];
        let r = decay_law_check(&fl, &samples, 3).unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
        assert!(r.trace_identity < 1e-9 && r.tangential_decay < 1e-9 && r.nu_nu_normal < 1e-9);
        assert!(r.sup_h_bar > 1e-2);
        assert_eq!(r.hypothesis.label, "constant_curvature");
    }

    #[test]
    fn probe_verdicts() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let great = simons_equivalence_probe(&ds, &v, &ExprImmersion::fiber_circle(1.0, PI / 2.0), 0.5, 1).unwrap();
        assert!(great.all_small, "{great:?}");
        let small = simons_equivalence_probe(&ds, &v, &ExprImmersion::fiber_circle(1.0, PI / 3.0), 0.5, 1).unwrap();
        assert!(small.all_large, "{small:?}");

        let lw = builtin_space("linear-warp-grw", 2).unwrap();
        let vl = FieldModel::canonical(&lw).unwrap();
        let line = simons_equivalence_probe(&lw, &vl, &ExprImmersion::fiber_line(2.0), 0.5, 1).unwrap();
        assert!(line.all_small && line.hypothesis.label == "ric_v_zero", "{line:?}");
    }
}
