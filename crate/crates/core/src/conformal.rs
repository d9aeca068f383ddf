//! Conformal certificates, gradient identities of closed conformal fields,
//! projection onto leaves of `V^⊥` and leaf umbilicity.

use crate::diff::{try_gradient, TryScalarFn};
use crate::error::{Error, Result};
use crate::fields::FieldClass;
use crate::geometry::{check_domain, covariant_jacobian, divergence, raise, ChartedSpace, VectorField};
use crate::hypersurface::frame::frame_at;
use crate::hypersurface::immersion::{Immersion, InducedSpace, MapOf};
use crate::hypersurface::operators::shape;
use crate::linalg::{frame_max_abs, frame_norm, orthonormal_frame, vadd, vscale, Mat};
use crate::par;
use crate::scalar::{from_f64s, Scalar};
use serde::Serialize;

/// `ψ̂ = div V / dim` as a scalar function on the ambient chart.
pub struct PsiFn<'a, M, F> {
    pub space: &'a M,
    pub field: &'a F,
}

impl<M: ChartedSpace, F: VectorField> TryScalarFn for PsiFn<'_, M, F> {
    fn try_eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
        Ok(divergence(self.space, self.field, p)? / self.space.dim() as f64)
    }
}

pub fn psi_at<M: ChartedSpace, F: VectorField>(space: &M, field: &F, p: &[f64]) -> Result<f64> {
    check_domain(space, p)?;
    PsiFn { space, field }.try_eval(p)
}

/// Ambient gradient `∇̄ψ̂` (vector, index raised).
pub fn psi_gradient<M: ChartedSpace, F: VectorField>(space: &M, field: &F, p: &[f64]) -> Result<Vec<f64>> {
    let (_, d) = try_gradient(&PsiFn { space, field }, p)?;
    raise(&space.metric(p), &d)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalCertificate {
    pub psi_hat: Vec<f64>,
    /// `sup |L_V g − 2ψ̂ g|` in orthonormal frames.
    pub conformal_residual: f64,
    /// `sup |∇̄V − ψ̂ Id|` in orthonormal frames.
    pub closed_residual: f64,
    pub sup_psi: f64,
    pub inf_abs_psi: f64,
    pub sup_grad_psi: f64,
    pub class: FieldClass,
}

impl ConformalCertificate {
    pub fn is_closed_conformal(&self) -> bool {
        matches!(self.class, FieldClass::ClosedConformal | FieldClass::Homothetic | FieldClass::Parallel)
    }

    /// Non-parallel homothetic in the sense used by the Bernstein audits.
    pub fn is_nonparallel_homothetic(&self) -> bool {
        self.sup_grad_psi < 1e-8 && self.inf_abs_psi > 1e-6
    }
}

struct PointCert {
    psi: f64,
    conformal: f64,
    closed: f64,
    grad: f64,
}

fn certify_point<M: ChartedSpace, F: VectorField>(space: &M, field: &F, p: &[f64]) -> Result<PointCert> {
    check_domain(space, p)?;
    let n = space.dim();
    let g = space.metric(p);
    let j = covariant_jacobian(space, field, p)?;
    let psi = j.trace() / n as f64;
    let gj = g.matmul(&j);
    let lie = gj.add(&gj.transpose());
    let dev = lie.sub(&g.scale(2.0 * psi));
    let (e, _) = orthonormal_frame(&g)?;
    let conformal = crate::linalg::max_abs(&e.transpose().matmul(&dev).matmul(&e));
    let closed = frame_max_abs(&g, &j.sub(&Mat::identity(n).scale(psi)));
    let grad = frame_norm(&g, &psi_gradient(space, field, p)?);
    Ok(PointCert { psi, conformal, closed, grad })
}

/// Certificate over the sample points, classified with threshold `tol`.
pub fn certify<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ConformalCertificate> {
    if samples.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let pts = par::try_map(samples, |p| certify_point(space, field, p))?;
    let conformal_residual = par::sup(pts.iter().map(|c| c.conformal));
    let closed_residual = par::sup(pts.iter().map(|c| c.closed));
    let sup_psi = par::sup(pts.iter().map(|c| c.psi.abs()));
    let inf_abs_psi = pts.iter().map(|c| c.psi.abs()).fold(f64::INFINITY, f64::min);
    let sup_grad_psi = par::sup(pts.iter().map(|c| c.grad));
    let class = if !(conformal_residual < tol) {
        FieldClass::NotConformal
    } else if !(closed_residual < tol) {
        if sup_psi < tol {
            FieldClass::Killing
        } else {
            FieldClass::Conformal
        }
    } else if sup_grad_psi < tol {
        if sup_psi < tol {
            FieldClass::Parallel
        } else {
            FieldClass::Homothetic
        }
    } else {
        FieldClass::ClosedConformal
    };
    Ok(ConformalCertificate {
        psi_hat: pts.iter().map(|c| c.psi).collect(),
        conformal_residual,
        closed_residual,
        sup_psi,
        inf_abs_psi,
        sup_grad_psi,
        class,
    })
}

/// Seeded points inside the chart's sample box.
pub fn sample_points<M: ChartedSpace>(space: &M, seed: u64, count: usize) -> Vec<Vec<f64>> {
    crate::config::sample_box(seed, &space.sample_bounds(), count)
        .into_iter()
        .filter(|p| space.contains(p))
        .collect()
}

pub(crate) fn require_closed<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    p: &[f64],
    tol: f64,
) -> Result<()> {
    let c = certify_point(space, field, p)?;
    if !(c.closed < tol && c.conformal < tol) {
        return Err(Error::NotClosedConformal(c.closed.max(c.conformal)));
    }
    Ok(())
}

struct NormSq<'a, M, F> {
    space: &'a M,
    field: &'a F,
}

impl<M: ChartedSpace, F: VectorField> TryScalarFn for NormSq<'_, M, F> {
    fn try_eval<S: Scalar>(&self, p: &[S]) -> Result<S> {
        let v = self.field.eval(p);
        Ok(self.space.metric(p).bilinear(&v, &v))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradientResiduals {
    /// `sup |∇̄⟨V,V⟩ − 2ψV|`.
    pub res_a: f64,
    /// `sup |∇̄ψ + ν(ψ)ν|`.
    pub res_b: f64,
}

pub fn gradient_identities_check<M: ChartedSpace, F: VectorField>(
    space: &M,
    field: &F,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<GradientResiduals> {
    if samples.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let res = par::try_map(samples, |p| -> Result<(f64, f64)> {
        require_closed(space, field, p, tol)?;
        let g = space.metric(p);
        let v = field.eval(p);
        let q = g.bilinear(&v, &v);
        if !(q < 0.0) {
            return Err(Error::NotTimelike(q));
        }
        let psi = psi_at(space, field, p)?;
        let (_, dq) = try_gradient(&NormSq { space, field }, p)?;
        let grad_q = raise(&g, &dq)?;
        let a = frame_norm(&g, &vadd(&grad_q, &vscale(-2.0 * psi, &v)));
        let (_, dpsi) = try_gradient(&PsiFn { space, field }, p)?;
        let grad_psi = raise(&g, &dpsi)?;
        let nu = vscale(1.0 / (-q).sqrt(), &v);
        let nu_psi = crate::linalg::dot(&dpsi, &nu);
        let b = frame_norm(&g, &vadd(&grad_psi, &vscale(nu_psi, &nu)));
        Ok((a, b))
    })?;
    Ok(GradientResiduals {
        res_a: par::sup(res.iter().map(|r| r.0)),
        res_b: par::sup(res.iter().map(|r| r.1)),
    })
}

/// `U = η + ⟨η,ν⟩ν` with `ν = V/√(−⟨V,V⟩)`, ambient components.
fn projected<S: Scalar, M: ChartedSpace, E: VectorField, V: VectorField>(
    space: &M,
    eta: &E,
    v_field: &V,
    x: &[S],
) -> (Vec<S>, S) {
    let g = space.metric(x);
    let v = v_field.eval(x);
    let e = eta.eval(x);
    let q = g.bilinear(&v, &v);
    let nu = vscale(S::one() / (-q).sqrt(), &v);
    let c = g.bilinear(&e, &nu);
    (vadd(&e, &vscale(c, &nu)), c)
}

/// Tangential coordinates of the projected field on the leaf parameters.
/// Evaluations that fail yield NaN so residuals surface them.
struct LeafField<'a, M, I, E, V> {
    space: &'a M,
    imm: &'a I,
    eta: &'a E,
    v_field: &'a V,
}

impl<M: ChartedSpace, I: Immersion, E: VectorField, V: VectorField> VectorField
    for LeafField<'_, M, I, E, V>
{
    fn eval<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        let k = self.imm.param_dim();
        let run = || -> Result<Vec<S>> {
            let (x, j) = crate::diff::try_jacobian(&MapOf(self.imm), u)?;
            let (uu, _) = projected(self.space, self.eta, self.v_field, &x);
            let g = self.space.metric(&x);
            let induced = j.transpose().matmul(&g).matmul(&j);
            raise(&induced, &j.transpose().matvec(&g.matvec(&uu)))
        };
        run().unwrap_or_else(|_| vec![S::from_f64(f64::NAN); k])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafProjection {
    pub u_components: Vec<f64>,
    pub psi_u: f64,
    /// `|⟨U, ν⟩|`.
    pub tangency: f64,
    /// `U` vanishes (η parallel to ν).
    pub degenerate: bool,
    /// `sup |D U − ψ_U Id|` with the leaf's induced connection.
    pub intrinsic_residual: f64,
}

/// Projects `eta` onto the leaf through `imm(u)` and certifies the result
/// intrinsically. `ψ_ν` is the leafwise factor `ψ_V/√(−⟨V,V⟩)` of the unit
/// field.
pub fn project_to_leaf<M: ChartedSpace, I: Immersion, E: VectorField, V: VectorField>(
    space: &M,
    eta: &E,
    v_field: &V,
    imm: &I,
    u: &[f64],
) -> Result<LeafProjection> {
    let x = imm.map(u)?;
    check_domain(space, &x)?;
    let g = space.metric(&x);
    let v = v_field.eval(&x);
    let vn = frame_norm(&g, &v);
    if !(vn > 1e-12) {
        return Err(Error::SingularV(format!("|V| = {vn:e} at {x:?}")));
    }
    let q = g.bilinear(&v, &v);
    if !(q < 0.0) {
        return Err(Error::NotTimelike(q));
    }
    let (uu, c) = projected(space, eta, v_field, &x);
    let nu = vscale(1.0 / (-q).sqrt(), &v);
    let psi_eta = psi_at(space, eta, &x)?;
    let psi_nu = psi_at(space, v_field, &x)? / (-q).sqrt();
    let psi_u = psi_eta + c * psi_nu;
    let tangency = g.bilinear(&uu, &nu).abs();
    let scale = frame_norm(&g, &eta.eval(&x)).max(1.0);
    let degenerate = frame_norm(&g, &uu) < 1e-12 * scale;
    let leaf = InducedSpace::riemannian(space, imm);
    let lf = LeafField { space, imm, eta, v_field };
    let d = covariant_jacobian(&leaf, &lf, &from_f64s::<f64>(u))?;
    let k = imm.param_dim();
    let induced = leaf.metric(u);
    let intrinsic_residual = frame_max_abs(&induced, &d.sub(&Mat::identity(k).scale(psi_u)));
    Ok(LeafProjection { u_components: uu, psi_u, tangency, degenerate, intrinsic_residual })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UmbilicityResiduals {
    /// `sup |S_Ξ − ψ Id|`.
    pub literal: f64,
    /// `sup |S_Ξ + (ψ/|V|) Id|`.
    pub normalized: f64,
    /// `sup |⟨dx(∂_i), V⟩|` relative to `|V||dx(∂_i)|`.
    pub orthogonality: f64,
}

/// Shape operator `S_Ξ = −∇̄ν` of a leaf against the factor `ψ` of `V`.
pub fn leaf_umbilicity_check<M: ChartedSpace, I: Immersion, V: VectorField>(
    space: &M,
    v_field: &V,
    imm: &I,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<UmbilicityResiduals> {
    if samples.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let res = par::try_map(samples, |u| -> Result<(f64, f64, f64)> {
        let f = frame_at(space, imm, u)?;
        let v = v_field.eval(&f.point);
        let vn = frame_norm(&f.g, &v);
        let mut orth: f64 = 0.0;
        for i in 0..imm.param_dim() {
            let col = f.jac.column(i);
            let s = f.g.bilinear(&col, &v).abs() / (vn * frame_norm(&f.g, &col)).max(1e-300);
            orth = orth.max(s);
        }
        if !(orth < tol) {
            return Err(Error::NotOrthogonalLeaf(orth));
        }
        let q = f.g.bilinear(&v, &v);
        if !(q < 0.0) {
            return Err(Error::NotTimelike(q));
        }
        let nu = vscale(1.0 / (-q).sqrt(), &v);
        // ν = ±N; S_Ξ = −⟨ν,N⟩·A
        let sign = -f.g.bilinear(&nu, &f.normal);
        let sh = shape(space, imm, u)?;
        let s_leaf = sh.a.scale(sign);
        let psi = psi_at(space, v_field, &f.point)?;
        let n = imm.param_dim();
        let id = Mat::identity(n);
        let lit = frame_max_abs(&f.induced, &s_leaf.sub(&id.scale(psi)));
        let nrm = frame_max_abs(&f.induced, &s_leaf.add(&id.scale(psi / (-q).sqrt())));
        Ok((lit, nrm, orth))
    })?;
    Ok(UmbilicityResiduals {
        literal: par::sup(res.iter().map(|r| r.0)),
        normalized: par::sup(res.iter().map(|r| r.1)),
        orthogonality: par::sup(res.iter().map(|r| r.2)),
    })
}
