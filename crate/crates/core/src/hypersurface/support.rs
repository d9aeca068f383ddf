//! Support-function identities for `f_V = ⟨V, N⟩` and `g = ⟨V, W⟩`.

use super::frame::frame;
use super::immersion::{Immersion, InducedSpace};
use super::operators::{intrinsic_hessian, shape, HrFn};
use crate::conformal::{psi_at, require_closed, PsiFn};
use crate::diff::{fd, try_gradient, try_jacobian, TryScalarFn, TryVectorFn};
use crate::error::{Error, Result};
use crate::geometry::{christoffel_fd, riemann, ChartedSpace, VectorField};
use crate::linalg::{dot, frame_norm, vadd, vscale, vsub, Mat};
use crate::par;
use crate::scalar::Scalar;
use serde::Serialize;

/// `u ↦ ⟨V(x(u)), N(u)⟩`.
pub struct SupportFn<'a, M, I, F> {
    pub space: &'a M,
    pub imm: &'a I,
    pub field: &'a F,
}

impl<M: ChartedSpace, I: Immersion, F: VectorField> TryScalarFn for SupportFn<'_, M, I, F> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<S> {
        let f = frame(self.space, self.imm, u)?;
        Ok(f.inner(&self.field.eval(&f.point), &f.normal))
    }
}

/// `u ↦ ⟨V, W⟩` along the immersion.
struct PairFn<'a, M, I, V, W> {
    space: &'a M,
    imm: &'a I,
    v: &'a V,
    w: &'a W,
}

impl<M: ChartedSpace, I: Immersion, V: VectorField, W: VectorField> TryScalarFn for PairFn<'_, M, I, V, W> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<S> {
        let x = self.imm.map(u)?;
        Ok(self.space.metric(&x).bilinear(&self.v.eval(&x), &self.w.eval(&x)))
    }
}

/// `√G · V^⊤` in parameter coordinates; its coordinate divergence over `√G`
/// is `div_M V^⊤`.
struct TangentFlux<'a, M, I, F> {
    space: &'a M,
    imm: &'a I,
    field: &'a F,
}

impl<M: ChartedSpace, I: Immersion, F: VectorField> TryVectorFn for TangentFlux<'_, M, I, F> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        let f = frame(self.space, self.imm, u)?;
        let t = f.tangent_coords(&self.field.eval(&f.point))?;
        let root = f.induced.det().sqrt();
        Ok(t.into_iter().map(|v| v * root).collect())
    }
}

/// `div_M` of the tangential part of an ambient field.
pub fn tangential_divergence<M: ChartedSpace, I: Immersion, F: VectorField>(
    space: &M,
    imm: &I,
    field: &F,
    u: &[f64],
) -> Result<f64> {
    let (_, j) = try_jacobian(&TangentFlux { space, imm, field }, u)?;
    let f = frame(space, imm, u)?;
    Ok(j.trace() / f.induced.det().sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportReport {
    /// `∇f_V = −A(V^⊤)`.
    pub grad_f_v: f64,
    /// `Δf_V = nV^⊤(H) + {Ric(N,N) + |A|²}f_V + n{Hψ − N(ψ)}`.
    pub laplacian_f_v: f64,
    /// Same with `+N(ψ)`; diagnostic only.
    pub laplacian_f_v_literal: f64,
    /// `∇g = ψ_V W^⊤ + ψ_W V^⊤`.
    pub grad_g: f64,
    /// `Δg = W^⊤(ψ_V) + V^⊤(ψ_W) + nH(ψ_V f_W + ψ_W f_V) + 2nψ_Vψ_W`.
    pub laplacian_g: f64,
    /// `div_M V^⊤ = nψ_V + nH f_V`.
    pub div_v_tangent: f64,
    /// `|V^⊤|² = ⟨V,V⟩ + ⟨V,N⟩²`.
    pub tangent_norm_split: f64,
    /// Largest gap between exact and finite-difference `∇f_V`, `Δf_V`.
    pub fd_gap: f64,
    /// `max f_V` over the samples (negative when orientations agree).
    pub f_v_max: f64,
    /// `"W"` when a second field was supplied, `"V"` when `g = ⟨V,V⟩`.
    pub w_source: String,
}

impl SupportReport {
    /// Largest gated residual (excludes the literal form and the FD gap).
    pub fn max(&self) -> f64 {
        [self.grad_f_v, self.laplacian_f_v, self.grad_g, self.laplacian_g, self.div_v_tangent]
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b))
    }
}

const FD_STEP: f64 = 1e-4;

struct PointResiduals {
    r: [f64; 8],
    f_v: f64,
}

fn support_point<M, I, V, W>(space: &M, imm: &I, v: &V, w: &W, u: &[f64], tol: f64) -> Result<PointResiduals>
where
    M: ChartedSpace,
    I: Immersion,
    V: VectorField,
    W: VectorField,
{
    let n = imm.param_dim();
    let nf = n as f64;
    let sh = shape(space, imm, u)?;
    let fr = &sh.frame;
    let x = &fr.point;
    require_closed(space, v, x, tol)?;
    require_closed(space, w, x, tol)?;
    let vv = v.eval(x);
    let wv = w.eval(x);
    let f_v = fr.inner(&vv, &fr.normal);
    if !(f_v < 0.0) {
        return Err(Error::TimeOrientationClash(f_v));
    }
    let f_w = fr.inner(&wv, &fr.normal);
    let vt = fr.tangent_coords(&vv)?;
    let wt = fr.tangent_coords(&wv)?;
    let ginv = fr.induced.inverse().ok_or_else(|| Error::NotSpacelike(u.to_vec()))?;
    let gi = &fr.induced;
    let a = &sh.a;
    let h = sh.mean_curvature();
    let psi_v = psi_at(space, v, x)?;
    let psi_w = psi_at(space, w, x)?;
    let (_, dpsi_v) = try_gradient(&PsiFn { space, field: v }, x)?;
    let (_, dpsi_w) = try_gradient(&PsiFn { space, field: w }, x)?;

    // ∇f_V
    let sf = SupportFn { space, imm, field: v };
    let (_, dfv, hess_fv) = intrinsic_hessian(space, imm, &sf, u)?;
    let grad_fv = ginv.matvec(&dfv);
    let av = a.matvec(&vt);
    let r1 = frame_norm(gi, &vadd(&grad_fv, &av));

    // Δf_V
    let lap_fv = ginv.matmul(&hess_fv).trace();
    let (_, dh) = try_gradient(&HrFn { space, imm, r: 1 }, u)?;
    let ric = riemann(space, x)?.ricci();
    let ric_nn = ric.bilinear(&fr.normal, &fr.normal);
    let a2 = a.matmul(a).trace();
    let n_psi = dot(&dpsi_v, &fr.normal);
    let common = nf * dot(&dh, &vt) + (ric_nn + a2) * f_v + nf * h * psi_v;
    let r2 = (lap_fv - (common - nf * n_psi)).abs();
    let r2_lit = (lap_fv - (common + nf * n_psi)).abs();

    // ∇g, Δg
    let pf = PairFn { space, imm, v, w };
    let (_, dg, hess_g) = intrinsic_hessian(space, imm, &pf, u)?;
    let grad_g = ginv.matvec(&dg);
    let rhs_g = vadd(&vscale(psi_v, &wt), &vscale(psi_w, &vt));
    let r3 = frame_norm(gi, &vsub(&grad_g, &rhs_g));
    let lap_g = ginv.matmul(&hess_g).trace();
    let w_amb = fr.jac.matvec(&wt);
    let v_amb = fr.jac.matvec(&vt);
    let rhs_lg = dot(&dpsi_v, &w_amb)
        + dot(&dpsi_w, &v_amb)
        + nf * h * (psi_v * f_w + psi_w * f_v)
        + 2.0 * nf * psi_v * psi_w;
    let r4 = (lap_g - rhs_lg).abs();

    // div V^⊤
    let div = tangential_divergence(space, imm, v, u)?;
    let r5 = (div - (nf * psi_v + nf * h * f_v)).abs();

    let split = (gi.bilinear(&vt, &vt) - (fr.inner(&vv, &vv) + f_v * f_v)).abs();

    // finite-difference oracle for ∇f_V and Δf_V
    let fv_plain = |p: &[f64]| sf.try_eval(p).unwrap_or(f64::NAN);
    let dfd = fd::gradient(&fv_plain, u, FD_STEP);
    let hfd = fd::hessian(&fv_plain, u, FD_STEP);
    let leaf = InducedSpace::riemannian(space, imm);
    let gam = christoffel_fd(&leaf, u, FD_STEP)?;
    let hess_fd = Mat::from_fn(n, n, |i, j| hfd[(i, j)] - (0..n).map(|c| gam.get(c, i, j) * dfd[c]).sum::<f64>());
    let lap_fd = ginv.matmul(&hess_fd).trace();
    let grad_fd = ginv.matvec(&dfd);
    let gap = frame_norm(gi, &vsub(&grad_fd, &grad_fv)).max((lap_fd - lap_fv).abs());

    Ok(PointResiduals { r: [r1, r2, r2_lit, r3, r4, r5, split, gap], f_v })
}

/// Residuals of the support-function identities over parameter samples. When
/// `w` is `None`, `W = V`.
pub fn support_identities_check<M, I, V, W>(
    space: &M,
    imm: &I,
    v: &V,
    w: Option<&W>,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<SupportReport>
where
    M: ChartedSpace,
    I: Immersion,
    V: VectorField,
    W: VectorField,
{
    if samples.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let pts = match w {
        Some(w) => par::try_map(samples, |u| support_point(space, imm, v, w, u, tol))?,
        None => par::try_map(samples, |u| support_point(space, imm, v, v, u, tol))?,
    };
    let col = |k: usize| par::sup(pts.iter().map(|p| p.r[k]));
    Ok(SupportReport {
        grad_f_v: col(0),
        laplacian_f_v: col(1),
        laplacian_f_v_literal: col(2),
        grad_g: col(3),
        laplacian_g: col(4),
        div_v_tangent: col(5),
        tangent_norm_split: col(6),
        fd_gap: col(7),
        f_v_max: pts.iter().map(|p| p.f_v).fold(f64::NEG_INFINITY, f64::max),
        w_source: if w.is_some() { "W" } else { "V" }.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldModel;
    use crate::hypersurface::immersion::{sample_params, ExprImmersion};
    use crate::models::{builtin_space, make_flat, SpaceModel};

    #[test]
    fn hyperplane_with_parallel_field() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::flat_hyperplane(2, 0.5);
        let v = FieldModel::Constant(vec![0.0, 0.0, 1.0]);
        let us = sample_params(&imm.axes, 2, 4);
        let r = support_identities_check(&l, &imm, &v, None::<&FieldModel>, &us, 1e-8).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
        assert!((r.f_v_max + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hyperboloid_with_position_field() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::hyperboloid_graph(2, 0.0);
        let us = sample_params(&imm.axes, 3, 4);
        let w = FieldModel::Constant(vec![0.2, 0.0, 1.0]);
        let r = support_identities_check(&l, &imm, &FieldModel::Position, Some(&w), &us, 1e-8).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
        assert!(r.fd_gap < 1e-5, "{r:?}");
    }

    #[test]
    fn de_sitter_slice_corrected_sign() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let SpaceModel::Grw(m) = &ds else { panic!() };
        let imm = ExprImmersion::grw_slice(1.0, &m.fiber);
        let v = FieldModel::canonical(&ds).unwrap();
        let us = sample_params(&imm.axes, 4, 4);
        let r = support_identities_check(&ds, &imm, &v, None::<&FieldModel>, &us, 1e-8).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
        assert!(r.laplacian_f_v_literal > 1.0);
    }

    #[test]
    fn past_pointing_field_is_rejected() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::flat_hyperplane(2, 0.5);
        let v = FieldModel::Constant(vec![0.0, 0.0, -1.0]);
        let us = sample_params(&imm.axes, 2, 1);
        assert!(matches!(
            support_identities_check(&l, &imm, &v, None::<&FieldModel>, &us, 1e-8),
            Err(Error::TimeOrientationClash(_))
        ));
        let nc = FieldModel::components(&["x0".into(), "0".into(), "1".into()], 3).unwrap();
        assert!(matches!(
            support_identities_check(&l, &imm, &nc, None::<&FieldModel>, &us, 1e-8),
            Err(Error::NotClosedConformal(_))
        ));
    }
}
