//! Second fundamental form, shape operator and the operators `L_r`.

use super::frame::{frame_from_parts, Frame};
use super::immersion::{check_params, Immersion, InducedSpace, MapOf};
use super::newton::{elementary, mean_curvatures, newton_transforms, CurvatureInvariants};
use crate::diff::{try_gradient, try_hessian, try_jacobian, try_second_order, TryScalarFn, TryVectorFn};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, ChartedSpace};
use crate::linalg::{orthonormal_frame, Mat};
use crate::scalar::{to_f64, Scalar};
use serde::Serialize;

/// Frame plus `h_{jk} = ⟨N, ∇̄_{∂j} ∂k x⟩` and the coordinate shape operator
/// `A = G⁻¹ h`, so that `A = −∇̄N` on tangent vectors.
#[derive(Debug, Clone)]
pub struct Shape<S> {
    pub frame: Frame<S>,
    pub h: Mat<S>,
    pub a: Mat<S>,
    /// `S_0, …, S_n`.
    pub s: Vec<S>,
}

impl<S: Scalar> Shape<S> {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Normalized mean curvatures `H_0, …, H_n`.
    pub fn h_r(&self) -> Vec<S> {
        mean_curvatures(&self.s)
    }

    pub fn mean_curvature(&self) -> S {
        -self.a.trace() / self.n() as f64
    }

    /// Coordinate Newton transformations `P_0, …, P_n`.
    pub fn newton(&self) -> Vec<Mat<S>> {
        newton_transforms(&self.a, &self.s)
    }
}

pub fn shape<M: ChartedSpace, I: Immersion, S: Scalar>(space: &M, imm: &I, u: &[S]) -> Result<Shape<S>> {
    let ur = to_f64(u);
    check_params(&imm.axes(), &ur)?;
    let so = try_second_order(&MapOf(imm), u)?;
    let frame = frame_from_parts(space, &ur, so.value.clone(), so.jac.clone())?;
    let gamma = christoffel(space, &frame.point)?;
    let n = imm.param_dim();
    let cols: Vec<Vec<S>> = (0..n).map(|i| frame.jac.column(i)).collect();
    let mut h = Mat::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let corr = gamma.contract(&cols[j], &cols[k]);
            let acc: Vec<S> = so.second[j][k].iter().zip(&corr).map(|(&a, &b)| a + b).collect();
            let v = frame.g.bilinear(&frame.normal, &acc);
            h[(j, k)] = v;
            h[(k, j)] = v;
        }
    }
    let ginv = frame
        .induced
        .inverse()
        .ok_or_else(|| Error::NotSpacelike(ur.clone()))?;
    let a = ginv.matmul(&h);
    let s = elementary(&a);
    Ok(Shape { frame, h, a, s })
}

/// Curvature bundle at a parameter; `A` is re-expressed in an orthonormal
/// frame of the induced metric before the Newton machinery runs.
pub fn shape_operator_at<M: ChartedSpace, I: Immersion>(
    space: &M,
    imm: &I,
    u: &[f64],
) -> Result<CurvatureInvariants> {
    let sh = shape(space, imm, u)?;
    invariants_of(&sh.a, &sh.frame.induced)
}

/// Invariants of a coordinate shape operator relative to a Riemannian metric.
pub fn invariants_of(a_coord: &Mat<f64>, induced: &Mat<f64>) -> Result<CurvatureInvariants> {
    let (e, _) = orthonormal_frame(induced)?;
    let einv = e.inverse().ok_or_else(|| Error::SignatureMismatch("singular induced metric".into()))?;
    let ao = einv.matmul(a_coord).matmul(&e);
    let asym = crate::linalg::max_abs(&ao.sub(&ao.transpose()));
    let mut inv = CurvatureInvariants::from_symmetric(crate::linalg::symmetrize(&ao), asym);
    inv.a_coord = a_coord.clone();
    inv.induced = induced.clone();
    Ok(inv)
}

/// `u ↦ H_r(u)`.
pub struct HrFn<'a, M, I> {
    pub space: &'a M,
    pub imm: &'a I,
    pub r: usize,
}

impl<M: ChartedSpace, I: Immersion> TryScalarFn for HrFn<'_, M, I> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<S> {
        Ok(shape(self.space, self.imm, u)?.h_r()[self.r])
    }
}

/// `u ↦ S_r(u)`.
pub struct SrFn<'a, M, I> {
    pub space: &'a M,
    pub imm: &'a I,
    pub r: usize,
}

impl<M: ChartedSpace, I: Immersion> TryScalarFn for SrFn<'_, M, I> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<S> {
        Ok(shape(self.space, self.imm, u)?.s[self.r])
    }
}

/// Intrinsic Hessian `∂a∂b f − Γ^c_ab ∂c f` (as a (0,2) tensor) and the
/// coordinate gradient of `f`.
pub fn intrinsic_hessian<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    space: &M,
    imm: &I,
    f: &F,
    u: &[f64],
) -> Result<(f64, Vec<f64>, Mat<f64>)> {
    let (v, d, hs) = try_hessian(f, u)?;
    let leaf = InducedSpace::riemannian(space, imm);
    let gamma = christoffel(&leaf, u)?;
    let n = u.len();
    let hess = Mat::from_fn(n, n, |a, b| {
        hs[(a, b)] - (0..n).map(|c| gamma.get(c, a, b) * d[c]).sum::<f64>()
    });
    Ok((v, d, hess))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LrValue {
    /// `tr(P_r G⁻¹ Hess f)`.
    pub trace_form: f64,
    /// `(1/√G) ∂_a(√G P^a_b G^{bc} ∂_c f)`.
    pub divergence_form: f64,
}

struct FluxField<'a, M, I, F> {
    space: &'a M,
    imm: &'a I,
    f: &'a F,
    r: usize,
}

impl<M: ChartedSpace, I: Immersion, F: TryScalarFn> TryVectorFn for FluxField<'_, M, I, F> {
    fn try_eval<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        let sh = shape(self.space, self.imm, u)?;
        let p = &sh.newton()[self.r];
        let (_, d) = try_gradient(self.f, u)?;
        let g = &sh.frame.induced;
        let ginv = g.inverse().ok_or_else(|| Error::NotSpacelike(to_f64(u)))?;
        let root = g.det().sqrt();
        Ok(p.matvec(&ginv.matvec(&d)).into_iter().map(|v| v * root).collect())
    }
}

/// `L_r f` in trace and divergence form. The two agree whenever `P_r` is
/// divergence free, e.g. in constant-curvature ambients.
pub fn lr_apply<M: ChartedSpace, I: Immersion, F: TryScalarFn>(
    space: &M,
    imm: &I,
    f: &F,
    r: usize,
    u: &[f64],
) -> Result<LrValue> {
    let n = imm.param_dim();
    if r > n {
        return Err(Error::InvalidArgument(format!("r = {r} exceeds hypersurface dimension {n}")));
    }
    let sh = shape(space, imm, u)?;
    let p = &sh.newton()[r];
    let (_, _, hess) = intrinsic_hessian(space, imm, f, u)?;
    let ginv = sh.frame.induced.inverse().ok_or_else(|| Error::NotSpacelike(u.to_vec()))?;
    let trace_form = p.matmul(&ginv).matmul(&hess).trace();
    let (_, jac) = try_jacobian(&FluxField { space, imm, f, r }, u)?;
    let divergence_form = jac.trace() / sh.frame.induced.det().sqrt();
    Ok(LrValue { trace_form, divergence_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::hypersurface::immersion::ExprImmersion;
    use crate::models::{builtin_space, make_flat, SpaceModel};

    #[test]
    fn hyperboloid_is_umbilic_minus_identity() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::hyperboloid_graph(2, 0.0);
        let inv = shape_operator_at(&l, &imm, &[0.3, -0.5]).unwrap();
        assert!(crate::linalg::max_abs(&inv.a.add(&Mat::identity(2))) < 1e-12);
        assert!((inv.h[1] - 1.0).abs() < 1e-12 && (inv.h[2] - 1.0).abs() < 1e-12);
        assert!(inv.self_adjoint_residual < 1e-12);
    }

    #[test]
    fn de_sitter_slice() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let SpaceModel::Grw(m) = &ds else { panic!() };
        let t0: f64 = 1.0;
        let inv = shape_operator_at(&ds, &ExprImmersion::grw_slice(t0, &m.fiber), &[1.1, 0.4]).unwrap();
        assert!((inv.h[1] - t0.tanh()).abs() < 1e-12);
        assert!((inv.h[2] - t0.tanh().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn laplacian_on_flat_plane() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::flat_hyperplane(2, 0.0);
        let f = Expr::parse_indexed("cos(u0)", "u", 2).unwrap();
        let v = lr_apply(&l, &imm, &f, 0, &[0.3, 0.1]).unwrap();
        assert!((v.trace_form + 0.3_f64.cos()).abs() < 1e-12);
        assert!((v.divergence_form + 0.3_f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn l1_forms_agree_on_bumped_hyperboloid() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::hyperboloid_graph(2, 0.05);
        let f = Expr::parse_indexed("sqrt(1+u0^2+u1^2) + u0*u1", "u", 2).unwrap();
        let v = lr_apply(&l, &imm, &f, 1, &[0.2, -0.3]).unwrap();
        assert!((v.trace_form - v.divergence_form).abs() < 1e-10, "{v:?}");
    }
}
