//! Hypothesis/conclusion audits for the Bernstein-type classification on a
//! compact parameter patch.

use super::immersion::Immersion;
use super::operators::shape;
use super::support::SupportFn;
use crate::conformal::certify;
use crate::diff::TryScalarFn;
use crate::error::Result;
use crate::geometry::{riemann, ChartedSpace, VectorField};
use crate::linalg::frame_norm;
use crate::par;
use crate::quadrature::{integrate, integrate_checked, tensor_rule, Axis, Estimate};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub hypotheses_met: bool,
    pub conclusion_met: bool,
    /// `consistent`, `inapplicable` or `violated`.
    pub label: String,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(hypotheses: Vec<(bool, &str)>, conclusion_met: bool) -> Verdict {
        let notes: Vec<String> =
            hypotheses.iter().filter(|(ok, _)| !ok).map(|(_, s)| format!("fails: {s}")).collect();
        let hypotheses_met = notes.is_empty();
        let label = match (hypotheses_met, conclusion_met) {
            (true, true) => "consistent",
            (true, false) => "violated",
            (false, _) => "inapplicable",
        };
        Verdict { hypotheses_met, conclusion_met, label: label.into(), notes }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BernsteinAudit {
    pub sup_a: f64,
    /// `∫|V^⊤| dM` over the full patch with a halving estimate.
    pub integral_v_tangent: Estimate,
    /// `(scale, ∫|V^⊤| dM)` on patches shrunk about the centre.
    pub patch_integrals: Vec<(f64, f64)>,
    /// `constant`, `converging` or `increasing`.
    pub trend: String,
    pub h_min: f64,
    pub h_max: f64,
    pub h_constant_sign: bool,
    pub h_constant: bool,
    /// `sup |A − (tr A/n) Id|`.
    pub umbilicity_residual: f64,
    /// `sup (|A|² − nH²)`, nonnegative with equality iff umbilical.
    pub umbilic_gap: f64,
    pub sup_ric_nn: f64,
    pub min_ric_nn: f64,
    pub field_class: String,
    pub w_class: Option<String>,
    pub parallel_case: Verdict,
    pub homothetic_case: Verdict,
}

const PATCH_SCALES: [f64; 3] = [0.5, 0.75, 1.0];

fn shrink(axes: &[Axis], s: f64) -> Vec<Axis> {
    axes.iter()
        .map(|a| {
            if a.periodic {
                *a
            } else {
                let c = 0.5 * (a.lo + a.hi);
                let h = 0.5 * s * a.len();
                Axis::new(c - h, c + h)
            }
        })
        .collect()
}

struct MeshPoint {
    a: f64,
    h: f64,
    umb: f64,
    gap: f64,
    ric: f64,
    x: Vec<f64>,
}

/// Audit on the patch `imm.axes()` with Gauss/trapezoid counts `counts`.
/// `w` is the homothetic companion field of the first theorem, when given.
/// `tol` gates the geometric flags, `quad_tol` the halving check.
pub fn bernstein_audit<M, I, V, W>(
    space: &M,
    imm: &I,
    v: &V,
    w: Option<&W>,
    counts: &[usize],
    tol: f64,
    quad_tol: f64,
) -> Result<BernsteinAudit>
where
    M: ChartedSpace,
    I: Immersion,
    V: VectorField,
    W: VectorField,
{
    let axes = imm.axes();
    let (nodes, _) = tensor_rule(&axes, counts);
    let n = imm.param_dim() as f64;
    let mesh = par::try_map(&nodes, |u| -> Result<MeshPoint> {
        let sh = shape(space, imm, u)?;
        let inv = super::operators::invariants_of(&sh.a, &sh.frame.induced)?;
        let ric = riemann(space, &sh.frame.point)?.ricci();
        let h = inv.mean_curvature();
        Ok(MeshPoint {
            a: inv.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs())),
            h,
            umb: inv.umbilicity_residual(),
            gap: inv.norm_sq() - n * h * h,
            ric: ric.bilinear(&sh.frame.normal, &sh.frame.normal),
            x: sh.frame.point,
        })
    })?;

    let vt_density = |u: &[f64]| -> Result<f64> {
        let f = super::frame::frame_at(space, imm, u)?;
        let t = f.tangent_coords(&v.eval(&f.point))?;
        Ok(frame_norm(&f.induced, &t) * f.induced.det().sqrt())
    };
    let integral_v_tangent = integrate_checked(&axes, counts, quad_tol, vt_density)?;
    let mut patch_integrals = Vec::new();
    for s in PATCH_SCALES {
        patch_integrals.push((s, integrate(&shrink(&axes, s), counts, vt_density)?));
    }
    let vals: Vec<f64> = patch_integrals.iter().map(|p| p.1).collect();
    let (d1, d2) = (vals[1] - vals[0], vals[2] - vals[1]);
    let scale = vals[2].abs().max(1.0);
    let trend = if d1.abs() < tol * scale && d2.abs() < tol * scale {
        "constant"
    } else if d2.abs() < 0.5 * d1.abs() {
        "converging"
    } else {
        "increasing"
    };

    let sup_a = par::sup(mesh.iter().map(|m| m.a));
    let h_min = mesh.iter().map(|m| m.h).fold(f64::INFINITY, f64::min);
    let h_max = mesh.iter().map(|m| m.h).fold(f64::NEG_INFINITY, f64::max);
    let h_constant_sign = h_min >= -tol || h_max <= tol;
    let h_constant = h_max - h_min < tol;
    let umbilicity_residual = par::sup(mesh.iter().map(|m| m.umb));
    let umbilic_gap = par::sup(mesh.iter().map(|m| m.gap));
    let sup_ric_nn = par::sup(mesh.iter().map(|m| m.ric.abs()));
    let min_ric_nn = mesh.iter().map(|m| m.ric).fold(f64::INFINITY, f64::min);

    let pts: Vec<Vec<f64>> = mesh.iter().map(|m| m.x.clone()).collect();
    let vc = certify(space, v, &pts, tol.max(1e-8))?;
    let wc = match w {
        Some(w) => Some(certify(space, w, &pts, tol.max(1e-8))?),
        None => None,
    };

    let integrable = trend != "increasing";
    let ric_ok = min_ric_nn >= -tol;
    let v_parallel = vc.class == crate::fields::FieldClass::Parallel;
    let w_homothetic = wc.as_ref().is_some_and(|c| c.is_nonparallel_homothetic());
    let parallel_case = Verdict::new(
        vec![
            (ric_ok, "Ric(N,N) >= 0 on the patch"),
            (v_parallel, "V parallel"),
            (w_homothetic, "W homothetic and non-parallel"),
            (sup_a.is_finite(), "|A| bounded"),
            (integrable, "|V^T| integrable (patch trend)"),
            (h_constant_sign, "H of constant sign"),
        ],
        sup_a < tol && sup_ric_nn < tol,
    );
    let v_homothetic = vc.sup_grad_psi < tol.max(1e-8) && vc.is_closed_conformal();
    let homothetic_case = Verdict::new(
        vec![
            (ric_ok, "Ric(N,N) >= 0 on the patch"),
            (v_homothetic, "V homothetic"),
            (sup_a.is_finite(), "|A| bounded"),
            (integrable, "|V^T| integrable (patch trend)"),
            (h_constant, "H constant"),
        ],
        umbilicity_residual < tol && sup_ric_nn < tol,
    );

    Ok(BernsteinAudit {
        sup_a,
        integral_v_tangent,
        patch_integrals,
        trend: trend.into(),
        h_min,
        h_max,
        h_constant_sign,
        h_constant,
        umbilicity_residual,
        umbilic_gap,
        sup_ric_nn,
        min_ric_nn,
        field_class: vc.class.label().into(),
        w_class: wc.map(|c| c.class.label().to_string()),
        parallel_case,
        homothetic_case,
    })
}

/// `f_V` on the mesh nodes; used by the audit report and the CLI.
pub fn support_profile<M: ChartedSpace, I: Immersion, V: VectorField>(
    space: &M,
    imm: &I,
    v: &V,
    counts: &[usize],
) -> Result<Vec<f64>> {
    let (nodes, _) = tensor_rule(&imm.axes(), counts);
    par::try_map(&nodes, |u| SupportFn { space, imm, field: v }.try_eval(u.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldModel;
    use crate::hypersurface::immersion::ExprImmersion;
    use crate::models::make_flat;

    #[test]
    fn hyperplane_is_totally_geodesic() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::flat_hyperplane(2, 0.0);
        let v = FieldModel::Constant(vec![0.0, 0.0, 1.0]);
        let a = bernstein_audit(&l, &imm, &v, Some(&FieldModel::Position), &[8, 8], 1e-8, 1e-4).unwrap();
        assert_eq!(a.sup_a, 0.0);
        assert_eq!(a.trend, "constant");
        assert_eq!(a.parallel_case.label, "consistent", "{:?}", a.parallel_case);
    }

    #[test]
    fn hyperboloid_is_umbilical() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::hyperboloid_graph(2, 0.0);
        let a = bernstein_audit(&l, &imm, &FieldModel::Position, None::<&FieldModel>, &[8, 8], 1e-8, 1e-4).unwrap();
        assert!(a.umbilicity_residual < 1e-12 && a.umbilic_gap.abs() < 1e-12);
        assert_eq!(a.homothetic_case.label, "consistent", "{:?}", a.homothetic_case);
        assert_eq!(a.parallel_case.label, "inapplicable");
    }

    #[test]
    fn bumped_graph_is_flagged() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::hyperboloid_graph(2, 0.05);
        let a = bernstein_audit(&l, &imm, &FieldModel::Position, None::<&FieldModel>, &[32, 32], 1e-8, 1e-4).unwrap();
        assert!(a.umbilicity_residual > 1e-3 && !a.h_constant);
        assert!(a.umbilic_gap > 0.0);
        assert_eq!(a.homothetic_case.label, "inapplicable");
    }
}
