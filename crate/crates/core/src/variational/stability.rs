//! Strong r-stability probe for closed hypersurfaces with constant `H_{r+1}`
//! in a space carrying a closed conformal timelike field.

use super::{require_constant_h, second_variation_form};
use crate::conformal::{psi_at, psi_gradient};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{ChartedSpace, VectorField};
use crate::hypersurface::frame::{frame, FrameData};
use crate::hypersurface::immersion::Immersion;
use crate::hypersurface::operators::shape;
use crate::par;
use crate::quadrature::{tensor_rule, Axis};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeOptions {
    pub counts: Vec<usize>,
    pub tol: f64,
    pub quad_tol: f64,
    /// Chart coordinate 0 is the GRW time `t`; enables the GRW-time reading
    /// of the hypothesis and the literal `H_r ≥ max{(sinh t)H_{r+1}, 0}`.
    pub grw_time: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { counts: vec![32, 32], tol: 1e-8, quad_tol: 1e-8, grw_time: false }
    }
}

/// One reading of the hypothesis `H_r/|V| · ∂ψ/∂t ≥ max{H_{r+1}ψ, 0}`.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReading {
    /// `flow` (∂/∂t = V) or `grw_time` (∂/∂t = ∂_t of the chart).
    pub reading: String,
    /// `min (lhs − rhs)` over the mesh.
    pub min_margin: f64,
    /// Fraction of mesh nodes where it holds to `tol`.
    pub fraction: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub r: usize,
    pub n: usize,
    pub cosh_theta_min: f64,
    pub cosh_theta_max: f64,
    pub cosh_theta_at_least_one: bool,
    pub h_r_range: (f64, f64),
    pub h_r1_range: (f64, f64),
    pub h_r1_spread: f64,
    pub hypothesis: Vec<HypothesisReading>,
    /// `min (H_r − max{(sinh t)H_{r+1}, 0})`, GRW charts only.
    pub corollary_margin: Option<f64>,
    pub corollary_holds: Option<bool>,
    /// Fraction of mesh nodes with `|ψ| < tol`.
    pub psi_zero_fraction: f64,
    pub basis: Vec<String>,
    /// `𝒥_r″(0)` for each basis function.
    pub j_second: Vec<f64>,
    pub j_second_max: f64,
    /// `𝒥_r″(0) ≤ tol` on every basis function.
    pub nonpositive_on_basis: bool,
    /// `r-maximal`, `leaf` or `neither`.
    pub classification: String,
}

/// Default test basis: real spherical harmonics of degree ≤ 2 on an `(θ, φ)`
/// sphere chart, tensor products of `{1, cos, sin}` (periodic axes) or
/// `{1, cos πs, cos 2πs}` (other axes) otherwise, truncated to 9.
pub fn default_basis(axes: &[Axis]) -> Result<Vec<Expr>> {
    let sphere2 = axes.len() == 2
        && !axes[0].periodic
        && (axes[0].lo - 0.0).abs() < 1e-12
        && (axes[0].hi - PI).abs() < 1e-12
        && axes[1].periodic;
    let srcs: Vec<String> = if sphere2 {
        [
            "1",
            "cos(u0)",
            "sin(u0)*cos(u1)",
            "sin(u0)*sin(u1)",
            "3*cos(u0)^2 - 1",
            "sin(u0)*cos(u0)*cos(u1)",
            "sin(u0)*cos(u0)*sin(u1)",
            "sin(u0)^2*cos(2*u1)",
            "sin(u0)^2*sin(2*u1)",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    } else {
        let per_axis: Vec<Vec<String>> = axes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if a.periodic {
                    let w = 2.0 * PI / a.len();
                    vec!["1".into(), format!("cos({w:e}*(u{i}-{:e}))", a.lo), format!("sin({w:e}*(u{i}-{:e}))", a.lo)]
                } else {
                    let w = PI / a.len();
                    vec!["1".into(), format!("cos({w:e}*(u{i}-{:e}))", a.lo), format!("cos({:e}*(u{i}-{:e}))", 2.0 * w, a.lo)]
                }
            })
            .collect();
        let mut acc = vec![String::from("1")];
        for modes in &per_axis {
            let mut next = Vec::new();
            for a in &acc {
                for m in modes {
                    next.push(match (a.as_str(), m.as_str()) {
                        ("1", x) | (x, "1") => x.to_string(),
                        (x, y) => format!("{x}*{y}"),
                    });
                }
            }
            acc = next;
        }
        acc.truncate(9);
        acc
    };
    srcs.iter().map(|s| Expr::parse_indexed(s, "u", axes.len())).collect()
}

struct Node {
    cosh_theta: f64,
    h_r: f64,
    h_r1: f64,
    psi: f64,
    /// `V(ψ)/|V|`
    flow_rate: f64,
    /// `∂_t ψ / |V|`
    grw_rate: f64,
    t: f64,
}

/// `(cosh θ, |V|)` with `cosh θ = −⟨V,N⟩/|V|`.
fn hyperbolic_angle(fr: &FrameData, vv: &[f64]) -> Result<(f64, f64)> {
    let q = fr.inner(vv, vv);
    if !(q < 0.0) {
        return Err(Error::NotTimelike(q));
    }
    let len = (-q).sqrt();
    Ok((-fr.inner(vv, &fr.normal) / len, len))
}

/// Hyperbolic angle between `V` and the unit normal at `imm(u)`.
pub fn cosh_theta_at<M: ChartedSpace, I: Immersion, V: VectorField>(space: &M, imm: &I, v: &V, u: &[f64]) -> Result<f64> {
    let fr = frame(space, imm, u)?;
    let vv = v.eval(&fr.point);
    Ok(hyperbolic_angle(&fr, &vv)?.0)
}

pub fn stability_probe<M: ChartedSpace, I: Immersion, V: VectorField>(
    space: &M,
    imm: &I,
    v: &V,
    r: usize,
    basis: &[Expr],
    opts: &ProbeOptions,
) -> Result<StabilityReport> {
    let n = imm.param_dim();
    if r + 1 > n {
        return Err(Error::InvalidArgument(format!("r = {r} requires r ≤ n − 1")));
    }
    let tol = opts.tol;
    let (nodes, _) = tensor_rule(&imm.axes(), &opts.counts);
    let pts = par::try_map(&nodes, |u| -> Result<Node> {
        let sh = shape(space, imm, u)?;
        let fr = &sh.frame;
        let x = &fr.point;
        let vv = v.eval(x);
        let (cosh_theta, len) = hyperbolic_angle(fr, &vv)?;
        let psi = psi_at(space, v, x)?;
        let grad = psi_gradient(space, v, x)?;
        let g = &fr.g;
        let dpsi = g.matvec(&grad);
        let flow = vv.iter().zip(&dpsi).map(|(a, b)| a * b).sum::<f64>();
        let hs = sh.h_r();
        Ok(Node {
            cosh_theta,
            h_r: hs[r],
            h_r1: hs[r + 1],
            psi,
            flow_rate: flow / len,
            grw_rate: dpsi[0] / len,
            t: x[0],
        })
    })?;
    let all_zero = pts.iter().all(|p| p.psi.abs() < tol);
    if all_zero {
        return Err(Error::ConformalFactorVanishes(par::sup(pts.iter().map(|p| p.psi.abs()))));
    }
    let h_r1_spread = require_constant_h(space, imm, r, &opts.counts, 1e-6)?;
    let min_of = |f: &dyn Fn(&Node) -> f64| pts.iter().map(f).fold(f64::INFINITY, f64::min);
    let max_of = |f: &dyn Fn(&Node) -> f64| pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let cosh_theta_min = min_of(&|p| p.cosh_theta);
    let cosh_theta_max = max_of(&|p| p.cosh_theta);

    let reading = |name: &str, rate: &dyn Fn(&Node) -> f64| {
        let margins: Vec<f64> = pts.iter().map(|p| p.h_r * rate(p) - (p.h_r1 * p.psi).max(0.0)).collect();
        let ok = margins.iter().filter(|&&m| m >= -tol).count();
        HypothesisReading {
            reading: name.into(),
            min_margin: margins.iter().cloned().fold(f64::INFINITY, f64::min),
            fraction: ok as f64 / margins.len() as f64,
            holds: ok == margins.len(),
        }
    };
    let mut hypothesis = vec![reading("flow", &|p| p.flow_rate)];
    let (mut corollary_margin, mut corollary_holds) = (None, None);
    if opts.grw_time {
        hypothesis.push(reading("grw_time", &|p| p.grw_rate));
        let m = min_of(&|p| p.h_r - (p.t.sinh() * p.h_r1).max(0.0));
        corollary_margin = Some(m);
        corollary_holds = Some(m >= -tol);
    }
    let psi_zero_fraction = pts.iter().filter(|p| p.psi.abs() < tol).count() as f64 / pts.len() as f64;

    let c = crate::models::certify_constant_curvature(space, 0, 1e-7)?;
    let j_second = basis
        .iter()
        .map(|f| second_variation_form(space, imm, f, r, c, &opts.counts, opts.quad_tol))
        .collect::<Result<Vec<f64>>>()?;
    let j_second_max = j_second.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let sup_h_r1 = par::sup(pts.iter().map(|p| p.h_r1.abs()));
    let classification = if sup_h_r1 < tol {
        "r-maximal"
    } else if cosh_theta_max - 1.0 < tol {
        "leaf"
    } else {
        "neither"
    };
    Ok(StabilityReport {
        r,
        n,
        cosh_theta_min,
        cosh_theta_max,
        cosh_theta_at_least_one: cosh_theta_min >= 1.0 - 1e-10,
        h_r_range: (min_of(&|p| p.h_r), max_of(&|p| p.h_r)),
        h_r1_range: (min_of(&|p| p.h_r1), max_of(&|p| p.h_r1)),
        h_r1_spread,
        hypothesis,
        corollary_margin,
        corollary_holds,
        psi_zero_fraction,
        basis: basis.iter().map(|e| e.source().to_string()).collect(),
        j_second,
        j_second_max,
        nonpositive_on_basis: j_second_max <= tol,
        classification: classification.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldModel;
    use crate::hypersurface::immersion::ExprImmersion;
    use crate::models::builtin_space;

    #[test]
    fn slice_is_a_leaf() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let imm = ExprImmersion::grw_slice(1.0, &ds.as_grw().unwrap().fiber);
        let basis = default_basis(&imm.axes()).unwrap();
        let opts = ProbeOptions { grw_time: true, ..ProbeOptions::default() };
        let rep = stability_probe(&ds, &imm, &v, 1, &basis, &opts).unwrap();
        assert_eq!(rep.classification, "leaf");
        assert!((rep.cosh_theta_min - 1.0).abs() < 1e-12 && (rep.cosh_theta_max - 1.0).abs() < 1e-12);
        assert_eq!(rep.j_second.len(), 9);
    }
}
