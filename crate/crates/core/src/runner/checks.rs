//! Check catalog. Every entry runs exactly one library operation under the
//! same name.

use super::report::Expectation;
use super::scenario::{CheckSpec, Context};
use crate::conformal::{self, psi_at, sample_points};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::FieldModel;
use crate::geometry::{self, Backend, ChartedSpace, VectorField};
use crate::hypersurface::bernstein::bernstein_audit;
use crate::hypersurface::frame::frame_at;
use crate::hypersurface::immersion::{sample_params, ExprImmersion, Immersion};
use crate::hypersurface::newton::{newton_identities_check, CurvatureInvariants};
use crate::hypersurface::operators::{lr_apply, shape_operator_at};
use crate::hypersurface::support::support_identities_check;
use crate::linalg::{self, Mat};
use crate::models::{grw_curvature_residual, slice_data, SpaceModel};
use crate::simons;
use crate::variational::{self, stability, VariationOptions, VariationScenario};
use crate::{config, par};
use rand::Rng;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct CatalogEntry {
    pub name: &'static str,
    /// Library module the operation lives in.
    pub module: &'static str,
    pub description: &'static str,
    pub args: &'static [&'static str],
    /// Default tolerance of the primary residuals.
    pub tol: f64,
    /// Default tolerance of finite-difference oracle gaps.
    pub fd_tol: f64,
}

const VARIATION_ARGS: &[&str] =
    &["base", "speed", "eps", "counts", "quad_tol", "sweep_nodes", "steps", "fd_step", "r", "t", "expected"];

macro_rules! entry {
    ($name:literal, $module:literal, $desc:literal, [$($a:literal),*], $tol:expr, $fd:expr) => {
        CatalogEntry { name: $name, module: $module, description: $desc, args: &[$($a),*], tol: $tol, fd_tol: $fd }
    };
    ($name:literal, $module:literal, $desc:literal, $args:expr, $tol:expr, $fd:expr) => {
        CatalogEntry { name: $name, module: $module, description: $desc, args: $args, tol: $tol, fd_tol: $fd }
    };
}

pub const CATALOG: &[CatalogEntry] = &[
    entry!("metric_at", "geometry", "metric symmetry and declared index on random points", ["samples"], 1e-12, 1e-4),
    entry!("christoffel_at", "geometry", "metric compatibility, torsion, exact vs finite differences", ["samples"], 1e-10, 1e-5),
    entry!("curvature_at", "geometry", "Riemann symmetries and sectional curvature on random planes", ["samples", "expected"], 1e-7, 1e-3),
    entry!("covariant_derivative", "geometry", "exact covariant derivative vs finite differences", ["field", "samples"], 1e-10, 1e-5),
    entry!("divergence_at", "geometry", "divergence vs finite-difference density formula", ["field", "samples"], 1e-10, 1e-5),
    entry!("grw_curvature_residual", "models", "warp ODE residuals for constant curvature c", ["c", "expect"], 1e-10, 1e-4),
    entry!("slice_data", "models", "slice umbilicity factor vs the shape operator", ["t0", "field", "samples"], 1e-8, 1e-4),
    entry!("certify", "conformal", "conformal class and factor of a field", ["field", "samples", "expect_class", "psi", "threshold"], 1e-8, 1e-4),
    entry!("gradient_identities_check", "conformal", "gradients of <V,V> and psi", ["field", "samples"], 1e-8, 1e-4),
    entry!("project_to_leaf", "conformal", "projection onto a leaf and its intrinsic certificate", ["eta", "field", "immersion", "samples", "psi_u", "expect_degenerate"], 1e-7, 1e-4),
    entry!("leaf_umbilicity_check", "conformal", "leaf shape operator against the conformal factor", ["field", "immersion", "samples", "form"], 1e-8, 1e-4),
    entry!("frame_at", "hypersurface", "unit normal normalization, orthogonality, time orientation", ["immersion", "samples"], 1e-10, 1e-4),
    entry!("shape_operator_at", "hypersurface", "shape operator self-adjointness, umbilicity, mean curvatures", ["immersion", "samples", "factor", "h"], 1e-8, 1e-4),
    entry!("newton_identities_check", "hypersurface", "Newton transformation identities on random symmetric matrices", ["dims", "count", "immersion", "samples"], 1e-9, 1e-4),
    entry!("lr_apply", "hypersurface", "L_r in trace and divergence form", ["immersion", "function", "r", "samples"], 1e-6, 1e-4),
    entry!("support_identities_check", "hypersurface", "support-function gradient and Laplacian identities", ["field", "w", "immersion", "samples"], 1e-5, 1e-3),
    entry!("bernstein_audit", "hypersurface", "hypothesis and conclusion audit on a compact patch", ["field", "w", "immersion", "counts", "quad_tol", "expect_parallel_case", "expect_homothetic_case"], 1e-8, 1e-4),
    entry!("flow_conformal_field", "simons", "flow composition and inverse along the field", ["field", "point", "t", "split", "expected"], 1e-9, 1e-4),
    entry!("build_flowed_immersion", "simons", "flowed immersion construction and its admissible half-width", ["field", "base", "eps"], 1e-8, 1e-4),
    entry!("mean_curvature_vector", "simons", "sup of the flowed mean curvature vector on a strip", ["field", "base", "eps", "t_count", "q_count"], 1e-6, 1e-4),
    entry!("decay_law_check", "simons", "exponential decay of the flowed mean curvature", ["field", "base", "eps", "t_count", "q_count"], 1e-5, 1e-4),
    entry!("simons_equivalence_probe", "simons", "base trace, |H|, normal derivative jointly small or large", ["field", "base", "eps", "expect"], 1e-8, 1e-4),
    entry!("first_variation_volume", "variational", "volume rate vs normal flux", VARIATION_ARGS, 1e-6, 1e-4),
    entry!("r_area", "variational", "r-area of a varied slice", VARIATION_ARGS, 1e-6, 1e-4),
    entry!("first_variation_r_area", "variational", "first variation of the r-area, integral and pointwise", VARIATION_ARGS, 1e-4, 1e-4),
    entry!("jacobi_functional", "variational", "Jacobi functional derivative, analytic vs finite differences", VARIATION_ARGS, 1e-4, 1e-4),
    entry!("second_variation", "variational", "second variation, analytic vs finite differences", VARIATION_ARGS, 1e-3, 1e-4),
    entry!("lr_support_identity_check", "variational", "L_r applied to the support function", ["field", "immersion", "r", "samples"], 1e-5, 1e-4),
    entry!("stability_probe", "variational", "strong r-stability probe and classifier", ["field", "immersion", "r", "counts", "basis", "grw_time", "expect_classification", "expected_h_r", "expected_h_r1", "expect_corollary"], 1e-8, 1e-4),
];

/// Argument keys naming a field or an immersion.
const FIELD_KEYS: &[&str] = &["field", "w", "eta"];
const IMMERSION_KEYS: &[&str] = &["immersion", "base"];

pub fn lookup(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownCheck(name.into()))
}

/// Static validation: known check, known argument keys, positive
/// tolerances, resolvable references.
pub fn validate(ctx: &Context, spec: &CheckSpec) -> Result<()> {
    let e = lookup(&spec.check)?;
    for k in spec.args.keys() {
        if !e.args.contains(&k.as_str()) {
            return Err(Error::ConfigParse(format!("check `{}` takes no argument `{k}`", spec.name())));
        }
    }
    for t in [spec.tol, spec.fd_tol].into_iter().flatten() {
        if !(t > 0.0) {
            return Err(Error::ConfigParse(format!("check `{}`: tolerances must be positive", spec.name())));
        }
    }
    for (k, v) in &spec.args {
        let is_field = FIELD_KEYS.contains(&k.as_str());
        let is_imm = IMMERSION_KEYS.contains(&k.as_str());
        if is_field || is_imm {
            let name = v
                .as_str()
                .ok_or_else(|| Error::ConfigParse(format!("check `{}`: `{k}` must be a name", spec.name())))?;
            if is_field {
                ctx.field(name)?;
            } else {
                ctx.immersion(name)?;
            }
        }
    }
    Ok(())
}

pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl Gate {
    pub fn ok(&self) -> bool {
        self.value.is_finite() && self.value <= self.tol
    }
}

#[derive(Default)]
pub struct Outcome {
    pub gates: Vec<Gate>,
    pub expectations: Vec<Expectation>,
    pub detail: Value,
    pub message: Option<String>,
}

struct Run<'a> {
    ctx: &'a Context,
    args: &'a Map<String, Value>,
    name: String,
    tol: f64,
    fd_tol: f64,
    out: Outcome,
}

impl<'a> Run<'a> {
    fn bad(&self, key: &str, what: &str) -> Error {
        Error::ConfigParse(format!("check `{}`: `{key}` {what}", self.name))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.args.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| self.bad(key, "must be a number")),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.args.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().map(|x| x as usize).ok_or_else(|| self.bad(key, "must be a nonnegative integer")),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.args.get(key) {
            None => Ok(None),
            Some(v) => v.as_bool().map(Some).ok_or_else(|| self.bad(key, "must be a boolean")),
        }
    }

    fn opt_str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.args.get(key) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| self.bad(key, "must be a string")),
        }
    }

    fn str(&self, key: &str) -> Result<&'a str> {
        self.opt_str(key)?.ok_or_else(|| self.bad(key, "is required"))
    }

    fn f64s(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.args.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(Some(vec![n.as_f64().unwrap_or(f64::NAN)])),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| self.bad(key, "must hold numbers")))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(self.bad(key, "must be a number or an array of numbers")),
        }
    }

    fn strs(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.args.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_str().map(String::from).ok_or_else(|| self.bad(key, "must hold strings")))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(self.bad(key, "must be an array of strings")),
        }
    }

    fn field(&self, key: &str) -> Result<&'a FieldModel> {
        self.ctx.field(self.str(key)?)
    }

    fn opt_field(&self, key: &str) -> Result<Option<&'a FieldModel>> {
        self.opt_str(key)?.map(|n| self.ctx.field(n)).transpose()
    }

    fn immersion(&self, key: &str) -> Result<&'a ExprImmersion> {
        self.ctx.immersion(self.str(key)?)
    }

    fn samples(&self, default: usize) -> Result<usize> {
        let d = if self.args.contains_key("samples") { default } else { self.ctx.mesh.samples.max(1) };
        let n = self.usize("samples", d)?;
        if n == 0 {
            return Err(self.bad("samples", "must be positive"));
        }
        Ok(n)
    }

    /// Quadrature counts: the argument, else the scenario mesh when its length
    /// matches, else `default` per axis.
    fn counts(&self, axes: usize, default: usize) -> Result<Vec<usize>> {
        let c = match self.args.get("counts") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| self.bad("counts", "must hold integers")))
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(self.bad("counts", "must be an array")),
            None => match &self.ctx.mesh.counts {
                Some(c) if c.len() == axes => c.clone(),
                _ => vec![default; axes],
            },
        };
        if c.len() != axes || c.iter().any(|&k| k < 2) {
            return Err(self.bad("counts", &format!("needs {axes} entries of at least 2")));
        }
        Ok(c)
    }

    fn space(&self) -> &'a SpaceModel {
        &self.ctx.space
    }

    fn seed(&self) -> u64 {
        self.ctx.seed
    }

    fn gate(&mut self, name: &str, value: f64) {
        let tol = self.tol;
        self.gate_at(name, value, tol);
    }

    fn oracle(&mut self, name: &str, value: f64) {
        let tol = self.fd_tol;
        self.gate_at(name, value, tol);
    }

    fn gate_at(&mut self, name: &str, value: f64, tol: f64) {
        self.out.gates.push(Gate { name: name.into(), value, tol });
    }

    fn expect(&mut self, name: &str, expected: impl ToString, actual: impl ToString) {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        let ok = expected == actual;
        self.out.expectations.push(Expectation { name: name.into(), expected, actual, ok });
    }

    fn detail(&mut self, v: impl Serialize) {
        self.out.detail = serde_json::to_value(v).unwrap_or(Value::Null);
    }
}

/// Resolved tolerances for a check.
pub fn tolerances(spec: &CheckSpec, scenario_tol: Option<f64>, scenario_fd: Option<f64>) -> Result<(f64, f64)> {
    let e = lookup(&spec.check)?;
    Ok((spec.tol.or(scenario_tol).unwrap_or(e.tol), spec.fd_tol.or(scenario_fd).unwrap_or(e.fd_tol)))
}

pub fn execute(ctx: &Context, spec: &CheckSpec, tol: f64, fd_tol: f64) -> Result<Outcome> {
    let mut run = Run { ctx, args: &spec.args, name: spec.name().into(), tol, fd_tol, out: Outcome::default() };
    match spec.check.as_str() {
        "metric_at" => metric_check(&mut run)?,
        "christoffel_at" => christoffel_check(&mut run)?,
        "curvature_at" => curvature_check(&mut run)?,
        "covariant_derivative" => covariant_check(&mut run)?,
        "divergence_at" => divergence_check(&mut run)?,
        "grw_curvature_residual" => grw_check(&mut run)?,
        "slice_data" => slice_check(&mut run)?,
        "certify" => certify_check(&mut run)?,
        "gradient_identities_check" => gradient_check(&mut run)?,
        "project_to_leaf" => projection_check(&mut run)?,
        "leaf_umbilicity_check" => leaf_check(&mut run)?,
        "frame_at" => frame_check(&mut run)?,
        "shape_operator_at" => shape_check(&mut run)?,
        "newton_identities_check" => newton_check(&mut run)?,
        "lr_apply" => lr_check(&mut run)?,
        "support_identities_check" => support_check(&mut run)?,
        "bernstein_audit" => bernstein_check(&mut run)?,
        "flow_conformal_field" => flow_check(&mut run)?,
        "build_flowed_immersion" => build_flow_check(&mut run)?,
        "mean_curvature_vector" => mean_curvature_check(&mut run)?,
        "decay_law_check" => decay_check(&mut run)?,
        "simons_equivalence_probe" => probe_check(&mut run)?,
        "first_variation_volume" | "r_area" | "first_variation_r_area" | "jacobi_functional" | "second_variation" => {
            variation_check(&mut run, &spec.check)?
        }
        "lr_support_identity_check" => lr_support_check(&mut run)?,
        "stability_probe" => stability_check(&mut run)?,
        other => return Err(Error::UnknownCheck(other.into())),
    }
    Ok(run.out)
}

fn points(run: &Run, default: usize) -> Result<Vec<Vec<f64>>> {
    let pts = sample_points(run.space(), run.seed(), run.samples(default)?);
    if pts.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    Ok(pts)
}

fn params(run: &Run, imm: &ExprImmersion, default: usize) -> Result<Vec<Vec<f64>>> {
    Ok(sample_params(&imm.axes(), run.seed(), run.samples(default)?))
}

fn metric_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let pts = points(run, 8)?;
    let rows = par::try_map(&pts, |p| -> Result<(f64, f64)> {
        let g = geometry::metric_at(space, p)?;
        let idx = linalg::metric_index(&g, 1e-12)?;
        Ok((linalg::max_abs(&g.sub(&g.transpose())), (idx as f64 - space.index() as f64).abs()))
    })?;
    run.gate("symmetry", par::sup(rows.iter().map(|r| r.0)));
    run.gate("index_mismatch", par::sup(rows.iter().map(|r| r.1)));
    run.detail(serde_json::json!({ "dim": space.dim(), "index": space.index(), "points": pts.len() }));
    Ok(())
}

fn christoffel_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let pts = points(run, 8)?;
    let n = space.dim();
    let rows = par::try_map(&pts, |p| -> Result<(f64, f64, f64)> {
        let (metricity, torsion) = geometry::compatibility_residuals(space, p)?;
        let exact = geometry::christoffel_at(space, p, Backend::default())?;
        let fd = geometry::christoffel_at(space, p, Backend::FiniteDifference { step: 1e-4 })?;
        let mut gap = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gap = gap.max((exact.get(k, i, j) - fd.get(k, i, j)).abs());
                }
            }
        }
        Ok((metricity, torsion, gap))
    })?;
    run.gate("metricity", par::sup(rows.iter().map(|r| r.0)));
    run.gate("torsion", par::sup(rows.iter().map(|r| r.1)));
    run.oracle("fd_gap", par::sup(rows.iter().map(|r| r.2)));
    Ok(())
}

fn curvature_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let pts = points(run, 100)?;
    let expected = run.opt_f64("expected")?;
    let mut rng = config::rng(run.seed() ^ 0x5eed);
    let planes: Vec<Vec<Vec<f64>>> = pts.iter().map(|_| config::sample_vectors(&mut rng, space.dim(), 2)).collect();
    let idx: Vec<usize> = (0..pts.len()).collect();
    let rows = par::try_map(&idx, |&i| -> Result<(f64, f64, f64)> {
        let c = geometry::curvature_at(space, &pts[i], Backend::default())?;
        let k = c.sectional(&planes[i][0], &planes[i][1], 1e-10)?;
        let sym = geometry::symmetry_residual(&c.riemann, &c.metric).max();
        let fd = geometry::curvature_at(space, &pts[i], Backend::FiniteDifference { step: 1e-3 })?;
        let mut gap = 0.0_f64;
        for (a, b) in c.riemann.data.iter().zip(&fd.riemann.data) {
            gap = gap.max((a - b).abs());
        }
        Ok((k, sym, gap))
    })?;
    let ks: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let min = ks.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    run.gate("symmetries", par::sup(rows.iter().map(|r| r.1)));
    match expected {
        Some(c) => run.gate("sectional", par::sup(ks.iter().map(|k| (k - c).abs()))),
        None => {}
    }
    run.oracle("fd_gap", par::sup(rows.iter().map(|r| r.2)));
    run.detail(serde_json::json!({ "samples": ks.len(), "sectional_min": min, "sectional_max": max }));
    Ok(())
}

fn directions(run: &Run, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = config::rng(run.seed() ^ 0xd1);
    (0..count).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn covariant_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let v = run.field("field")?;
    let pts = points(run, 8)?;
    let dirs = directions(run, pts.len(), space.dim());
    let idx: Vec<usize> = (0..pts.len()).collect();
    let gaps = par::try_map(&idx, |&i| -> Result<f64> {
        let a = geometry::covariant_derivative(space, v, &pts[i], &dirs[i])?;
        let b = geometry::covariant_derivative_fd(space, v, &pts[i], &dirs[i], 1e-5)?;
        Ok(linalg::norm2(&linalg::vsub(&a, &b)))
    })?;
    run.oracle("fd_gap", par::sup(gaps));
    Ok(())
}

fn divergence_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let v = run.field("field")?;
    let pts = points(run, 8)?;
    let n = space.dim();
    let h = 1e-5;
    let rows = par::try_map(&pts, |p| -> Result<(f64, f64)> {
        let div = geometry::divergence_at(space, v, p)?;
        let density = |q: &[f64], k: usize| space.metric(q).det().abs().sqrt() * v.eval(q)[k];
        let mut fd = 0.0;
        for k in 0..n {
            let mut a = p.clone();
            let mut b = p.clone();
            a[k] += h;
            b[k] -= h;
            fd += (density(&a, k) - density(&b, k)) / (2.0 * h);
        }
        fd /= space.metric(p).det().abs().sqrt();
        Ok((div, (div - fd).abs()))
    })?;
    run.oracle("fd_gap", par::sup(rows.iter().map(|r| r.1)));
    run.detail(serde_json::json!({ "divergence": rows.iter().map(|r| r.0).collect::<Vec<_>>() }));
    Ok(())
}

fn grw_check(run: &mut Run) -> Result<()> {
    let m = run.space().as_grw().ok_or_else(|| run.bad("ambient", "must be a GRW space"))?;
    let c = run.f64("c", m.fiber.curvature().unwrap_or(0.0))?;
    let (r1, r2) = grw_curvature_residual(m, c)?;
    let constant = r1 <= run.tol && r2 <= run.tol;
    match run.opt_str("expect")? {
        Some("nonconstant") => run.expect("constant_curvature", false, constant),
        Some("constant") | None => {
            run.gate("res1", r1);
            run.gate("res2", r2);
        }
        Some(other) => return Err(run.bad("expect", &format!("must be constant or nonconstant, got {other}"))),
    }
    run.detail(serde_json::json!({ "c": c, "res1": r1, "res2": r2 }));
    Ok(())
}

fn slice_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let m = space.as_grw().ok_or_else(|| run.bad("ambient", "must be a GRW space"))?;
    let t0s = run.f64s("t0")?.ok_or_else(|| run.bad("t0", "is required"))?;
    let canonical;
    let v = match run.opt_field("field")? {
        Some(f) => f,
        None => {
            canonical = FieldModel::canonical(space)?;
            &canonical
        }
    };
    let (mut umb, mut vgap, mut psigap) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut rows = Vec::new();
    for &t0 in &t0s {
        let d = slice_data(m, t0)?;
        let imm = ExprImmersion::grw_slice(t0, &m.fiber);
        for u in params(run, &imm, 4)? {
            let inv = shape_operator_at(space, &imm, &u)?;
            let x = imm.map(&u)?;
            umb = umb.max(linalg::max_abs(&inv.a.sub(&Mat::identity(inv.n).scale(d.umbilicity_factor))));
            vgap = vgap.max(linalg::norm2(&linalg::vsub(&v.eval(&x), &d.v_at_slice)));
            psigap = psigap.max((psi_at(space, v, &x)? - d.psi_at_slice).abs());
        }
        rows.push(serde_json::json!({ "t0": t0, "umbilicity_factor": d.umbilicity_factor, "psi": d.psi_at_slice }));
    }
    run.gate("umbilicity", umb);
    run.gate("field_at_slice", vgap);
    run.gate("psi_at_slice", psigap);
    run.detail(rows);
    Ok(())
}

fn certify_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let v = run.field("field")?;
    let pts = points(run, 16)?;
    let threshold = run.f64("threshold", 1e-8)?;
    let cert = conformal::certify(space, v, &pts, threshold)?;
    if let Some(src) = run.opt_str("psi")? {
        let e = Expr::parse_indexed(src, "x", space.dim())?;
        let gap = par::sup(pts.iter().zip(&cert.psi_hat).map(|(p, &h)| (h - e.eval(p)).abs()));
        run.gate("psi", gap);
    }
    if let Some(c) = run.opt_str("expect_class")? {
        run.expect("class", c, cert.class.label());
    }
    run.detail(&cert);
    Ok(())
}

fn gradient_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let pts = points(run, 8)?;
    let r = conformal::gradient_identities_check(run.space(), v, &pts, 1e-7)?;
    run.gate("res_a", r.res_a);
    run.gate("res_b", r.res_b);
    run.detail(r);
    Ok(())
}

fn projection_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let eta = run.field("eta")?;
    let v = run.field("field")?;
    let imm = run.immersion("immersion")?;
    let us = params(run, imm, 4)?;
    let psi_u = run.opt_str("psi_u")?.map(|s| Expr::parse_indexed(s, "x", space.dim())).transpose()?;
    let rows = par::try_map(&us, |u| conformal::project_to_leaf(space, eta, v, imm, u))?;
    run.gate("intrinsic", par::sup(rows.iter().map(|r| r.intrinsic_residual)));
    run.gate("tangency", par::sup(rows.iter().map(|r| r.tangency)));
    if let Some(e) = psi_u {
        let mut gap = 0.0_f64;
        for (u, r) in us.iter().zip(&rows) {
            gap = gap.max((r.psi_u - e.eval(&imm.map(u)?)).abs());
        }
        run.gate("psi_u", gap);
    }
    if let Some(d) = run.bool("expect_degenerate")? {
        run.expect("degenerate", d, rows.iter().all(|r| r.degenerate));
    }
    run.detail(rows);
    Ok(())
}

fn leaf_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let imm = run.immersion("immersion")?;
    let us = params(run, imm, 6)?;
    let r = conformal::leaf_umbilicity_check(run.space(), v, imm, &us, 1e-8)?;
    match run.opt_str("form")?.unwrap_or("normalized") {
        "normalized" => run.gate("normalized", r.normalized),
        "literal" => run.gate("literal", r.literal),
        other => return Err(run.bad("form", &format!("must be normalized or literal, got {other}"))),
    }
    run.gate("orthogonality", r.orthogonality);
    run.detail(r);
    Ok(())
}

fn frame_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let imm = run.immersion("immersion")?;
    let us = params(run, imm, 8)?;
    let rows = par::try_map(&us, |u| -> Result<(f64, f64, bool)> {
        let f = frame_at(space, imm, u)?;
        let norm = (f.inner(&f.normal, &f.normal) + 1.0).abs();
        let orth = (0..imm.param_dim()).map(|i| f.inner(&f.normal, &f.jac.column(i)).abs()).fold(0.0, f64::max);
        let future = f.inner(&f.normal, &space.future_anchor(&f.point)) < 0.0;
        Ok((norm, orth, future))
    })?;
    run.gate("normalization", par::sup(rows.iter().map(|r| r.0)));
    run.gate("orthogonality", par::sup(rows.iter().map(|r| r.1)));
    run.expect("future_pointing", true, rows.iter().all(|r| r.2));
    Ok(())
}

fn shape_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let imm = run.immersion("immersion")?;
    let us = params(run, imm, 8)?;
    let invs = par::try_map(&us, |u| shape_operator_at(space, imm, u))?;
    run.gate("self_adjoint", par::sup(invs.iter().map(|i| i.self_adjoint_residual)));
    if let Some(l) = run.opt_f64("factor")? {
        run.gate(
            "umbilicity",
            par::sup(invs.iter().map(|i| linalg::max_abs(&i.a.sub(&Mat::identity(i.n).scale(l))))),
        );
    }
    if let Some(h) = run.f64s("h")? {
        let gap = par::sup(invs.iter().flat_map(|i| h.iter().enumerate().map(move |(k, &want)| (i.h[k + 1] - want).abs())));
        run.gate("mean_curvatures", gap);
    }
    run.detail(invs.first());
    Ok(())
}

fn newton_check(run: &mut Run) -> Result<()> {
    let mut invs: Vec<CurvatureInvariants> = Vec::new();
    if run.args.contains_key("immersion") {
        let imm = run.immersion("immersion")?;
        let space = run.space();
        let us = params(run, imm, 8)?;
        invs = par::try_map(&us, |u| shape_operator_at(space, imm, u))?;
    } else {
        let dims: Vec<usize> = match run.f64s("dims")? {
            Some(d) => d.iter().map(|&x| x as usize).collect(),
            None => vec![2, 3],
        };
        let count = run.usize("count", 1000)?;
        let mut rng = config::rng(run.seed() ^ 0x4e77);
        for k in 0..count {
            let n = dims[k % dims.len()];
            let b = Mat::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            invs.push(CurvatureInvariants::from_symmetric(linalg::symmetrize(&b), 0.0));
        }
    }
    if invs.is_empty() {
        return Err(Error::SampleSetEmpty);
    }
    let reps = par::map(&invs, newton_identities_check);
    let worst = |f: &dyn Fn(&crate::hypersurface::newton::NewtonReport) -> f64| par::sup(reps.iter().map(f));
    run.gate("char_poly_vs_sigma", worst(&|r| r.char_poly_vs_sigma));
    run.gate("p_n_zero", worst(&|r| r.p_n_zero));
    run.gate("trace_i", worst(&|r| r.trace_i));
    run.gate("trace_ii", worst(&|r| r.trace_ii));
    run.gate("trace_iii", worst(&|r| r.trace_iii));
    run.gate("eigen", worst(&|r| r.eigen));
    run.expect("b_r_integer_consistent", true, reps.iter().all(|r| r.b_r_integer_consistent));
    run.detail(serde_json::json!({ "matrices": invs.len() }));
    Ok(())
}

fn lr_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let imm = run.immersion("immersion")?;
    let f = Expr::parse_indexed(run.opt_str("function")?.unwrap_or("u0"), "u", imm.param_dim())?;
    let r = run.usize("r", 0)?;
    let us = params(run, imm, 4)?;
    let vals = par::try_map(&us, |u| lr_apply(space, imm, &f, r, u))?;
    run.gate("trace_vs_divergence", par::sup(vals.iter().map(|v| (v.trace_form - v.divergence_form).abs())));
    run.detail(vals);
    Ok(())
}

fn support_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let w = run.opt_field("w")?;
    let imm = run.immersion("immersion")?;
    let us = params(run, imm, 6)?;
    let tol = run.tol;
    let r = support_identities_check(run.space(), imm, v, w, &us, tol)?;
    run.gate("grad_f_v", r.grad_f_v);
    run.gate("laplacian_f_v", r.laplacian_f_v);
    run.gate("grad_g", r.grad_g);
    run.gate("laplacian_g", r.laplacian_g);
    run.gate("div_v_tangent", r.div_v_tangent);
    run.gate("tangent_norm_split", r.tangent_norm_split);
    run.oracle("fd_gap", r.fd_gap);
    run.detail(r);
    Ok(())
}

fn bernstein_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let w = run.opt_field("w")?;
    let imm = run.immersion("immersion")?;
    let counts = run.counts(imm.param_dim(), 8)?;
    let quad_tol = run.f64("quad_tol", 1e-4)?;
    let a = bernstein_audit(run.space(), imm, v, w, &counts, run.tol, quad_tol)?;
    if let Some(l) = run.opt_str("expect_parallel_case")? {
        run.expect("parallel_case", l, &a.parallel_case.label);
    }
    if let Some(l) = run.opt_str("expect_homothetic_case")? {
        run.expect("homothetic_case", l, &a.homothetic_case.label);
    }
    run.detail(a);
    Ok(())
}

fn flow_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let v = run.field("field")?;
    let p = run.f64s("point")?.ok_or_else(|| run.bad("point", "is required"))?;
    let t = run.opt_f64("t")?.ok_or_else(|| run.bad("t", "is required"))?;
    let s = run.f64("split", 0.5)? * t;
    let end = simons::flow_conformal_field(space, v, &p, t)?;
    let mid = simons::flow_conformal_field(space, v, &p, s)?;
    let composed = simons::flow_conformal_field(space, v, &mid, t - s)?;
    let back = simons::flow_conformal_field(space, v, &end, -t)?;
    run.gate("composition", linalg::norm2(&linalg::vsub(&end, &composed)));
    run.gate("inverse", linalg::norm2(&linalg::vsub(&back, &p)));
    if let Some(want) = run.f64s("expected")? {
        run.gate("expected", linalg::norm2(&linalg::vsub(&end, &want)));
    }
    run.detail(serde_json::json!({ "point": p, "t": t, "end": end }));
    Ok(())
}

fn build_flow_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let base = run.immersion("base")?;
    let eps = run.f64("eps", 0.5)?;
    let f = simons::build_flowed_immersion(run.space(), v, base, eps, run.seed())?;
    run.detail(serde_json::json!({ "eps": f.eps, "eps_requested": f.eps_requested }));
    Ok(())
}

fn strip(run: &Run, eps: f64, base: &ExprImmersion) -> Result<Vec<Vec<f64>>> {
    let t_count = run.usize("t_count", 5)?;
    let q_count = run.usize("q_count", 3)?;
    Ok(simons::strip_samples(eps, &base.axes(), t_count, q_count, run.seed()))
}

fn mean_curvature_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let base = run.immersion("base")?;
    let f = simons::build_flowed_immersion(run.space(), v, base, run.f64("eps", 0.5)?, run.seed())?;
    let us = strip(run, f.eps, base)?;
    let rows = par::try_map(&us, |u| simons::mean_curvature_vector(&f, u))?;
    let g = |r: &simons::MeanCurvatureSample| linalg::frame_norm(&run.space().metric(&r.point), &r.h_bar);
    run.gate("sup_h_bar", par::sup(rows.iter().map(g)));
    run.gate("tangency", par::sup(rows.iter().map(|r| r.tangency)));
    run.detail(serde_json::json!({ "eps": f.eps, "t_range": [-0.8 * f.eps, 0.8 * f.eps], "samples": rows.len() }));
    Ok(())
}

fn decay_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let base = run.immersion("base")?;
    let f = simons::build_flowed_immersion(run.space(), v, base, run.f64("eps", 0.5)?, run.seed())?;
    let us = strip(run, f.eps, base)?;
    let r = simons::decay_law_check(&f, &us, run.seed())?;
    run.gate("residual", r.residual);
    run.gate("trace_identity", r.trace_identity);
    run.detail(r);
    Ok(())
}

fn probe_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let base = run.immersion("base")?;
    let r = simons::simons_equivalence_probe(run.space(), v, base, run.f64("eps", 0.5)?, run.seed())?;
    run.expect("equivalent", true, r.equivalent);
    if let Some(e) = run.opt_str("expect")? {
        let regime = if r.all_small {
            "small"
        } else if r.all_large {
            "large"
        } else {
            "mixed"
        };
        run.expect("regime", e, regime);
    }
    run.detail(r);
    Ok(())
}

fn variation_check(run: &mut Run, op: &str) -> Result<()> {
    let space = run.space();
    let base = run.immersion("base")?;
    let n = base.param_dim();
    let speed = Expr::parse_indexed(run.opt_str("speed")?.unwrap_or("1"), "u", n)?;
    let d = VariationOptions::default();
    let opts = VariationOptions {
        eps: run.f64("eps", d.eps)?,
        counts: run.counts(n, 16)?,
        sweep_nodes: run.usize("sweep_nodes", d.sweep_nodes)?,
        steps: run.usize("steps", d.steps)?,
        quad_tol: run.f64("quad_tol", d.quad_tol)?,
        fd_step: run.f64("fd_step", d.fd_step)?,
        seed: run.seed(),
    };
    let scn = VariationScenario::new(space, base, &speed, opts)?;
    let r = run.usize("r", 0)?;
    let expected = run.opt_f64("expected")?;
    match op {
        "first_variation_volume" => {
            let rep = variational::first_variation_volume(&scn, run.tol)?;
            run.gate("residual", rep.residual);
            run.detail(rep);
        }
        "r_area" => {
            let t = run.f64("t", 0.0)?;
            let a = variational::r_area(&scn, r, t)?;
            if let Some(e) = expected {
                run.gate("expected", (a - e).abs());
            }
            run.detail(serde_json::json!({ "r": r, "t": t, "value": a }));
        }
        "first_variation_r_area" => {
            let rep = variational::first_variation_r_area(&scn, r)?;
            run.gate("residual_integral", rep.residual_integral);
            run.gate("residual_pointwise", rep.residual_pointwise);
            run.detail(rep);
        }
        "jacobi_functional" => {
            let rep = variational::jacobi_functional(&scn, r)?;
            run.gate("residual", rep.residual);
            if let Some(e) = expected {
                run.gate("derivative_at_zero", (rep.derivative_at_zero - e).abs());
            }
            run.detail(rep);
        }
        "second_variation" => {
            let rep = variational::second_variation(&scn, r)?;
            run.gate("relative_error", rep.relative_error);
            if let Some(e) = expected {
                run.gate("analytic_vs_expected", (rep.analytic - e).abs() / e.abs().max(1.0));
            }
            run.detail(rep);
        }
        _ => unreachable!("dispatched by execute"),
    }
    Ok(())
}

fn lr_support_check(run: &mut Run) -> Result<()> {
    let v = run.field("field")?;
    let imm = run.immersion("immersion")?;
    let r = run.usize("r", 0)?;
    let us = params(run, imm, 6)?;
    let rep = variational::lr_support_identity_check(run.space(), imm, v, r, &us, run.seed(), 1e-7)?;
    run.gate("residual", rep.residual);
    run.detail(rep);
    Ok(())
}

fn stability_check(run: &mut Run) -> Result<()> {
    let space = run.space();
    let v = run.field("field")?;
    let imm = run.immersion("immersion")?;
    let r = run.usize("r", 1)?;
    let basis = match run.strs("basis")? {
        Some(b) => b.iter().map(|s| Expr::parse_indexed(s, "u", imm.param_dim())).collect::<Result<Vec<_>>>()?,
        None => stability::default_basis(&imm.axes())?,
    };
    let opts = stability::ProbeOptions {
        counts: run.counts(imm.param_dim(), 32)?,
        grw_time: run.bool("grw_time")?.unwrap_or(space.as_grw().is_some()),
        ..stability::ProbeOptions::default()
    };
    let rep = stability::stability_probe(space, imm, v, r, &basis, &opts)?;
    if let Some(c) = run.opt_str("expect_classification")? {
        run.expect("classification", c, &rep.classification);
        if c == "leaf" {
            run.gate("cosh_theta_minus_one", (rep.cosh_theta_min - 1.0).abs().max((rep.cosh_theta_max - 1.0).abs()));
        }
    }
    run.expect("cosh_theta_at_least_one", true, rep.cosh_theta_at_least_one);
    if let Some(h) = run.opt_f64("expected_h_r")? {
        run.gate("h_r", (rep.h_r_range.0 - h).abs().max((rep.h_r_range.1 - h).abs()));
    }
    if let Some(h) = run.opt_f64("expected_h_r1")? {
        run.gate("h_r1", (rep.h_r1_range.0 - h).abs().max((rep.h_r1_range.1 - h).abs()));
    }
    if let Some(b) = run.bool("expect_corollary")? {
        let got = rep.corollary_holds.map(|x| x.to_string()).unwrap_or_else(|| "not evaluated".into());
        run.expect("corollary_holds", b, got);
    }
    run.detail(rep);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_are_unique() {
        let mut names: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CATALOG.len());
        assert!(matches!(lookup("nonesuch"), Err(Error::UnknownCheck(_))));
        for e in CATALOG {
            assert!(e.tol > 0.0 && e.fd_tol > 0.0);
        }
    }
}
