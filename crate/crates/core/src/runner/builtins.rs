//! Built-in scenario suites and the catalog listing.

use super::checks::CATALOG;
use super::scenario::{AmbientSpec, CheckSpec, FieldSpec, ImmersionSpec, MeshSpec, Scenario, FIXTURES, SCHEMA_VERSION};
use crate::fields::BUILTIN_FIELDS;
use crate::models::BUILTIN_SPACES;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogItem {
    /// `model`, `field`, `immersion`, `suite` or `check`.
    pub kind: String,
    pub name: String,
    pub description: String,
}

pub const SUITES: &[(&str, &str)] = &[
    ("anti-de-sitter-slice-suite", "curvature -1, cos t factor, slice umbilicity on -(0,pi) x_sin H^2"),
    ("ads-flow-suite", "flow of a fiber geodesic in anti-de Sitter; psi = 0 slice rejected"),
    ("de-sitter-hyperbolic-suite", "(sinh t) d/dt with factor cosh t on -(0,inf) x_sinh H^2"),
    ("desitter-slice-suite", "full pipeline on {1} x S^2 in -R x_cosh S^2"),
    ("equator-rejections", "psi = 0 on {0} x S^2: flow and stability probe refuse it"),
    ("linear-warp-suite", "non-constant curvature -(0,inf) x_t R^2 with Ric(V) = 0"),
    ("minkowski-suite", "position and parallel fields, hyperboloid and hyperplane in L^3"),
    ("newton-suite", "Newton transformation identities on 1000 random symmetric matrices"),
    ("simons-great-circle", "great circle in {1} x S^2 flowed along cosh t d/dt stays maximal"),
    ("simons-small-circle", "small circle in {1} x S^2: decay law and equivalence probe"),
];

/// Every built-in model, field, immersion fixture, suite and check, sorted
/// by kind then name.
pub fn list_builtins() -> Vec<CatalogItem> {
    let item = |kind: &str, name: &str, d: &str| CatalogItem { kind: kind.into(), name: name.into(), description: d.into() };
    let mut out = Vec::new();
    out.extend(CATALOG.iter().map(|e| item("check", e.name, &format!("[{}] {}", e.module, e.description))));
    out.extend(BUILTIN_FIELDS.iter().map(|(n, d)| item("field", n, d)));
    out.extend(FIXTURES.iter().map(|(n, d)| item("immersion", n, d)));
    out.extend(BUILTIN_SPACES.iter().map(|(n, d)| item("model", n, d)));
    out.extend(SUITES.iter().map(|(n, d)| item("suite", n, d)));
    out.sort_by(|a, b| (&a.kind, &a.name).cmp(&(&b.kind, &b.name)));
    out
}

fn scenario(id: &str, ambient: &str, n: usize) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        id: id.into(),
        seed: 0,
        ambient: AmbientSpec::Builtin { name: ambient.into(), n },
        fields: Vec::new(),
        immersions: Vec::new(),
        mesh: MeshSpec::default(),
        tol: None,
        fd_tol: None,
        checks: Vec::new(),
    }
}

fn builtin_field(name: &str, builtin: &str) -> FieldSpec {
    FieldSpec { name: name.into(), builtin: Some(builtin.into()), components: None, constant: None, scale: None }
}

fn constant_field(name: &str, c: &[f64]) -> FieldSpec {
    FieldSpec { name: name.into(), builtin: None, components: None, constant: Some(c.to_vec()), scale: None }
}

fn fixture(name: &str, fixture: &str) -> ImmersionSpec {
    ImmersionSpec { name: name.into(), fixture: Some(fixture.into()), ..ImmersionSpec::default() }
}

fn slice(name: &str, t0: f64) -> ImmersionSpec {
    ImmersionSpec { t0: Some(t0), ..fixture(name, "grw-slice") }
}

fn circle(name: &str, t0: f64, theta0: f64) -> ImmersionSpec {
    ImmersionSpec { t0: Some(t0), theta0: Some(theta0), ..fixture(name, "fiber-circle") }
}

fn check(c: &str) -> CheckSpec {
    CheckSpec::new(c)
}

fn desitter_slice_suite() -> Scenario {
    let mut s = scenario("desitter-slice-suite", "de-sitter-grw", 2);
    let th = 1.0_f64.tanh();
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![slice("S", 1.0)];
    s.checks = vec![
        check("metric_at"),
        check("christoffel_at"),
        check("curvature_at").arg("expected", 1.0).arg("samples", 100),
        check("grw_curvature_residual").arg("c", 1.0),
        check("slice_data").arg("t0", json!([-1.0, 0.5, 1.0])),
        check("certify").arg("field", "V").arg("expect_class", "closed_conformal").arg("psi", "sinh(x0)"),
        check("gradient_identities_check").arg("field", "V"),
        check("leaf_umbilicity_check").arg("field", "V").arg("immersion", "S"),
        check("frame_at").arg("immersion", "S"),
        check("shape_operator_at").arg("immersion", "S").arg("factor", -th).arg("h", json!([th, th * th])),
        check("lr_apply").arg("immersion", "S").arg("function", "cos(u0) + sin(u0)*sin(u1)").arg("r", 1),
        check("support_identities_check").arg("field", "V").arg("immersion", "S"),
        check("lr_support_identity_check").arg("field", "V").arg("immersion", "S").arg("r", 0).label("lr_support_identity_check r=0"),
        check("lr_support_identity_check").arg("field", "V").arg("immersion", "S").arg("r", 1).label("lr_support_identity_check r=1"),
        check("first_variation_volume").arg("base", "S").arg("speed", "1 + 0.3*cos(u0)"),
        check("first_variation_r_area").arg("base", "S").arg("speed", "1 + 0.3*cos(u0)").arg("r", 0).label("first_variation_r_area r=0"),
        check("first_variation_r_area").arg("base", "S").arg("speed", "sin(u0)*cos(u1)").arg("r", 1).label("first_variation_r_area r=1"),
        check("second_variation").arg("base", "S").arg("speed", "1").arg("r", 0).arg("expected", 8.0 * PI),
        check("stability_probe")
            .arg("field", "V")
            .arg("immersion", "S")
            .arg("r", 1)
            .arg("expect_classification", "leaf")
            .arg("expected_h_r", th)
            .arg("expected_h_r1", th * th),
    ];
    s
}

fn anti_de_sitter_slice_suite() -> Scenario {
    let mut s = scenario("anti-de-sitter-slice-suite", "anti-de-sitter-grw", 2);
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![slice("S", PI / 3.0)];
    let f = -1.0 / (PI / 3.0).tan();
    s.checks = vec![
        check("christoffel_at"),
        check("curvature_at").arg("expected", -1.0).arg("samples", 100),
        check("grw_curvature_residual").arg("c", -1.0),
        check("slice_data").arg("t0", json!([0.5, PI / 3.0, 2.0])),
        check("certify").arg("field", "V").arg("expect_class", "closed_conformal").arg("psi", "cos(x0)"),
        check("gradient_identities_check").arg("field", "V"),
        check("leaf_umbilicity_check").arg("field", "V").arg("immersion", "S"),
        check("shape_operator_at").arg("immersion", "S").arg("factor", f),
        check("support_identities_check").arg("field", "V").arg("immersion", "S"),
    ];
    s
}

fn de_sitter_hyperbolic_suite() -> Scenario {
    let mut s = scenario("de-sitter-hyperbolic-suite", "de-sitter-hyperbolic-grw", 2);
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![slice("S", 1.0)];
    s.checks = vec![
        check("curvature_at").arg("expected", 1.0).arg("samples", 100),
        check("grw_curvature_residual").arg("c", 1.0),
        check("slice_data").arg("t0", json!([0.5, 1.0, 1.5])),
        check("certify").arg("field", "V").arg("expect_class", "closed_conformal").arg("psi", "cosh(x0)"),
        check("gradient_identities_check").arg("field", "V"),
        check("leaf_umbilicity_check").arg("field", "V").arg("immersion", "S"),
    ];
    s
}

fn minkowski_suite() -> Scenario {
    let mut s = scenario("minkowski-suite", "minkowski", 2);
    s.fields = vec![
        builtin_field("nu", "position"),
        constant_field("E", &[0.0, 0.0, 1.0]),
        constant_field("eta", &[0.3, -0.2, 0.5]),
        constant_field("W", &[0.2, 0.0, 1.0]),
    ];
    s.immersions = vec![fixture("H", "hyperboloid-graph"), ImmersionSpec { height: Some(0.5), ..fixture("P", "flat-hyperplane") }];
    s.checks = vec![
        check("metric_at"),
        check("curvature_at").arg("expected", 0.0),
        check("certify").arg("field", "nu").arg("expect_class", "homothetic").arg("psi", "1").tol(1e-10).label("certify position"),
        check("certify").arg("field", "eta").arg("expect_class", "parallel").arg("psi", "0").label("certify parallel"),
        check("covariant_derivative").arg("field", "nu"),
        check("divergence_at").arg("field", "nu"),
        check("project_to_leaf").arg("eta", "eta").arg("field", "nu").arg("immersion", "H"),
        check("leaf_umbilicity_check").arg("field", "nu").arg("immersion", "H"),
        check("frame_at").arg("immersion", "H"),
        check("shape_operator_at").arg("immersion", "H").arg("factor", -1.0),
        check("shape_operator_at").arg("immersion", "P").arg("factor", 0.0).label("shape_operator_at hyperplane"),
        check("support_identities_check").arg("field", "nu").arg("w", "W").arg("immersion", "H"),
        check("support_identities_check").arg("field", "E").arg("immersion", "P").label("support_identities_check hyperplane"),
        check("bernstein_audit").arg("field", "nu").arg("immersion", "H").arg("expect_homothetic_case", "consistent"),
        check("flow_conformal_field")
            .arg("field", "nu")
            .arg("point", json!([0.1, 0.2, 1.5]))
            .arg("t", 0.7)
            .arg("expected", json!([0.1 * 0.7_f64.exp(), 0.2 * 0.7_f64.exp(), 1.5 * 0.7_f64.exp()])),
    ];
    s
}

fn newton_suite() -> Scenario {
    let mut s = scenario("newton-suite", "minkowski", 2);
    s.checks = vec![check("newton_identities_check").arg("dims", json!([2, 3])).arg("count", 1000)];
    s
}

fn simons_suite(id: &str, theta0: f64, regime: &str) -> Scenario {
    let mut s = scenario(id, "de-sitter-grw", 2);
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![circle("C", 1.0, theta0)];
    s.checks = vec![
        check("flow_conformal_field").arg("field", "V").arg("point", json!([1.0, theta0, 0.3])).arg("t", 0.4),
        check("build_flowed_immersion").arg("field", "V").arg("base", "C").arg("eps", 0.5),
    ];
    if regime == "small" {
        s.checks.push(check("mean_curvature_vector").arg("field", "V").arg("base", "C").arg("eps", 0.5));
    }
    s.checks.push(check("decay_law_check").arg("field", "V").arg("base", "C").arg("eps", 0.5));
    s.checks.push(check("simons_equivalence_probe").arg("field", "V").arg("base", "C").arg("eps", 0.5).arg("expect", regime));
    s
}

fn ads_flow_suite() -> Scenario {
    let mut s = scenario("ads-flow-suite", "anti-de-sitter-grw", 2);
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![
        ImmersionSpec { t0: Some(PI / 3.0), ..fixture("L", "fiber-line") },
        ImmersionSpec { t0: Some(PI / 2.0), ..fixture("L0", "fiber-line") },
    ];
    s.checks = vec![
        check("simons_equivalence_probe").arg("field", "V").arg("base", "L").arg("eps", 0.3).arg("expect", "small"),
        check("build_flowed_immersion")
            .arg("field", "V")
            .arg("base", "L0")
            .arg("eps", 0.3)
            .expect_error("ConformalFactorVanishes")
            .label("build_flowed_immersion psi=0"),
    ];
    s
}

fn linear_warp_suite() -> Scenario {
    let mut s = scenario("linear-warp-suite", "linear-warp-grw", 2);
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![ImmersionSpec { t0: Some(2.0), ..fixture("L", "fiber-line") }];
    s.checks = vec![
        check("grw_curvature_residual").arg("c", 0.0).arg("expect", "nonconstant"),
        check("certify").arg("field", "V").arg("expect_class", "homothetic").arg("psi", "1"),
        check("simons_equivalence_probe").arg("field", "V").arg("base", "L").arg("eps", 0.5).arg("expect", "small"),
    ];
    s
}

fn equator_rejections() -> Scenario {
    let mut s = scenario("equator-rejections", "de-sitter-grw", 2);
    s.fields = vec![builtin_field("V", "canonical")];
    s.immersions = vec![circle("E", 0.0, PI / 2.0), slice("S0", 0.0)];
    s.checks = vec![
        check("build_flowed_immersion").arg("field", "V").arg("base", "E").expect_error("ConformalFactorVanishes"),
        check("stability_probe")
            .arg("field", "V")
            .arg("immersion", "S0")
            .arg("counts", json!([8, 8]))
            .expect_error("ConformalFactorVanishes"),
    ];
    s
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    Some(match name {
        "anti-de-sitter-slice-suite" => anti_de_sitter_slice_suite(),
        "ads-flow-suite" => ads_flow_suite(),
        "de-sitter-hyperbolic-suite" => de_sitter_hyperbolic_suite(),
        "desitter-slice-suite" => desitter_slice_suite(),
        "equator-rejections" => equator_rejections(),
        "linear-warp-suite" => linear_warp_suite(),
        "minkowski-suite" => minkowski_suite(),
        "newton-suite" => newton_suite(),
        "simons-great-circle" => simons_suite("simons-great-circle", PI / 2.0, "small"),
        "simons-small-circle" => simons_suite("simons-small-circle", PI / 3.0, "large"),
        _ => return None,
    })
}
