//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N ... PASS|FAIL` line straight to stdout so the lines survive
//! output capture.

use lorentz_verify::conformal::{certify, project_to_leaf, sample_points};
use lorentz_verify::config::{rng, sample_vectors};
use lorentz_verify::expr::Expr;
use lorentz_verify::fields::{FieldClass, FieldModel};
use lorentz_verify::geometry::metric_at;
use lorentz_verify::hypersurface::immersion::{sample_params, ExprImmersion, Immersion};
use lorentz_verify::hypersurface::newton::{newton_identities_check, sigma, CurvatureInvariants};
use lorentz_verify::hypersurface::operators::shape_operator_at;
use lorentz_verify::hypersurface::support::support_identities_check;
use lorentz_verify::linalg::{frame_norm, Mat};
use lorentz_verify::models::{builtin_space, grw_curvature_residual, survey_sectional, SpaceModel};
use lorentz_verify::runner::{builtin_scenario, run};
use lorentz_verify::simons::*;
use lorentz_verify::variational::stability::{stability_probe, ProbeOptions};
use lorentz_verify::variational::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::io::Write;

fn verdict(n: usize, title: &str, ok: bool, detail: &str) {
    let line = format!("criterion {n} {title}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(ok, "criterion {n} failed: {detail}");
}

fn space(name: &str) -> SpaceModel {
    builtin_space(name, 2).unwrap()
}

fn slice(s: &SpaceModel, t0: f64) -> ExprImmersion {
    ExprImmersion::grw_slice(t0, &s.as_grw().unwrap().fiber)
}

#[test]
fn criterion_1_constant_curvature() {
    let mut worst_k = 0.0_f64;
    let mut worst_warp = 0.0_f64;
    for (name, c) in [("de-sitter-grw", 1.0), ("anti-de-sitter-grw", -1.0)] {
        let s = space(name);
        let survey = survey_sectional(&s, 1, 100).unwrap();
        worst_k = worst_k.max((survey.min - c).abs()).max((survey.max - c).abs());
        let (r1, r2) = grw_curvature_residual(s.as_grw().unwrap(), c).unwrap();
        worst_warp = worst_warp.max(r1).max(r2);
    }
    verdict(
        1,
        "sectional curvature of dS = 1, AdS = -1",
        worst_k < 1e-7 && worst_warp < 1e-10,
        &format!("sectional {worst_k:.2e} < 1e-7, warp {worst_warp:.2e} < 1e-10"),
    );
}

#[test]
fn criterion_2_conformal_certificates() {
    let mink = space("minkowski");
    let pos = certify(&mink, &FieldModel::Position, &sample_points(&mink, 2, 64), 1e-10).unwrap();
    let pos_err = pos.psi_hat.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    let mut ok = pos.class == FieldClass::Homothetic && pos_err < 1e-10;

    let mut closed_err = 0.0_f64;
    for (name, psi) in [("de-sitter-hyperbolic-grw", f64::cosh as fn(f64) -> f64), ("anti-de-sitter-grw", f64::cos)] {
        let s = space(name);
        let pts = sample_points(&s, 2, 64);
        let cert = certify(&s, &FieldModel::canonical(&s).unwrap(), &pts, 1e-8).unwrap();
        ok &= cert.class == FieldClass::ClosedConformal;
        for (p, got) in pts.iter().zip(&cert.psi_hat) {
            closed_err = closed_err.max((got - psi(p[0])).abs());
        }
    }
    ok &= closed_err < 1e-8;

    let hyp = ExprImmersion::hyperboloid_graph(2, 0.0);
    let eta = FieldModel::Constant(vec![0.3, -0.2, 0.5]);
    let mut leaf = 0.0_f64;
    for u in sample_params(&hyp.axes(), 2, 16) {
        let lp = project_to_leaf(&mink, &eta, &FieldModel::Position, &hyp, &u).unwrap();
        leaf = leaf.max(lp.intrinsic_residual).max(lp.tangency);
    }
    ok &= leaf < 1e-7;
    verdict(
        2,
        "conformal certificates",
        ok,
        &format!("position psi {pos_err:.2e}, closed conformal psi {closed_err:.2e}, leaf projection {leaf:.2e}"),
    );
}

#[test]
fn criterion_3_slice_umbilicity() {
    let cases: [(&str, [f64; 3], fn(f64) -> f64); 3] = [
        ("de-sitter-grw", [-1.0, 0.5, 1.0], |t| t.tanh()),
        ("anti-de-sitter-grw", [0.5, FRAC_PI_3, 2.0], |t| 1.0 / t.tan()),
        ("de-sitter-hyperbolic-grw", [0.5, 1.0, 1.5], |t| 1.0 / t.tanh()),
    ];
    let mut worst = 0.0_f64;
    for (name, ts, log_rate) in cases {
        let s = space(name);
        for t0 in ts {
            let imm = slice(&s, t0);
            for u in sample_params(&imm.axes(), 3, 4) {
                let inv = shape_operator_at(&s, &imm, &u).unwrap();
                for lam in &inv.eigenvalues {
                    worst = worst.max((lam + log_rate(t0)).abs());
                }
                worst = worst.max(inv.umbilicity_residual());
            }
        }
    }
    verdict(3, "slice shape operator is -(phi'/phi) Id", worst < 1e-8, &format!("residual {worst:.2e} < 1e-8"));
}

#[test]
fn criterion_4_newton_suite() {
    let mut r = rng(4);
    let mut worst = 0.0_f64;
    let mut ints = true;
    for k in 0..1000 {
        let n = 2 + k % 2;
        let v = sample_vectors(&mut r, n * n, 1).remove(0);
        let a = Mat::from_fn(n, n, |i, j| v[i * n + j] + v[j * n + i]);
        let inv = CurvatureInvariants::from_symmetric(a, 0.0);
        let rep = newton_identities_check(&inv);
        worst = worst.max(rep.max());
        for (r, s) in inv.s.iter().enumerate() {
            worst = worst.max((s - sigma(&inv.eigenvalues, r)).abs());
        }
        ints &= rep.b_r_integer_consistent;
    }
    verdict(4, "Newton transformations on 1000 matrices", worst < 1e-9 && ints, &format!("residual {worst:.2e} < 1e-9"));
}

#[test]
fn criterion_5_support_identities() {
    let mink = space("minkowski");
    let ds = space("de-sitter-grw");
    let fixtures: Vec<(&str, &SpaceModel, ExprImmersion, FieldModel)> = vec![
        ("hyperplane", &mink, ExprImmersion::flat_hyperplane(2, 0.3), FieldModel::Constant(vec![0.0, 0.0, 1.0])),
        ("hyperboloid", &mink, ExprImmersion::hyperboloid_graph(2, 0.0), FieldModel::Position),
        ("de Sitter slice", &ds, slice(&ds, 1.0), FieldModel::canonical(&ds).unwrap()),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, s, imm, v) in &fixtures {
        let samples = sample_params(&imm.axes(), 5, 6);
        let rep = support_identities_check::<_, _, _, FieldModel>(*s, imm, v, None, &samples, 1e-5).unwrap();
        ok &= rep.max() < 1e-5 && rep.tangent_norm_split < 1e-5 && rep.fd_gap < 1e-3;
        detail.push(format!("{label} {:.2e}/fd {:.2e}", rep.max().max(rep.tangent_norm_split), rep.fd_gap));
    }
    verdict(5, "support function identities", ok, &detail.join(", "));
}

#[test]
fn criterion_6_simons_flow() {
    let ds = space("de-sitter-grw");
    let v = FieldModel::canonical(&ds).unwrap();
    let axes = [lorentz_verify::quadrature::Axis::periodic(0.0, 2.0 * PI)];

    let great = ExprImmersion::fiber_circle(1.0, FRAC_PI_2);
    let flowed = build_flowed_immersion(&ds, &v, &great, 0.5, 0).unwrap();
    // strip_samples covers t in [-0.8 eps, 0.8 eps] = [-0.4, 0.4]
    let mut sup_h = 0.0_f64;
    for u in strip_samples(flowed.eps, &axes, 9, 4, 0) {
        let mc = mean_curvature_vector(&flowed, &u).unwrap();
        sup_h = sup_h.max(frame_norm(&metric_at(&ds, &mc.point).unwrap(), &mc.h_bar));
    }

    let small = ExprImmersion::fiber_circle(1.0, FRAC_PI_3);
    let flowed_small = build_flowed_immersion(&ds, &v, &small, 0.5, 0).unwrap();
    let decay = decay_law_check(&flowed_small, &strip_samples(flowed_small.eps, &axes, 5, 4, 0), 0).unwrap();

    let pg = simons_equivalence_probe(&ds, &v, &great, 0.5, 0).unwrap();
    let ps = simons_equivalence_probe(&ds, &v, &small, 0.5, 0).unwrap();
    let ok = flowed.eps >= 0.5 && sup_h < 1e-6 && decay.residual < 1e-5 && pg.all_small && ps.all_large;
    verdict(
        6,
        "Simons flow",
        ok,
        &format!(
            "great circle sup|H| {sup_h:.2e}, decay {:.2e}, equivalence great {}/small {}",
            decay.residual,
            if pg.all_small { "small" } else { "mixed" },
            if ps.all_large { "large" } else { "mixed" }
        ),
    );
}

#[test]
fn criterion_7_variational_suite() {
    let ds = space("de-sitter-grw");
    let imm = slice(&ds, 1.0);
    let f = |src: &str| Expr::parse_indexed(src, "u", 2).unwrap();
    let wavy = f("1 + 0.3*cos(u0)");
    let odd = f("sin(u0)*cos(u1)");
    let one = Expr::constant(1.0);
    let opts = VariationOptions::default();

    let scn = VariationScenario::new(&ds, &imm, &wavy, opts.clone()).unwrap();
    let vol = first_variation_volume(&scn, 1e-6).unwrap().residual;
    let mut fv_int = 0.0_f64;
    let mut fv_pt = 0.0_f64;
    for sp in [&wavy, &odd] {
        let scn = VariationScenario::new(&ds, &imm, sp, opts.clone()).unwrap();
        for r in [0, 1] {
            let rep = first_variation_r_area(&scn, r).unwrap();
            fv_int = fv_int.max(rep.residual_integral);
            fv_pt = fv_pt.max(rep.residual_pointwise);
        }
    }
    let scn = VariationScenario::new(&ds, &imm, &one, opts).unwrap();
    let second = second_variation(&scn, 0).unwrap().relative_error;
    let v = FieldModel::canonical(&ds).unwrap();
    let samples = sample_params(&imm.axes(), 7, 6);
    let mut lr = 0.0_f64;
    for r in [0, 1] {
        lr = lr.max(lr_support_identity_check(&ds, &imm, &v, r, &samples, 7, 1e-8).unwrap().residual);
    }
    let ok = vol < 1e-6 && fv_int < 1e-4 && fv_pt < 1e-4 && second < 1e-3 && lr < 1e-5;
    verdict(
        7,
        "variational formulas",
        ok,
        &format!(
            "volume {vol:.2e}, first variation {fv_int:.2e}, pointwise {fv_pt:.2e}, second variation rel {second:.2e}, L_r support {lr:.2e}"
        ),
    );
}

#[test]
fn criterion_8_stability_probe() {
    let ds = space("de-sitter-grw");
    let imm = slice(&ds, 1.0);
    let v = FieldModel::canonical(&ds).unwrap();
    let basis = lorentz_verify::variational::stability::default_basis(&imm.axes()).unwrap();
    let opts = ProbeOptions { grw_time: true, ..ProbeOptions::default() };
    let rep = stability_probe(&ds, &imm, &v, 1, &basis, &opts).unwrap();
    let th = 1.0_f64.tanh();
    let angle = (rep.cosh_theta_min - 1.0).abs().max((rep.cosh_theta_max - 1.0).abs());
    let h1 = (rep.h_r_range.0 - th).abs().max((rep.h_r_range.1 - th).abs());
    let h2 = (rep.h_r1_range.0 - th * th).abs().max((rep.h_r1_range.1 - th * th).abs());
    // H_1 - max{sinh(1) H_2, 0} from the closed form
    let margin = th - (1.0_f64.sinh() * th * th).max(0.0);
    let cor = rep.corollary_margin.map_or(f64::INFINITY, |m| (m - margin).abs());
    let ok = angle < 1e-8 && rep.classification == "leaf" && h1 < 1e-8 && h2 < 1e-8 && cor < 1e-8;
    verdict(
        8,
        "stability probe on {1} x S^2",
        ok,
        &format!(
            "cosh theta {angle:.2e}, class {}, H_1 {h1:.2e}, H_2 {h2:.2e}, corollary margin {:?} vs {margin:.6}",
            rep.classification, rep.corollary_margin
        ),
    );
}

#[test]
fn criterion_9_reproducibility() {
    let mut ok = true;
    let mut names = Vec::new();
    for name in ["minkowski-suite", "simons-small-circle"] {
        let s = builtin_scenario(name).unwrap();
        let a = run(&s).unwrap().stable_json();
        let b = run(&s).unwrap().stable_json();
        ok &= a == b && !a.contains("fingerprint") && !a.contains("runtime_ms");
        names.push(name);
    }
    verdict(9, "reproducible JSON reports", ok, &format!("{} run twice", names.join(", ")));
}
