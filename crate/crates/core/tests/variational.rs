use lorentz_verify::expr::Expr;
use lorentz_verify::fields::FieldModel;
use lorentz_verify::hypersurface::immersion::{sample_params, ExprImmersion, Immersion};
use lorentz_verify::models::{builtin_space, make_flat, SpaceModel};
use lorentz_verify::quadrature::Axis;
use lorentz_verify::variational::*;
use lorentz_verify::Error;
use std::f64::consts::PI;

fn ds(n: usize) -> SpaceModel {
    builtin_space("de-sitter-grw", n).unwrap()
}

fn slice(space: &SpaceModel, t0: f64) -> ExprImmersion {
    ExprImmersion::grw_slice(t0, &space.as_grw().unwrap().fiber)
}

fn f(src: &str, n: usize) -> Expr {
    Expr::parse_indexed(src, "u", n).unwrap()
}

#[test]
fn first_variation_of_r_area_on_slice() {
    let space = ds(2);
    let imm = slice(&space, 0.7);
    for speed in ["1 + 0.3*cos(u0)", "sin(u0)*cos(u1)"] {
        let sp = f(speed, 2);
        let scn = VariationScenario::new(&space, &imm, &sp, VariationOptions::default()).unwrap();
        for r in [0, 1] {
            let rep = first_variation_r_area(&scn, r).unwrap();
            assert!(rep.residual_integral < 1e-4, "{speed} {rep:?}");
            assert!(rep.residual_pointwise < 1e-4, "{speed} {rep:?}");
        }
    }
}

#[test]
fn c_1_matches_finite_differences() {
    // with f ≡ 1 the c_1 term contributes c_1 · area; dropping it breaks agreement
    let space = ds(2);
    let imm = slice(&space, 0.4);
    let sp = Expr::constant(1.0);
    let scn = VariationScenario::new(&space, &imm, &sp, VariationOptions::default()).unwrap();
    let rep = first_variation_r_area(&scn, 1).unwrap();
    assert!((rep.c_r - 2.0).abs() < 1e-9);
    let area = r_area(&scn, 0, 0.0).unwrap();
    assert!((rep.fd - rep.analytic).abs() < 1e-6);
    assert!((rep.fd - (rep.analytic - rep.c_r * area)).abs() > 1.0);
}

#[test]
fn f_2_recurrence_in_dimension_three() {
    let space = ds(3);
    let imm = slice(&space, 0.5);
    let sp = Expr::constant(1.0);
    let opts = VariationOptions { counts: vec![12, 12, 12], quad_tol: 1e-5, ..VariationOptions::default() };
    let scn = VariationScenario::new(&space, &imm, &sp, opts).unwrap();
    let t0: f64 = 0.5;
    let a2 = r_area(&scn, 2, 0.0).unwrap();
    let want = 2.0 * PI * PI * t0.cosh().powi(3) * (3.0 * t0.tanh().powi(2) - 2.0);
    assert!((a2 - want).abs() < 1e-8, "{a2} vs {want}");
    let rep = first_variation_r_area(&scn, 2).unwrap();
    assert!((rep.analytic - 6.0 * PI * PI * t0.sinh().powi(3)).abs() < 1e-8);
    assert!(rep.residual_integral < 1e-6, "{rep:?}");
}

#[test]
fn jacobi_derivative_vanishes_on_umbilical_slice() {
    let space = ds(2);
    let imm = slice(&space, 1.0);
    for speed in ["1", "cos(u0)", "sin(u0)*sin(u1)", "3*cos(u0)^2-1", "exp(cos(u0))"] {
        let sp = f(speed, 2);
        let opts = VariationOptions { counts: vec![24, 24], ..VariationOptions::default() };
        let scn = VariationScenario::new(&space, &imm, &sp, opts).unwrap();
        for r in [0, 1] {
            let d = jacobi_derivative_at_zero(&scn, r).unwrap();
            assert!(d.abs() < 1e-6, "{speed} r={r} {d}");
        }
    }
    let sp = f("cos(u0)", 2);
    let scn = VariationScenario::new(&space, &imm, &sp, VariationOptions::default()).unwrap();
    let rep = jacobi_functional(&scn, 1).unwrap();
    assert!(rep.derivative_at_zero.abs() < 1e-6 && rep.residual < 1e-5, "{rep:?}");
}

#[test]
fn jacobi_derivative_nonzero_on_perturbed_base() {
    let space = ds(2);
    let axes = vec![Axis::new(0.0, PI), Axis::periodic(0.0, 2.0 * PI)];
    let imm = ExprImmersion::parse(&["1 + 0.2*cos(u0)".into(), "u0".into(), "u1".into()], axes).unwrap();
    let sp = f("cos(u0)", 2);
    let scn = VariationScenario::new(&space, &imm, &sp, VariationOptions { counts: vec![20, 20], ..Default::default() }).unwrap();
    let rep = jacobi_functional(&scn, 1).unwrap();
    assert!(rep.derivative_at_zero.abs() > 1e-4, "{rep:?}");
    assert!(rep.residual < 1e-5, "{rep:?}");
    assert!(matches!(second_variation(&scn, 1), Err(Error::NotConstantHr1(_))));
}

#[test]
fn second_variation_matches_finite_differences() {
    let space = ds(2);
    let imm = slice(&space, 1.0);
    for speed in ["1", "1 + 0.5*sin(u0)*cos(u1)"] {
        let sp = f(speed, 2);
        let scn = VariationScenario::new(&space, &imm, &sp, VariationOptions::default()).unwrap();
        for r in [0, 1] {
            let rep = second_variation(&scn, r).unwrap();
            assert!(rep.relative_error < 1e-3, "{speed} r={r} {rep:?}");
        }
    }
}

#[test]
fn totally_geodesic_second_variation_is_minus_dirichlet() {
    let l = make_flat(3, 1).unwrap();
    let axes = vec![Axis::periodic(0.0, 2.0 * PI), Axis::periodic(0.0, 2.0 * PI)];
    let imm = ExprImmersion::parse(&["u0".into(), "u1".into(), "0".into()], axes).unwrap();
    let sp = f("sin(u0)", 2);
    let v = second_variation_form(&l, &imm, &sp, 0, 0.0, &[16, 16], 1e-10).unwrap();
    // −∫|∇f|² = −∫cos² = −2π²
    assert!((v + 2.0 * PI * PI).abs() < 1e-10, "{v}");
}

#[test]
fn lr_support_identity() {
    let space = ds(2);
    let v = FieldModel::canonical(&space).unwrap();
    let imm = slice(&space, 1.0);
    let samples = sample_params(&imm.axes(), 5, 6);
    for r in [0, 1] {
        let rep = lr_support_identity_check(&space, &imm, &v, r, &samples, 0, 1e-8).unwrap();
        assert!(rep.residual < 1e-5, "r={r} {rep:?}");
    }
    let l = make_flat(3, 1).unwrap();
    let hyp = ExprImmersion::hyperboloid_graph(2, 0.0);
    let samples = sample_params(&hyp.axes(), 5, 6);
    let rep = lr_support_identity_check(&l, &hyp, &FieldModel::Position, 0, &samples, 0, 1e-8).unwrap();
    assert!(rep.residual < 1e-8, "{rep:?}");
    let plane = ExprImmersion::flat_hyperplane(2, 0.0);
    let c = FieldModel::Constant(vec![0.0, 0.0, 1.0]);
    let rep = lr_support_identity_check(&l, &plane, &c, 1, &samples, 0, 1e-8).unwrap();
    assert_eq!(rep.residual, 0.0);
}

mod properties {
    use super::*;
    use lorentz_verify::hypersurface::newton::b_r;
    use lorentz_verify::variational::stability::{cosh_theta_at, stability_probe, ProbeOptions};
    use proptest::prelude::*;

    fn trig(c: &[f64]) -> String {
        format!(
            "{:e} + {:e}*cos(u0) + {:e}*sin(u0)*cos(u1) + {:e}*sin(u0)*sin(u1) + {:e}*cos(u0)^2",
            c[0], c[1], c[2], c[3], c[4]
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        // A quadratic form: f and −f give the same value.
        #[test]
        fn second_variation_is_even(c in prop::collection::vec(-1.0f64..1.0, 5), r in 0usize..2) {
            let space = ds(2);
            let imm = slice(&space, 1.0);
            let plus = f(&trig(&c), 2);
            let minus = f(&format!("-({})", trig(&c)), 2);
            let a = second_variation_form(&space, &imm, &plus, r, 1.0, &[32, 32], 1e-6).unwrap();
            let b = second_variation_form(&space, &imm, &minus, r, 1.0, &[32, 32], 1e-6).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }

        // The base is symmetric under u0 -> pi - u0, so speeds odd under that
        // reflection (or with a cos u1, sin u1 factor) have zero total and the
        // shift of H̄ drops out.
        #[test]
        fn mean_shift_only_acts_through_total_speed(c in prop::collection::vec(-1.0f64..1.0, 5), delta in -2.0f64..2.0, r in 0usize..2) {
            let space = ds(2);
            let imm = ExprImmersion::parse(
                &["1 + 0.05*cos(2*u0)".into(), "u0".into(), "u1".into()],
                vec![Axis::new(0.0, PI), Axis::periodic(0.0, 2.0 * PI)],
            ).unwrap();
            let balanced = f(&trig(&[0.0, c[1], c[2], c[3], 0.0]), 2);
            let opts = VariationOptions { counts: vec![32, 32], ..VariationOptions::default() };
            let scn = VariationScenario::new(&space, &imm, &balanced, opts.clone()).unwrap();
            let (_, _, hbar) = jacobi_lambda(&scn, r).unwrap();
            let base = jacobi_derivative_with_mean(&scn, r, hbar).unwrap();
            let shifted = jacobi_derivative_with_mean(&scn, r, hbar + delta).unwrap();
            prop_assert!((base - shifted).abs() < 1e-10, "{base} vs {shifted}");

            let lumped = f(&trig(&[1.0 + c[0].abs(), c[1], c[2], c[3], c[4]]), 2);
            let scn = VariationScenario::new(&space, &imm, &lumped, opts).unwrap();
            let base = jacobi_derivative_with_mean(&scn, r, hbar).unwrap();
            let shifted = jacobi_derivative_with_mean(&scn, r, hbar + delta).unwrap();
            let total = normal_flux(&scn, 0.0).unwrap();
            let want = -b_r(2, r) * delta * total;
            prop_assert!((shifted - base - want).abs() < 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn first_variation_converges_under_step_halving() {
        let space = ds(2);
        let imm = slice(&space, 0.7);
        let sp = f("1 + 0.3*cos(u0)", 2);
        let mut errs = Vec::new();
        for h in [0.2, 0.1, 0.05] {
            let opts = VariationOptions { eps: 1.0, fd_step: h, ..VariationOptions::default() };
            let scn = VariationScenario::new(&space, &imm, &sp, opts).unwrap();
            errs.push(first_variation_r_area(&scn, 0).unwrap().residual_integral);
        }
        for w in errs.windows(2) {
            assert!(w[1] <= 0.25 * w[0], "{errs:?}");
        }
    }

    fn angle_fixture(which: usize) -> (SpaceModel, ExprImmersion) {
        let sphere = |t: &str| {
            ExprImmersion::parse(&[t.into(), "u0".into(), "u1".into()], vec![Axis::new(0.0, PI), Axis::periodic(0.0, 2.0 * PI)]).unwrap()
        };
        let l = SpaceModel::Flat(make_flat(3, 1).unwrap());
        match which {
            0 => (ds(2), sphere("-0.8")),
            1 => (ds(2), sphere("1")),
            2 => (ds(2), sphere("1 + 0.2*cos(u0)")),
            3 => (ds(2), sphere("0.5 + 0.3*sin(u0)*cos(u1)")),
            4 => {
                let ads = builtin_space("anti-de-sitter-grw", 2).unwrap();
                let imm = slice(&ads, 1.0);
                (ads, imm)
            }
            5 => (l, ExprImmersion::hyperboloid_graph(2, 0.0)),
            _ => (l, ExprImmersion::hyperboloid_graph(2, 0.3)),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Reverse Cauchy-Schwarz for the timelike pair (V, N).
        #[test]
        fn hyperbolic_angle_is_at_least_one(which in 0usize..7, seed in 0u64..1000) {
            let (space, imm) = angle_fixture(which);
            let v = FieldModel::canonical(&space).unwrap();
            for u in sample_params(&imm.axes(), seed, 4) {
                let c = cosh_theta_at(&space, &imm, &v, &u).unwrap();
                prop_assert!(c >= 1.0 - 1e-10, "{c}");
                if which == 1 || which == 4 || which == 5 {
                    prop_assert!((c - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn probe_reports_unit_angle_on_slices() {
        for t0 in [0.5, 1.0, 1.5] {
            let space = ds(2);
            let imm = slice(&space, t0);
            let v = FieldModel::canonical(&space).unwrap();
            let rep = stability_probe(&space, &imm, &v, 1, &[Expr::parse_indexed("1", "u", 2).unwrap()], &ProbeOptions::default()).unwrap();
            assert!(rep.cosh_theta_at_least_one && (rep.cosh_theta_max - 1.0).abs() < 1e-10);
            assert_eq!(rep.classification, "leaf");
        }
    }
}
