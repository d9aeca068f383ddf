use lorentz_verify::conformal::sample_points;
use lorentz_verify::geometry::*;
use lorentz_verify::hypersurface::immersion::ExprImmersion;
use lorentz_verify::hypersurface::operators::shape_operator_at;
use lorentz_verify::linalg::max_abs;
use lorentz_verify::models::*;
use proptest::prelude::*;

const MODELS: &[&str] = &[
    "minkowski",
    "de-sitter-grw",
    "anti-de-sitter-grw",
    "de-sitter-hyperbolic-grw",
    "linear-warp-grw",
    "de-sitter-hyperquadric",
    "anti-de-sitter-hyperquadric",
    "pseudo-euclidean-2",
];

fn christoffel_gap(space: &SpaceModel, p: &[f64]) -> f64 {
    let exact = christoffel(space, p).unwrap();
    let fd = christoffel_fd(space, p, 1e-4).unwrap();
    let n = space.dim();
    let mut gap = 0.0_f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gap = gap.max((exact.get(k, i, j) - fd.get(k, i, j)).abs());
            }
        }
    }
    gap
}

fn riemann_gap(space: &SpaceModel, p: &[f64]) -> f64 {
    let exact = riemann(space, p).unwrap();
    let fd = riemann_fd(space, p, 1e-3).unwrap();
    let n = space.dim();
    let mut gap = 0.0_f64;
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    gap = gap.max((exact.get(l, k, i, j) - fd.get(l, k, i, j)).abs());
                }
            }
        }
    }
    gap
}

#[test]
fn exact_and_finite_difference_connections_agree_on_every_model() {
    for name in MODELS {
        let space = builtin_space(name, 2).unwrap();
        for p in sample_points(&space, 11, 100) {
            let g = christoffel_gap(&space, &p);
            assert!(g < 1e-5, "{name} at {p:?}: christoffel gap {g:e}");
            let (metricity, torsion) = compatibility_residuals(&space, &p).unwrap();
            assert!(metricity < 1e-9 && torsion < 1e-9, "{name}: {metricity:e} {torsion:e}");
        }
    }
}

#[test]
fn exact_and_finite_difference_curvature_agree() {
    // Second differences of a fourth-order scheme: the FD Riemann tensor
    // carries an O(h^2) bias, hence the looser gate.
    for name in MODELS {
        let space = builtin_space(name, 2).unwrap();
        for p in sample_points(&space, 12, 20) {
            let g = riemann_gap(&space, &p);
            assert!(g < 1e-3, "{name} at {p:?}: riemann gap {g:e}");
        }
    }
}

#[test]
fn space_forms_have_constant_curvature_tensor() {
    for (name, c) in [
        ("de-sitter-grw", 1.0),
        ("anti-de-sitter-grw", -1.0),
        ("de-sitter-hyperbolic-grw", 1.0),
        ("de-sitter-hyperquadric", 1.0),
        ("anti-de-sitter-hyperquadric", -1.0),
        ("minkowski", 0.0),
    ] {
        for n in [2, 3] {
            let space = builtin_space(name, n).unwrap();
            for p in sample_points(&space, 3, 100) {
                let r = riemann(&space, &p).unwrap();
                let res = constant_curvature_residual(&r, &metric_at(&space, &p).unwrap(), c);
                assert!(res < 1e-7, "{name} n={n}: {res:e}");
            }
        }
    }
}

#[test]
fn linear_warp_is_not_a_space_form() {
    let space = builtin_space("linear-warp-grw", 2).unwrap();
    let survey = survey_sectional(&space, 0, 50).unwrap();
    assert!(survey.spread() > 1e-3);
    let m = space.as_grw().unwrap();
    let (r1, r2) = grw_curvature_residual(m, 0.0).unwrap();
    assert!(r1.max(r2) > 1e-3);
}

fn custom_grw(warp: &str, fiber: Fiber, interval: (f64, f64)) -> SpaceModel {
    SpaceModel::Grw(make_grw(interval, Warp::parse(warp).unwrap(), fiber).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Sectional curvature from the assembled metric against the warp ODE
    // test; both paths must land on the same constant.
    #[test]
    fn warp_test_and_sectional_curvature_agree(seed in 0u64..10_000, which in 0usize..4) {
        let (space, c) = match which {
            0 => (builtin_space("de-sitter-grw", 2).unwrap(), 1.0),
            1 => (builtin_space("anti-de-sitter-grw", 2).unwrap(), -1.0),
            2 => (custom_grw("exp(t)", Fiber::Flat { n: 2 }, (-2.0, 2.0)), 1.0),
            _ => (custom_grw("t", Fiber::Hyperbolic { n: 2 }, (0.2, 3.0)), 0.0),
        };
        let (r1, r2) = grw_curvature_residual(space.as_grw().unwrap(), c).unwrap();
        prop_assert!(r1 < 1e-10 && r2 < 1e-10);
        let survey = survey_sectional(&space, seed, 5).unwrap();
        prop_assert!((survey.min - c).abs() < 1e-7 && (survey.max - c).abs() < 1e-7, "{:?}", survey);
    }

    #[test]
    fn sectional_curvature_is_plane_independent(
        seed in 0u64..1000,
        x in prop::collection::vec(-1.0f64..1.0, 3),
        y in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let space = builtin_space("de-sitter-grw", 2).unwrap();
        let p = &sample_points(&space, seed, 1)[0];
        let curv = curvature_at(&space, p, Backend::default()).unwrap();
        match curv.sectional(&x, &y, 1e-6) {
            Ok(k) => prop_assert!((k - 1.0).abs() < 1e-7, "{k}"),
            Err(e) => prop_assert_eq!(e.kind(), "DegeneratePlane"),
        }
    }

    #[test]
    fn slice_factor_matches_shape_operator(t0 in -1.5f64..1.5, which in 0usize..3) {
        let (name, t0) = match which {
            0 => ("de-sitter-grw", t0),
            1 => ("anti-de-sitter-grw", 1.6 + t0),
            _ => ("de-sitter-hyperbolic-grw", 2.0 + t0),
        };
        let space = builtin_space(name, 2).unwrap();
        let m = space.as_grw().unwrap();
        let sd = slice_data(m, t0).unwrap();
        let imm = ExprImmersion::grw_slice(t0, &m.fiber);
        let inv = shape_operator_at(&space, &imm, &[0.8, 0.4]).unwrap();
        for lam in &inv.eigenvalues {
            prop_assert!((lam - sd.umbilicity_factor).abs() < 1e-8, "{} vs {}", lam, sd.umbilicity_factor);
        }
        prop_assert!(inv.umbilicity_residual() < 1e-8);
    }

    #[test]
    fn metric_is_symmetric_with_declared_index(seed in 0u64..1000, which in 0usize..8) {
        let space = builtin_space(MODELS[which], 2).unwrap();
        let p = &sample_points(&space, seed, 1)[0];
        let g = metric_at(&space, p).unwrap();
        prop_assert!(max_abs(&g.sub(&g.transpose())) < 1e-14);
        prop_assert_eq!(lorentz_verify::linalg::metric_index(&g, 1e-12).unwrap(), space.index());
    }
}

#[test]
fn outside_chart_is_rejected() {
    let space = builtin_space("anti-de-sitter-grw", 2).unwrap();
    let e = metric_at(&space, &[4.0, 0.0, 0.0]).unwrap_err();
    assert_eq!(e.kind(), "OutOfDomain");
    let m = space.as_grw().unwrap();
    assert_eq!(slice_data(m, -0.5).unwrap_err().kind(), "OutOfInterval");
}
