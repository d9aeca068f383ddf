use super::immersion::{check_params, Immersion, MapOf};
use crate::diff::try_jacobian;
use crate::error::{Error, Result};
use crate::geometry::{check_domain, raise, ChartedSpace};
use crate::linalg::{symmetric_eigenvalues, Mat};
use crate::scalar::{to_f64, Scalar};

/// Induced metric, tangent basis and future unit normal at a parameter.
#[derive(Debug, Clone)]
pub struct Frame<S> {
    pub point: Vec<S>,
    /// Ambient metric at `point`.
    pub g: Mat<S>,
    /// Columns `dx(∂_i)`.
    pub jac: Mat<S>,
    pub induced: Mat<S>,
    /// `⟨N, N⟩ = −1`, `⟨N, dx(∂_i)⟩ = 0`, future-pointing.
    pub normal: Vec<S>,
}

pub type FrameData = Frame<f64>;

impl<S: Scalar> Frame<S> {
    /// Tangential coordinates `G^{-1} Jᵀ g v` of an ambient vector.
    pub fn tangent_coords(&self, v: &[S]) -> Result<Vec<S>> {
        let w = self.jac.transpose().matvec(&self.g.matvec(v));
        raise(&self.induced, &w)
    }

    pub fn inner(&self, a: &[S], b: &[S]) -> S {
        self.g.bilinear(a, b)
    }
}

/// Assembles a frame from a point and tangent basis, validating it.
pub fn frame_from_parts<M: ChartedSpace, S: Scalar>(
    space: &M,
    u: &[f64],
    point: Vec<S>,
    jac: Mat<S>,
) -> Result<Frame<S>> {
    let p = to_f64(&point);
    check_domain(space, &p)?;
    let m = space.dim();
    let n = jac.cols();
    if jac.rows() != m || n + 1 != m {
        return Err(Error::InvalidArgument(format!(
            "immersion of dimension {n} is not a hypersurface of a {m}-dimensional space"
        )));
    }
    let jr = jac.map_re();
    let gram = jr.transpose().matmul(&jr);
    let scale: f64 = (0..n).map(|i| gram[(i, i)]).product();
    if !(gram.det() > 1e-20 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateJacobian(u.to_vec()));
    }
    let g = space.metric(&point);
    let induced = jac.transpose().matmul(&g).matmul(&jac);
    let ev = symmetric_eigenvalues(&induced.map_re());
    let top = ev.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if ev.iter().any(|&v| v <= 1e-12 * top) {
        return Err(Error::NotSpacelike(u.to_vec()));
    }
    // covector ω_a = det[e_a | J], annihilating every column of J
    let omega: Vec<S> = (0..m)
        .map(|a| {
            Mat::from_fn(m, m, |r, c| {
                if c == 0 {
                    if r == a {
                        S::one()
                    } else {
                        S::zero()
                    }
                } else {
                    jac[(r, c - 1)]
                }
            })
            .det()
        })
        .collect();
    let raw = raise(&g, &omega)?;
    let q = g.bilinear(&raw, &raw);
    if !(q.re() < 0.0) {
        return Err(Error::NotSpacelike(u.to_vec()));
    }
    let inv = S::one() / (-q).sqrt();
    let mut normal: Vec<S> = raw.iter().map(|&v| v * inv).collect();
    let anchor = space.future_anchor(&p);
    let s: f64 = g.map_re().bilinear(&to_f64(&normal), &anchor);
    if s > 0.0 {
        normal = normal.into_iter().map(|v| -v).collect();
    }
    Ok(Frame { point, g, jac, induced, normal })
}

/// Frame at a generic parameter.
pub fn frame<M: ChartedSpace, I: Immersion, S: Scalar>(space: &M, imm: &I, u: &[S]) -> Result<Frame<S>> {
    let ur = to_f64(u);
    check_params(&imm.axes(), &ur)?;
    let (x, j) = try_jacobian(&MapOf(imm), u)?;
    frame_from_parts(space, &ur, x, j)
}

pub fn frame_at<M: ChartedSpace, I: Immersion>(space: &M, imm: &I, u: &[f64]) -> Result<FrameData> {
    frame(space, imm, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::immersion::ExprImmersion;
    use crate::models::{builtin_space, make_flat};

    #[test]
    fn hyperplane_normal() {
        let l = make_flat(3, 1).unwrap();
        let f = frame_at(&l, &ExprImmersion::flat_hyperplane(2, 0.3), &[0.1, 0.2]).unwrap();
        assert!((f.normal[2] - 1.0).abs() < 1e-15);
        assert!(f.normal[0].abs() < 1e-15 && f.normal[1].abs() < 1e-15);
    }

    #[test]
    fn slice_normal_is_dt() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let crate::models::SpaceModel::Grw(m) = &ds else { panic!() };
        let imm = ExprImmersion::grw_slice(1.0, &m.fiber);
        let f = frame_at(&ds, &imm, &[1.0, 2.0]).unwrap();
        assert!((f.normal[0] - 1.0).abs() < 1e-14);
        assert!(f.normal[1].abs() < 1e-14 && f.normal[2].abs() < 1e-14);
    }

    #[test]
    fn timelike_immersion_rejected() {
        let l = make_flat(3, 1).unwrap();
        let imm = ExprImmersion::parse(
            &["u0".into(), "0".into(), "u1".into()],
            vec![crate::quadrature::Axis::new(-1.0, 1.0); 2],
        )
        .unwrap();
        assert!(matches!(frame_at(&l, &imm, &[0.0, 0.0]), Err(Error::NotSpacelike(_))));
        let flat = ExprImmersion::parse(
            &["u0".into(), "u0".into(), "0".into()],
            vec![crate::quadrature::Axis::new(-1.0, 1.0); 2],
        )
        .unwrap();
        assert!(matches!(frame_at(&l, &flat, &[0.0, 0.0]), Err(Error::DegenerateJacobian(_))));
    }
}
