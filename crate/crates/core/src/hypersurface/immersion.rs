use crate::diff::{try_jacobian, TryVectorFn};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::ChartedSpace;
use crate::linalg::Mat;
use crate::models::Fiber;
use crate::quadrature::Axis;
use crate::scalar::Scalar;
use std::f64::consts::PI;

/// A parametric map into an ambient chart.
pub trait Immersion: Sync {
    fn param_dim(&self) -> usize;
    /// Parameter box with periodicity flags.
    fn axes(&self) -> Vec<Axis>;
    fn map<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>>;
}

impl<T: Immersion> Immersion for &T {
    fn param_dim(&self) -> usize {
        (*self).param_dim()
    }
    fn axes(&self) -> Vec<Axis> {
        (*self).axes()
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        (*self).map(u)
    }
}

/// Adapter exposing an immersion to the derivative helpers.
pub struct MapOf<'a, I>(pub &'a I);

impl<I: Immersion> TryVectorFn for MapOf<'_, I> {
    fn try_eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.0.map(x)
    }
}

/// Immersion given by component expressions in `u0, u1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprImmersion {
    pub components: Vec<Expr>,
    pub axes: Vec<Axis>,
}

impl ExprImmersion {
    pub fn parse(srcs: &[String], axes: Vec<Axis>) -> Result<ExprImmersion> {
        let components = srcs
            .iter()
            .map(|s| Expr::parse_indexed(s, "u", axes.len()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExprImmersion { components, axes })
    }

    fn from_strs(srcs: &[String], axes: Vec<Axis>) -> ExprImmersion {
        ExprImmersion::parse(srcs, axes).expect("built-in immersion parses")
    }

    /// `{t0} × F` in fiber coordinates.
    pub fn grw_slice(t0: f64, fiber: &Fiber) -> ExprImmersion {
        let n = fiber.dim();
        let mut srcs = vec![format!("{t0:e}")];
        srcs.extend((0..n).map(|i| format!("u{i}")));
        let axes = match fiber {
            Fiber::Sphere { .. } => (0..n)
                .map(|i| if i + 1 < n { Axis::new(0.0, PI) } else { Axis::periodic(0.0, 2.0 * PI) })
                .collect(),
            _ => vec![Axis::new(-1.0, 1.0); n],
        };
        ExprImmersion::from_strs(&srcs, axes)
    }

    /// `x_{n+1} = height` in `ℝ^{n+1}`, parameters on `[-1, 1]^n`.
    pub fn flat_hyperplane(n: usize, height: f64) -> ExprImmersion {
        let mut srcs: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
        srcs.push(format!("{height:e}"));
        ExprImmersion::from_strs(&srcs, vec![Axis::new(-1.0, 1.0); n])
    }

    /// Upper hyperboloid `x_{n+1} = √(1+|u|²) + bump·exp(−|u|²)`.
    pub fn hyperboloid_graph(n: usize, bump: f64) -> ExprImmersion {
        let r2 = (0..n).map(|i| format!("u{i}^2")).collect::<Vec<_>>().join("+");
        let mut srcs: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
        if bump == 0.0 {
            srcs.push(format!("sqrt(1+{r2})"));
        } else {
            srcs.push(format!("sqrt(1+{r2}) + {bump:e}*exp(-({r2}))"));
        }
        ExprImmersion::from_strs(&srcs, vec![Axis::new(-1.0, 1.0); n])
    }

    /// Circle of colatitude `theta0` in `{t0} × S²`.
    pub fn fiber_circle(t0: f64, theta0: f64) -> ExprImmersion {
        let srcs = vec![format!("{t0:e}"), format!("{theta0:e}"), "u0".to_string()];
        ExprImmersion::from_strs(&srcs, vec![Axis::periodic(0.0, 2.0 * PI)])
    }

    /// Coordinate line `y = (u, 0)` in `{t0} × F²`; a geodesic of the fiber
    /// for the flat and hyperbolic graph charts.
    pub fn fiber_line(t0: f64) -> ExprImmersion {
        let srcs = vec![format!("{t0:e}"), "u0".to_string(), "0".to_string()];
        ExprImmersion::from_strs(&srcs, vec![Axis::new(-1.0, 1.0)])
    }
}

impl Immersion for ExprImmersion {
    fn param_dim(&self) -> usize {
        self.axes.len()
    }
    fn axes(&self) -> Vec<Axis> {
        self.axes.clone()
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Result<Vec<S>> {
        Ok(self.components.iter().map(|e| e.eval(u)).collect())
    }
}

/// Parameter space with the pulled-back metric `Jᵀ g J`.
pub struct InducedSpace<'a, M, I> {
    pub space: &'a M,
    pub imm: &'a I,
    pub signature: Vec<i8>,
}

impl<'a, M: ChartedSpace, I: Immersion> InducedSpace<'a, M, I> {
    pub fn riemannian(space: &'a M, imm: &'a I) -> Self {
        InducedSpace { space, imm, signature: vec![1; imm.param_dim()] }
    }
}

/// `(x(u), J, Jᵀ g J)`.
pub fn pullback<M: ChartedSpace, I: Immersion, S: Scalar>(
    space: &M,
    imm: &I,
    u: &[S],
) -> Result<(Vec<S>, Mat<S>, Mat<S>)> {
    let (x, j) = try_jacobian(&MapOf(imm), u)?;
    let g = space.metric(&x);
    let induced = j.transpose().matmul(&g).matmul(&j);
    Ok((x, j, induced))
}

impl<M: ChartedSpace, I: Immersion> ChartedSpace for InducedSpace<'_, M, I> {
    fn dim(&self) -> usize {
        self.imm.param_dim()
    }
    fn signature(&self) -> Vec<i8> {
        self.signature.clone()
    }
    fn contains(&self, u: &[f64]) -> bool {
        self.imm.axes().iter().zip(u).all(|(a, &x)| a.contains(x))
            && self.imm.map(u).map(|x| self.space.contains(&x)).unwrap_or(false)
    }
    fn metric<S: Scalar>(&self, u: &[S]) -> Mat<S> {
        match pullback(self.space, self.imm, u) {
            Ok((_, _, g)) => g,
            Err(_) => {
                let n = self.dim();
                Mat::from_fn(n, n, |_, _| S::from_f64(f64::NAN))
            }
        }
    }
    fn future_anchor(&self, _u: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
    fn sample_bounds(&self) -> Vec<(f64, f64)> {
        self.imm.axes().iter().map(|a| (a.lo, a.hi)).collect()
    }
}

/// Seeded interior parameter samples (5% margin on non-periodic axes).
pub fn sample_params(axes: &[Axis], seed: u64, count: usize) -> Vec<Vec<f64>> {
    let b: Vec<(f64, f64)> = axes
        .iter()
        .map(|a| {
            if a.periodic {
                (a.lo, a.hi)
            } else {
                let m = 0.05 * a.len();
                (a.lo + m, a.hi - m)
            }
        })
        .collect();
    crate::config::sample_box(seed, &b, count)
}

pub fn check_params(axes: &[Axis], u: &[f64]) -> Result<()> {
    if u.len() != axes.len() || !axes.iter().zip(u).all(|(a, &x)| a.contains(x)) {
        return Err(Error::OutOfDomain(u.to_vec()));
    }
    Ok(())
}
