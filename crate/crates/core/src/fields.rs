//! Ambient vector fields.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::VectorField;
use crate::models::{SpaceModel, Warp};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum FieldModel {
    Zero { dim: usize },
    Constant(Vec<f64>),
    /// `ν(x) = x` in a flat chart.
    Position,
    /// `φ(t) ∂_t` on a GRW chart.
    TimeScaled { warp: Warp, dim: usize },
    /// On `−ℝ ×_cosh S^n`: `−sinh t cos θ_1 ∂_t − (sin θ_1 / cosh t) ∂_{θ_1}`,
    /// the projection of a spacelike parallel field of the ambient flat space,
    /// closed conformal with factor `−cosh t cos θ_1`.
    DeSitterTilted { dim: usize },
    Scaled(f64, Box<FieldModel>),
    /// Component expressions in `x0, x1, …`.
    Components(Vec<Expr>),
}

impl VectorField for FieldModel {
    fn eval<S: Scalar>(&self, p: &[S]) -> Vec<S> {
        match self {
            FieldModel::Zero { dim } => vec![S::zero(); *dim],
            FieldModel::Constant(c) => c.iter().map(|&v| S::from_f64(v)).collect(),
            FieldModel::Position => p.to_vec(),
            FieldModel::TimeScaled { warp, dim } => {
                let mut v = vec![S::zero(); *dim];
                v[0] = warp.eval(p[0]);
                v
            }
            FieldModel::DeSitterTilted { dim } => {
                let mut v = vec![S::zero(); *dim];
                let (t, th) = (p[0], p[1]);
                v[0] = -(t.sinh() * th.cos());
                v[1] = -(th.sin() / t.cosh());
                v
            }
            FieldModel::Scaled(s, inner) => inner.eval(p).into_iter().map(|v| v * *s).collect(),
            FieldModel::Components(es) => es.iter().map(|e| e.eval(p)).collect(),
        }
    }
}

impl FieldModel {
    /// The canonical closed conformal field of an ambient: `(φ∘π_I)∂_t` on a
    /// GRW space, the position field on a flat space.
    pub fn canonical(space: &SpaceModel) -> Result<FieldModel> {
        match space {
            SpaceModel::Grw(m) => Ok(FieldModel::TimeScaled {
                warp: m.warp.clone(),
                dim: m.fiber.dim() + 1,
            }),
            SpaceModel::Flat(_) => Ok(FieldModel::Position),
            SpaceModel::Hyperquadric(_) => Err(Error::InvalidArgument(
                "hyperquadric charts carry no canonical field; supply components".into(),
            )),
        }
    }

    pub fn components(srcs: &[String], dim: usize) -> Result<FieldModel> {
        if srcs.len() != dim {
            return Err(Error::ConfigParse(format!(
                "field has {} components, ambient dimension is {dim}",
                srcs.len()
            )));
        }
        let es = srcs
            .iter()
            .map(|s| Expr::parse_indexed(s, "x", dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldModel::Components(es))
    }
}

/// Declared class of a field, as reported by a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldClass {
    NotConformal,
    Conformal,
    Killing,
    ClosedConformal,
    Homothetic,
    Parallel,
}

impl FieldClass {
    pub fn label(self) -> &'static str {
        match self {
            FieldClass::NotConformal => "not_conformal",
            FieldClass::Conformal => "conformal",
            FieldClass::Killing => "killing",
            FieldClass::ClosedConformal => "closed_conformal",
            FieldClass::Homothetic => "homothetic",
            FieldClass::Parallel => "parallel",
        }
    }
}

pub const BUILTIN_FIELDS: &[(&str, &str)] = &[
    ("canonical", "(phi o pi_I) d/dt on a GRW space, x on a flat space"),
    ("de-sitter-tilted", "closed conformal field on de-sitter-grw with factor -cosh t cos theta_1"),
    ("position", "nu(x) = x on a flat space"),
    ("zero", "the zero field"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_space;

    #[test]
    fn canonical_fields() {
        let ds = builtin_space("de-sitter-grw", 2).unwrap();
        let v = FieldModel::canonical(&ds).unwrap();
        let p = [0.4, 1.0, 2.0];
        assert_eq!(v.eval(&p), vec![0.4_f64.cosh(), 0.0, 0.0]);
        let l = builtin_space("minkowski", 2).unwrap();
        assert_eq!(FieldModel::canonical(&l).unwrap(), FieldModel::Position);
    }

    #[test]
    fn component_fields() {
        let f = FieldModel::components(&["x1".into(), "-x0".into()], 2).unwrap();
        assert_eq!(f.eval(&[1.0, 2.0]), vec![2.0, -1.0]);
        assert!(FieldModel::components(&["x1".into()], 2).is_err());
    }
}
