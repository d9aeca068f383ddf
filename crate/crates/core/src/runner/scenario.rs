//! Scenario documents and their resolution into live objects.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::FieldModel;
use crate::geometry::ChartedSpace;
use crate::hypersurface::immersion::ExprImmersion;
use crate::models::{builtin_space, make_flat, make_grw, Fiber, SpaceModel, Warp};
use crate::quadrature::Axis;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    pub ambient: AmbientSpec,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub immersions: Vec<ImmersionSpec>,
    #[serde(default)]
    pub mesh: MeshSpec,
    /// Overrides every check's primary tolerance unless the check sets its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_tol: Option<f64>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmbientSpec {
    /// A name from [`crate::models::BUILTIN_SPACES`]; `n` is the fiber dimension.
    Builtin { name: String, n: usize },
    /// `−I ×_φ F`; `null` interval ends are infinite.
    Grw { interval: (Option<f64>, Option<f64>), warp: String, fiber: FiberSpec },
    Flat { dim: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberSpec {
    Sphere { n: usize },
    Hyperbolic { n: usize },
    Flat { n: usize },
    /// `e^{2f(y)} δ` with `f` in `y0, y1, …`.
    Conformal { n: usize, log_factor: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ImmersionSpec {
    pub name: String,
    /// One of [`FIXTURES`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<f64>,
    /// Component expressions in `u0, u1, …`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<AxisSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Quadrature counts per parameter axis; checks may override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<usize>>,
    /// Random sample points per pointwise check.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    8
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { counts: None, samples: default_samples() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Catalog name, identical to the library operation it runs.
    pub check: String,
    /// Report name; defaults to `check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub args: Map<String, Value>,
    /// Pass when the operation fails with this error kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_error: Option<String>,
    /// Error kinds that turn the check into a skip.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skip_on: Vec<String>,
    /// Unconditional skip with this reason.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip: Option<String>,
}

impl CheckSpec {
    pub fn new(check: &str) -> CheckSpec {
        CheckSpec {
            check: check.into(),
            label: None,
            tol: None,
            fd_tol: None,
            args: Map::new(),
            expect_error: None,
            skip_on: Vec::new(),
            skip: None,
        }
    }

    pub fn arg(mut self, key: &str, v: impl Into<Value>) -> CheckSpec {
        self.args.insert(key.into(), v.into());
        self
    }

    pub fn label(mut self, l: &str) -> CheckSpec {
        self.label = Some(l.into());
        self
    }

    pub fn tol(mut self, t: f64) -> CheckSpec {
        self.tol = Some(t);
        self
    }

    pub fn expect_error(mut self, kind: &str) -> CheckSpec {
        self.expect_error = Some(kind.into());
        self
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.check)
    }
}

/// Built-in immersion fixtures and their parameters.
pub const FIXTURES: &[(&str, &str)] = &[
    ("fiber-circle", "circle of colatitude theta0 in {t0} x S^2 (t0, theta0)"),
    ("fiber-line", "coordinate line y = (u, 0) in {t0} x F^2 (t0)"),
    ("flat-hyperplane", "x_(n+1) = height in a flat space (height)"),
    ("grw-slice", "{t0} x F in a GRW space (t0)"),
    ("hyperboloid-graph", "upper hyperboloid graph with an optional Gaussian bump (bump)"),
];

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::ConfigParse(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// A scenario with every name resolved.
pub struct Context {
    pub space: SpaceModel,
    pub fields: BTreeMap<String, FieldModel>,
    pub immersions: BTreeMap<String, ExprImmersion>,
    pub seed: u64,
    pub mesh: MeshSpec,
}

impl Context {
    pub fn field(&self, name: &str) -> Result<&FieldModel> {
        self.fields.get(name).ok_or_else(|| Error::UnresolvedReference(format!("field `{name}`")))
    }

    pub fn immersion(&self, name: &str) -> Result<&ExprImmersion> {
        self.immersions.get(name).ok_or_else(|| Error::UnresolvedReference(format!("immersion `{name}`")))
    }
}

fn fiber_of(spec: &FiberSpec) -> Result<Fiber> {
    Ok(match spec {
        FiberSpec::Sphere { n } => Fiber::Sphere { n: *n },
        FiberSpec::Hyperbolic { n } => Fiber::Hyperbolic { n: *n },
        FiberSpec::Flat { n } => Fiber::Flat { n: *n },
        FiberSpec::Conformal { n, log_factor } => {
            Fiber::Conformal { n: *n, log_factor: Expr::parse_indexed(log_factor, "y", *n)? }
        }
    })
}

pub fn resolve_ambient(spec: &AmbientSpec) -> Result<SpaceModel> {
    match spec {
        AmbientSpec::Builtin { name, n } => builtin_space(name, *n).map_err(|e| match e {
            Error::UnresolvedReference(s) => Error::UnresolvedReference(format!("ambient `{s}`")),
            other => other,
        }),
        AmbientSpec::Grw { interval, warp, fiber } => {
            let lo = interval.0.unwrap_or(f64::NEG_INFINITY);
            let hi = interval.1.unwrap_or(f64::INFINITY);
            Ok(SpaceModel::Grw(make_grw((lo, hi), Warp::parse(warp)?, fiber_of(fiber)?)?))
        }
        AmbientSpec::Flat { dim, index } => Ok(SpaceModel::Flat(make_flat(*dim, *index)?)),
    }
}

pub fn resolve_field(spec: &FieldSpec, space: &SpaceModel) -> Result<FieldModel> {
    let dim = space.dim();
    let sources = [spec.builtin.is_some(), spec.components.is_some(), spec.constant.is_some()];
    if sources.iter().filter(|b| **b).count() != 1 {
        return Err(Error::ConfigParse(format!(
            "field `{}` needs exactly one of builtin, components, constant",
            spec.name
        )));
    }
    let base = if let Some(b) = &spec.builtin {
        match b.as_str() {
            "canonical" => FieldModel::canonical(space)?,
            "position" => FieldModel::Position,
            "zero" => FieldModel::Zero { dim },
            "de-sitter-tilted" => FieldModel::DeSitterTilted { dim },
            other => return Err(Error::UnresolvedReference(format!("builtin field `{other}`"))),
        }
    } else if let Some(c) = &spec.components {
        FieldModel::components(c, dim)?
    } else {
        let c = spec.constant.clone().unwrap_or_default();
        if c.len() != dim {
            return Err(Error::ConfigParse(format!("field `{}` has {} components, expected {dim}", spec.name, c.len())));
        }
        FieldModel::Constant(c)
    };
    Ok(match spec.scale {
        Some(s) => FieldModel::Scaled(s, Box::new(base)),
        None => base,
    })
}

pub fn resolve_immersion(spec: &ImmersionSpec, space: &SpaceModel) -> Result<ExprImmersion> {
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| Error::ConfigParse(format!("immersion `{}` needs `{what}`", spec.name)))
    };
    match (&spec.fixture, &spec.components) {
        (Some(f), None) => Ok(match f.as_str() {
            "grw-slice" => {
                let grw = space
                    .as_grw()
                    .ok_or_else(|| Error::ConfigParse("grw-slice needs a GRW ambient".into()))?;
                let t0 = need(spec.t0, "t0")?;
                if !grw.in_interval(t0) {
                    return Err(Error::OutOfInterval(t0));
                }
                ExprImmersion::grw_slice(t0, &grw.fiber)
            }
            "flat-hyperplane" => ExprImmersion::flat_hyperplane(space.dim() - 1, spec.height.unwrap_or(0.0)),
            "hyperboloid-graph" => ExprImmersion::hyperboloid_graph(space.dim() - 1, spec.bump.unwrap_or(0.0)),
            "fiber-circle" => ExprImmersion::fiber_circle(need(spec.t0, "t0")?, need(spec.theta0, "theta0")?),
            "fiber-line" => ExprImmersion::fiber_line(need(spec.t0, "t0")?),
            other => return Err(Error::UnresolvedReference(format!("fixture `{other}`"))),
        }),
        (None, Some(c)) => {
            let axes = spec
                .axes
                .as_ref()
                .ok_or_else(|| Error::ConfigParse(format!("immersion `{}` needs `axes`", spec.name)))?
                .iter()
                .map(|a| if a.periodic { Axis::periodic(a.lo, a.hi) } else { Axis::new(a.lo, a.hi) })
                .collect();
            if c.len() != space.dim() {
                return Err(Error::ConfigParse(format!(
                    "immersion `{}` has {} components, ambient dimension is {}",
                    spec.name,
                    c.len(),
                    space.dim()
                )));
            }
            ExprImmersion::parse(c, axes)
        }
        _ => Err(Error::ConfigParse(format!("immersion `{}` needs exactly one of fixture, components", spec.name))),
    }
}

/// Builds the context, rejecting duplicate names.
pub fn resolve(s: &Scenario) -> Result<Context> {
    let space = resolve_ambient(&s.ambient)?;
    let mut fields = BTreeMap::new();
    for f in &s.fields {
        if fields.insert(f.name.clone(), resolve_field(f, &space)?).is_some() {
            return Err(Error::ConfigParse(format!("duplicate field `{}`", f.name)));
        }
    }
    let mut immersions = BTreeMap::new();
    for i in &s.immersions {
        if immersions.insert(i.name.clone(), resolve_immersion(i, &space)?).is_some() {
            return Err(Error::ConfigParse(format!("duplicate immersion `{}`", i.name)));
        }
    }
    if s.mesh.samples == 0 {
        return Err(Error::ConfigParse("mesh.samples must be positive".into()));
    }
    Ok(Context { space, fields, immersions, seed: s.seed, mesh: s.mesh.clone() })
}
