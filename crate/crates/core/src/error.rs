use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0:?} lies outside the chart domain")]
    OutOfDomain(Vec<f64>),
    #[error("metric signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("differentiation backend supports order {available}, operation needs {required}")]
    BackendOrderTooLow { required: u8, available: u8 },
    #[error("degenerate 2-plane: |discriminant| = {0:e}")]
    DegeneratePlane(f64),
    #[error("unsupported metric index {0} (expected 1 or 2)")]
    UnsupportedIndex(usize),
    #[error("warping function is not positive at t = {0}")]
    NonpositiveWarp(f64),
    #[error("fiber does not declare a constant sectional curvature")]
    FiberCurvatureUnknown,
    #[error("t0 = {0} lies outside the base interval")]
    OutOfInterval(f64),
    #[error("sample set is empty")]
    SampleSetEmpty,
    #[error("vector field is not timelike: <V,V> = {0:e}")]
    NotTimelike(f64),
    #[error("vector field is not closed conformal (residual {0:e})")]
    NotClosedConformal(f64),
    #[error("vector field is singular: {0}")]
    SingularV(String),
    #[error("immersion is not a leaf of the orthogonal distribution (|<dx,V>| = {0:e})")]
    NotOrthogonalLeaf(f64),
    #[error("immersion is not spacelike at {0:?}")]
    NotSpacelike(Vec<f64>),
    #[error("immersion Jacobian is degenerate at {0:?}")]
    DegenerateJacobian(Vec<f64>),
    #[error("normal and field have opposite time orientation (f_V = {0:e})")]
    TimeOrientationClash(f64),
    #[error("quadrature too coarse: Richardson disagreement {0:e}")]
    QuadratureTooCoarse(f64),
    #[error("trajectory left the chart at flow time {0}")]
    LeftChart(f64),
    #[error("integrator diverged: {0}")]
    IntegratorDivergence(String),
    #[error("conformal factor vanishes on the base (|psi| = {0:e})")]
    ConformalFactorVanishes(f64),
    #[error("curvature hypothesis unverified: {0}")]
    HypothesisUnverified(String),
    #[error("ambient is not of constant sectional curvature (spread {0:e})")]
    AmbientNotConstantCurvature(f64),
    #[error("H_(r+1) is not constant on the base (spread {0:e})")]
    NotConstantHr1(f64),
    #[error("configuration parse error: {0}")]
    ConfigParse(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("unresolved reference `{0}`")]
    UnresolvedReference(String),
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Variant name, used by scenario documents to name expected failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::SignatureMismatch { .. } => "SignatureMismatch",
            Error::BackendOrderTooLow { .. } => "BackendOrderTooLow",
            Error::DegeneratePlane { .. } => "DegeneratePlane",
            Error::UnsupportedIndex { .. } => "UnsupportedIndex",
            Error::NonpositiveWarp { .. } => "NonpositiveWarp",
            Error::FiberCurvatureUnknown { .. } => "FiberCurvatureUnknown",
            Error::OutOfInterval { .. } => "OutOfInterval",
            Error::SampleSetEmpty { .. } => "SampleSetEmpty",
            Error::NotTimelike { .. } => "NotTimelike",
            Error::NotClosedConformal { .. } => "NotClosedConformal",
            Error::SingularV { .. } => "SingularV",
            Error::NotOrthogonalLeaf { .. } => "NotOrthogonalLeaf",
            Error::NotSpacelike { .. } => "NotSpacelike",
            Error::DegenerateJacobian { .. } => "DegenerateJacobian",
            Error::TimeOrientationClash { .. } => "TimeOrientationClash",
            Error::QuadratureTooCoarse { .. } => "QuadratureTooCoarse",
            Error::LeftChart { .. } => "LeftChart",
            Error::IntegratorDivergence { .. } => "IntegratorDivergence",
            Error::ConformalFactorVanishes { .. } => "ConformalFactorVanishes",
            Error::HypothesisUnverified { .. } => "HypothesisUnverified",
            Error::AmbientNotConstantCurvature { .. } => "AmbientNotConstantCurvature",
            Error::NotConstantHr1 { .. } => "NotConstantHr1",
            Error::ConfigParse { .. } => "ConfigParse",
            Error::UnknownCheck { .. } => "UnknownCheck",
            Error::UnresolvedReference { .. } => "UnresolvedReference",
            Error::UnsupportedFormat { .. } => "UnsupportedFormat",
            Error::InvalidArgument { .. } => "InvalidArgument",
        }
    }

    /// Configuration and usage errors map to exit status 2.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse(_)
                | Error::UnknownCheck(_)
                | Error::UnresolvedReference(_)
                | Error::UnsupportedFormat(_)
                | Error::InvalidArgument(_)
        )
    }
}
