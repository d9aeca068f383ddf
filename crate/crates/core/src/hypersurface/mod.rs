pub mod bernstein;
pub mod frame;
pub mod immersion;
pub mod newton;
pub mod operators;
pub mod support;

pub use frame::{frame_at, FrameData};
pub use immersion::{ExprImmersion, Immersion, InducedSpace};
pub use newton::{newton_identities_check, CurvatureInvariants, NewtonReport};
pub use operators::{lr_apply, shape, shape_operator_at, LrValue, Shape};
pub use bernstein::{bernstein_audit, BernsteinAudit};
pub use support::{support_identities_check, SupportReport};
