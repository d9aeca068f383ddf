//! Numerical verification engine for spacelike hypersurfaces in conformally
//! stationary spacetimes.
//!
//! Layers, bottom up:
//!
//! * [`scalar`], [`diff`], [`linalg`]: nested dual numbers and the small dense
//!   linear algebra used everywhere.
//! * [`geometry`]: charted semi-Riemannian spaces, Levi-Civita connection and
//!   curvature.
//! * [`models`], [`fields`]: flat spaces, GRW warped products, hyperquadrics
//!   and their conformal vector fields.
//! * [`conformal`]: conformal certificates and leaf projection.
//! * [`hypersurface`]: frames, shape operator, Newton transformations, `L_r`,
//!   support-function identities and Bernstein audits.
//! * [`simons`]: the flowed immersion along a closed conformal field.
//! * [`variational`]: normal variations, r-area and Jacobi functionals,
//!   stability probe.
//! * [`runner`]: scenario documents, check catalog, reports.
//!
//! Curvature convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so the
//! sectional curvature `⟨R(X,Y)Y,X⟩ / (⟨X,X⟩⟨Y,Y⟩ − ⟨X,Y⟩²)` is `+1` on de
//! Sitter space. Shape operator: `A(X) = −∇̄_X N` with `N` the future-pointing
//! unit normal, and `nH = −tr A`.

pub mod conformal;
pub mod config;
pub mod diff;
pub mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod hypersurface;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod par;
pub mod quadrature;
pub mod runner;
pub mod scalar;
pub mod simons;
pub mod variational;

pub use error::{Error, Result};
pub use scalar::{Dual, Scalar};
