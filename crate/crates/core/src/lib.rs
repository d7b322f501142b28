//! Nonhomogeneous expanding curvature flows of star-shaped, mean-convex
//! hypersurfaces in real, complex and quaternionic hyperbolic space.
//!
//! The flow `∂F/∂t = ν/ψ(H)` is reduced by symmetry to a scalar parabolic
//! equation on `[0, π]` and integrated with an explicit four-stage scheme.
//! The [`diagnostics`] module turns trajectories into decay rates, masses and
//! limit classifications.

pub mod ambient;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod speed;

pub use ambient::{make_ambient, AmbientSpace, FieldKind};
pub use flow::{Flow, FlowState, Hooks, StepControl};
pub use error::{HypflowError, Result};
pub use geometry::{geometry_slice, GeometrySlice, RadialProfile};
pub use grid::{ReducedGrid, StencilOrder};
pub use speed::{validate_speed, SpeedFunction, ValidationReport};
