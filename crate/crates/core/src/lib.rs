//! Numerical laboratory for equivariant Lagrangian mean curvature flow in C².
//!
//! A rotationally equivariant Lagrangian surface `L = {(γ cos α, γ sin α)}` is
//! represented by its profile curve γ in the plane. The crate evolves γ under the
//! reduced flow `dγ/dt = k − x⊥/|x|²`, tracks the monotone invariants (Liouville and
//! Maslov integrals), detects finite-time singularities and analyzes tangent flows
//! through Gaussian densities, parabolic rescalings and cone decompositions.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod lagrangian;

pub use error::{Error, Result};
pub use geometry::{PlaneCurve, Vec2};
