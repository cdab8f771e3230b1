//! Discrete closed and open plane curves and their differential geometry.

mod curve;
pub mod snapshot;
pub(crate) mod spline;
pub(crate) mod stencil;
mod vec2;

pub use curve::{
    antipodal_defect, compute_frame, enclosed_area, normal_projection, resample, FrameData,
    PlaneCurve, DEGENERACY_RATIO, MIN_CLOSED_NODES,
};
pub(crate) use curve::symmetrize_antipodal;
pub use vec2::Vec2;
