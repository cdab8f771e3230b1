//! Singularity analysis: Gaussian densities, density ratios, parabolic rescalings,
//! cone decompositions, angle spectra and the monotonicity lemmas of the ellipse family.

mod cones;
mod density;
mod lemmas;
mod rescale;
mod spectrum;

pub use cones::{
    cone_decomposition, decompose, direction_error, ConeComponent, ConeDecomposition,
    RAY_PAIRING_TOLERANCE,
};
pub use density::{
    bessel_i0e, gaussian_density, local_density_ratio, monotonicity_check, DensityRatio,
    DensitySample, MonotonicityReport, MONOTONICITY_TOLERANCE,
};
pub use lemmas::{
    lemma_suite, off_origin_ratios, quadrant_monotonicity, rescaled_ratio, rescaled_ratio_check,
    LemmaCheck, LemmaSuite, QuadrantReport, RatioSampling, DEFECT_TOLERANCE, QUADRANT_TOLERANCE,
    RADIAL_RATE_TOLERANCE, RATIO_BOUND, RESCALED_RATIO_RADIUS, RESCALED_RATIO_TARGET,
};
pub use rescale::{
    clip_to_disk, horizon, interpolate_state, normalized_rescaling, rescale_flow, RescaledCurve,
    DEFAULT_WINDOW,
};
pub use spectrum::{angle_spectrum, AngleSpectrum};
