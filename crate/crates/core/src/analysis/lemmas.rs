use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::density::{local_density_ratio, DensityRatio};
use super::rescale::interpolate_state;
use crate::error::Result;
use crate::flow::{radial_rhs, DiagnosticsRow, FlowState, RadialProfile};
use crate::geometry::snapshot::fmt_num;
use crate::geometry::{PlaneCurve, Vec2};

/// Relative tolerance (of max r) for the quadrant sign conditions.
pub const QUADRANT_TOLERANCE: f64 = 1e-6;
/// Largest admissible dr/dt.
pub const RADIAL_RATE_TOLERANCE: f64 = 1e-6;
/// Bound on off-origin density ratios.
pub const RATIO_BOUND: f64 = 1.55;
/// Bound on the monotone defect relative to the initial constant.
pub const DEFECT_TOLERANCE: f64 = 5e-3;
/// Lower target for the density ratio at the singular point of a rescaled pinch.
pub const RESCALED_RATIO_TARGET: f64 = 1.9;
/// Disk radius, in rescaled units, of the rescaled ratio.
pub const RESCALED_RATIO_RADIUS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantReport {
    pub pass: bool,
    /// Largest sign violation of a grid difference, in units of r.
    pub worst_violation: f64,
    /// Grid interval `[s_j, s_{j+1}]` of the worst violation.
    pub worst_node: usize,
}

/// Checks that r is nonincreasing on [0, π/2] and [π, 3π/2] and nondecreasing on the
/// other two quadrants, interval by interval on the grid. Intervals that straddle a
/// quadrant boundary are skipped.
pub fn quadrant_monotonicity(profile: &RadialProfile) -> QuadrantReport {
    let n = profile.len();
    let tol = QUADRANT_TOLERANCE * profile.max_radius();
    let quarter = PI / 2.0;
    let mut worst = 0.0_f64;
    let mut worst_node = 0;
    for j in 0..n {
        let (s0, s1) = (profile.angle(j), profile.angle(j + 1));
        let q = (s0 / quarter + 1e-9).floor();
        if s1 > (q + 1.0) * quarter * (1.0 + 1e-12) + 1e-12 {
            continue;
        }
        let d = profile.r[(j + 1) % n] - profile.r[j];
        let violation = if (q as usize) % 2 == 0 { d } else { -d };
        if violation > worst {
            worst = violation;
            worst_node = j;
        }
    }
    QuadrantReport {
        pass: worst <= tol,
        worst_violation: worst,
        worst_node,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub pass: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuite {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuite {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::from("check,pass,worst,threshold,detail\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},\"{}\"",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                fmt_num(c.worst),
                fmt_num(c.threshold),
                c.detail.replace('"', "'")
            );
        }
        s
    }
}

/// Sampling of off-origin density ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatioSampling {
    /// Only nodes with |x| above this radius are used as centers.
    pub min_radius: f64,
    /// Disk radius as a fraction of |x₀|.
    pub delta_fraction: f64,
    /// Upper bound on the disk radius.
    pub delta_max: f64,
    /// Use every this many nodes as a center.
    pub stride: usize,
}

impl Default for RatioSampling {
    fn default() -> Self {
        RatioSampling {
            min_radius: 0.05,
            delta_fraction: 0.5,
            delta_max: 0.25,
            stride: 4,
        }
    }
}

/// Worst off-origin ratio over curve nodes of one state; under-resolved disks are skipped.
pub fn off_origin_ratios(curves: &[PlaneCurve], sampling: &RatioSampling) -> (Option<DensityRatio>, usize) {
    let mut worst: Option<DensityRatio> = None;
    let mut skipped = 0;
    for c in curves {
        for x0 in c.points().iter().step_by(sampling.stride.max(1)) {
            let r = x0.norm();
            if r <= sampling.min_radius {
                continue;
            }
            let delta = (sampling.delta_fraction * r).min(sampling.delta_max);
            let ratio = local_density_ratio(curves, *x0, delta);
            if ratio.under_resolved {
                skipped += 1;
                continue;
            }
            if worst.map_or(true, |w| ratio.value > w.value) {
                worst = Some(ratio);
            }
        }
    }
    (worst, skipped)
}

/// Density ratio at the origin of the σ-rescaled curve `σ(γ_{T+s/σ²} − x₀)`, on the
/// disk of the given radius (in rescaled units).
pub fn rescaled_ratio(
    trajectory: &[FlowState],
    x0: Vec2,
    reference_time: f64,
    sigma: f64,
    s: f64,
    radius: f64,
) -> Result<DensityRatio> {
    let t = reference_time + s / (sigma * sigma);
    let curves: Vec<PlaneCurve> = interpolate_state(trajectory, t)?
        .iter()
        .map(|c| c.translated(-x0).scaled(sigma))
        .collect();
    Ok(local_density_ratio(&curves, Vec2::ZERO, radius))
}

/// Largest [`rescaled_ratio`] at radius [`RESCALED_RATIO_RADIUS`] over the given
/// scales, checked against [`RESCALED_RATIO_TARGET`]. Scales outside the recorded
/// trajectory are reported in the detail and skipped.
pub fn rescaled_ratio_check(
    trajectory: &[FlowState],
    x0: Vec2,
    reference_time: f64,
    sigmas: &[f64],
    s: f64,
) -> LemmaCheck {
    let mut best: Option<(f64, f64)> = None;
    let mut parts = Vec::new();
    for &sigma in sigmas {
        match rescaled_ratio(trajectory, x0, reference_time, sigma, s, RESCALED_RATIO_RADIUS) {
            Ok(r) => {
                parts.push(format!("sigma {sigma}: {:.4}", r.value));
                if best.map_or(true, |(_, v)| r.value > v) {
                    best = Some((sigma, r.value));
                }
            }
            Err(e) => parts.push(format!("sigma {sigma}: {e}")),
        }
    }
    let value = best.map_or(f64::NAN, |b| b.1);
    LemmaCheck {
        name: "rescaled_ratio".into(),
        pass: value >= RESCALED_RATIO_TARGET,
        worst: value,
        threshold: RESCALED_RATIO_TARGET,
        detail: format!("s = {s}, radius {RESCALED_RATIO_RADIUS}; {}", parts.join("; ")),
    }
}

fn radial_profile(state: &FlowState) -> Result<RadialProfile> {
    let c = state.curve();
    RadialProfile::from_curve(c, c.node_count(), state.t)
}

/// The four checks on a simulated trajectory: the monotone defect series, dr/dt ≤ 0
/// and the quadrant sign conditions on the polar profiles of every recorded state,
/// and the off-origin density-ratio bound.
pub fn lemma_suite(
    trajectory: &[FlowState],
    diagnostics: &[DiagnosticsRow],
    sampling: &RatioSampling,
) -> LemmaSuite {
    let mut checks = Vec::new();

    let c = trajectory.first().and_then(|s| s.initial_constant);
    let defect = diagnostics
        .iter()
        .map(|r| r.monotone_defect)
        .filter(|d| !d.is_nan())
        .fold(0.0_f64, f64::max);
    let scale = c.unwrap_or(f64::NAN).abs();
    checks.push(LemmaCheck {
        name: "monotone_defect".into(),
        pass: c.is_some() && defect <= DEFECT_TOLERANCE * scale,
        worst: defect / scale,
        threshold: DEFECT_TOLERANCE,
        detail: "max |[λ] − (c − 2t)[dθ]| / |[dθ]| over c".into(),
    });

    let mut rate = f64::NEG_INFINITY;
    let mut rate_detail = String::new();
    let mut quad_pass = true;
    let mut quad = QuadrantReport {
        pass: true,
        worst_violation: 0.0,
        worst_node: 0,
    };
    let mut quad_t = 0.0;
    let mut graph_failure = None;
    for state in trajectory {
        let profile = match radial_profile(state) {
            Ok(p) => p,
            Err(e) => {
                graph_failure.get_or_insert(format!("t = {}: {e}", state.t));
                continue;
            }
        };
        if let Ok(v) = radial_rhs(&profile) {
            let (j, m) = v
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bj, bm), (j, x)| if *x > bm { (j, *x) } else { (bj, bm) });
            if m > rate {
                rate = m;
                rate_detail = format!("max dr/dt at t = {}, s = {}", state.t, profile.angle(j));
            }
        }
        let q = quadrant_monotonicity(&profile);
        quad_pass &= q.pass;
        if q.worst_violation > quad.worst_violation {
            quad = q;
            quad_t = state.t;
        }
    }
    let failure = graph_failure.clone();
    checks.push(LemmaCheck {
        name: "radial_rate".into(),
        pass: failure.is_none() && rate <= RADIAL_RATE_TOLERANCE,
        worst: rate,
        threshold: RADIAL_RATE_TOLERANCE,
        detail: failure.clone().unwrap_or(rate_detail),
    });
    checks.push(LemmaCheck {
        name: "quadrant_monotonicity".into(),
        pass: failure.is_none() && quad_pass,
        worst: quad.worst_violation,
        threshold: QUADRANT_TOLERANCE,
        detail: failure.unwrap_or_else(|| {
            format!("worst at t = {quad_t}, grid interval {}", quad.worst_node)
        }),
    });

    let mut worst_ratio: Option<(f64, DensityRatio)> = None;
    let mut skipped = 0;
    for state in trajectory {
        let (w, k) = off_origin_ratios(&state.curves, sampling);
        skipped += k;
        if let Some(w) = w {
            if worst_ratio.map_or(true, |(_, b)| w.value > b.value) {
                worst_ratio = Some((state.t, w));
            }
        }
    }
    let (value, detail) = match worst_ratio {
        Some((t, r)) => (
            r.value,
            format!(
                "worst at t = {t}, x0 = ({}, {}), delta = {}; {skipped} under-resolved disks skipped",
                r.x0.x, r.x0.y, r.delta
            ),
        ),
        None => (f64::NAN, "no resolved off-origin disk".into()),
    };
    checks.push(LemmaCheck {
        name: "density_ratio_bound".into(),
        pass: value <= RATIO_BOUND,
        worst: value,
        threshold: RATIO_BOUND,
        detail,
    });
    LemmaSuite { checks }
}
