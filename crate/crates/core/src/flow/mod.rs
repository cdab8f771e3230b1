//! Time integration of the equivariant flow.
//!
//! Two discretizations of the same dynamics are provided: the parametric law
//! `dγ/dt = k − x⊥/|x|²` on a sampled curve ([`evolve`]) and the radial-graph law
//! for `γ(s) = r(s) e^{is}` ([`radial_evolve`]).

mod diagnostics;
mod parametric;
mod radial;
mod singularity;

use serde::{Deserialize, Serialize};

pub use diagnostics::{
    diagnostics_csv, read_diagnostics_csv, write_diagnostics_csv, DiagnosticsRow, DIAGNOSTICS_HEADER,
};
pub use parametric::{evolve, step, velocity};
pub use radial::{radial_evolve, radial_rhs, RadialConfig, RadialEvolution, RadialProfile};
pub use singularity::{estimate_singular_time, SingularTimeEstimate, SingularityReport, Trigger};

use crate::error::Result;
use crate::geometry::{antipodal_defect, PlaneCurve};
use crate::lagrangian::MonotoneData;

/// Curves are treated as antipodally symmetric when the defect is below this fraction
/// of their bounding-box diagonal.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// One instant of the flow. Several curves may be evolved together with a common
/// time step; they do not interact.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub curves: Vec<PlaneCurve>,
    pub t: f64,
    /// Monotonicity constant of the initial data, when every curve is closed and the
    /// combined Maslov integral is non-zero.
    pub initial_constant: Option<f64>,
    pub step_index: u64,
    /// Size of the step that produced this state (0 for the initial state).
    pub last_dt: f64,
    /// Every curve is closed and preserved by the antipodal map.
    pub symmetric: bool,
}

impl FlowState {
    pub fn new(curves: Vec<PlaneCurve>) -> Result<Self> {
        let initial_constant = combined_constant(&curves);
        let symmetric = curves.iter().all(|c| {
            c.is_closed()
                && antipodal_defect(c)
                    .map(|d| d <= SYMMETRY_TOLERANCE * c.bbox_diagonal())
                    .unwrap_or(false)
        });
        Ok(FlowState {
            curves,
            t: 0.0,
            initial_constant,
            step_index: 0,
            last_dt: 0.0,
            symmetric,
        })
    }

    pub fn single(curve: PlaneCurve) -> Result<Self> {
        Self::new(vec![curve])
    }

    /// The first curve; most scenarios carry exactly one.
    pub fn curve(&self) -> &PlaneCurve {
        &self.curves[0]
    }

    pub fn min_radius(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.min_radius().1)
            .fold(f64::INFINITY, f64::min)
    }

    /// Min |x| over the closed curves only; open fixtures may pass through the origin.
    pub fn closed_min_radius(&self) -> f64 {
        self.curves
            .iter()
            .filter(|c| c.is_closed())
            .map(|c| c.min_radius().1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn node_count(&self) -> usize {
        self.curves.iter().map(PlaneCurve::node_count).sum()
    }

    /// Diameter of the union of all curve nodes.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<_> = self.curves.iter().flat_map(|c| c.points().iter().copied()).collect();
        let mut best = 0.0_f64;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max(a.distance(*b));
            }
        }
        best
    }
}

fn combined_constant(curves: &[PlaneCurve]) -> Option<f64> {
    if !curves.iter().all(PlaneCurve::is_closed) {
        return None;
    }
    let (mut lam, mut mas) = (0.0, 0.0);
    for c in curves {
        let d = MonotoneData::of(c).ok()?;
        lam += d.liouville_integral;
        mas += d.maslov_integral;
    }
    (mas != 0.0).then(|| lam / mas)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ForwardEuler,
    /// Two-stage explicit (Heun) update.
    Heun,
}

/// Controls a single explicit step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    pub scheme: Scheme,
    /// Fraction of the stability bound used as time step, in (0, 1].
    pub safety: f64,
    pub dt_min: f64,
    /// Resample to equal arclength every this many steps; 0 disables redistribution.
    pub redistribute_every: u64,
    /// Re-project onto antipodally symmetric curves after each step when the state is symmetric.
    pub symmetrize: bool,
    /// Overrides the adaptive step.
    pub fixed_dt: Option<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            scheme: Scheme::ForwardEuler,
            safety: 0.2,
            dt_min: 1e-14,
            redistribute_every: 10,
            symmetrize: true,
            fixed_dt: None,
        }
    }
}

/// When an evolution stops before `t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopConditions {
    pub t_end: f64,
    /// Origin contact when min |x| drops below this fraction of the initial diameter.
    pub origin_contact_fraction: f64,
    /// Curvature blow-up when max κ × min node spacing exceeds this value.
    pub curvature_resolution_limit: f64,
    pub max_steps: Option<u64>,
}

impl Default for StopConditions {
    fn default() -> Self {
        StopConditions {
            t_end: 1.0,
            origin_contact_fraction: 0.005,
            curvature_resolution_limit: 1.0,
            max_steps: None,
        }
    }
}

/// Recording cadence: uniform in time, refined geometrically near the estimated
/// singular time so that records are spaced by at most `geometric_fraction · (T_est − t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cadence {
    pub interval: f64,
    pub geometric_fraction: f64,
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence {
            interval: 0.01,
            geometric_fraction: 0.05,
        }
    }
}

impl Cadence {
    pub(crate) fn spacing(&self, t: f64, t_est: Option<f64>) -> f64 {
        match t_est {
            Some(tt) if tt > t && self.geometric_fraction > 0.0 => {
                self.interval.min(self.geometric_fraction * (tt - t))
            }
            _ => self.interval,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub step: StepConfig,
    pub stop: StopConditions,
    pub snapshots: Cadence,
    pub diagnostics: Cadence,
    /// Reference time of the Gaussian density column; defaults to c/2 when the
    /// monotonicity constant exists, else `t_end + 1`.
    pub density_reference_time: Option<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            step: StepConfig::default(),
            stop: StopConditions::default(),
            snapshots: Cadence::default(),
            diagnostics: Cadence {
                interval: 0.002,
                geometric_fraction: 0.01,
            },
            density_reference_time: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ReachedEnd,
    Singular,
    StepLimit,
}

/// Output of [`evolve`]: recorded snapshots, diagnostics series and the stop report.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub trajectory: Vec<FlowState>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub report: SingularityReport,
    pub outcome: Outcome,
    pub initial_diameter: f64,
    pub steps: u64,
}

impl Evolution {
    pub fn final_state(&self) -> &FlowState {
        self.trajectory.last().expect("trajectory holds the initial state")
    }

    /// (t, min |x|) pairs from the diagnostics series.
    pub fn min_radius_series(&self) -> Vec<(f64, f64)> {
        self.diagnostics.iter().map(|r| (r.t, r.min_radius)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.trajectory.iter().map(|s| s.t).collect()
    }
}
