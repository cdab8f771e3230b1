use std::f64::consts::TAU;

use super::{estimate_singular_time, Cadence, Outcome, SingularityReport, Trigger};
use crate::error::{Error, Result};
use crate::geometry::stencil;
use crate::geometry::{PlaneCurve, Vec2};

/// A star-shaped curve `γ(s) = r(s) e^{is}` sampled on a uniform periodic grid in s.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub t: f64,
}

impl RadialProfile {
    pub fn new(r: Vec<f64>, t: f64) -> Result<Self> {
        if r.len() < 16 {
            return Err(Error::Configuration(format!(
                "radial profile needs at least 16 nodes, got {}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Configuration(format!("radius at node {j} is not positive")));
        }
        Ok(RadialProfile { r, t })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|j| f(TAU * j as f64 / n as f64)).collect(), 0.0)
    }

    /// Polar radius of the ellipse with semi-axes `a` (along x) and `b`.
    pub fn ellipse(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(n, |s| a * b / (b * b * s.cos().powi(2) + a * a * s.sin().powi(2)).sqrt())
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn grid_spacing(&self) -> f64 {
        TAU / self.r.len() as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        self.grid_spacing() * j as f64
    }

    pub fn min_radius(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_curve(&self) -> Result<PlaneCurve> {
        PlaneCurve::closed(
            self.r
                .iter()
                .enumerate()
                .map(|(j, r)| Vec2::from_angle(self.angle(j)) * *r)
                .collect(),
        )
    }

    /// Samples a counterclockwise star-shaped closed curve along the rays `s_j = 2πj/n`.
    pub fn from_curve(curve: &PlaneCurve, n: usize, t: f64) -> Result<Self> {
        if !curve.is_closed() {
            return Err(Error::Configuration("radial profile needs a closed curve".into()));
        }
        let sp = curve.spline()?;
        let pts = curve.points();
        let m = pts.len();
        // unwrapped polar angle at the nodes; must increase strictly
        let mut psi = Vec::with_capacity(m + 1);
        psi.push(pts[0].arg());
        for i in 0..m {
            let a = pts[i];
            let b = pts[(i + 1) % m];
            let d = a.cross(b).atan2(a.dot(b));
            if !(d > 0.0) {
                return Err(Error::Domain(format!(
                    "curve is not a radial graph about the origin near node {i}"
                )));
            }
            psi.push(psi[i] + d);
        }
        if (psi[m] - psi[0] - TAU).abs() > 1e-6 {
            return Err(Error::Domain("curve does not wind once around the origin".into()));
        }
        let mut r = Vec::with_capacity(n);
        for j in 0..n {
            let s = TAU * j as f64 / n as f64;
            let target = psi[0] + (s - psi[0]).rem_euclid(TAU);
            let seg = (psi.partition_point(|v| *v <= target).max(1) - 1).min(m - 1);
            // bisection in the local coordinate of the segment
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            let base = psi[seg];
            let angle_at = |tau: f64| {
                let p = sp.eval(seg, tau);
                base + (pts[seg].cross(p)).atan2(pts[seg].dot(p))
            };
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if angle_at(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            r.push(sp.eval(seg, 0.5 * (lo + hi)).norm());
        }
        RadialProfile::new(r, t)
    }

    fn derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.grid_spacing();
        let (d1, d2) = stencil::derivatives(&self.r, true);
        (
            d1.into_iter().map(|v| v / h).collect(),
            d2.into_iter().map(|v| v / (h * h)).collect(),
        )
    }

    fn check_origin(&self) -> Result<()> {
        let threshold = 1e-12 * self.max_radius();
        match self
            .r
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > threshold))
        {
            Some((j, v)) => Err(Error::OriginContact {
                node: j,
                distance: *v,
            }),
            None => Ok(()),
        }
    }

    fn symmetrize(&mut self) {
        let n = self.r.len();
        let half = n / 2;
        for j in 0..half {
            let avg = 0.5 * (self.r[j] + self.r[j + half]);
            self.r[j] = avg;
            self.r[j + half] = avg;
        }
    }

    fn is_symmetric(&self) -> bool {
        let n = self.r.len();
        n % 2 == 0
            && (0..n / 2).all(|j| (self.r[j] - self.r[j + n / 2]).abs() <= 1e-10 * self.max_radius())
    }
}

/// `dr/dt = (r r″ − 2r² − 3r′²) / (r r′² + r³)` with fourth-order periodic differences.
pub fn radial_rhs(profile: &RadialProfile) -> Result<Vec<f64>> {
    profile.check_origin()?;
    let (d1, d2) = profile.derivatives();
    Ok(rhs_from(&profile.r, &d1, &d2))
}

fn rhs_from(r: &[f64], d1: &[f64], d2: &[f64]) -> Vec<f64> {
    r.iter()
        .zip(d1)
        .zip(d2)
        .map(|((r, rp), rpp)| (r * rpp - 2.0 * r * r - 3.0 * rp * rp) / (r * rp * rp + r * r * r))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialConfig {
    pub safety: f64,
    pub dt_min: f64,
    pub t_end: f64,
    pub origin_contact_fraction: f64,
    pub symmetrize: bool,
    pub record: Cadence,
}

impl Default for RadialConfig {
    fn default() -> Self {
        RadialConfig {
            safety: 0.2,
            dt_min: 1e-14,
            t_end: 1.0,
            origin_contact_fraction: 0.005,
            symmetrize: true,
            record: Cadence {
                interval: 0.005,
                geometric_fraction: 0.05,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct RadialEvolution {
    pub trajectory: Vec<RadialProfile>,
    /// dr/dt per node at each recorded profile.
    pub rates: Vec<Vec<f64>>,
    pub report: SingularityReport,
    pub outcome: Outcome,
    pub steps: u64,
}

impl RadialEvolution {
    pub fn final_profile(&self) -> &RadialProfile {
        self.trajectory.last().expect("initial profile recorded")
    }

    /// Min radius at time `t`, linearly interpolated between recorded profiles.
    pub fn min_radius_at(&self, t: f64) -> Option<f64> {
        let k = self.trajectory.windows(2).position(|w| w[0].t <= t && t <= w[1].t)?;
        let (a, b) = (&self.trajectory[k], &self.trajectory[k + 1]);
        let w = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
        Some(a.min_radius() * (1.0 - w) + b.min_radius() * w)
    }
}

/// Explicit integration of the radial-graph law with the same stepping and stop contract
/// as the parametric solver.
pub fn radial_evolve(profile: RadialProfile, config: &RadialConfig) -> Result<RadialEvolution> {
    let n = profile.len();
    let half = n / 2;
    let diameter = if n % 2 == 0 {
        (0..half).map(|j| profile.r[j] + profile.r[j + half]).fold(0.0, f64::max)
    } else {
        2.0 * profile.max_radius()
    };
    let threshold = config.origin_contact_fraction * diameter;
    let symmetric = config.symmetrize && profile.is_symmetric();
    let h = profile.grid_spacing();

    let mut p = profile;
    let mut trajectory = Vec::new();
    let mut rates = Vec::new();
    let mut series = Vec::new();
    let mut last_record = f64::NEG_INFINITY;
    let mut probe = (p.t, p.min_radius().powi(2));
    let mut t_est: Option<f64> = None;
    let mut steps = 0u64;

    let (outcome, trigger) = loop {
        let stop_now = p.t >= config.t_end * (1.0 - 1e-15);
        let contact = p.min_radius() < threshold;
        let (d1, d2) = p.derivatives();
        let rate = rhs_from(&p.r, &d1, &d2);
        if stop_now || contact || p.t - last_record >= config.record.spacing(p.t, t_est) {
            trajectory.push(p.clone());
            rates.push(rate.clone());
            series.push((p.t, p.min_radius()));
            last_record = p.t;
        }
        if stop_now {
            break (Outcome::ReachedEnd, None);
        }
        if contact {
            break (Outcome::Singular, Some(Trigger::OriginContact));
        }
        if p.check_origin().is_err() {
            break (Outcome::Singular, Some(Trigger::OriginContact));
        }
        let stiff = p
            .r
            .iter()
            .zip(&d1)
            .map(|(r, rp)| r * r + rp * rp)
            .fold(f64::INFINITY, f64::min);
        let mut dt = config.safety * h * h * stiff;
        if !(dt >= config.dt_min) {
            break (Outcome::Singular, Some(Trigger::StepUnderflow));
        }
        dt = dt.min(config.t_end - p.t);
        for (r, v) in p.r.iter_mut().zip(&rate) {
            *r += dt * v;
        }
        if symmetric {
            p.symmetrize();
        }
        if p.r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: p.t + dt });
        }
        p.t += dt;
        steps += 1;
        if steps % 10 == 0 {
            let m2 = p.min_radius().powi(2);
            if m2 < probe.1 && p.t > probe.0 {
                t_est = Some(p.t + m2 * (p.t - probe.0) / (probe.1 - m2));
            }
            probe = (p.t, m2);
        }
    };

    let last = trajectory.last().expect("final profile recorded");
    let m = last.min_radius();
    let report = match trigger {
        None => {
            let j = last.r.iter().position(|v| *v == m).unwrap_or(0);
            SingularityReport::none(last.t, Vec2::from_angle(last.angle(j)) * m, f64::NAN, m)
        }
        Some(trigger) => {
            let (sum, count) = last
                .r
                .iter()
                .enumerate()
                .filter(|(_, r)| **r <= 2.0 * m)
                .fold((Vec2::ZERO, 0usize), |(s, c), (j, r)| {
                    (s + Vec2::from_angle(last.angle(j)) * *r, c + 1)
                });
            let est = estimate_singular_time(&series);
            SingularityReport {
                detected: true,
                singular_time_bracket: est.bracket,
                singular_point: sum / count.max(1) as f64,
                trigger: Some(trigger),
                max_curvature_at_stop: f64::NAN,
                min_radius_at_stop: m,
                t_estimate: est.t_estimate,
                confidence_width: est.confidence_width,
                inconclusive: est.inconclusive,
            }
        }
    };
    Ok(RadialEvolution {
        trajectory,
        rates,
        report,
        outcome,
        steps,
    })
}
