use super::{
    estimate_singular_time, Cadence, DiagnosticsRow, EvolveConfig, Evolution, FlowState, Outcome,
    Scheme, SingularityReport, StepConfig, Trigger,
};
use crate::error::{Error, Result};
use crate::geometry::{
    compute_frame, normal_projection, resample, symmetrize_antipodal, FrameData, PlaneCurve, Vec2,
};

/// Origin contact threshold for the velocity, relative to the bounding-box diagonal.
const VELOCITY_ORIGIN_RATIO: f64 = 1e-10;

/// Per-node velocity `κ n − x⊥/|x|²`. End nodes of open curves are held fixed.
pub fn velocity(curve: &PlaneCurve, frame: &FrameData) -> Result<Vec<Vec2>> {
    let threshold = VELOCITY_ORIGIN_RATIO * curve.bbox_diagonal();
    let xperp = normal_projection(curve, frame);
    let n = curve.node_count();
    let mut v = Vec::with_capacity(n);
    for (i, p) in curve.points().iter().enumerate() {
        let r2 = p.norm_sq();
        if !(r2.sqrt() >= threshold) {
            return Err(Error::OriginContact {
                node: i,
                distance: r2.sqrt(),
            });
        }
        if !curve.is_closed() && (i == 0 || i == n - 1) {
            v.push(Vec2::ZERO);
        } else {
            v.push(frame.normal[i] * frame.curvature[i] - xperp[i] / r2);
        }
    }
    Ok(v)
}

struct Prepared {
    velocity: Vec<Vec2>,
    dt_bound: f64,
    curvature_resolution: f64,
}

fn prepare(curve: &PlaneCurve, safety: f64) -> Result<Prepared> {
    let frame = compute_frame(curve)?;
    let v = velocity(curve, &frame)?;
    let xperp = normal_projection(curve, &frame);
    let h = curve.min_spacing();
    let radial_term = curve
        .points()
        .iter()
        .zip(&xperp)
        .filter(|(_, q)| q.norm() > 0.0)
        .map(|(p, q)| p.norm_sq() / (2.0 * q.norm()))
        .fold(f64::INFINITY, f64::min);
    let kmax = frame.curvature.iter().fold(0.0_f64, |m, k| m.max(k.abs()));
    Ok(Prepared {
        velocity: v,
        dt_bound: safety * (h * h).min(h * radial_term),
        curvature_resolution: kmax * h,
    })
}

fn velocities(curve: &PlaneCurve) -> Result<Vec<Vec2>> {
    let frame = compute_frame(curve)?;
    velocity(curve, &frame)
}

fn axpy(base: &[Vec2], dir: &[Vec2], dt: f64) -> Vec<Vec2> {
    base.iter().zip(dir).map(|(p, v)| *p + *v * dt).collect()
}

/// Returns the advanced state and max κ·h of the state it started from.
fn advance(state: &FlowState, cfg: &StepConfig, dt_cap: f64) -> Result<(FlowState, f64)> {
    let prepared = state
        .curves
        .iter()
        .map(|c| prepare(c, cfg.safety))
        .collect::<Result<Vec<_>>>()?;
    let resolution = prepared
        .iter()
        .map(|p| p.curvature_resolution)
        .fold(0.0, f64::max);
    let mut dt = match cfg.fixed_dt {
        Some(dt) => dt,
        None => {
            let dt = prepared.iter().map(|p| p.dt_bound).fold(f64::INFINITY, f64::min);
            if !(dt >= cfg.dt_min) {
                return Err(Error::StepUnderflow {
                    dt,
                    dt_min: cfg.dt_min,
                });
            }
            dt
        }
    };
    if dt_cap < dt {
        dt = dt_cap;
    }

    let symmetrize = cfg.symmetrize && state.symmetric;
    let mut curves = Vec::with_capacity(state.curves.len());
    for (curve, prep) in state.curves.iter().zip(&prepared) {
        let mut pts = match cfg.scheme {
            Scheme::ForwardEuler => axpy(curve.points(), &prep.velocity, dt),
            Scheme::Heun => {
                let predicted = curve.with_points(axpy(curve.points(), &prep.velocity, dt));
                let v2 = velocities(&predicted)?;
                let avg: Vec<Vec2> = prep
                    .velocity
                    .iter()
                    .zip(&v2)
                    .map(|(a, b)| (*a + *b) * 0.5)
                    .collect();
                axpy(curve.points(), &avg, dt)
            }
        };
        if symmetrize {
            symmetrize_antipodal(&mut pts);
        }
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { t: state.t + dt });
        }
        curves.push(curve.with_points(pts));
    }

    let step_index = state.step_index + 1;
    if cfg.redistribute_every > 0 && step_index % cfg.redistribute_every == 0 {
        for c in curves.iter_mut() {
            let mut r = resample(c, c.node_count())?;
            if symmetrize {
                let mut pts = r.into_points();
                symmetrize_antipodal(&mut pts);
                r = c.with_points(pts);
            }
            *c = r;
        }
    }

    Ok((
        FlowState {
            curves,
            t: state.t + dt,
            initial_constant: state.initial_constant,
            step_index,
            last_dt: dt,
            symmetric: state.symmetric,
        },
        resolution,
    ))
}

/// One explicit step of the parametric flow.
pub fn step(state: &FlowState, config: &StepConfig) -> Result<FlowState> {
    advance(state, config, f64::INFINITY).map(|(s, _)| s)
}

struct Recorder {
    cadence: Cadence,
    last: f64,
}

impl Recorder {
    fn due(&self, t: f64, t_est: Option<f64>) -> bool {
        t - self.last >= self.cadence.spacing(t, t_est)
    }
}

/// Advances until `t_end` or a singularity trigger, recording snapshots and diagnostics.
pub fn evolve(initial: FlowState, config: &EvolveConfig) -> Result<Evolution> {
    let stop = &config.stop;
    let initial_diameter = initial.diameter();
    let origin_threshold = stop.origin_contact_fraction * initial_diameter;
    let horizon = initial.initial_constant.filter(|c| *c > 0.0).map(|c| 0.5 * c);
    let t_ref = config
        .density_reference_time
        .or(horizon)
        .unwrap_or(stop.t_end + 1.0);

    let mut diagnostics = vec![DiagnosticsRow::measure(&initial, t_ref)?];
    let mut trajectory = vec![initial.clone()];
    let mut snaps = Recorder {
        cadence: config.snapshots.clone(),
        last: initial.t,
    };
    let mut diags = Recorder {
        cadence: config.diagnostics.clone(),
        last: initial.t,
    };
    let mut probe = (initial.t, initial.min_radius().powi(2));
    let mut t_est = horizon;
    let mut state = initial;
    let mut steps = 0u64;

    let fail = |state: &FlowState,
                    trajectory: &mut Vec<FlowState>,
                    diagnostics: &mut Vec<DiagnosticsRow>,
                    detail: String,
                    steps: u64| {
        if trajectory.last().map(|s| s.t) != Some(state.t) {
            trajectory.push(state.clone());
        }
        let (_, m) = state.curves[0].min_radius();
        let partial = Evolution {
            trajectory: std::mem::take(trajectory),
            diagnostics: std::mem::take(diagnostics),
            report: SingularityReport::none(state.t, Vec2::ZERO, f64::NAN, m),
            outcome: Outcome::StepLimit,
            initial_diameter,
            steps,
        };
        Error::Integration {
            t: state.t,
            detail,
            partial: Box::new(partial),
        }
    };

    let (outcome, trigger) = loop {
        if state.t >= stop.t_end * (1.0 - 1e-15) {
            break (Outcome::ReachedEnd, None);
        }
        if stop.max_steps.is_some_and(|m| steps >= m) {
            break (Outcome::StepLimit, None);
        }
        if state.closed_min_radius() < origin_threshold {
            break (Outcome::Singular, Some(Trigger::OriginContact));
        }
        match advance(&state, &config.step, stop.t_end - state.t) {
            Ok((next, resolution)) => {
                if resolution > stop.curvature_resolution_limit {
                    break (Outcome::Singular, Some(Trigger::CurvatureBlowup));
                }
                state = next;
                steps += 1;
            }
            Err(Error::StepUnderflow { .. }) => break (Outcome::Singular, Some(Trigger::StepUnderflow)),
            Err(Error::OriginContact { .. }) => break (Outcome::Singular, Some(Trigger::OriginContact)),
            Err(e @ (Error::NonFinite { .. } | Error::DegenerateCurve { .. })) => {
                return Err(fail(&state, &mut trajectory, &mut diagnostics, e.to_string(), steps));
            }
            Err(e) => return Err(e),
        }

        if steps % 10 == 0 {
            let m2 = state.min_radius().powi(2);
            if m2 < probe.1 && state.t > probe.0 {
                let est = state.t + m2 * (state.t - probe.0) / (probe.1 - m2);
                t_est = Some(horizon.map_or(est, |h| est.min(h)));
            }
            probe = (state.t, m2);
        }
        if diags.due(state.t, t_est) {
            match DiagnosticsRow::measure(&state, t_ref) {
                Ok(row) => diagnostics.push(row),
                Err(e) => {
                    return Err(fail(&state, &mut trajectory, &mut diagnostics, e.to_string(), steps))
                }
            }
            diags.last = state.t;
        }
        if snaps.due(state.t, t_est) {
            trajectory.push(state.clone());
            snaps.last = state.t;
        }
    };

    if diagnostics.last().map(|r| r.t) != Some(state.t) {
        match DiagnosticsRow::measure(&state, t_ref) {
            Ok(row) => diagnostics.push(row),
            Err(e) => return Err(fail(&state, &mut trajectory, &mut diagnostics, e.to_string(), steps)),
        }
    }
    if trajectory.last().map(|s| s.t) != Some(state.t) {
        trajectory.push(state.clone());
    }

    let report = stop_report(&state, trigger, &diagnostics);
    Ok(Evolution {
        trajectory,
        diagnostics,
        report,
        outcome,
        initial_diameter,
        steps,
    })
}

fn stop_report(
    state: &FlowState,
    trigger: Option<Trigger>,
    diagnostics: &[DiagnosticsRow],
) -> SingularityReport {
    let last = diagnostics.last().expect("final row recorded");
    let all_points = || state.curves.iter().flat_map(|c| c.points().iter().copied());
    let nearest = all_points()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Vec2::ZERO);
    let Some(trigger) = trigger else {
        return SingularityReport::none(state.t, nearest, last.max_curvature, last.min_radius);
    };
    let point = match trigger {
        Trigger::OriginContact => {
            // centroid of the pinching cluster
            let m = last.min_radius;
            let (sum, count) = all_points()
                .filter(|p| p.norm() <= 2.0 * m)
                .fold((Vec2::ZERO, 0usize), |(s, c), p| (s + p, c + 1));
            if count > 0 {
                sum / count as f64
            } else {
                nearest
            }
        }
        Trigger::CurvatureBlowup => {
            let mut best = (nearest, -1.0);
            for c in &state.curves {
                if let Ok(f) = compute_frame(c) {
                    for (p, k) in c.points().iter().zip(&f.curvature) {
                        if k.abs() > best.1 {
                            best = (*p, k.abs());
                        }
                    }
                }
            }
            best.0
        }
        Trigger::StepUnderflow => nearest,
    };
    let series: Vec<(f64, f64)> = diagnostics.iter().map(|r| (r.t, r.min_radius)).collect();
    let est = estimate_singular_time(&series);
    SingularityReport {
        detected: true,
        singular_time_bracket: est.bracket,
        singular_point: point,
        trigger: Some(trigger),
        max_curvature_at_stop: last.max_curvature,
        min_radius_at_stop: last.min_radius,
        t_estimate: est.t_estimate,
        confidence_width: est.confidence_width,
        inconclusive: est.inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn circle(n: usize, rho: f64) -> PlaneCurve {
        PlaneCurve::from_fn(n, |s| Vec2::from_angle(s) * rho).unwrap()
    }

    fn ellipse(n: usize, a: f64, b: f64) -> PlaneCurve {
        let c = PlaneCurve::from_fn(n, |s| Vec2::new(a * s.cos(), b * s.sin())).unwrap();
        resample(&c, n).unwrap()
    }

    fn line(phi: f64, n: usize, half: f64) -> PlaneCurve {
        let d = Vec2::from_angle(phi);
        let h = 2.0 * half / n as f64;
        PlaneCurve::open((0..n).map(|i| d * (-half + (i as f64 + 0.5) * h)).collect()).unwrap()
    }

    #[test]
    fn circle_velocity_is_unit_inward() {
        let c = circle(256, 2.0);
        let v = velocities(&c).unwrap();
        for (p, vi) in c.points().iter().zip(&v) {
            assert!((vi.norm() - 1.0).abs() < 1e-6);
            assert!((vi.dot(*p / p.norm()) + 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn line_velocity_vanishes() {
        let v = velocities(&line(0.3, 64, 1.0)).unwrap();
        assert!(v.iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn ellipse_vertex_velocity() {
        let c = PlaneCurve::from_fn(512, |s| Vec2::new(3.0 * s.cos(), 2.0 * s.sin())).unwrap();
        let v = velocities(&c).unwrap();
        assert!(v[0].distance(Vec2::new(-13.0 / 12.0, 0.0)) < 1e-6, "{:?}", v[0]);
    }

    #[test]
    fn origin_contact_in_velocity() {
        let mut pts = circle(64, 1.0).into_points();
        pts[10] = Vec2::new(1e-13, 0.0);
        let c = PlaneCurve::closed(pts).unwrap();
        let f = compute_frame(&c).unwrap();
        assert!(matches!(velocity(&c, &f), Err(Error::OriginContact { node: 10, .. })));
    }

    #[test]
    fn single_fixed_step_on_circle() {
        let state = FlowState::single(circle(256, 2.0)).unwrap();
        let cfg = StepConfig {
            fixed_dt: Some(1e-4),
            ..StepConfig::default()
        };
        let next = step(&state, &cfg).unwrap();
        for p in next.curve().points() {
            assert!((p.norm() - (2.0 - 1e-4)).abs() < 1e-8);
        }
        assert_eq!(next.step_index, 1);
        assert!((next.t - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn line_is_unchanged_by_a_step() {
        let l = line(0.3, 64, 1.0);
        let state = FlowState::single(l.clone()).unwrap();
        let next = step(&state, &StepConfig::default()).unwrap();
        for (a, b) in l.points().iter().zip(next.curve().points()) {
            assert!(a.distance(*b) < 1e-12);
        }
    }

    #[test]
    fn symmetric_ellipse_stays_symmetric() {
        let mut state = FlowState::single(ellipse(128, 3.0, 2.0)).unwrap();
        assert!(state.symmetric);
        let cfg = StepConfig::default();
        for _ in 0..1000 {
            state = step(&state, &cfg).unwrap();
        }
        assert!(crate::geometry::antipodal_defect(state.curve()).unwrap() < 1e-10);
    }

    #[test]
    fn step_underflow_reported() {
        let state = FlowState::single(circle(64, 1.0)).unwrap();
        let cfg = StepConfig {
            dt_min: 1.0,
            ..StepConfig::default()
        };
        assert!(matches!(step(&state, &cfg), Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn x_cone_is_stationary() {
        let state = FlowState::new(vec![line(FRAC_PI_4, 64, 1.0), line(3.0 * FRAC_PI_4, 64, 1.0)])
            .unwrap();
        let mut s = state.clone();
        for _ in 0..100 {
            s = step(&s, &StepConfig::default()).unwrap();
        }
        for (c0, c1) in state.curves.iter().zip(&s.curves) {
            for (a, b) in c0.points().iter().zip(c1.points()) {
                assert!(a.distance(*b) < 1e-12);
            }
        }
    }
}
