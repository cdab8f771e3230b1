use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::geometry::{resample, PlaneCurve, Vec2};

/// Default radius of the window rescaled curves are clipped to.
pub const DEFAULT_WINDOW: f64 = 10.0;

/// One parabolic rescaling `σ(γ_{T+s/σ²} − x₀)`, clipped to a disk about the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledCurve {
    pub s: f64,
    pub sigma: f64,
    /// Source time `T + s/σ²`.
    pub time: f64,
    pub window: f64,
    /// Pieces inside the window; a closed curve that fits entirely stays closed.
    pub arcs: Vec<PlaneCurve>,
}

/// Curves at time `t`, linearly interpolated node by node between the bracketing
/// recorded states. Exact at recorded times.
pub fn interpolate_state(trajectory: &[FlowState], t: f64) -> Result<Vec<PlaneCurve>> {
    let (first, last) = match (trajectory.first(), trajectory.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::Range("empty trajectory".into())),
    };
    if !(t >= first && t <= last) {
        return Err(Error::Range(format!(
            "time {t} outside the recorded range [{first}, {last}]"
        )));
    }
    let k = trajectory.partition_point(|s| s.t <= t).max(1) - 1;
    let a = &trajectory[k];
    if a.t == t || k + 1 == trajectory.len() {
        return Ok(a.curves.clone());
    }
    let b = &trajectory[k + 1];
    let w = (t - a.t) / (b.t - a.t);
    a.curves
        .iter()
        .zip(&b.curves)
        .map(|(ca, cb)| {
            let cb = if cb.node_count() == ca.node_count() {
                cb.clone()
            } else {
                resample(cb, ca.node_count())?
            };
            let pts = ca
                .points()
                .iter()
                .zip(cb.points())
                .map(|(p, q)| *p + (*q - *p) * w)
                .collect();
            PlaneCurve::new(pts, ca.is_closed())
        })
        .collect()
}

fn ray_exit(a: Vec2, b: Vec2, radius: f64) -> Option<Vec2> {
    super::density::clip_segment(a, b, Vec2::ZERO, radius).map(|(u0, u1)| {
        // `a` inside: the exit is at u1; `a` outside: the entry is at u0
        let u = if a.norm() < radius { u1 } else { u0 };
        a + (b - a) * u
    })
}

/// Splits a polyline into the pieces inside the open disk `B_radius(0)`, adding the
/// exact boundary crossings as end nodes.
pub fn clip_to_disk(curve: &PlaneCurve, radius: f64) -> Vec<PlaneCurve> {
    let p = curve.points();
    let n = p.len();
    let inside: Vec<bool> = p.iter().map(|q| q.norm() < radius).collect();
    if inside.iter().all(|v| *v) {
        return vec![curve.clone()];
    }
    let eps = 1e-12 * radius;
    let mut arcs = Vec::new();
    let mut push = |pts: Vec<Vec2>| {
        if pts.len() >= 2 {
            if let Ok(c) = PlaneCurve::open(pts) {
                arcs.push(c);
            }
        }
    };
    // start scanning right after an outside node so closed runs are not cut
    let start = if curve.is_closed() {
        inside.iter().position(|v| !*v).unwrap()
    } else {
        0
    };
    let count = if curve.is_closed() { n } else { n - 1 };
    let mut cur: Vec<Vec2> = Vec::new();
    if !curve.is_closed() && inside[0] {
        cur.push(p[0]);
    }
    for k in 0..count {
        let i = (start + k) % n;
        let j = (i + 1) % n;
        let (a, b) = (p[i], p[j]);
        match (inside[i], inside[j]) {
            (true, true) => cur.push(b),
            (true, false) => {
                if let Some(x) = ray_exit(a, b, radius) {
                    if x.distance(a) > eps {
                        cur.push(x);
                    }
                }
                push(std::mem::take(&mut cur));
            }
            (false, true) => {
                if let Some(x) = ray_exit(a, b, radius) {
                    if x.distance(b) > eps {
                        cur.push(x);
                    }
                }
                cur.push(b);
            }
            (false, false) => {
                // a chord may cross the disk without a node inside
                if let Some((u0, u1)) = super::density::clip_segment(a, b, Vec2::ZERO, radius) {
                    push(vec![a + (b - a) * u0, a + (b - a) * u1]);
                }
            }
        }
    }
    push(cur);
    arcs
}

fn check_times(trajectory: &[FlowState], times: &[(f64, f64)]) -> Result<()> {
    let (first, last) = match (trajectory.first(), trajectory.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::Range("empty trajectory".into())),
    };
    let excess = |t: f64| (first - t).max(t - last).max(0.0);
    let worst = times
        .iter()
        .filter(|(_, t)| excess(*t) > 0.0 || t.is_nan())
        .max_by(|a, b| excess(a.1).total_cmp(&excess(b.1)));
    match worst {
        Some((sigma, t)) => Err(Error::Range(format!(
            "sigma = {sigma} needs time {t}, outside the recorded range [{first}, {last}]"
        ))),
        None => Ok(()),
    }
}

/// `σ(γ_{T+s/σ²} − x₀)` for each σ, clipped to `B_window(0)`.
pub fn rescale_flow(
    trajectory: &[FlowState],
    x0: Vec2,
    reference_time: f64,
    sigmas: &[f64],
    s: f64,
    window: f64,
) -> Result<Vec<RescaledCurve>> {
    if let Some(bad) = sigmas.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Configuration(format!("scale must be positive, got {bad}")));
    }
    let times: Vec<(f64, f64)> = sigmas
        .iter()
        .map(|sg| (*sg, reference_time + s / (sg * sg)))
        .collect();
    check_times(trajectory, &times)?;
    times
        .into_iter()
        .map(|(sigma, time)| {
            let arcs = interpolate_state(trajectory, time)?
                .iter()
                .flat_map(|c| clip_to_disk(&c.translated(-x0).scaled(sigma), window))
                .collect();
            Ok(RescaledCurve {
                s,
                sigma,
                time,
                window,
                arcs,
            })
        })
        .collect()
}

/// `e^s (γ_{(1−e^{−2s})/2} − x₁)` for a trajectory started from normalized data.
pub fn normalized_rescaling(trajectory: &[FlowState], x1: Vec2, s: f64) -> Result<Vec<PlaneCurve>> {
    match trajectory.first().and_then(|st| st.initial_constant) {
        Some(c) if (c - 1.0).abs() <= 1e-6 => {}
        other => {
            return Err(Error::Domain(format!(
                "normalized rescaling needs c = 1, trajectory has {other:?}"
            )))
        }
    }
    let t = 0.5 * (1.0 - (-2.0 * s).exp());
    let curves = interpolate_state(trajectory, t).map_err(|_| {
        Error::Range(format!(
            "s = {s} maps to t = {t}, beyond the recorded trajectory (horizon s < {})",
            horizon(trajectory.last().map(|st| st.t).unwrap_or(0.0))
        ))
    })?;
    let scale = s.exp();
    Ok(curves
        .iter()
        .map(|c| c.translated(-x1).scaled(scale))
        .collect())
}

/// Largest parameter `−½ log(1 − 2T)` reachable before time T.
pub fn horizon(t: f64) -> f64 {
    -0.5 * (1.0 - 2.0 * t).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_state(rho: f64, t: f64) -> FlowState {
        let mut st =
            FlowState::single(PlaneCurve::from_fn(128, |s| Vec2::from_angle(s) * rho).unwrap())
                .unwrap();
        st.t = t;
        st
    }

    /// Exact shrinking circle ρ(t)² = ρ₀² − 4t recorded at the given times.
    fn circle_trajectory(rho0: f64, times: &[f64]) -> Vec<FlowState> {
        let mut traj: Vec<FlowState> = times
            .iter()
            .map(|t| circle_state((rho0 * rho0 - 4.0 * t).sqrt(), *t))
            .collect();
        let c = traj[0].initial_constant;
        for st in &mut traj {
            st.initial_constant = c;
        }
        traj
    }

    #[test]
    fn identity_parameters() {
        let traj = circle_trajectory(2.0, &[0.0, 0.1, 0.2, 0.3]);
        let r = rescale_flow(&traj, Vec2::ZERO, 1.0, &[1.0], 0.2 - 1.0, 10.0).unwrap();
        assert_eq!(r[0].arcs, traj[2].curves);
    }

    #[test]
    fn circle_rescalings_have_radius_two() {
        let times: Vec<f64> = (0..=400).map(|k| 0.9999 * k as f64 / 400.0).collect();
        let traj = circle_trajectory(2.0, &times);
        let out = rescale_flow(&traj, Vec2::ZERO, 1.0, &[1.0, 2.0, 4.0], -1.0, 10.0).unwrap();
        for r in &out {
            assert_eq!(r.arcs.len(), 1);
            assert!(r.arcs[0].is_closed());
            for p in r.arcs[0].points() {
                // interpolation of √(1−t) between records
                assert!((p.norm() - 2.0).abs() < 2e-3, "sigma {}: {}", r.sigma, p.norm());
            }
        }
    }

    #[test]
    fn out_of_range_names_the_worst_scale() {
        let traj = circle_trajectory(2.0, &[0.0, 0.5]);
        let err = rescale_flow(&traj, Vec2::ZERO, 1.0, &[8.0, 1.0, 2.0], -1.0, 10.0).unwrap_err();
        match err {
            Error::Range(msg) => assert!(msg.contains("sigma = 8"), "{msg}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn clipping_a_line() {
        let line = PlaneCurve::open((0..=20).map(|i| Vec2::new(-5.0 + 0.5 * i as f64, 0.0)).collect())
            .unwrap();
        let arcs = clip_to_disk(&line, 2.25);
        assert_eq!(arcs.len(), 1);
        assert!((arcs[0].polyline_length() - 4.5).abs() < 1e-12);
        let off = clip_to_disk(&line.translated(Vec2::new(0.0, 3.0)), 2.0);
        assert!(off.is_empty());
    }

    #[test]
    fn clipping_a_closed_curve_keeps_both_pieces() {
        let ellipse = PlaneCurve::from_fn(256, |s| Vec2::new(4.0 * s.cos(), 0.5 * s.sin())).unwrap();
        let arcs = clip_to_disk(&ellipse, 2.0);
        assert_eq!(arcs.len(), 2);
        for a in &arcs {
            assert!(!a.is_closed());
            for p in a.points() {
                assert!(p.norm() <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn normalized_circle_is_static() {
        let rho0 = 2f64.sqrt();
        let times: Vec<f64> = (0..=200).map(|k| 0.49 * k as f64 / 200.0).collect();
        let traj = circle_trajectory(rho0, &times);
        assert!((traj[0].initial_constant.unwrap() - 1.0).abs() < 1e-6);
        for s in [0.0, 0.3, 1.0, 1.5] {
            let c = normalized_rescaling(&traj, Vec2::ZERO, s).unwrap();
            for p in c[0].points() {
                assert!((p.norm() - rho0).abs() < 2e-3, "s = {s}: {}", p.norm());
            }
        }
        let c = normalized_rescaling(&traj, Vec2::ZERO, 0.0).unwrap();
        assert_eq!(c, traj[0].curves);
        assert!(matches!(
            normalized_rescaling(&traj, Vec2::ZERO, horizon(0.495)),
            Err(Error::Range(_))
        ));
    }
}
