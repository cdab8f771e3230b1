//! Lagrangian invariants of the equivariant surface `L = {(γ cos α, γ sin α)}`.
//!
//! On `L` the holomorphic volume form restricts to `(γ/|γ|)(γ′/|γ′|) vol_L`, so the
//! Lagrangian angle at a curve node is `arg(γ γ′)`. The Liouville form pulls back to
//! `⟨iγ, γ′⟩ ds`, whose loop integral is twice the enclosed area.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::geometry::{compute_frame, FrameData, PlaneCurve, Vec2, DEGENERACY_RATIO};

/// Snapping window for the Maslov integral around multiples of 2π.
pub const MASLOV_SNAP: f64 = 1e-3;

/// Lagrangian angle along a curve: a continuous lift in node order.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleField {
    pub theta: Vec<f64>,
    /// ∮dθ for closed curves (snapped to 2πk), θ(end) − θ(start) for open ones.
    pub total_increment: f64,
}

impl AngleField {
    /// `exp(2iθ)` per node; invariant under reversing the orientation.
    pub fn doubled_phases(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.theta.iter().map(|t| Vec2::from_angle(2.0 * t))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.theta
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
    }
}

/// Liouville and Maslov loop integrals and their ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneData {
    pub liouville_integral: f64,
    pub maslov_integral: f64,
    pub constant_c: f64,
}

fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

pub(crate) fn snap_maslov(total: f64) -> f64 {
    let k = (total / TAU).round();
    if (total - k * TAU).abs() <= MASLOV_SNAP {
        k * TAU
    } else {
        total
    }
}

/// Lifts `arg(γᵢ γ′ᵢ)` continuously along the nodes, anchored in `[0, 2π)` at node 0.
pub(crate) fn lift_angles(points: &[Vec2], derivative: &[Vec2], closed: bool) -> AngleField {
    let phases: Vec<f64> = points
        .iter()
        .zip(derivative)
        .map(|(p, d)| p.cmul(*d).arg())
        .collect();
    let mut theta = Vec::with_capacity(phases.len());
    let mut cur = phases[0].rem_euclid(TAU);
    theta.push(cur);
    for w in phases.windows(2) {
        cur += wrap_pi(w[1] - w[0]);
        theta.push(cur);
    }
    let total = if closed {
        let last = *theta.last().unwrap();
        snap_maslov(last + wrap_pi(phases[0] - phases[phases.len() - 1]) - theta[0])
    } else {
        theta.last().unwrap() - theta[0]
    };
    AngleField {
        theta,
        total_increment: total,
    }
}

/// Second-order tangents, for short arcs where the frame stencils do not apply.
pub(crate) fn arc_angles(points: &[Vec2]) -> AngleField {
    let n = points.len();
    let d: Vec<Vec2> = (0..n)
        .map(|i| {
            let a = points[i.saturating_sub(1)];
            let b = points[(i + 1).min(n - 1)];
            b - a
        })
        .collect();
    lift_angles(points, &d, false)
}

/// Lagrangian angle θ = arg γ + arg γ′ with a continuous lift.
pub fn lagrangian_angle(curve: &PlaneCurve, frame: &FrameData) -> Result<AngleField> {
    let threshold = DEGENERACY_RATIO * curve.bbox_diagonal();
    let (node, distance) = curve.min_radius();
    if !(distance > threshold) {
        return Err(Error::OriginContact { node, distance });
    }
    Ok(lift_angles(curve.points(), &frame.derivative, curve.is_closed()))
}

/// ∮λ by quadrature of ⟨iγ, γ′⟩, ∮dθ from the angle lift, and c = ∮λ / ∮dθ.
pub fn monotone_data(
    curve: &PlaneCurve,
    frame: &FrameData,
    angle: &AngleField,
) -> Result<MonotoneData> {
    let liouville = liouville_integral(curve, frame);
    let maslov = angle.total_increment;
    if maslov.abs() < MASLOV_SNAP {
        return Err(Error::NonMonotone);
    }
    Ok(MonotoneData {
        liouville_integral: liouville,
        maslov_integral: maslov,
        constant_c: liouville / maslov,
    })
}

pub(crate) fn liouville_integral(curve: &PlaneCurve, frame: &FrameData) -> f64 {
    let n = curve.node_count();
    curve
        .points()
        .iter()
        .zip(&frame.derivative)
        .enumerate()
        .map(|(i, (p, d))| {
            let w = if !curve.is_closed() && (i == 0 || i == n - 1) {
                0.5
            } else {
                1.0
            };
            w * p.cross(*d)
        })
        .sum()
}

impl MonotoneData {
    /// Frame, angle and integrals in one pass.
    pub fn of(curve: &PlaneCurve) -> Result<Self> {
        let frame = compute_frame(curve)?;
        let angle = lagrangian_angle(curve, &frame)?;
        monotone_data(curve, &frame, &angle)
    }
}

/// Scales the curve about the origin so that its monotonicity constant becomes 1.
pub fn normalize(curve: &PlaneCurve) -> Result<(PlaneCurve, f64)> {
    let data = MonotoneData::of(curve)?;
    if !(data.constant_c > 0.0) {
        return Err(Error::Domain(format!(
            "normalization needs c > 0, got {}",
            data.constant_c
        )));
    }
    let scale = data.constant_c.powf(-0.5);
    Ok((curve.scaled(scale), scale))
}

/// |∮λ(t) − (c − 2t)∮dθ(t)| / |∮dθ(t)|, summed over every curve of the state.
pub fn monotone_defect(state: &FlowState) -> Result<f64> {
    let c = state.initial_constant.ok_or_else(|| {
        Error::Configuration("flow state carries no monotonicity constant".into())
    })?;
    let (mut lam, mut mas) = (0.0, 0.0);
    for curve in &state.curves {
        let d = MonotoneData::of(curve)?;
        lam += d.liouville_integral;
        mas += d.maslov_integral;
    }
    Ok(defect_from(lam, mas, c, state.t))
}

pub(crate) fn defect_from(liouville: f64, maslov: f64, c: f64, t: f64) -> f64 {
    (liouville - (c - 2.0 * t) * maslov).abs() / maslov.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enclosed_area;
    use proptest::prelude::*;

    fn circle(n: usize, rho: f64) -> PlaneCurve {
        PlaneCurve::from_fn(n, |s| Vec2::from_angle(s) * rho).unwrap()
    }

    fn ellipse(n: usize, a: f64, b: f64) -> PlaneCurve {
        PlaneCurve::from_fn(n, |s| Vec2::new(a * s.cos(), b * s.sin())).unwrap()
    }

    fn angle_of(c: &PlaneCurve) -> AngleField {
        lagrangian_angle(c, &compute_frame(c).unwrap()).unwrap()
    }

    #[test]
    fn circle_angle_is_two_s_plus_quarter_turn() {
        let n = 128;
        let a = angle_of(&circle(n, 1.5));
        for (i, th) in a.theta.iter().enumerate() {
            let s = TAU * i as f64 / n as f64;
            assert!((th - (2.0 * s + PI / 2.0)).abs() < 1e-9, "{i}");
        }
        assert_eq!(a.total_increment, 2.0 * TAU);
    }

    #[test]
    fn outward_ray_angle_is_twice_direction() {
        let phi = 0.7;
        let ray = PlaneCurve::open((1..40).map(|k| Vec2::from_angle(phi) * (0.05 * k as f64)).collect())
            .unwrap();
        let a = angle_of(&ray);
        for th in &a.theta {
            assert!((th - 2.0 * phi).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_angle_is_nondecreasing() {
        let a = angle_of(&ellipse(512, 3.0, 2.0));
        for w in a.theta.windows(2) {
            assert!(w[1] - w[0] >= -1e-6);
        }
    }

    #[test]
    fn exp_i_theta_matches_position_times_tangent() {
        let c = ellipse(200, 3.0, 2.0);
        let f = compute_frame(&c).unwrap();
        let a = lagrangian_angle(&c, &f).unwrap();
        for i in 0..c.node_count() {
            let z = c.points()[i].cmul(f.derivative[i]);
            let z = z / z.norm();
            assert!(Vec2::from_angle(a.theta[i]).distance(z) < 1e-6);
        }
    }

    #[test]
    fn origin_contact_is_an_error() {
        let mut pts = circle(64, 1.0).into_points();
        pts[3] = Vec2::ZERO;
        let c = PlaneCurve::closed(pts).unwrap();
        let f = compute_frame(&c).unwrap();
        assert!(matches!(lagrangian_angle(&c, &f), Err(Error::OriginContact { node: 3, .. })));
    }

    #[test]
    fn circle_constants() {
        // Oracle: ∮λ = 2πρ², winding of γγ′ is 2.
        for (rho, c_expected) in [(2.0, 2.0), (1.0, 0.5)] {
            let d = MonotoneData::of(&circle(256, rho)).unwrap();
            assert!((d.liouville_integral - TAU * rho * rho).abs() < 1e-6 * rho * rho);
            assert_eq!(d.maslov_integral, 4.0 * PI);
            assert!((d.constant_c - c_expected).abs() < 1e-7);
        }
    }

    #[test]
    fn ellipse_constant_is_area_over_two_pi() {
        let d = MonotoneData::of(&ellipse(512, 3.0, 2.0)).unwrap();
        assert!((d.constant_c - 3.0).abs() < 1e-3);
    }

    #[test]
    fn figure_eight_is_not_monotone() {
        // rotation index 0 and no winding about the origin
        let eight = PlaneCurve::from_fn(256, |s| Vec2::new((2.0 * s).sin(), s.sin() + 3.0)).unwrap();
        assert!(matches!(MonotoneData::of(&eight), Err(Error::NonMonotone)));
        // a loop away from the origin still has Maslov integral 2π
        let off = circle(64, 1.0).translated(Vec2::new(3.0, 0.0));
        assert!((MonotoneData::of(&off).unwrap().maslov_integral - TAU).abs() < 1e-12);
    }

    #[test]
    fn normalization() {
        let (n, scale) = normalize(&ellipse(512, 3.0, 2.0)).unwrap();
        assert!((scale - 3f64.powf(-0.5)).abs() < 1e-6);
        assert!((MonotoneData::of(&n).unwrap().constant_c - 1.0).abs() < 1e-6);

        let (n, scale) = normalize(&circle(256, 1.0)).unwrap();
        assert!((scale - 2f64.sqrt()).abs() < 1e-7);
        assert!((n.points()[0].norm() - 2f64.sqrt()).abs() < 1e-7);

        let (n, scale) = normalize(&circle(256, 2f64.sqrt())).unwrap();
        assert!((scale - 1.0).abs() < 1e-7);
        assert!(n.points()[7].distance(circle(256, 2f64.sqrt()).points()[7]) < 1e-7);
    }

    #[test]
    fn defect_vanishes_at_time_zero() {
        let c = ellipse(256, 3.0, 2.0);
        let state = FlowState::new(vec![c]).unwrap();
        assert!(monotone_defect(&state).unwrap() < 1e-14);
    }

    fn star(n: usize, coeffs: &[(f64, f64)]) -> PlaneCurve {
        PlaneCurve::from_fn(n, |s| {
            let r = 1.0
                + coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| a * ((k + 2) as f64 * s).cos() + b * ((k + 2) as f64 * s).sin())
                    .sum::<f64>();
            Vec2::from_angle(s) * r
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn liouville_is_twice_area(coeffs in prop::collection::vec((-0.08f64..0.08, -0.08f64..0.08), 1..4)) {
            let c = star(512, &coeffs);
            let d = MonotoneData::of(&c).unwrap();
            let area = enclosed_area(&c);
            prop_assert!(((d.liouville_integral - 2.0 * area) / (2.0 * area)).abs() < 1e-6);
        }

        #[test]
        fn maslov_is_stable_under_resampling_and_scaling(
            coeffs in prop::collection::vec((-0.08f64..0.08, -0.08f64..0.08), 1..4),
            scale in 0.2f64..5.0,
        ) {
            let c = star(256, &coeffs);
            let m0 = MonotoneData::of(&c).unwrap().maslov_integral;
            let m1 = MonotoneData::of(&crate::geometry::resample(&c, 384).unwrap()).unwrap().maslov_integral;
            let m2 = MonotoneData::of(&c.scaled(scale)).unwrap().maslov_integral;
            prop_assert_eq!(m0, 4.0 * PI);
            prop_assert_eq!(m1, m0);
            prop_assert_eq!(m2, m0);
        }

        #[test]
        fn angle_is_scale_invariant(
            coeffs in prop::collection::vec((-0.08f64..0.08, -0.08f64..0.08), 1..4),
            scale in 0.2f64..5.0,
        ) {
            let c = star(128, &coeffs);
            let a = angle_of(&c);
            let b = angle_of(&c.scaled(scale));
            for (x, y) in a.theta.iter().zip(&b.theta) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
