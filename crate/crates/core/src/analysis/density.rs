use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::geometry::{PlaneCurve, Vec2};

/// Gaussian density of the equivariant surface at `(x₀, T)` evaluated at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub x0: Vec2,
    pub reference_time: f64,
    pub t: f64,
    pub value: f64,
}

/// Exponentially scaled modified Bessel function `e^{−|x|} I₀(x)`
/// (polynomial approximations, relative error below 2e-7).
pub fn bessel_i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 3.75 {
        let t = (x / 3.75).powi(2);
        let i0 = 1.0
            + t * (3.515_622_9
                + t * (3.089_942_4
                    + t * (1.206_749_2 + t * (0.265_973_2 + t * (0.036_076_8 + t * 0.004_581_3)))));
        i0 * (-ax).exp()
    } else {
        let t = 3.75 / ax;
        let p = 0.398_942_28
            + t * (0.013_285_92
                + t * (0.002_253_19
                    + t * (-0.001_575_65
                        + t * (0.009_162_81
                            + t * (-0.020_577_06
                                + t * (0.026_355_37 + t * (-0.016_476_33 + t * 0.003_923_77)))))));
        p / ax.sqrt()
    }
}

/// Θ(x₀, T; t) for the surface swept by `curves`. The reference point is embedded
/// as `(x₀, 0) ∈ C²`; the rotation integral is done in closed form through `I₀`,
/// the arclength integral by Gauss-Legendre quadrature on the interpolating spline.
/// The double cover of the (s, α) parametrization contributes a factor ½.
pub fn gaussian_density(
    curves: &[PlaneCurve],
    x0: Vec2,
    reference_time: f64,
    t: f64,
) -> Result<DensitySample> {
    let tau = reference_time - t;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "density needs t < T, got t = {t}, T = {reference_time}"
        )));
    }
    let r0 = x0.norm_sq();
    let mut sum = 0.0;
    for curve in curves {
        let spline = curve.spline()?;
        for (p, w) in spline.quadrature() {
            let z = p.dot(x0) / (2.0 * tau);
            let e = -(p.norm_sq() + r0) / (4.0 * tau) + z.abs();
            sum += w * p.norm() * 2.0 * PI * e.exp() * bessel_i0e(z);
        }
    }
    Ok(DensitySample {
        x0,
        reference_time,
        t,
        value: 0.5 * sum / (4.0 * PI * tau),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub samples: Vec<DensitySample>,
    /// Largest increase Θ(t_{k+1}) − Θ(t_k); negative when strictly decreasing.
    pub worst_increase: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const MONOTONICITY_TOLERANCE: f64 = 1e-3;

/// Θ along a trajectory; states at or past `T` are skipped.
pub fn monotonicity_check(
    trajectory: &[FlowState],
    x0: Vec2,
    reference_time: f64,
) -> Result<MonotonicityReport> {
    let samples = trajectory
        .iter()
        .filter(|s| s.t < reference_time)
        .map(|s| gaussian_density(&s.curves, x0, reference_time, s.t))
        .collect::<Result<Vec<_>>>()?;
    let worst = samples
        .windows(2)
        .map(|w| w[1].value - w[0].value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MonotonicityReport {
        pass: samples.len() < 2 || worst <= MONOTONICITY_TOLERANCE,
        worst_increase: if samples.len() < 2 { 0.0 } else { worst },
        tolerance: MONOTONICITY_TOLERANCE,
        samples,
    })
}

/// Length of curve inside `B_δ(x₀)` over `2δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRatio {
    pub x0: Vec2,
    pub delta: f64,
    pub value: f64,
    /// Fewer than five segments per radius near x₀.
    pub under_resolved: bool,
}

/// Parameter interval of the segment `a + u(b − a)`, `u ∈ [0, 1]`, inside the disk.
pub(crate) fn clip_segment(a: Vec2, b: Vec2, center: Vec2, radius: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - center;
    let qa = d.norm_sq();
    if qa == 0.0 {
        return None;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm_sq() - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable roots
    let q = -0.5 * (qb + qb.signum() * sq);
    let (mut u0, mut u1) = if q == 0.0 {
        (-sq / (2.0 * qa), sq / (2.0 * qa))
    } else {
        let r1 = q / qa;
        let r2 = qc / q;
        (r1.min(r2), r1.max(r2))
    };
    u0 = u0.max(0.0);
    u1 = u1.min(1.0);
    (u1 > u0).then_some((u0, u1))
}

pub fn local_density_ratio(curves: &[PlaneCurve], x0: Vec2, delta: f64) -> DensityRatio {
    let mut length = 0.0;
    let mut max_spacing = 0.0_f64;
    for curve in curves {
        let p = curve.points();
        for i in 0..curve.segment_count() {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            if let Some((u0, u1)) = clip_segment(a, b, x0, delta) {
                let len = a.distance(b);
                length += (u1 - u0) * len;
                max_spacing = max_spacing.max(len);
            }
        }
    }
    DensityRatio {
        x0,
        delta,
        value: length / (2.0 * delta),
        under_resolved: delta <= 5.0 * max_spacing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn line(phi: f64, half: f64, n: usize) -> PlaneCurve {
        let d = Vec2::from_angle(phi);
        PlaneCurve::open(
            (0..n)
                .map(|i| d * (-half + 2.0 * half * i as f64 / (n - 1) as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bessel_reference_values() {
        // e^{-x} I0(x) from series summation
        let series = |x: f64| {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..200 {
                term *= (x / 2.0) * (x / 2.0) / (k as f64 * k as f64);
                sum += term;
            }
            sum * (-x.abs()).exp()
        };
        for x in [0.0, 0.3, 1.0, 3.0, 3.75, 4.0, 8.0, 20.0, -2.5] {
            let rel = (bessel_i0e(x) - series(x)).abs() / series(x);
            assert!(rel < 3e-7, "x = {x}: {rel}");
        }
    }

    #[test]
    fn line_has_unit_density() {
        let tau: f64 = 0.25;
        let l = line(0.7, 20.0 * tau.sqrt() * 1.5, 801);
        let d = gaussian_density(std::slice::from_ref(&l), Vec2::ZERO, 1.0, 1.0 - tau).unwrap();
        assert!((d.value - 1.0).abs() < 1e-3, "{}", d.value);
        // any point on the plane, including off-origin points of the line
        let x0 = Vec2::from_angle(0.7) * 1.3;
        let d = gaussian_density(std::slice::from_ref(&l), x0, 1.0, 1.0 - tau).unwrap();
        assert!((d.value - 1.0).abs() < 1e-3, "{}", d.value);
    }

    #[test]
    fn transverse_lines_add() {
        let tau: f64 = 0.1;
        let half = 25.0 * tau.sqrt();
        let curves = [line(0.2, half, 801), line(1.5, half, 801)];
        let d = gaussian_density(&curves, Vec2::ZERO, 2.0, 2.0 - tau).unwrap();
        assert!((d.value - 2.0).abs() < 1e-3, "{}", d.value);
    }

    #[test]
    fn reference_time_must_be_later() {
        let l = line(0.0, 1.0, 11);
        assert!(matches!(
            gaussian_density(&[l], Vec2::ZERO, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    /// Independent check of the circle value: direct 2-D quadrature of the heat kernel
    /// over the torus `(ρ e^{is} cos α, ρ e^{is} sin α)` with area element ρ² ds dα.
    fn torus_quadrature(rho: f64, tau: f64, m: usize) -> f64 {
        let h = 2.0 * PI / m as f64;
        let mut sum = 0.0;
        for i in 0..m {
            let s = h * i as f64;
            for j in 0..m {
                let a = h * j as f64;
                let x = [
                    rho * s.cos() * a.cos(),
                    rho * s.sin() * a.cos(),
                    rho * s.cos() * a.sin(),
                    rho * s.sin() * a.sin(),
                ];
                let r2: f64 = x.iter().map(|v| v * v).sum();
                sum += (-r2 / (4.0 * tau)).exp() * rho * rho * h * h;
            }
        }
        0.5 * sum / (4.0 * PI * tau)
    }

    #[test]
    fn shrinking_circle_density_matches_quadrature() {
        let target = 2.0 * PI / E;
        for tau in [1.0, 0.3, 0.01] {
            let rho = 2.0 * f64::sqrt(tau);
            assert!((torus_quadrature(rho, tau, 64) - target).abs() < 1e-9);
            let c = PlaneCurve::from_fn(128, |s| Vec2::from_angle(s) * rho).unwrap();
            let d = gaussian_density(&[c], Vec2::ZERO, 1.0, 1.0 - tau).unwrap();
            assert!((d.value - target).abs() < 1e-6, "{}", d.value);
        }
    }

    #[test]
    fn off_origin_density_matches_quadrature() {
        // 2-D quadrature with x₀ embedded as (x₀, 0)
        let (rho, tau) = (1.2, 0.4);
        let x0 = Vec2::new(0.5, -0.3);
        let m = 200;
        let h = 2.0 * PI / m as f64;
        let mut sum = 0.0;
        for i in 0..m {
            let g = Vec2::from_angle(h * i as f64) * rho;
            for j in 0..m {
                let a = h * j as f64;
                let x = [g.x * a.cos() - x0.x, g.y * a.cos() - x0.y, g.x * a.sin(), g.y * a.sin()];
                let r2: f64 = x.iter().map(|v| v * v).sum();
                sum += (-r2 / (4.0 * tau)).exp() * rho * rho * h * h;
            }
        }
        let oracle = 0.5 * sum / (4.0 * PI * tau);
        let c = PlaneCurve::from_fn(256, |s| Vec2::from_angle(s) * rho).unwrap();
        let d = gaussian_density(&[c], x0, 1.0, 1.0 - tau).unwrap();
        assert!((d.value - oracle).abs() < 1e-6 * oracle, "{} vs {oracle}", d.value);
    }

    #[test]
    fn static_cone_density_is_time_independent() {
        let half = 40.0;
        let curves = [line(0.4, half, 4001), line(0.4 + PI / 2.0, half, 4001)];
        let values: Vec<f64> = [0.9, 0.5, 0.1, 0.01]
            .iter()
            .map(|tau| gaussian_density(&curves, Vec2::ZERO, 1.0, 1.0 - tau).unwrap().value)
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() < 1e-3);
        }
    }

    #[test]
    fn density_ratio_of_lines() {
        let l = line(0.3, 5.0, 1001);
        for delta in [0.1, 0.5, 2.0] {
            let r = local_density_ratio(std::slice::from_ref(&l), Vec2::ZERO, delta);
            assert!((r.value - 1.0).abs() < 1e-12);
            assert!(!r.under_resolved);
        }
        let x = [line(0.3, 5.0, 1001), line(1.9, 5.0, 1001)];
        let r = local_density_ratio(&x, Vec2::ZERO, 1.0);
        assert!((r.value - 2.0).abs() < 1e-12);
        let coarse = local_density_ratio(&x, Vec2::ZERO, 0.02);
        assert!(coarse.under_resolved);
    }

    #[test]
    fn ratio_agrees_with_density_on_a_line() {
        let l = line(1.1, 10.0, 2001);
        let g = gaussian_density(std::slice::from_ref(&l), Vec2::ZERO, 1.0, 0.9).unwrap();
        for delta in [0.2, 1.0, 3.0] {
            let r = local_density_ratio(std::slice::from_ref(&l), Vec2::ZERO, delta);
            assert!((r.value - g.value).abs() < 1e-2);
        }
    }

    #[test]
    fn segment_clipping_is_exact() {
        let (u0, u1) = clip_segment(Vec2::new(-2.0, 0.0), Vec2::new(2.0, 0.0), Vec2::ZERO, 1.0).unwrap();
        assert!((u0 - 0.25).abs() < 1e-15 && (u1 - 0.75).abs() < 1e-15);
        assert!(clip_segment(Vec2::new(-2.0, 2.0), Vec2::new(2.0, 2.0), Vec2::ZERO, 1.0).is_none());
        let (u0, u1) = clip_segment(Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::ZERO, 1.5).unwrap();
        assert!(u0 == 0.0 && (u1 - 0.5).abs() < 1e-15);
    }
}
