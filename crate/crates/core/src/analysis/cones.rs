use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::rescale::{clip_to_disk, RescaledCurve};
use crate::geometry::snapshot::fmt_num;
use crate::geometry::{PlaneCurve, Vec2};

/// Rays whose directions are within this angle of being opposite are joined into a line.
pub const RAY_PAIRING_TOLERANCE: f64 = PI / 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeComponent {
    /// Direction of the fitted line through the origin, in [0, π).
    pub direction: f64,
    /// Length-weighted mean of exp(2iθ), normalized.
    pub doubled_angle: Vec2,
    /// Circular standard deviation of 2θ, `√(−2 ln R̄)`.
    pub spread: f64,
    pub mass: f64,
    /// Max node distance to the fitted line over the window radius.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeDecomposition {
    pub s: f64,
    pub sigma: f64,
    pub components: Vec<ConeComponent>,
    /// Connected arcs of the curve in `B_4R` that meet `B_R`.
    #[serde(skip)]
    pub arc_count: usize,
}

impl ConeDecomposition {
    pub fn to_json(&self) -> String {
        let mut s = format!(
            "{{\"s\": {}, \"sigma\": {}, \"components\": [",
            fmt_num(self.s),
            fmt_num(self.sigma)
        );
        for (k, c) in self.components.iter().enumerate() {
            let _ = write!(
                s,
                "{}{{\"direction\": {}, \"doubled_angle\": [{}, {}], \"spread\": {}, \"mass\": {}, \"residual\": {}}}",
                if k == 0 { "" } else { ", " },
                fmt_num(c.direction),
                fmt_num(c.doubled_angle.x),
                fmt_num(c.doubled_angle.y),
                fmt_num(c.spread),
                fmt_num(c.mass),
                fmt_num(c.residual)
            );
        }
        s.push_str("]}\n");
        s
    }

    /// Largest angular distance between the mean doubled angles of two components.
    pub fn doubled_angle_mismatch(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.components.iter().enumerate() {
            for b in &self.components[i + 1..] {
                worst = worst.max(a.doubled_angle.cross(b.doubled_angle).atan2(a.doubled_angle.dot(b.doubled_angle)).abs());
            }
        }
        worst
    }
}

/// Distance from `d` to the nearest of the given line directions, modulo π.
pub fn direction_error(d: f64, targets: &[f64]) -> f64 {
    targets
        .iter()
        .map(|t| {
            let e = (d - t).rem_euclid(PI);
            e.min(PI - e)
        })
        .fold(f64::INFINITY, f64::min)
}

struct Piece {
    points: Vec<Vec2>,
    closed: bool,
}

fn min_distance_to_origin(points: &[Vec2], closed: bool) -> f64 {
    let n = points.len();
    let segs = if closed { n } else { n - 1 };
    let mut best = points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    for i in 0..segs {
        let (a, b) = (points[i], points[(i + 1) % n]);
        let d = b - a;
        let l2 = d.norm_sq();
        if l2 > 0.0 {
            let u = (-a.dot(d) / l2).clamp(0.0, 1.0);
            best = best.min((a + d * u).norm());
        }
    }
    best
}

fn ray_direction(points: &[Vec2]) -> f64 {
    let mut sum = Vec2::ZERO;
    for w in points.windows(2) {
        let m = (w[0] + w[1]) * 0.5;
        sum += m * w[0].distance(w[1]);
    }
    sum.arg()
}

fn fit(pieces: &[&Piece], window: f64) -> Option<ConeComponent> {
    let mut moment = Vec2::ZERO;
    let mut phase = Vec2::ZERO;
    let mut mass = 0.0;
    let mut phase_mass = 0.0;
    for piece in pieces {
        let p = &piece.points;
        let n = p.len();
        let segs = if piece.closed { n } else { n - 1 };
        for i in 0..segs {
            let (a, b) = (p[i], p[(i + 1) % n]);
            let d = b - a;
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let m = (a + b) * 0.5;
            mass += len;
            moment += m.cmul(m) * len + d.cmul(d) * (len / 12.0);
            if m.norm() > 1e-12 * window {
                // θ = arg(γ γ′) at the segment midpoint
                let theta = m.cmul(d).arg();
                phase += Vec2::from_angle(2.0 * theta) * len;
                phase_mass += len;
            }
        }
    }
    if !(mass > 0.0) {
        return None;
    }
    let direction = (0.5 * moment.arg()).rem_euclid(PI);
    let axis = Vec2::from_angle(direction);
    let residual = pieces
        .iter()
        .flat_map(|p| p.points.iter())
        .map(|q| axis.cross(*q).abs())
        .fold(0.0, f64::max)
        / window;
    let rbar = if phase_mass > 0.0 { (phase.norm() / phase_mass).min(1.0) } else { 0.0 };
    Some(ConeComponent {
        direction: if direction >= PI { 0.0 } else { direction },
        doubled_angle: if phase.norm() > 0.0 { phase / phase.norm() } else { Vec2::new(1.0, 0.0) },
        spread: (-2.0 * rbar.ln()).max(0.0).sqrt(),
        mass,
        residual,
    })
}

/// Splits the curves inside `B_4R(0)` into line components through the origin.
///
/// Connected arcs of the clipped curve that meet `B_R(0)` are cut at their point of
/// closest approach to the origin; the resulting rays are paired with an opposite ray
/// when one exists, so that two arcs crossing near the origin (as in a pinching neck)
/// resolve into the two lines they approximate. Closed loops are kept whole.
pub fn cone_decomposition(rescaled: &RescaledCurve, r: f64) -> ConeDecomposition {
    decompose(&rescaled.arcs, r, rescaled.s, rescaled.sigma)
}

pub fn decompose(curves: &[PlaneCurve], r: f64, s: f64, sigma: f64) -> ConeDecomposition {
    let window = 4.0 * r;
    let arcs: Vec<PlaneCurve> = curves
        .iter()
        .flat_map(|c| clip_to_disk(c, window))
        .filter(|c| min_distance_to_origin(c.points(), c.is_closed()) < r)
        .collect();
    let mut loops = Vec::new();
    let mut rays = Vec::new();
    for arc in &arcs {
        let p = arc.points();
        if arc.is_closed() {
            loops.push(Piece {
                points: p.to_vec(),
                closed: true,
            });
            continue;
        }
        let k = arc.min_radius().0;
        for ray in [p[..=k].iter().rev().copied().collect::<Vec<_>>(), p[k..].to_vec()] {
            if ray.len() >= 2 {
                rays.push(Piece {
                    points: ray,
                    closed: false,
                });
            }
        }
    }
    let dirs: Vec<f64> = rays.iter().map(|r| ray_direction(&r.points)).collect();
    let mut candidates = Vec::new();
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            let e = ((dirs[i] - dirs[j]).rem_euclid(TAU) - PI).abs();
            if e < RAY_PAIRING_TOLERANCE {
                candidates.push((e, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used = vec![false; rays.len()];
    let mut groups: Vec<Vec<&Piece>> = Vec::new();
    for (_, i, j) in candidates {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            groups.push(vec![&rays[i], &rays[j]]);
        }
    }
    for (i, ray) in rays.iter().enumerate() {
        if !used[i] {
            groups.push(vec![ray]);
        }
    }
    for l in &loops {
        groups.push(vec![l]);
    }
    let mut components: Vec<ConeComponent> = groups.iter().filter_map(|g| fit(g, window)).collect();
    components.sort_by(|a, b| a.direction.total_cmp(&b.direction));
    ConeDecomposition {
        s,
        sigma,
        components,
        arc_count: arcs.len(),
    }
}
