use serde::{Deserialize, Serialize};

use super::spline::CubicSpline;
use super::stencil;
use super::vec2::Vec2;
use crate::error::{Error, Result};

/// Relative node-spacing threshold below which a curve is declared degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Minimum node count of a closed curve.
pub const MIN_CLOSED_NODES: usize = 16;

/// An oriented, sampled plane curve. Closed curves are periodic in the node index;
/// open curves (cone fixtures, clipped arcs) have fixed end nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneCurve {
    points: Vec<Vec2>,
    closed: bool,
}

/// Per-node differential data of a curve, derivatives taken with respect to the node index.
#[derive(Clone, Debug)]
pub struct FrameData {
    /// γ′ with respect to the node index.
    pub derivative: Vec<Vec2>,
    pub tangent: Vec<Vec2>,
    /// Tangent rotated by +π/2; points inward on counterclockwise curves.
    pub normal: Vec<Vec2>,
    /// Signed curvature; the curvature vector is `curvature * normal`.
    pub curvature: Vec<f64>,
    /// Arclength quadrature weight per node (trapezoid in the node index).
    pub weight: Vec<f64>,
}

impl PlaneCurve {
    /// A closed curve; needs at least [`MIN_CLOSED_NODES`] finite nodes.
    pub fn closed(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < MIN_CLOSED_NODES {
            return Err(Error::Configuration(format!(
                "closed curve needs at least {MIN_CLOSED_NODES} nodes, got {}",
                points.len()
            )));
        }
        Self::checked(points, true)
    }

    /// An open arc; needs at least two finite nodes.
    pub fn open(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Configuration(format!(
                "open curve needs at least 2 nodes, got {}",
                points.len()
            )));
        }
        Self::checked(points, false)
    }

    pub fn new(points: Vec<Vec2>, closed: bool) -> Result<Self> {
        if closed {
            Self::closed(points)
        } else {
            Self::open(points)
        }
    }

    fn checked(points: Vec<Vec2>, closed: bool) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Configuration(format!("node {i} is not finite")));
        }
        Ok(PlaneCurve { points, closed })
    }

    /// Closed curve sampled from a parametric function on `[0, 2π)`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec2) -> Result<Self> {
        let pts = (0..n)
            .map(|i| f(std::f64::consts::TAU * i as f64 / n as f64))
            .collect();
        Self::closed(pts)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    /// Same node structure, new positions. Callers keep the node count.
    pub(crate) fn with_points(&self, points: Vec<Vec2>) -> Self {
        debug_assert_eq!(points.len(), self.points.len());
        PlaneCurve {
            points,
            closed: self.closed,
        }
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.closed && shoelace(&self.points) > 0.0
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    /// Chord lengths between consecutive nodes.
    pub fn spacings(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..self.segment_count())
            .map(|i| self.points[(i + 1) % n].distance(self.points[i]))
            .collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn polyline_length(&self) -> f64 {
        self.spacings().iter().sum()
    }

    /// Diagonal of the axis-aligned bounding box, within √2 of the true diameter.
    pub fn bbox_diagonal(&self) -> f64 {
        let (mut lo, mut hi) = (self.points[0], self.points[0]);
        for p in &self.points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        hi.distance(lo)
    }

    /// Largest distance between two nodes (quadratic in the node count).
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max(a.distance(*b));
            }
        }
        best
    }

    pub fn min_radius(&self) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.norm()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.with_points(self.points.iter().map(|p| *p * factor).collect())
    }

    pub fn translated(&self, offset: Vec2) -> Self {
        self.with_points(self.points.iter().map(|p| *p + offset).collect())
    }

    /// Reverses node order, keeping node 0 in place for closed curves.
    pub fn reversed(&self) -> Self {
        let n = self.points.len();
        let pts = if self.closed {
            (0..n).map(|i| self.points[(n - i) % n]).collect()
        } else {
            self.points.iter().rev().copied().collect()
        };
        self.with_points(pts)
    }

    pub(crate) fn check_spacing(&self) -> Result<()> {
        let threshold = DEGENERACY_RATIO * self.bbox_diagonal();
        for (i, h) in self.spacings().into_iter().enumerate() {
            if !(h > threshold) {
                return Err(Error::DegenerateCurve {
                    node: i,
                    spacing: h,
                    threshold,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn spline(&self) -> Result<CubicSpline> {
        CubicSpline::new(&self.points, self.closed).map_err(|node| Error::DegenerateCurve {
            node,
            spacing: 0.0,
            threshold: DEGENERACY_RATIO * self.bbox_diagonal(),
        })
    }
}

fn shoelace(p: &[Vec2]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|i| p[i].cross(p[(i + 1) % n])).sum::<f64>()
}

/// Tangent, inward normal, curvature and quadrature weights from fourth-order differences.
pub fn compute_frame(curve: &PlaneCurve) -> Result<FrameData> {
    curve.check_spacing()?;
    let (d1, d2) = stencil::derivatives(&curve.points, curve.closed);
    let n = curve.points.len();
    let mut tangent = Vec::with_capacity(n);
    let mut normal = Vec::with_capacity(n);
    let mut curvature = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for i in 0..n {
        let speed = d1[i].norm();
        let t = d1[i] / speed;
        tangent.push(t);
        normal.push(t.perp());
        curvature.push(d1[i].cross(d2[i]) / (speed * speed * speed));
        let end = !curve.closed && (i == 0 || i == n - 1);
        weight.push(if end { 0.5 * speed } else { speed });
    }
    Ok(FrameData {
        derivative: d1,
        tangent,
        normal,
        curvature,
        weight,
    })
}

/// Orthogonal projection of each position vector onto the normal line.
pub fn normal_projection(curve: &PlaneCurve, frame: &FrameData) -> Vec<Vec2> {
    curve
        .points
        .iter()
        .zip(&frame.normal)
        .map(|(p, nrm)| *nrm * p.dot(*nrm))
        .collect()
}

/// Signed enclosed area: ½∮(x dy − y dx) integrated exactly on the periodic
/// chord-length cubic spline through the nodes (a high-order shoelace).
/// For open curves this is the signed area swept from the origin.
pub fn enclosed_area(curve: &PlaneCurve) -> f64 {
    match curve.spline() {
        Ok(sp) => sp.sector_area(),
        // coincident nodes: the polygon rule is still well defined
        Err(_) => {
            if curve.closed {
                shoelace(&curve.points)
            } else {
                0.5 * curve.points.windows(2).map(|w| w[0].cross(w[1])).sum::<f64>()
            }
        }
    }
}

/// Redistributes nodes to equal arclength spacing along the interpolating cubic spline.
/// Node 0 (and, for open curves, the last node) stays fixed.
pub fn resample(curve: &PlaneCurve, target_count: usize) -> Result<PlaneCurve> {
    if target_count < MIN_CLOSED_NODES && curve.closed {
        return Err(Error::Configuration(format!(
            "resample target {target_count} is below {MIN_CLOSED_NODES}"
        )));
    }
    if target_count < 2 {
        return Err(Error::Configuration("resample target below 2".into()));
    }
    curve.check_spacing()?;
    let sp = curve.spline()?;
    let lengths = sp.segment_lengths();
    let total: f64 = lengths.iter().sum();
    let intervals = if curve.closed {
        target_count
    } else {
        target_count - 1
    };
    let step = total / intervals as f64;

    let mut out = Vec::with_capacity(target_count);
    out.push(curve.points[0]);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for k in 1..intervals {
        let target = step * k as f64;
        while seg + 1 < lengths.len() && seg_start + lengths[seg] < target {
            seg_start += lengths[seg];
            seg += 1;
        }
        let tau = sp.invert_length(seg, target - seg_start, lengths[seg]);
        out.push(sp.eval(seg, tau));
    }
    if !curve.closed {
        out.push(*curve.points.last().unwrap());
    }
    PlaneCurve::new(out, curve.closed)
}

/// max |γ(sᵢ) + γ(sᵢ₊N/2)|: zero for curves preserved by the antipodal map.
pub fn antipodal_defect(curve: &PlaneCurve) -> Result<f64> {
    let n = curve.points.len();
    if n % 2 != 0 {
        return Err(Error::Configuration(format!(
            "antipodal defect needs an even node count, got {n}"
        )));
    }
    let half = n / 2;
    Ok((0..half)
        .map(|i| (curve.points[i] + curve.points[i + half]).norm())
        .fold(0.0, f64::max))
}

/// Replaces the curve by the average of itself and its antipodal image.
pub(crate) fn symmetrize_antipodal(points: &mut [Vec2]) {
    let n = points.len();
    debug_assert!(n % 2 == 0);
    let half = n / 2;
    for i in 0..half {
        let p = (points[i] - points[i + half]) * 0.5;
        points[i] = p;
        points[i + half] = -p;
    }
}
