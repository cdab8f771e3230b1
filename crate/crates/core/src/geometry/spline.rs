//! Interpolating cubic splines through curve nodes, parameterized by chord length.
//!
//! Closed curves use periodic end conditions, open curves natural ones (so
//! collinear data is reproduced exactly).

use super::vec2::Vec2;

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

#[derive(Clone, Debug)]
pub(crate) struct CubicSpline {
    /// Knot values; one per node plus the closing knot for periodic splines.
    pub knots: Vec<f64>,
    /// Node values, with the first node repeated at the end when closed.
    pub values: Vec<Vec2>,
    /// Second derivatives at the knots (same layout as `values`).
    moments: Vec<Vec2>,
}

impl CubicSpline {
    /// Builds the spline. Returns the index of the first zero-length chord on failure.
    pub fn new(points: &[Vec2], closed: bool) -> Result<Self, usize> {
        let n = points.len();
        let segs = if closed { n } else { n.saturating_sub(1) };
        let mut knots = Vec::with_capacity(segs + 1);
        knots.push(0.0);
        let mut h = Vec::with_capacity(segs);
        for i in 0..segs {
            let d = points[(i + 1) % n].distance(points[i]);
            if !(d > 0.0) {
                return Err(i);
            }
            h.push(d);
            knots.push(knots[i] + d);
        }
        let mut values = points.to_vec();
        if closed {
            values.push(points[0]);
        }

        let moments = if closed {
            periodic_moments(points, &h)
        } else {
            natural_moments(points, &h)
        };
        Ok(CubicSpline {
            knots,
            values,
            moments,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.knots.len() - 1
    }

    /// Position on segment `i` at local coordinate `tau` in [0, 1].
    pub fn eval(&self, i: usize, tau: f64) -> Vec2 {
        let h = self.knots[i + 1] - self.knots[i];
        let b = tau;
        let a = 1.0 - b;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        self.values[i] * a
            + self.values[i + 1] * b
            + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0)
    }

    /// Derivative with respect to the chord-length parameter.
    pub fn deriv(&self, i: usize, tau: f64) -> Vec2 {
        let h = self.knots[i + 1] - self.knots[i];
        let b = tau;
        let a = 1.0 - b;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        (self.values[i + 1] - self.values[i]) / h
            + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0)
    }

    /// Arclength of segment `i` between local coordinates 0 and `tau`.
    pub fn partial_length(&self, i: usize, tau: f64) -> f64 {
        let h = self.knots[i + 1] - self.knots[i];
        let half = 0.5 * tau;
        GL8.iter()
            .map(|&(x, w)| w * self.deriv(i, half * (x + 1.0)).norm())
            .sum::<f64>()
            * half
            * h
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        (0..self.segment_count())
            .map(|i| self.partial_length(i, 1.0))
            .collect()
    }

    /// Gauss-Legendre points on every segment as `(position, arclength weight)`.
    pub fn quadrature(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        (0..self.segment_count()).flat_map(move |i| {
            let h = self.knots[i + 1] - self.knots[i];
            GL8.iter().map(move |&(x, w)| {
                let tau = 0.5 * (x + 1.0);
                (self.eval(i, tau), 0.5 * w * h * self.deriv(i, tau).norm())
            })
        })
    }

    /// ½∫(x dy − y dx) along the spline; exact for the cubic pieces.
    pub fn sector_area(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.segment_count() {
            let h = self.knots[i + 1] - self.knots[i];
            let seg: f64 = GL3
                .iter()
                .map(|&(x, w)| {
                    let tau = 0.5 * (x + 1.0);
                    w * self.eval(i, tau).cross(self.deriv(i, tau))
                })
                .sum();
            total += 0.5 * seg * 0.5 * h;
        }
        total
    }

    /// Local coordinate on segment `i` at which the arclength from the segment start is `target`.
    pub fn invert_length(&self, i: usize, target: f64, seg_len: f64) -> f64 {
        let h = self.knots[i + 1] - self.knots[i];
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut tau = (target / seg_len).clamp(0.0, 1.0);
        for _ in 0..50 {
            let f = self.partial_length(i, tau) - target;
            if f.abs() <= 1e-15 * seg_len.max(1e-300) {
                break;
            }
            if f > 0.0 {
                hi = tau;
            } else {
                lo = tau;
            }
            let speed = self.deriv(i, tau).norm() * h;
            let mut next = tau - f / speed;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - tau).abs() < 1e-16 {
                tau = next;
                break;
            }
            tau = next;
        }
        tau
    }
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[Vec2]) -> Vec<Vec2> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Vec2::ZERO; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - d[i - 1] * sub[i]) / m;
    }
    let mut x = vec![Vec2::ZERO; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - x[i + 1] * c[i];
    }
    x
}

fn natural_moments(p: &[Vec2], h: &[f64]) -> Vec<Vec2> {
    let n = p.len();
    let mut m = vec![Vec2::ZERO; n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut sub = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut sup = vec![0.0; k];
    let mut rhs = vec![Vec2::ZERO; k];
    for j in 0..k {
        let i = j + 1;
        sub[j] = h[i - 1];
        diag[j] = 2.0 * (h[i - 1] + h[i]);
        sup[j] = h[i];
        rhs[j] = ((p[i + 1] - p[i]) / h[i] - (p[i] - p[i - 1]) / h[i - 1]) * 6.0;
    }
    let inner = thomas(&sub, &diag, &sup, &rhs);
    m[1..n - 1].copy_from_slice(&inner);
    m
}

fn periodic_moments(p: &[Vec2], h: &[f64]) -> Vec<Vec2> {
    let n = p.len();
    let prev = |i: usize| (i + n - 1) % n;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![Vec2::ZERO; n];
    for i in 0..n {
        let hp = h[prev(i)];
        let hi = h[i];
        sub[i] = hp;
        diag[i] = 2.0 * (hp + hi);
        sup[i] = hi;
        rhs[i] = ((p[(i + 1) % n] - p[i]) / hi - (p[i] - p[prev(i)]) / hp) * 6.0;
    }
    // Cyclic tridiagonal system via Sherman-Morrison.
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut diag_mod = diag.clone();
    diag_mod[0] -= gamma;
    diag_mod[n - 1] -= alpha * beta / gamma;
    let x = thomas(&sub, &diag_mod, &sup, &rhs);
    let mut u = vec![Vec2::ZERO; n];
    u[0] = Vec2::new(gamma, gamma);
    u[n - 1] = Vec2::new(alpha, alpha);
    let z = thomas(&sub, &diag_mod, &sup, &u);
    let fx = (x[0].x + beta * x[n - 1].x / gamma) / (1.0 + z[0].x + beta * z[n - 1].x / gamma);
    let fy = (x[0].y + beta * x[n - 1].y / gamma) / (1.0 + z[0].y + beta * z[n - 1].y / gamma);
    let mut m: Vec<Vec2> = x
        .iter()
        .zip(&z)
        .map(|(xi, zi)| Vec2::new(xi.x - fx * zi.x, xi.y - fy * zi.y))
        .collect();
    m.push(m[0]);
    m
}
