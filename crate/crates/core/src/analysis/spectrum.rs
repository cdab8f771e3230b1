use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::snapshot::fmt_num;
use crate::geometry::{compute_frame, PlaneCurve};
use crate::lagrangian::{arc_angles, lift_angles};

/// Mass-weighted histogram of exp(iθ) over `bins` equal arcs of the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSpectrum {
    pub masses: Vec<f64>,
    pub total_mass: f64,
}

impl AngleSpectrum {
    pub fn bin_width(&self) -> f64 {
        TAU / self.masses.len() as f64
    }

    /// Fraction of the mass in the `k` heaviest antipodal bin pairs (bins `b` and
    /// `b + bins/2`). With an odd bin count every bin is its own pair.
    pub fn top_pair_fraction(&self, k: usize) -> f64 {
        let n = self.masses.len();
        let mut pairs: Vec<f64> = if n % 2 == 0 {
            (0..n / 2).map(|b| self.masses[b] + self.masses[b + n / 2]).collect()
        } else {
            self.masses.clone()
        };
        pairs.sort_by(|a, b| b.total_cmp(a));
        pairs.iter().take(k).sum::<f64>() / self.total_mass
    }

    pub fn occupied_bins(&self) -> usize {
        self.masses.iter().filter(|m| **m > 0.0).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin,angle_lo,angle_hi,mass\n");
        let w = self.bin_width();
        for (b, m) in self.masses.iter().enumerate() {
            let _ = writeln!(
                s,
                "{b},{},{},{}",
                fmt_num(w * b as f64),
                fmt_num(w * (b + 1) as f64),
                fmt_num(*m)
            );
        }
        s
    }
}

/// Histogram of the Lagrangian angle with the equivariant area weight `π|γ||γ′|` per node.
pub fn angle_spectrum(curves: &[PlaneCurve], bins: usize) -> Result<AngleSpectrum> {
    if bins < 8 {
        return Err(Error::Configuration(format!("angle spectrum needs at least 8 bins, got {bins}")));
    }
    let mut masses = vec![0.0; bins];
    let mut total = 0.0;
    for curve in curves {
        let p = curve.points();
        let (theta, weights) = if p.len() >= 6 {
            let frame = compute_frame(curve)?;
            (lift_angles(p, &frame.derivative, curve.is_closed()).theta, frame.weight)
        } else {
            let w = (0..p.len())
                .map(|i| {
                    let l = if i > 0 { p[i].distance(p[i - 1]) } else { 0.0 };
                    let r = if i + 1 < p.len() { p[i].distance(p[i + 1]) } else { 0.0 };
                    0.5 * (l + r)
                })
                .collect();
            (arc_angles(p).theta, w)
        };
        for ((q, th), w) in p.iter().zip(&theta).zip(&weights) {
            let m = PI * q.norm() * w;
            let b = ((th.rem_euclid(TAU) / TAU * bins as f64) as usize).min(bins - 1);
            masses[b] += m;
            total += m;
        }
    }
    Ok(AngleSpectrum {
        masses,
        total_mass: total,
    })
}
