use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FlowState;
use crate::analysis::gaussian_density;
use crate::error::{Error, Result};
use crate::geometry::snapshot::fmt_num;
use crate::geometry::{compute_frame, enclosed_area, Vec2};
use crate::lagrangian::{defect_from, lagrangian_angle, liouville_integral};

pub const DIAGNOSTICS_HEADER: [&str; 11] = [
    "t",
    "dt",
    "area",
    "liouville_integral",
    "maslov_integral",
    "monotone_defect",
    "max_curvature",
    "min_radius",
    "gaussian_density_origin",
    "angle_min",
    "angle_max",
];

/// One row of the diagnostics series. Quantities that do not apply (open curves,
/// origin contact) are NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub dt: f64,
    pub area: f64,
    pub liouville_integral: f64,
    pub maslov_integral: f64,
    pub monotone_defect: f64,
    pub max_curvature: f64,
    pub min_radius: f64,
    pub gaussian_density_origin: f64,
    pub angle_min: f64,
    pub angle_max: f64,
}

impl DiagnosticsRow {
    pub fn measure(state: &FlowState, density_reference_time: f64) -> Result<Self> {
        let mut area = 0.0;
        let mut lam = 0.0;
        let mut mas = 0.0;
        let mut kmax = 0.0_f64;
        let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &state.curves {
            let frame = compute_frame(c)?;
            area += enclosed_area(c);
            lam += liouville_integral(c, &frame);
            kmax = frame.curvature.iter().fold(kmax, |m, k| m.max(k.abs()));
            match lagrangian_angle(c, &frame) {
                Ok(a) => {
                    mas += a.total_increment;
                    let (lo, hi) = a.min_max();
                    amin = amin.min(lo);
                    amax = amax.max(hi);
                }
                Err(_) => {
                    mas = f64::NAN;
                    amin = f64::NAN;
                    amax = f64::NAN;
                }
            }
        }
        let defect = match state.initial_constant {
            Some(c) if mas != 0.0 => defect_from(lam, mas, c, state.t),
            _ => f64::NAN,
        };
        let density = if state.t < density_reference_time {
            gaussian_density(&state.curves, Vec2::ZERO, density_reference_time, state.t)
                .map(|d| d.value)
                .unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        Ok(DiagnosticsRow {
            t: state.t,
            dt: state.last_dt,
            area,
            liouville_integral: lam,
            maslov_integral: mas,
            monotone_defect: defect,
            max_curvature: kmax,
            min_radius: state.min_radius(),
            gaussian_density_origin: density,
            angle_min: amin,
            angle_max: amax,
        })
    }

    fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.dt,
            self.area,
            self.liouville_integral,
            self.maslov_integral,
            self.monotone_defect,
            self.max_curvature,
            self.min_radius,
            self.gaussian_density_origin,
            self.angle_min,
            self.angle_max,
        ]
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.len() != 11 {
            return None;
        }
        Some(DiagnosticsRow {
            t: v[0],
            dt: v[1],
            area: v[2],
            liouville_integral: v[3],
            maslov_integral: v[4],
            monotone_defect: v[5],
            max_curvature: v[6],
            min_radius: v[7],
            gaussian_density_origin: v[8],
            angle_min: v[9],
            angle_max: v[10],
        })
    }
}

pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut s = DIAGNOSTICS_HEADER.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.values().iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    std::fs::write(path, diagnostics_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Parses a diagnostics CSV written by [`write_diagnostics_csv`].
pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != DIAGNOSTICS_HEADER.join(",") {
        return Err(Error::Configuration(format!(
            "{}: unexpected diagnostics header",
            path.display()
        )));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let vals: std::result::Result<Vec<f64>, _> = l.split(',').map(str::parse).collect();
            vals.ok()
                .and_then(|v| DiagnosticsRow::from_values(&v))
                .ok_or_else(|| {
                    Error::Configuration(format!("{}: bad row {}", path.display(), i + 2))
                })
        })
        .collect()
}
