//! Curve snapshot files: `{"t": number, "closed": bool, "points": [[x, y], ...]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::curve::PlaneCurve;
use super::vec2::Vec2;
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    t: f64,
    closed: bool,
    points: Vec<[f64; 2]>,
}

/// Formats a number with 17 significant digits (exact round trip).
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    format!("{v:.16e}")
}

pub fn snapshot_json(curve: &PlaneCurve, t: f64) -> String {
    let mut s = String::with_capacity(48 * curve.node_count() + 64);
    let _ = write!(
        s,
        "{{\"t\": {}, \"closed\": {}, \"points\": [",
        fmt_num(t),
        curve.is_closed()
    );
    for (i, p) in curve.points().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "[{}, {}]", fmt_num(p.x), fmt_num(p.y));
    }
    s.push_str("]}\n");
    s
}

pub fn parse_snapshot(text: &str, origin: &Path) -> Result<(PlaneCurve, f64)> {
    let f: SnapshotFile = serde_json::from_str(text).map_err(|e| Error::json(origin, e))?;
    let pts = f.points.into_iter().map(Vec2::from).collect();
    Ok((PlaneCurve::new(pts, f.closed)?, f.t))
}

pub fn write_snapshot(path: &Path, curve: &PlaneCurve, t: f64) -> Result<()> {
    std::fs::write(path, snapshot_json(curve, t)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(PlaneCurve, f64)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text, path)
}
