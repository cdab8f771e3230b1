use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::path::Path;

use super::config::{RunConfig, ScenarioKind};
use crate::error::Result;
use crate::geometry::snapshot::read_snapshot;
use crate::geometry::{PlaneCurve, Vec2};

/// Semi-minor axis of the ellipse family.
pub const ELLIPSE_SEMI_MINOR: f64 = 2.0;

/// Straight segment through the origin in direction `phi`, from `-half_length` to
/// `half_length`. An even node count keeps every node off the origin.
pub fn line_through_origin(phi: f64, half_length: f64, nodes: usize) -> Result<PlaneCurve> {
    let n = nodes.max(4) & !1;
    let d = Vec2::from_angle(phi);
    let h = 2.0 * half_length / (n - 1) as f64;
    PlaneCurve::open((0..n).map(|i| d * (-half_length + h * i as f64)).collect())
}

/// The ellipse `x²/a² + y²/4 = 1`, counterclockwise from (a, 0).
pub fn ellipse(a: f64, nodes: usize) -> Result<PlaneCurve> {
    PlaneCurve::from_fn(nodes, |s| Vec2::new(a * s.cos(), ELLIPSE_SEMI_MINOR * s.sin()))
}

pub fn circle(rho: f64, nodes: usize) -> Result<PlaneCurve> {
    PlaneCurve::from_fn(nodes, |s| Vec2::from_angle(s) * rho)
}

/// Initial curves of a resolved configuration, before normalization.
pub fn build_curves(config: &RunConfig) -> Result<Vec<PlaneCurve>> {
    let sc = &config.scenario;
    let n = config.resolution;
    Ok(match sc.name {
        ScenarioKind::Circle => vec![circle(sc.number("rho"), n)?],
        ScenarioKind::Ellipse => vec![ellipse(sc.number("a"), n)?],
        ScenarioKind::SlagCone => {
            let (phi, l) = (sc.number("phi"), sc.number("truncation"));
            vec![
                line_through_origin(phi, l, n)?,
                line_through_origin(phi + 2.0 * FRAC_PI_4, l, n)?,
            ]
        }
        ScenarioKind::XCone => {
            let l = sc.number("truncation");
            vec![
                line_through_origin(FRAC_PI_4, l, n)?,
                line_through_origin(3.0 * FRAC_PI_4, l, n)?,
            ]
        }
        ScenarioKind::Custom => {
            let path = sc.path().unwrap_or_default();
            vec![read_snapshot(Path::new(path))?.0]
        }
    })
}

fn note(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::Circle => "round circle of radius rho; shrinks to the origin at T = ρ²/4",
        ScenarioKind::Ellipse => {
            "γ_a family x²/a² + y²/4 ≤ 1, semi-minor fixed at 2; pinches at the origin for large a"
        }
        ScenarioKind::SlagCone => {
            "perpendicular lines at phi and phi + π/2 truncated at ±truncation; special Lagrangian, stationary"
        }
        ScenarioKind::XCone => "lines y = x and y = −x truncated at ±truncation; analysis fixture, stationary",
        ScenarioKind::Custom => "curve read from a snapshot file (relative paths resolve against the config)",
    }
}

/// Names, parameters with defaults and a one-line note for each built-in scenario.
pub fn scenarios_table() -> String {
    let mut rows: Vec<[String; 3]> = vec![["name".into(), "parameters".into(), "note".into()]];
    for kind in ScenarioKind::ALL {
        let params = kind
            .parameters()
            .iter()
            .map(|(k, d)| match d {
                Some(v) => format!("{k}={v}"),
                None => format!("{k} (required)"),
            })
            .collect::<Vec<_>>()
            .join(", ");
        rows.push([kind.name().into(), params, note(kind).into()]);
    }
    let w0 = rows.iter().map(|r| r[0].chars().count()).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r[1].chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for r in &rows {
        let _ = writeln!(s, "{:<w0$}  {:<w1$}  {}", r[0], r[1], r[2]);
    }
    s
}
