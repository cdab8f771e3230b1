use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{RunConfig, Scenario, ScenarioKind};
use super::scenario::build_curves;
use crate::analysis::{LemmaCheck, DEFECT_TOLERANCE};
use crate::error::{Error, Result};
use crate::flow::{
    diagnostics_csv, evolve, read_diagnostics_csv, DiagnosticsRow, Evolution, FlowState, Outcome,
    SingularityReport,
};
use crate::geometry::snapshot::{read_snapshot, snapshot_json};
use crate::geometry::{PlaneCurve, Vec2};
use crate::lagrangian::normalize;

/// Environment variable naming the directory runs are written under.
pub const OUTPUT_ROOT_ENV: &str = "LAGFLOW_OUTPUT_ROOT";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "lagflow-run/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_RANGE: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Tolerance of the circle lifespan check.
pub const CIRCLE_TIME_TOLERANCE: f64 = 1e-3;
/// Singular point distance from the origin, as a fraction of the initial diameter.
pub const PINCH_POINT_FRACTION: f64 = 0.01;
/// Largest node displacement of a stationary fixture.
pub const STATIONARY_TOLERANCE: f64 = 1e-10;

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
    /// Index of the recorded state.
    pub state: usize,
    /// Index of the curve within the state.
    pub curve: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    ReachedEnd,
    Singular,
    StepLimit,
    NumericalFailure,
}

impl RunOutcome {
    pub fn exit_code(self) -> i32 {
        match self {
            RunOutcome::ReachedEnd | RunOutcome::StepLimit => EXIT_OK,
            RunOutcome::Singular => EXIT_SINGULAR,
            RunOutcome::NumericalFailure => EXIT_NUMERICAL,
        }
    }
}

impl From<Outcome> for RunOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::ReachedEnd => RunOutcome::ReachedEnd,
            Outcome::Singular => RunOutcome::Singular,
            Outcome::StepLimit => RunOutcome::StepLimit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub scenario: Scenario,
    /// Resolved configuration; re-running it reproduces the run.
    pub config: RunConfig,
    /// Factor applied to the scenario curve by normalization (1 when not normalized).
    pub normalization_scale: f64,
    /// Monotonicity constant of the evolved initial data.
    pub initial_constant: Option<f64>,
    pub initial_diameter: f64,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outcome: RunOutcome,
    pub exit_code: i32,
    pub error: Option<String>,
    pub steps: u64,
    pub report: SingularityReport,
    pub snapshots: Vec<SnapshotEntry>,
    pub inventory: Vec<FileEntry>,
    pub checks: Vec<LemmaCheck>,
}

impl RunManifest {
    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub evolution: Evolution,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn config_json(config: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

/// `run_name` if set, else `<scenario>-<first 12 hex digits of the config hash>`; a
/// numeric suffix is appended when the directory already exists.
fn fresh_run_dir(root: &Path, config: &RunConfig) -> Result<PathBuf> {
    let base = match &config.output.run_name {
        Some(n) => n.clone(),
        None => format!(
            "{}-{}",
            config.scenario.name.name(),
            &sha256_hex(config_json(config).as_bytes())[..12]
        ),
    };
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut k = 1;
    loop {
        let name = if k == 1 { base.clone() } else { format!("{base}-{k}") };
        let dir = root.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => k += 1,
            Err(e) => return Err(Error::io(&dir, e)),
        }
    }
}

struct Writer {
    dir: PathBuf,
    inventory: Vec<FileEntry>,
}

impl Writer {
    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.inventory.push(FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

fn snapshot_name(state: usize, curve: usize, curves: usize) -> String {
    if curves == 1 {
        format!("snapshots/snap_{state:05}.json")
    } else {
        format!("snapshots/snap_{state:05}_{curve}.json")
    }
}

/// Scenario curves after optional normalization, with the applied scale.
pub fn initial_state(config: &RunConfig) -> Result<(FlowState, f64)> {
    let mut curves = build_curves(config)?;
    let mut scale = 1.0;
    if config.normalize {
        let state = FlowState::new(curves.clone())?;
        let c = state.initial_constant.ok_or_else(|| {
            Error::Configuration("normalize: scenario has no monotonicity constant".into())
        })?;
        if curves.len() == 1 {
            let (n, s) = normalize(&curves[0])?;
            curves = vec![n];
            scale = s;
        } else {
            if !(c > 0.0) {
                return Err(Error::Configuration(format!("normalize: needs c > 0, got {c}")));
            }
            scale = c.powf(-0.5);
            curves = curves.iter().map(|k| k.scaled(scale)).collect();
        }
    }
    Ok((FlowState::new(curves)?, scale))
}

fn max_displacement(a: &FlowState, b: &FlowState) -> f64 {
    a.curves
        .iter()
        .zip(&b.curves)
        .map(|(p, q)| {
            if p.node_count() != q.node_count() {
                return f64::INFINITY;
            }
            p.points()
                .iter()
                .zip(q.points())
                .map(|(x, y)| x.distance(*y))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Checks registered for every run plus the scenario-specific closed-form checks.
pub fn run_checks(config: &RunConfig, scale: f64, evo: &Evolution) -> Vec<LemmaCheck> {
    let mut checks = Vec::new();
    let first = &evo.trajectory[0];
    let c = first.initial_constant;
    if let Some(c) = c {
        let defect = evo
            .diagnostics
            .iter()
            .map(|r| r.monotone_defect)
            .filter(|d| !d.is_nan())
            .fold(0.0_f64, f64::max);
        checks.push(LemmaCheck {
            name: "monotone_defect".into(),
            pass: defect <= DEFECT_TOLERANCE * c.abs(),
            worst: defect / c.abs(),
            threshold: DEFECT_TOLERANCE,
            detail: "max relative defect of [λ] = (c − 2t)[dθ]".into(),
        });
    }
    let r = &evo.report;
    match config.scenario.name {
        ScenarioKind::Circle => {
            let rho = config.scenario.number("rho") * scale;
            let exact = 0.25 * rho * rho;
            let t_final = evo.final_state().t;
            if !r.detected && t_final < exact {
                // stopped early: compare against ρ(t) = √(ρ² − 4t) instead
                let err = evo
                    .diagnostics
                    .iter()
                    .map(|d| {
                        let want = (rho * rho - 4.0 * d.t).sqrt();
                        (d.min_radius - want).abs() / want
                    })
                    .fold(0.0_f64, f64::max);
                checks.push(LemmaCheck {
                    name: "circle_radius".into(),
                    pass: err <= CIRCLE_TIME_TOLERANCE,
                    worst: err,
                    threshold: CIRCLE_TIME_TOLERANCE,
                    detail: format!("max |r − √(ρ² − 4t)| / √(ρ² − 4t) through t = {t_final}"),
                });
                return checks;
            }
            let err = (r.t_estimate - exact).abs();
            checks.push(LemmaCheck {
                name: "circle_lifespan".into(),
                pass: r.detected && err <= CIRCLE_TIME_TOLERANCE,
                worst: err,
                threshold: CIRCLE_TIME_TOLERANCE,
                detail: format!("|T_est − ρ²/4| with ρ²/4 = {exact}, T_est = {}", r.t_estimate),
            });
        }
        ScenarioKind::Ellipse => {
            let horizon = c.map_or(f64::NAN, |c| 0.5 * c);
            if !r.detected && evo.final_state().t < horizon {
                return checks;
            }
            let d0 = evo.initial_diameter;
            let dist = r.singular_point.norm() / d0;
            checks.push(LemmaCheck {
                name: "pinch_at_origin".into(),
                pass: r.detected && dist <= PINCH_POINT_FRACTION,
                worst: dist,
                threshold: PINCH_POINT_FRACTION,
                detail: format!("|singular point| / initial diameter, diameter = {d0}"),
            });
            checks.push(LemmaCheck {
                name: "before_horizon".into(),
                pass: r.detected && r.t_estimate < horizon,
                worst: r.t_estimate,
                threshold: horizon,
                detail: format!("T_est < c/2, bracket [{}, {}]", r.singular_time_bracket[0], r.singular_time_bracket[1]),
            });
        }
        ScenarioKind::SlagCone | ScenarioKind::XCone => {
            let d = max_displacement(first, evo.final_state());
            checks.push(LemmaCheck {
                name: "stationary".into(),
                pass: d <= STATIONARY_TOLERANCE,
                worst: d,
                threshold: STATIONARY_TOLERANCE,
                detail: format!("max node displacement over {} steps", evo.steps),
            });
        }
        ScenarioKind::Custom => {}
    }
    checks
}

fn svg(trajectory: &[FlowState]) -> String {
    let extent = trajectory
        .first()
        .map(|s| {
            s.curves
                .iter()
                .flat_map(|c| c.points().iter().map(|p| p.x.abs().max(p.y.abs())))
                .fold(0.0, f64::max)
        })
        .unwrap_or(1.0)
        * 1.1;
    let size = 800.0;
    let map = |p: Vec2| ((p.x / extent + 1.0) * 0.5 * size, (1.0 - p.y / extent) * 0.5 * size);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let (cx, cy) = map(Vec2::ZERO);
    let _ = writeln!(
        s,
        "<path d=\"M {cx} 0 V {size} M 0 {cy} H {size}\" stroke=\"#ccc\" stroke-width=\"1\"/>"
    );
    let count = trajectory.len();
    let picks: Vec<usize> = if count <= 12 {
        (0..count).collect()
    } else {
        let mut v: Vec<usize> = (0..11).map(|k| k * (count - 1) / 11).collect();
        v.push(count - 1);
        v
    };
    for (j, &i) in picks.iter().enumerate() {
        let shade = (200.0 * (1.0 - j as f64 / picks.len().max(2).saturating_sub(1) as f64)) as u8;
        for c in &trajectory[i].curves {
            let mut d = String::new();
            for (k, p) in c.points().iter().enumerate() {
                let (x, y) = map(*p);
                let _ = write!(d, "{}{x:.2} {y:.2} ", if k == 0 { "M " } else { "L " });
            }
            if c.is_closed() {
                d.push('Z');
            }
            let _ = writeln!(
                s,
                "<path d=\"{d}\" fill=\"none\" stroke=\"rgb({shade},{shade},255)\" stroke-width=\"1.2\"><title>t = {}</title></path>",
                trajectory[i].t
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn write_outputs(
    dir: PathBuf,
    config: &RunConfig,
    scale: f64,
    evolution: &Evolution,
    outcome: RunOutcome,
    error: Option<String>,
    started: f64,
) -> Result<RunManifest> {
    let mut w = Writer {
        dir,
        inventory: Vec::new(),
    };
    w.write("config.json", config_json(config).as_bytes())?;
    w.write("diagnostics.csv", diagnostics_csv(&evolution.diagnostics).as_bytes())?;
    let mut snapshots = Vec::new();
    for (i, state) in evolution.trajectory.iter().enumerate() {
        for (k, c) in state.curves.iter().enumerate() {
            let file = snapshot_name(i, k, state.curves.len());
            w.write(&file, snapshot_json(c, state.t).as_bytes())?;
            snapshots.push(SnapshotEntry {
                file,
                t: state.t,
                state: i,
                curve: k,
            });
        }
    }
    if config.output.svg {
        w.write("curves.svg", svg(&evolution.trajectory).as_bytes())?;
    }
    let checks = if outcome == RunOutcome::NumericalFailure {
        Vec::new()
    } else {
        run_checks(config, scale, evolution)
    };
    let manifest = RunManifest {
        format: MANIFEST_FORMAT.into(),
        scenario: config.scenario.clone(),
        config: config.clone(),
        normalization_scale: scale,
        initial_constant: evolution.trajectory[0].initial_constant,
        initial_diameter: evolution.initial_diameter,
        started_unix: started,
        finished_unix: unix_now(),
        outcome,
        exit_code: outcome.exit_code(),
        error,
        steps: evolution.steps,
        report: evolution.report.clone(),
        snapshots,
        inventory: w.inventory,
        checks,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = w.dir.join(MANIFEST_FILE);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Builds the scenario, evolves it and writes the run directory under `root`.
/// Integration failures still produce a run directory holding the partial result.
pub fn execute(config: &RunConfig, root: &Path) -> Result<RunOutput> {
    let started = unix_now();
    let (initial, scale) = initial_state(config)?;
    let (evolution, outcome, error) = match evolve(initial, &config.evolve_config()) {
        Ok(e) => {
            let o = e.outcome.into();
            (e, o, None)
        }
        Err(Error::Integration { t, detail, partial }) => (
            *partial,
            RunOutcome::NumericalFailure,
            Some(format!("integration failure at t = {t}: {detail}")),
        ),
        Err(e) => return Err(e),
    };
    let dir = fresh_run_dir(root, config)?;
    let manifest = write_outputs(dir.clone(), config, scale, &evolution, outcome, error, started)?;
    Ok(RunOutput {
        dir,
        manifest,
        evolution,
    })
}

pub fn read_manifest(run_dir: &Path) -> Result<RunManifest> {
    let path = run_dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
}

/// A run read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub trajectory: Vec<FlowState>,
    pub diagnostics: Vec<DiagnosticsRow>,
}

pub fn load_run(run_dir: &Path) -> Result<LoadedRun> {
    let manifest = read_manifest(run_dir)?;
    let mut groups: Vec<(f64, Vec<PlaneCurve>)> = Vec::new();
    for e in &manifest.snapshots {
        let path = run_dir.join(&e.file);
        if !path.is_file() {
            return Err(Error::Range(format!(
                "snapshot {} at t = {} is missing from {}",
                e.file,
                e.t,
                run_dir.display()
            )));
        }
        let (curve, t) = read_snapshot(&path)?;
        if groups.len() <= e.state {
            groups.resize_with(e.state + 1, || (t, Vec::new()));
        }
        groups[e.state].0 = t;
        groups[e.state].1.push(curve);
    }
    if groups.is_empty() || groups.iter().any(|g| g.1.is_empty()) {
        return Err(Error::Range(format!(
            "{}: manifest lists no complete snapshot states",
            run_dir.display()
        )));
    }
    let mut trajectory = Vec::with_capacity(groups.len());
    let mut constant = None;
    for (i, (t, curves)) in groups.into_iter().enumerate() {
        let mut st = FlowState::new(curves)?;
        if i == 0 {
            constant = st.initial_constant;
        }
        st.initial_constant = constant;
        st.t = t;
        trajectory.push(st);
    }
    let diagnostics = read_diagnostics_csv(&run_dir.join("diagnostics.csv"))?;
    Ok(LoadedRun {
        dir: run_dir.to_path_buf(),
        manifest,
        trajectory,
        diagnostics,
    })
}

/// Problems found by re-hashing the inventory; empty when the run is intact.
pub fn verify_run(run_dir: &Path) -> Result<Vec<String>> {
    let manifest = read_manifest(run_dir)?;
    let mut problems = Vec::new();
    for e in &manifest.inventory {
        let path = run_dir.join(&e.path);
        match std::fs::read(&path) {
            Ok(bytes) => {
                let h = sha256_hex(&bytes);
                if h != e.sha256 {
                    problems.push(format!("{}: hash mismatch (expected {}, found {h})", e.path, e.sha256));
                } else if bytes.len() as u64 != e.bytes {
                    problems.push(format!("{}: size mismatch", e.path));
                }
            }
            Err(err) => problems.push(format!("{}: {err}", e.path)),
        }
    }
    for s in &manifest.snapshots {
        if !manifest.inventory.iter().any(|e| e.path == s.file) {
            problems.push(format!("{}: snapshot missing from the inventory", s.file));
        }
    }
    Ok(problems)
}
