use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::LoadedRun;
use crate::analysis::{
    angle_spectrum, cone_decomposition, lemma_suite, monotonicity_check, rescale_flow,
    rescaled_ratio_check, AngleSpectrum, ConeDecomposition, LemmaSuite, MonotonicityReport,
    RatioSampling, RescaledCurve,
};
use crate::error::{Error, Result};
use crate::geometry::snapshot::{fmt_num, snapshot_json};
use crate::geometry::{PlaneCurve, Vec2};

/// Default singular point and reference time of a run: the reported pinch when a
/// singularity was detected, else the origin and c/2.
pub fn default_reference(run: &LoadedRun) -> Result<(Vec2, f64)> {
    let r = &run.manifest.report;
    if r.detected && r.t_estimate.is_finite() {
        return Ok((r.singular_point, r.t_estimate));
    }
    match run.manifest.initial_constant {
        Some(c) if c > 0.0 => Ok((Vec2::ZERO, 0.5 * c)),
        _ => Err(Error::Configuration(
            "no singularity recorded and no monotonicity constant; pass --x0 and --T".into(),
        )),
    }
}

pub fn analysis_dir(run_dir: &Path) -> Result<PathBuf> {
    let dir = run_dir.join("analysis");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Θ(t) at `x0` with reference time `T` over the recorded states; writes `density.csv`.
pub fn density(run: &LoadedRun, x0: Vec2, reference_time: f64) -> Result<(MonotonicityReport, PathBuf)> {
    let report = monotonicity_check(&run.trajectory, x0, reference_time)?;
    let mut csv = String::from("t,theta\n");
    for s in &report.samples {
        let _ = writeln!(csv, "{},{}", fmt_num(s.t), fmt_num(s.value));
    }
    let path = analysis_dir(&run.dir)?.join("density.csv");
    write(&path, &csv)?;
    Ok((report, path))
}

#[derive(Serialize)]
struct RescaleIndex<'a> {
    x0: Vec2,
    reference_time: f64,
    s: f64,
    window: f64,
    rescalings: Vec<RescaleEntry<'a>>,
}

#[derive(Serialize)]
struct RescaleEntry<'a> {
    sigma: f64,
    time: f64,
    files: &'a [String],
}

fn sigma_tag(sigma: f64) -> String {
    format!("{sigma}").replace('.', "p")
}

/// Rescaled curves for every σ, written as snapshot files under `analysis/rescale/`.
pub fn rescale(
    run: &LoadedRun,
    x0: Vec2,
    reference_time: f64,
    sigmas: &[f64],
    s: f64,
    window: f64,
) -> Result<(Vec<RescaledCurve>, PathBuf)> {
    let out = rescale_flow(&run.trajectory, x0, reference_time, sigmas, s, window)?;
    let dir = analysis_dir(&run.dir)?.join("rescale");
    let mut files: Vec<Vec<String>> = Vec::new();
    for r in &out {
        let mut names = Vec::new();
        for (k, arc) in r.arcs.iter().enumerate() {
            let name = format!("sigma_{}_arc_{k}.json", sigma_tag(r.sigma));
            write(&dir.join(&name), &snapshot_json(arc, r.time))?;
            names.push(name);
        }
        files.push(names);
    }
    let index = RescaleIndex {
        x0,
        reference_time,
        s,
        window,
        rescalings: out
            .iter()
            .zip(&files)
            .map(|(r, f)| RescaleEntry {
                sigma: r.sigma,
                time: r.time,
                files: f,
            })
            .collect(),
    };
    let path = dir.join("index.json");
    write(&path, &(serde_json::to_string_pretty(&index).expect("index serializes") + "\n"))?;
    Ok((out, path))
}

/// Cone decomposition for each σ; writes `analysis/cones_sigma_<σ>.json`.
pub fn cones(
    run: &LoadedRun,
    x0: Vec2,
    reference_time: f64,
    sigmas: &[f64],
    s: f64,
    r: f64,
) -> Result<Vec<(ConeDecomposition, PathBuf)>> {
    if !(r > 0.0) {
        return Err(Error::Configuration(format!("--R must be positive, got {r}")));
    }
    let rescaled = rescale_flow(&run.trajectory, x0, reference_time, sigmas, s, 4.0 * r)?;
    let dir = analysis_dir(&run.dir)?;
    rescaled
        .iter()
        .map(|rc| {
            let d = cone_decomposition(rc, r);
            let path = dir.join(format!("cones_sigma_{}.json", sigma_tag(rc.sigma)));
            write(&path, &d.to_json())?;
            Ok((d, path))
        })
        .collect()
}

/// Angle spectrum of the given curves; writes `analysis/spectrum.csv`.
pub fn spectrum(run: &LoadedRun, curves: &[PlaneCurve], bins: usize) -> Result<(AngleSpectrum, PathBuf)> {
    let sp = angle_spectrum(curves, bins)?;
    let path = analysis_dir(&run.dir)?.join("spectrum.csv");
    write(&path, &sp.to_csv())?;
    Ok((sp, path))
}

/// The lemma checks over the whole run, plus the rescaled ratio at the singular point
/// when one was detected; writes `analysis/lemmas.csv`.
pub fn lemmas(
    run: &LoadedRun,
    sampling: &RatioSampling,
    sigmas: &[f64],
    s: f64,
) -> Result<(LemmaSuite, PathBuf)> {
    let mut suite = lemma_suite(&run.trajectory, &run.diagnostics, sampling);
    let r = &run.manifest.report;
    if r.detected && r.t_estimate.is_finite() {
        suite.checks.push(rescaled_ratio_check(
            &run.trajectory,
            r.singular_point,
            r.t_estimate,
            sigmas,
            s,
        ));
    }
    let path = analysis_dir(&run.dir)?.join("lemmas.csv");
    write(&path, &suite.to_table())?;
    Ok((suite, path))
}
