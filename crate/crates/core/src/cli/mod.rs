//! Command-line front end: scenario runs, run analysis and verification.
//!
//! ```text
//! lagflow run --config <file>
//! lagflow analyze <run_dir> {density|rescale|cones|spectrum|lemmas} [options]
//! lagflow scenarios list
//! lagflow verify <run_dir>
//! ```

pub mod analyze;
pub mod config;
pub mod run;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{load_config, parse_config, RunConfig, Scenario, ScenarioKind, DEFAULT_ELLIPSE_A};
pub use run::{
    execute, load_run, output_root, read_manifest, verify_run, LoadedRun, RunManifest, RunOutcome,
    RunOutput, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_RANGE, EXIT_SINGULAR, EXIT_VERIFY,
    OUTPUT_ROOT_ENV,
};
pub use scenario::{build_curves, scenarios_table};

use crate::analysis::{interpolate_state, RatioSampling, DEFAULT_WINDOW};
use crate::error::Error;
use crate::geometry::Vec2;

#[derive(Debug, Parser)]
#[command(name = "lagflow", version, about = "Equivariant Lagrangian mean curvature flow lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a scenario and write a run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output root (default: $LAGFLOW_OUTPUT_ROOT, else ./runs).
        #[arg(long)]
        output_root: Option<PathBuf>,
    },
    /// Analyze a finished run; reports go to <run_dir>/analysis.
    Analyze {
        run_dir: PathBuf,
        #[command(subcommand)]
        what: Analysis,
    },
    /// Built-in scenarios.
    Scenarios {
        #[command(subcommand)]
        what: ScenariosCmd,
    },
    /// Re-hash every file listed in a run manifest.
    Verify { run_dir: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum ScenariosCmd {
    List,
}

#[derive(Debug, Clone, Args)]
pub struct Reference {
    /// Center point "x,y" (default: detected singular point, else the origin).
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub x0: Option<Vec2>,
    /// Reference time (default: estimated singular time, else c/2).
    #[arg(long = "T", allow_hyphen_values = true)]
    pub t_ref: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Gaussian density series; checks monotonicity.
    Density {
        #[command(flatten)]
        reference: Reference,
    },
    /// Parabolic rescalings σ(γ_{T+s/σ²} − x0).
    Rescale {
        #[command(flatten)]
        reference: Reference,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 4.0, 8.0, 16.0])]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: f64,
    },
    /// Cone decomposition of rescalings inside B_R.
    Cones {
        #[command(flatten)]
        reference: Reference,
        #[arg(long, value_delimiter = ',', default_values_t = vec![16.0])]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
    },
    /// Histogram of the Lagrangian angle.
    Spectrum {
        #[command(flatten)]
        reference: Reference,
        #[arg(long, default_value_t = 32)]
        bins: usize,
        /// Time of the analyzed state (default: last recorded).
        #[arg(long, allow_hyphen_values = true, conflicts_with = "sigma")]
        t: Option<f64>,
        /// Analyze the rescaling at this σ instead of a recorded state.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        s: f64,
    },
    /// Radial-rate, quadrant, defect and density-ratio checks.
    Lemmas {
        /// Fixed disk radius for the off-origin ratios (default: min(|x0|/2, 0.25)).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![4.0, 8.0, 16.0])]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        s: f64,
    },
}

fn parse_point(text: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if let [x, y] = parts.as_slice() {
        let x: f64 = x.parse().map_err(|e| format!("x: {e}"))?;
        let y: f64 = y.parse().map_err(|e| format!("y: {e}"))?;
        return Ok(Vec2::new(x, y));
    }
    Err(format!("expected \"x,y\", got {text:?}"))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Range(_) => EXIT_RANGE,
        Error::Integration { .. } | Error::NonFinite { .. } | Error::StepUnderflow { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn resolve_reference(run: &LoadedRun, r: &Reference) -> Result<(Vec2, f64), Error> {
    let (x, t) = match (r.x0, r.t_ref) {
        (Some(x), Some(t)) => return Ok((x, t)),
        _ => analyze::default_reference(run)?,
    };
    Ok((r.x0.unwrap_or(x), r.t_ref.unwrap_or(t)))
}

fn run_cmd(config: PathBuf, root: Option<PathBuf>) -> Result<i32, Error> {
    let cfg = load_config(&config)?;
    let root = root.unwrap_or_else(output_root);
    let out = execute(&cfg, &root)?;
    let m = &out.manifest;
    println!("run directory: {}", out.dir.display());
    println!("outcome: {:?} after {} steps, t = {}", m.outcome, m.steps, out.evolution.final_state().t);
    if let Some(e) = &m.error {
        println!("error: {e}");
    }
    let r = &m.report;
    if r.detected {
        println!(
            "singularity: {:?} at ({}, {}), T in [{}, {}], T_est = {}",
            r.trigger.unwrap_or(crate::flow::Trigger::OriginContact),
            r.singular_point.x,
            r.singular_point.y,
            r.singular_time_bracket[0],
            r.singular_time_bracket[1],
            r.t_estimate
        );
    }
    for c in &m.checks {
        println!("check {}: {} (value {}, threshold {})", c.name, if c.pass { "PASS" } else { "FAIL" }, c.worst, c.threshold);
    }
    Ok(m.exit_code)
}

fn analyze_cmd(run_dir: PathBuf, what: Analysis) -> Result<i32, Error> {
    let run = load_run(&run_dir)?;
    match what {
        Analysis::Density { reference } => {
            let (x0, t) = resolve_reference(&run, &reference)?;
            let (rep, path) = analyze::density(&run, x0, t)?;
            println!(
                "density at ({}, {}), T = {}: {} samples, worst increase {:e}, monotone {}",
                x0.x,
                x0.y,
                t,
                rep.samples.len(),
                rep.worst_increase,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            println!("wrote {}", path.display());
        }
        Analysis::Rescale {
            reference,
            sigma,
            s,
            window,
        } => {
            let (x0, t) = resolve_reference(&run, &reference)?;
            let (out, path) = analyze::rescale(&run, x0, t, &sigma, s, window)?;
            for r in &out {
                println!("sigma {}: time {}, {} arcs", r.sigma, r.time, r.arcs.len());
            }
            println!("wrote {}", path.display());
        }
        Analysis::Cones {
            reference,
            sigma,
            s,
            r,
        } => {
            let (x0, t) = resolve_reference(&run, &reference)?;
            for (d, path) in analyze::cones(&run, x0, t, &sigma, s, r)? {
                println!(
                    "sigma {}: {} components, doubled-angle mismatch {:.4}",
                    d.sigma,
                    d.components.len(),
                    d.doubled_angle_mismatch()
                );
                for c in &d.components {
                    println!(
                        "  direction {:.4}  spread {:.4}  mass {:.4}  residual {:.4}",
                        c.direction, c.spread, c.mass, c.residual
                    );
                }
                println!("wrote {}", path.display());
            }
        }
        Analysis::Spectrum {
            reference,
            bins,
            t,
            sigma,
            s,
        } => {
            let curves = match sigma {
                Some(sg) => {
                    let (x0, tr) = resolve_reference(&run, &reference)?;
                    crate::analysis::rescale_flow(&run.trajectory, x0, tr, &[sg], s, DEFAULT_WINDOW)?
                        .remove(0)
                        .arcs
                }
                None => {
                    let last = run.trajectory.last().map_or(0.0, |st| st.t);
                    interpolate_state(&run.trajectory, t.unwrap_or(last))?
                }
            };
            let (sp, path) = analyze::spectrum(&run, &curves, bins)?;
            println!(
                "total mass {:.6}, heaviest antipodal pair {:.4} of the mass",
                sp.total_mass,
                sp.top_pair_fraction(1)
            );
            println!("wrote {}", path.display());
        }
        Analysis::Lemmas { delta, sigma, s } => {
            let mut sampling = RatioSampling::default();
            if let Some(d) = delta {
                if !(d > 0.0) {
                    return Err(Error::Configuration(format!("--delta must be positive, got {d}")));
                }
                sampling.delta_fraction = f64::INFINITY;
                sampling.delta_max = d;
            }
            let (suite, path) = analyze::lemmas(&run, &sampling, &sigma, s)?;
            print!("{}", suite.to_table());
            println!("wrote {}", path.display());
        }
    }
    Ok(EXIT_OK)
}

fn verify_cmd(run_dir: PathBuf) -> Result<i32, Error> {
    let problems = verify_run(&run_dir)?;
    if problems.is_empty() {
        println!("{}: all files verified", run_dir.display());
        Ok(EXIT_OK)
    } else {
        for p in &problems {
            println!("{p}");
        }
        Ok(EXIT_VERIFY)
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run { config, output_root } => run_cmd(config, output_root),
        Command::Analyze { run_dir, what } => analyze_cmd(run_dir, what),
        Command::Scenarios {
            what: ScenariosCmd::List,
        } => {
            print!("{}", scenarios_table());
            Ok(EXIT_OK)
        }
        Command::Verify { run_dir } => verify_cmd(run_dir),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    dispatch(cli)
}
