//! C ABI over the `lagflow` library.
//!
//! Curves and flows are opaque heap handles created by `lf_*_new` functions and released
//! with the matching `lf_*_free`. Every fallible function returns an [`LfStatus`]; on a
//! non-zero status, `lf_last_error_message` describes the failure on the calling thread.
//! Panics are caught at the boundary and reported as [`LfStatus::Panic`].

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lagflow::analysis::gaussian_density;
use lagflow::flow::{evolve, step, EvolveConfig, FlowState, Scheme, StepConfig, Trigger};
use lagflow::geometry::{enclosed_area, resample};
use lagflow::lagrangian::{normalize, MonotoneData};
use lagflow::{Error, PlaneCurve, Vec2};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateCurve = 3,
    OriginContact = 4,
    NonMonotone = 5,
    Domain = 6,
    Numerical = 7,
    Range = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// A sampled plane curve.
pub struct LfCurve(PlaneCurve);

/// An evolving flow state with its stepping configuration.
pub struct LfFlow {
    state: FlowState,
    step: StepConfig,
}

/// Stop report of `lf_flow_evolve`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LfSingularity {
    /// Non-zero when the run stopped at a singularity.
    pub detected: u8,
    /// 0 none, 1 origin contact, 2 curvature blow-up, 3 step underflow.
    pub trigger: u8,
    pub t_stop: f64,
    pub t_estimate: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub point_x: f64,
    pub point_y: f64,
    pub min_radius: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LfStatus {
    match e {
        Error::DegenerateCurve { .. } => LfStatus::DegenerateCurve,
        Error::OriginContact { .. } => LfStatus::OriginContact,
        Error::NonMonotone => LfStatus::NonMonotone,
        Error::Domain(_) => LfStatus::Domain,
        Error::Range(_) => LfStatus::Range,
        Error::StepUnderflow { .. } | Error::NonFinite { .. } | Error::Integration { .. } => {
            LfStatus::Numerical
        }
        Error::Configuration(_) | Error::Io { .. } | Error::Json { .. } => LfStatus::InvalidArgument,
    }
}

/// Runs `f` behind the panic boundary and records failures.
fn guard(f: impl FnOnce() -> Result<(), (LfStatus, String)>) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            LfStatus::Panic
        }
    }
}

fn lib(e: Error) -> (LfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (LfStatus, String) {
    (LfStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> (LfStatus, String) {
    (LfStatus::InvalidArgument, msg.into())
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, (LfStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (LfStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), (LfStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a curve from `count` interleaved coordinates `x0, y0, x1, y1, ...`.
///
/// # Safety
/// `xy` must point to `2 * count` readable doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_new(
    xy: *const f64,
    count: usize,
    closed: bool,
    out: *mut *mut LfCurve,
) -> LfStatus {
    guard(|| {
        if xy.is_null() {
            return Err(null("xy"));
        }
        let raw = std::slice::from_raw_parts(xy, 2 * count);
        let pts = raw.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
        let curve = PlaneCurve::new(pts, closed).map_err(lib)?;
        put(out, Box::into_raw(Box::new(LfCurve(curve))), "out")
    })
}

/// # Safety
/// `curve` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_free(curve: *mut LfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_node_count(curve: *const LfCurve, out: *mut usize) -> LfStatus {
    guard(|| put(out, borrow(curve, "curve")?.0.node_count(), "out"))
}

/// Copies the nodes into `xy` (capacity in points). Always writes the node count to
/// `count`; returns `BufferTooSmall` when `capacity` is insufficient.
///
/// # Safety
/// `xy` must have room for `2 * capacity` doubles; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_points(
    curve: *const LfCurve,
    xy: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> LfStatus {
    guard(|| {
        let c = &borrow(curve, "curve")?.0;
        put(count, c.node_count(), "count")?;
        if capacity < c.node_count() {
            return Err((
                LfStatus::BufferTooSmall,
                format!("need room for {} points, got {capacity}", c.node_count()),
            ));
        }
        if xy.is_null() {
            return Err(null("xy"));
        }
        let dst = std::slice::from_raw_parts_mut(xy, 2 * c.node_count());
        for (d, p) in dst.chunks_exact_mut(2).zip(c.points()) {
            d[0] = p.x;
            d[1] = p.y;
        }
        Ok(())
    })
}

/// Signed enclosed area of a closed curve.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_area(curve: *const LfCurve, out: *mut f64) -> LfStatus {
    guard(|| {
        let c = &borrow(curve, "curve")?.0;
        if !c.is_closed() {
            return Err(invalid("area needs a closed curve"));
        }
        put(out, enclosed_area(c), "out")
    })
}

/// Liouville and Maslov integrals and their ratio c.
///
/// # Safety
/// `curve` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_monotone(
    curve: *const LfCurve,
    liouville: *mut f64,
    maslov: *mut f64,
    constant: *mut f64,
) -> LfStatus {
    guard(|| {
        let d = MonotoneData::of(&borrow(curve, "curve")?.0).map_err(lib)?;
        put(liouville, d.liouville_integral, "liouville")?;
        put(maslov, d.maslov_integral, "maslov")?;
        put(constant, d.constant_c, "constant")
    })
}

/// New curve with `count` nodes equally spaced in arclength.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_resample(
    curve: *const LfCurve,
    count: usize,
    out: *mut *mut LfCurve,
) -> LfStatus {
    guard(|| {
        let c = resample(&borrow(curve, "curve")?.0, count).map_err(lib)?;
        put(out, Box::into_raw(Box::new(LfCurve(c))), "out")
    })
}

/// New curve scaled to monotonicity constant 1; the factor goes to `scale`.
///
/// # Safety
/// `curve` must be a live handle; `out` and `scale` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_normalize(
    curve: *const LfCurve,
    out: *mut *mut LfCurve,
    scale: *mut f64,
) -> LfStatus {
    guard(|| {
        let (c, s) = normalize(&borrow(curve, "curve")?.0).map_err(lib)?;
        put(scale, s, "scale")?;
        put(out, Box::into_raw(Box::new(LfCurve(c))), "out")
    })
}

/// Gaussian density Θ((x, y), T; t) of the surface generated by the curve.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_curve_gaussian_density(
    curve: *const LfCurve,
    x: f64,
    y: f64,
    reference_time: f64,
    t: f64,
    out: *mut f64,
) -> LfStatus {
    guard(|| {
        let c = &borrow(curve, "curve")?.0;
        let d = gaussian_density(std::slice::from_ref(c), Vec2::new(x, y), reference_time, t)
            .map_err(lib)?;
        put(out, d.value, "out")
    })
}

/// Starts a flow at t = 0 from a copy of `curve` with default stepping; `heun`
/// selects the two-stage scheme.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_flow_new(
    curve: *const LfCurve,
    heun: bool,
    out: *mut *mut LfFlow,
) -> LfStatus {
    guard(|| {
        let state = FlowState::single(borrow(curve, "curve")?.0.clone()).map_err(lib)?;
        let step = StepConfig {
            scheme: if heun { Scheme::Heun } else { Scheme::ForwardEuler },
            ..StepConfig::default()
        };
        put(out, Box::into_raw(Box::new(LfFlow { state, step })), "out")
    })
}

/// # Safety
/// `flow` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_flow_free(flow: *mut LfFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}

/// # Safety
/// `flow` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_flow_time(flow: *const LfFlow, out: *mut f64) -> LfStatus {
    guard(|| put(out, borrow(flow, "flow")?.state.t, "out"))
}

/// One explicit step; `dt > 0` fixes the step size, otherwise it is adaptive.
///
/// # Safety
/// `flow` must be a live handle; `t_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn lf_flow_step(flow: *mut LfFlow, dt: f64, t_out: *mut f64) -> LfStatus {
    guard(|| {
        let f = borrow_mut(flow, "flow")?;
        let cfg = StepConfig {
            fixed_dt: (dt > 0.0).then_some(dt),
            ..f.step.clone()
        };
        f.state = step(&f.state, &cfg).map_err(lib)?;
        if !t_out.is_null() {
            t_out.write(f.state.t);
        }
        Ok(())
    })
}

/// Evolves until `t_end` or a singularity. The flow handle holds the final state
/// afterwards; the stop report goes to `report`.
///
/// # Safety
/// `flow` must be a live handle and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_flow_evolve(
    flow: *mut LfFlow,
    t_end: f64,
    report: *mut LfSingularity,
) -> LfStatus {
    guard(|| {
        let f = borrow_mut(flow, "flow")?;
        if report.is_null() {
            return Err(null("report"));
        }
        if !(t_end > f.state.t) {
            return Err(invalid(format!("t_end {t_end} is not after the current time {}", f.state.t)));
        }
        let mut cfg = EvolveConfig {
            step: f.step.clone(),
            ..EvolveConfig::default()
        };
        cfg.stop.t_end = t_end;
        let evo = evolve(f.state.clone(), &cfg).map_err(lib)?;
        let r = &evo.report;
        f.state = evo.final_state().clone();
        report.write(LfSingularity {
            detected: r.detected as u8,
            trigger: match r.trigger {
                None => 0,
                Some(Trigger::OriginContact) => 1,
                Some(Trigger::CurvatureBlowup) => 2,
                Some(Trigger::StepUnderflow) => 3,
            },
            t_stop: f.state.t,
            t_estimate: r.t_estimate,
            bracket_lo: r.singular_time_bracket[0],
            bracket_hi: r.singular_time_bracket[1],
            point_x: r.singular_point.x,
            point_y: r.singular_point.y,
            min_radius: r.min_radius_at_stop,
        });
        Ok(())
    })
}

/// Copy of the flow's current curve.
///
/// # Safety
/// `flow` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_flow_curve(flow: *const LfFlow, out: *mut *mut LfCurve) -> LfStatus {
    guard(|| {
        let c = borrow(flow, "flow")?.state.curve().clone();
        put(out, Box::into_raw(Box::new(LfCurve(c))), "out")
    })
}
