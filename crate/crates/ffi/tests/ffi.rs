use std::ffi::CStr;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lagflow_ffi::*;

fn circle_xy(rho: f64, n: usize) -> Vec<f64> {
    (0..n)
        .flat_map(|k| {
            let s = 2.0 * PI * k as f64 / n as f64;
            [rho * s.cos(), rho * s.sin()]
        })
        .collect()
}

fn new_curve(xy: &[f64], closed: bool) -> *mut LfCurve {
    let mut c = ptr::null_mut();
    let s = unsafe { lf_curve_new(xy.as_ptr(), xy.len() / 2, closed, &mut c) };
    assert_eq!(s, LfStatus::Ok, "{}", last_error());
    c
}

fn last_error() -> String {
    let p = lf_last_error_message();
    if p.is_null() {
        String::new()
    } else {
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }
}

#[test]
fn circle_invariants_through_the_boundary() {
    let c = new_curve(&circle_xy(2.0, 256), true);
    unsafe {
        let mut n = 0;
        assert_eq!(lf_curve_node_count(c, &mut n), LfStatus::Ok);
        assert_eq!(n, 256);

        let mut area = 0.0;
        assert_eq!(lf_curve_area(c, &mut area), LfStatus::Ok);
        assert!((area - 4.0 * PI).abs() < 1e-6, "{area}");

        let (mut l, mut m, mut k) = (0.0, 0.0, 0.0);
        assert_eq!(lf_curve_monotone(c, &mut l, &mut m, &mut k), LfStatus::Ok);
        assert!((m - 4.0 * PI).abs() < 1e-8);
        assert!((k - 2.0).abs() < 1e-6, "{k}");

        let (mut unit, mut scale) = (ptr::null_mut(), 0.0);
        assert_eq!(lf_curve_normalize(c, &mut unit, &mut scale), LfStatus::Ok);
        assert!((scale - 0.5f64.sqrt()).abs() < 1e-6);
        assert_eq!(lf_curve_monotone(unit, &mut l, &mut m, &mut k), LfStatus::Ok);
        assert!((k - 1.0).abs() < 1e-9);

        let mut theta = 0.0;
        assert_eq!(lf_curve_gaussian_density(c, 0.0, 0.0, 1.0, 0.0, &mut theta), LfStatus::Ok);
        assert!((theta - 2.0 * PI / std::f64::consts::E).abs() < 1e-6, "{theta}");

        lf_curve_free(unit);
        lf_curve_free(c);
    }
}

#[test]
fn point_copy_reports_required_capacity() {
    let xy = circle_xy(1.0, 32);
    let c = new_curve(&xy, true);
    unsafe {
        let mut buf = vec![0.0; 2 * 16];
        let mut count = 0;
        assert_eq!(lf_curve_points(c, buf.as_mut_ptr(), 16, &mut count), LfStatus::BufferTooSmall);
        assert_eq!(count, 32);
        buf.resize(64, 0.0);
        assert_eq!(lf_curve_points(c, buf.as_mut_ptr(), 32, &mut count), LfStatus::Ok);
        assert_eq!(buf, xy);

        let mut r = ptr::null_mut();
        assert_eq!(lf_curve_resample(c, 48, &mut r), LfStatus::Ok);
        assert_eq!(lf_curve_node_count(r, &mut count), LfStatus::Ok);
        assert_eq!(count, 48);
        lf_curve_free(r);
        lf_curve_free(c);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(lf_curve_new(ptr::null(), 4, true, &mut c), LfStatus::NullPointer);
        assert!(last_error().contains("xy"));

        let degenerate = [1.0, 0.0, 1.0, 0.0];
        assert_ne!(lf_curve_new(degenerate.as_ptr(), 2, true, &mut c), LfStatus::Ok);
        assert!(c.is_null());
        assert!(!last_error().is_empty());

        let line = new_curve(&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0], false);
        let mut area = 0.0;
        assert_eq!(lf_curve_area(line, &mut area), LfStatus::InvalidArgument);
        assert_eq!(lf_curve_node_count(ptr::null(), ptr::null_mut()), LfStatus::NullPointer);
        lf_curve_free(line);
        lf_curve_free(ptr::null_mut());
        lf_flow_free(ptr::null_mut());
    }
}

#[test]
fn circle_flow_stops_at_the_lifespan() {
    let c = new_curve(&circle_xy(2.0, 256), true);
    unsafe {
        let mut flow = ptr::null_mut();
        assert_eq!(lf_flow_new(c, false, &mut flow), LfStatus::Ok);
        let mut t = 0.0;
        assert_eq!(lf_flow_step(flow, 1e-4, &mut t), LfStatus::Ok);
        assert_eq!(t, 1e-4);
        assert_eq!(lf_flow_step(flow, 0.0, ptr::null_mut()), LfStatus::Ok);
        assert_eq!(lf_flow_time(flow, &mut t), LfStatus::Ok);
        assert!(t > 1e-4);

        let mut r = std::mem::zeroed::<LfSingularity>();
        assert_eq!(lf_flow_evolve(flow, t, &mut r), LfStatus::InvalidArgument);
        assert_eq!(lf_flow_evolve(flow, 2.0, &mut r), LfStatus::Ok, "{}", last_error());
        assert_eq!(r.detected, 1);
        assert!(r.bracket_lo <= r.t_estimate && r.t_estimate <= r.bracket_hi, "{r:?}");
        assert!((r.t_estimate - 1.0).abs() < 1e-3, "{r:?}");
        assert!(r.point_x.hypot(r.point_y) < 1e-2);

        let mut last = ptr::null_mut();
        assert_eq!(lf_flow_curve(flow, &mut last), LfStatus::Ok);
        let mut area = 0.0;
        assert_eq!(lf_curve_area(last, &mut area), LfStatus::Ok);
        assert!(area < 4.0 * PI * 0.05);
        lf_curve_free(last);
        lf_flow_free(flow);
        lf_curve_free(c);
    }
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_generated_header() {
    let lib = target_dir().join("liblagflow_ffi.a");
    if !lib.is_file() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}{}", String::from_utf8_lossy(&out.stderr));
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], env!("CARGO_PKG_VERSION"));
    let c: f64 = fields[1].parse().unwrap();
    assert!((c - 2.0).abs() < 1e-4);
    assert_eq!(fields[2], "1");
    let t: f64 = fields[3].parse().unwrap();
    assert!((t - 1.0).abs() < 1e-3, "{text}");
}
