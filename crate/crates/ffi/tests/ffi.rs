use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use blowuplab_ffi::*;

const FROZEN: &str = r#"{"location":"axis","parity":"even_swirl","swirl":{"b0":0.0},"a0":0.0,"c0z":0.0,
"pressure_rr":{"kind":{"type":"constant","value":1.0}},"pressure_zz":"constraint","t_end":3.0}"#;

const BOUNDARY: &str = r#"{"location":"boundary","parity":"even_swirl","swirl":{"b1":1.0,"b2":0.0},"a0":0.0,"c0z":0.0,
"pressure_rr":{"kind":{"type":"constant","value":-1.0}},"pressure_zz":"constraint","t_end":5.0}"#;

fn last_error() -> String {
    let p = bl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(json: &str) -> *mut BlScenario {
    let c = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bl_scenario_from_json(c.as_ptr(), &mut s) }, BlStatus::Ok);
    s
}

fn series(sol: *const BlSolution, which: BlSeries) -> Vec<f64> {
    let mut n = 0;
    unsafe {
        assert_eq!(bl_solution_copy_series(sol, which, ptr::null_mut(), 0, &mut n), BlStatus::BufferTooSmall);
        let mut v = vec![0.0; n];
        assert_eq!(bl_solution_copy_series(sol, which, v.as_mut_ptr(), n, &mut n), BlStatus::Ok);
        v
    }
}

#[test]
fn frozen_axis_collapses_at_quarter_period() {
    let s = scenario(FROZEN);
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(bl_run(s, &mut sol), BlStatus::Ok);
        let mut st = BlRunStatus::Completed;
        assert_eq!(bl_solution_status(sol, &mut st), BlStatus::Ok);
        assert_eq!(st, BlRunStatus::BlowupDetected);

        let (mut t, mut found) = (0.0, 0);
        assert_eq!(bl_solution_collapse_time(sol, &mut t, &mut found), BlStatus::Ok);
        assert_eq!(found, 1);
        // guard stops at f = f_stop, i.e. cos t = 1e-6
        assert!((t - (std::f64::consts::FRAC_PI_2 - 1e-6)).abs() < 1e-8, "{t}");

        let time = series(sol, BlSeries::Time);
        let f = series(sol, BlSeries::F);
        assert_eq!(time.len(), bl_solution_len(sol));
        for (t, f) in time.iter().zip(&f) {
            assert!((f - t.cos()).abs() < 1e-8);
        }
        let mut x = [0.0; 4];
        assert_eq!(bl_solution_state_at(sol, 0.5, x.as_mut_ptr()), BlStatus::Ok);
        assert!((x[0] - 0.5f64.cos()).abs() < 1e-8 && (x[1] + 0.5f64.sin()).abs() < 1e-8);
        assert_eq!(bl_solution_state_at(sol, 2.0, x.as_mut_ptr()), BlStatus::InvalidArgument);

        bl_solution_free(sol);
        bl_scenario_free(s);
    }
}

#[test]
fn equilibrium_runs_to_the_end() {
    let s = scenario(BOUNDARY);
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(bl_run(s, &mut sol), BlStatus::Ok);
        let (mut t, mut found) = (0.0, 7);
        assert_eq!(bl_solution_collapse_time(sol, &mut t, &mut found), BlStatus::Ok);
        assert_eq!(found, 0);
        assert!(series(sol, BlSeries::F).iter().all(|&f| (f - 1.0).abs() < 1e-9));
        assert_eq!(*series(sol, BlSeries::Time).last().unwrap(), 5.0);
        bl_solution_free(sol);
        bl_scenario_free(s);
    }
}

#[test]
fn scenario_json_round_trips() {
    let s = scenario(BOUNDARY);
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(bl_scenario_to_json(s, &mut out), BlStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        bl_string_free(out);
        let again = scenario(&text);
        let mut out2 = ptr::null_mut();
        assert_eq!(bl_scenario_to_json(again, &mut out2), BlStatus::Ok);
        assert_eq!(CStr::from_ptr(out2).to_str().unwrap(), text);
        bl_string_free(out2);
        bl_scenario_free(again);
        bl_scenario_free(s);
    }
}

#[test]
fn checks_return_json_reports() {
    let json = r#"{"location":"axis","parity":"even_swirl","a0":0.0,"c0z":-1.0,
"pressure_rr":{"kind":{"type":"constant","value":0.0}},
"pressure_zz":{"profile":{"kind":{"type":"constant","value":-0.5}}},"t_end":3.0}"#;
    let s = scenario(json);
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(bl_check(s, BlCheck::MonotonePressure, &mut out), BlStatus::Ok);
        let rep = CStr::from_ptr(out).to_str().unwrap().to_owned();
        bl_string_free(out);
        assert!(rep.contains("monotone_pressure") && rep.contains("predicted_bound"), "{rep}");
        bl_scenario_free(s);

        let frozen = scenario(FROZEN);
        assert_eq!(bl_check(frozen, BlCheck::MonotonePressure, &mut out), BlStatus::HypothesisNotMet);
        assert!(out.is_null());
        assert!(!last_error().is_empty());
        bl_scenario_free(frozen);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = CString::new("{\"location\": ").unwrap();
        assert_eq!(bl_scenario_from_json(bad.as_ptr(), &mut s), BlStatus::Parse);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        let neg = CString::new(FROZEN.replace("3.0}", "-1.0}")).unwrap();
        assert_eq!(bl_scenario_from_json(neg.as_ptr(), &mut s), BlStatus::InvalidScenario);
        assert!(last_error().contains("t_end"));

        assert_eq!(bl_scenario_from_json(ptr::null(), &mut s), BlStatus::NullPointer);
        assert_eq!(bl_run(ptr::null(), &mut ptr::null_mut()), BlStatus::NullPointer);
        let invalid = [0xffu8, 0];
        assert_eq!(bl_scenario_from_json(invalid.as_ptr().cast(), &mut s), BlStatus::InvalidUtf8);
        assert_eq!(bl_solution_len(ptr::null()), 0);
        bl_solution_free(ptr::null_mut());
        bl_scenario_free(ptr::null_mut());
        bl_string_free(ptr::null_mut());
    }
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_is_generated_and_c_example_runs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/blowuplab.h")).unwrap();
    for name in ["bl_scenario_from_json", "bl_run", "bl_solution_copy_series", "bl_last_error", "BL_STATUS_OK"] {
        assert!(header.contains(name), "{name}");
    }
    let lib = target_dir().join("libblowuplab_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C build: no static library or C compiler");
        return;
    }
    let exe = target_dir().join("ffi_collapse_example");
    let status = Command::new("cc")
        .arg(root.join("examples/collapse.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("collapse 1 1.570795"), "{text}");
}
