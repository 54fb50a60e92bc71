use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use momentopo_ffi::*;

fn last_error() -> String {
    let p = mt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn read_string(f: impl Fn(*mut c_char, usize) -> usize) -> String {
    let n = f(ptr::null_mut(), 0);
    assert!(n > 0);
    let mut buf = vec![0 as c_char; n];
    assert_eq!(f(buf.as_mut_ptr(), n), n);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn builtin(name: &str) -> *mut MtFixture {
    let name = CString::new(name).unwrap();
    let mut fx = ptr::null_mut();
    assert_eq!(unsafe { mt_fixture_builtin(name.as_ptr(), &mut fx) }, MtStatus::Ok);
    fx
}

#[test]
fn simulate_estimate_round_trip() {
    let fx = builtin("prismatic-demo");
    assert_eq!(unsafe { mt_fixture_joint_count(fx) }, 1);
    let mut trial = ptr::null_mut();
    assert_eq!(unsafe { mt_simulate(fx, 3, 2.0, &mut trial) }, MtStatus::Ok);
    assert_eq!(unsafe { mt_trial_sample_count(trial) }, 2000);
    assert!(unsafe { mt_trial_motion_fraction(trial) } > 0.05);
    assert_eq!(read_string(|b, n| unsafe { mt_trial_true_topology(trial, b, n) }), "P");

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.trial").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { mt_trial_write(trial, path.as_ptr()) }, MtStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { mt_trial_read(path.as_ptr(), &mut back) }, MtStatus::Ok);
    assert_eq!(unsafe { mt_trial_sample_count(back) }, 2000);

    let mut report = ptr::null_mut();
    assert_eq!(unsafe { mt_estimate(back, 0, &mut report) }, MtStatus::Ok);
    assert_eq!(unsafe { mt_report_candidate_count(report) }, 2);
    assert!(!unsafe { mt_report_inconclusive(report) });
    assert_eq!(read_string(|b, n| unsafe { mt_report_selected(report, b, n) }), "P");

    let mut errors = Vec::new();
    for i in 0..2 {
        let mut e = f64::NAN;
        let mut buf = [0 as c_char; 8];
        let mut needed = 0;
        let s = unsafe { mt_report_candidate(report, i, &mut e, buf.as_mut_ptr(), buf.len(), &mut needed) };
        assert_eq!(s, MtStatus::Ok);
        assert_eq!(needed, 2);
        let name = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
        errors.push((name, e));
    }
    let p = errors.iter().find(|(n, _)| n == "P").unwrap().1;
    let r = errors.iter().find(|(n, _)| n == "R").unwrap().1;
    assert!(p < r, "P {p} R {r}");

    let mut e = 0.0;
    let s = unsafe { mt_report_candidate(report, 2, &mut e, ptr::null_mut(), 0, ptr::null_mut()) };
    assert_eq!(s, MtStatus::OutOfRange);
    assert!(last_error().contains("candidate 2"));

    unsafe {
        mt_report_free(report);
        mt_trial_free(back);
        mt_trial_free(trial);
        mt_fixture_free(fx);
    }
}

#[test]
fn errors_map_to_codes() {
    let mut fx = ptr::null_mut();
    let bad = CString::new("no-such-fixture").unwrap();
    assert_eq!(unsafe { mt_fixture_builtin(bad.as_ptr(), &mut fx) }, MtStatus::InvalidArgument);
    assert!(fx.is_null());
    assert!(last_error().contains("no-such-fixture"));

    assert_eq!(unsafe { mt_fixture_builtin(ptr::null(), &mut fx) }, MtStatus::NullPointer);

    let missing = CString::new("/nonexistent/t.trial").unwrap();
    let mut trial = ptr::null_mut();
    assert_eq!(unsafe { mt_trial_read(missing.as_ptr(), &mut trial) }, MtStatus::Io);

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("g.trial");
    std::fs::write(&garbage, "not a trial\n").unwrap();
    let garbage = CString::new(garbage.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { mt_trial_read(garbage.as_ptr(), &mut trial) }, MtStatus::Parse);

    let fxp = builtin("revolute-demo");
    assert_eq!(unsafe { mt_simulate(fxp, 1, -1.0, &mut trial) }, MtStatus::InvalidArgument);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { mt_estimate(ptr::null(), 0, &mut report) }, MtStatus::NullPointer);
    unsafe { mt_fixture_free(fxp) };
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        mt_fixture_free(ptr::null_mut());
        mt_trial_free(ptr::null_mut());
        mt_report_free(ptr::null_mut());
        assert_eq!(mt_trial_sample_count(ptr::null()), 0);
        assert_eq!(mt_report_candidate_count(ptr::null()), 0);
        assert_eq!(mt_report_selected(ptr::null(), ptr::null_mut(), 0), 0);
        assert!(mt_report_inconclusive(ptr::null()));
    }
    let v = unsafe { CStr::from_ptr(mt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(header_dir.join("momentopo.h")).unwrap();
    for name in ["mt_simulate", "mt_estimate", "mt_report_candidate", "MT_STATUS_PARSE"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"momentopo.h\"\n\
         int run(const char *path) {\n\
           MtTrial *t = NULL; MtReport *r = NULL;\n\
           if (mt_trial_read(path, &t) != MT_STATUS_OK) return 1;\n\
           MtStatus s = mt_estimate(t, 5, &r);\n\
           char buf[16]; size_t n = mt_report_selected(r, buf, sizeof buf);\n\
           mt_report_free(r); mt_trial_free(t);\n\
           return s == MT_STATUS_OK && n > 0 ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg("-I")
            .arg(&header_dir)
            .arg(&src)
            .status()
            .unwrap_or_else(|e| panic!("{compiler} not runnable: {e}"));
        assert!(status.success(), "{compiler} rejected the header");
    }
}
