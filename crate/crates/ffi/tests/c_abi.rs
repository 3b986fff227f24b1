use netmimo_ffi::*;
use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

#[test]
fn status_codes_and_last_error() {
    let mut out = 0.0;
    let name = CString::new("mat").unwrap();
    let st = unsafe { nm_theoretical_dof(name.as_ptr(), 1.0, 0.5, &mut out) };
    assert_eq!(st, NmStatus::Ok);
    assert!((out - 4.0 / 3.0).abs() < 1e-12);

    let bad = CString::new("nope").unwrap();
    let st = unsafe { nm_theoretical_dof(bad.as_ptr(), 1.0, 0.5, &mut out) };
    assert_eq!(st, NmStatus::UnknownScheme);
    let msg = unsafe { CStr::from_ptr(nm_last_error_message()) }.to_str().unwrap();
    assert!(msg.contains("nope"), "{msg}");

    assert_eq!(
        unsafe { nm_theoretical_dof(ptr::null(), 1.0, 0.5, &mut out) },
        NmStatus::NullPointer
    );
    assert_eq!(
        unsafe { nm_theoretical_dof(name.as_ptr(), 1.0, 0.5, ptr::null_mut()) },
        NmStatus::NullPointer
    );
}

#[test]
fn region_handle_round_trip() {
    let mut region = ptr::null_mut();
    assert_eq!(unsafe { nm_dof_region_new(0.5, 0.25, &mut region) }, NmStatus::Ok);
    let n = unsafe { nm_dof_region_vertex_count(region) };
    let mut verts = Vec::new();
    for i in 0..n {
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(unsafe { nm_dof_region_vertex(region, i, &mut a, &mut b) }, NmStatus::Ok);
        verts.push((a, b));
    }
    assert_eq!(verts[0], (0.0, 0.0));
    assert!(verts.contains(&(1.0, 0.5)) && verts.contains(&(0.5, 1.0)));
    let mut inside = true;
    assert_eq!(
        unsafe { nm_dof_region_contains(region, 1.0, 1.0, 1e-12, &mut inside) },
        NmStatus::Ok
    );
    assert!(!inside);
    let json = unsafe { nm_dof_region_to_json(region) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { nm_string_free(json) };
    assert!(text.starts_with("{\"halfspaces\":["));
    unsafe { nm_dof_region_free(region) };
    unsafe { nm_dof_region_free(ptr::null_mut()) };

    assert_eq!(
        unsafe { nm_dof_region_new(0.2, 0.5, &mut region) },
        NmStatus::InvalidParameter
    );
}

#[test]
fn simulate_and_parse_tables() {
    let cfg =
        CString::new(r#"{"scheme":"mat","snr_db_start":10,"snr_db_stop":30,"snr_db_step":10,"trials":50,"seed":3}"#)
            .unwrap();
    let mut table = ptr::null_mut();
    assert_eq!(unsafe { nm_simulate_json(cfg.as_ptr(), &mut table) }, NmStatus::Ok);
    assert_eq!(unsafe { nm_result_table_row_count(table) }, 3);
    let mut row = NmResultRow::default();
    assert_eq!(unsafe { nm_result_table_row(table, 0, &mut row) }, NmStatus::Ok);
    assert_eq!((row.snr_db, row.trials, row.seed), (10.0, 50, 3));
    assert_eq!(unsafe { nm_result_table_row(table, 3, &mut row) }, NmStatus::OutOfRange);

    let csv = unsafe { nm_result_table_to_csv(table) };
    let mut parsed = ptr::null_mut();
    assert_eq!(unsafe { nm_result_table_from_csv(csv, &mut parsed) }, NmStatus::Ok);
    let mut slope = 0.0;
    let scheme = CString::new("mat").unwrap();
    assert_eq!(
        unsafe { nm_result_table_slope(parsed, scheme.as_ptr(), 3, &mut slope) },
        NmStatus::Ok
    );
    assert!(slope.is_finite() && slope > 0.0);
    assert_eq!(
        unsafe { nm_result_table_slope(parsed, scheme.as_ptr(), 1, &mut slope) },
        NmStatus::InvalidParameter
    );
    unsafe {
        nm_string_free(csv);
        nm_result_table_free(parsed);
        nm_result_table_free(table);
    }

    let broken = CString::new("{\"scheme\":").unwrap();
    assert_eq!(
        unsafe { nm_simulate_json(broken.as_ptr(), &mut table) },
        NmStatus::Parse
    );
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf()
}

/// Compiles the C smoke program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler ({cc})");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libnetmimo_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("c smoke ok"));
}
