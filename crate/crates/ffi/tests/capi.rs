use std::ffi::{CStr, CString};
use std::ptr;

use pshape_ffi::*;

fn last_error() -> String {
    let p = pshape_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn mesh_round_trip_and_buffer_sizes() {
    let mut mesh = ptr::null_mut();
    let s = unsafe { pshape_mesh_benchmark(20.0, 6.0, 0.4, 4, 0, &mut mesh) };
    assert_eq!(s, PshapeStatus::Ok);
    let n = unsafe { pshape_mesh_node_count(mesh) };
    assert_eq!(unsafe { pshape_mesh_triangle_count(mesh) }, 304);
    let mut small = vec![0.0; 2 * n - 1];
    let s = unsafe { pshape_mesh_nodes(mesh, small.as_mut_ptr(), small.len()) };
    assert_eq!(s, PshapeStatus::BufferTooSmall);
    assert!(last_error().contains("needed"));
    let mut xy = vec![0.0; 2 * n];
    assert_eq!(unsafe { pshape_mesh_nodes(mesh, xy.as_mut_ptr(), xy.len()) }, PshapeStatus::Ok);
    assert!(xy.chunks(2).all(|p| p[0].abs() <= 10.0 && p[1].abs() <= 3.0));
    unsafe { pshape_mesh_free(mesh) };
}

#[test]
fn flow_objective_and_gradient() {
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { pshape_mesh_benchmark(20.0, 6.0, 0.4, 4, 0, &mut mesh) }, PshapeStatus::Ok);
    let n = unsafe { pshape_mesh_node_count(mesh) };
    let mut j = 0.0;
    let mut g = vec![0.0; 2 * n];
    let s = unsafe { pshape_flow_evaluate(mesh, 0.02, 6.0, &mut j, g.as_mut_ptr(), g.len()) };
    assert_eq!(s, PshapeStatus::Ok, "{}", last_error());
    assert!(j > 0.0);
    assert!(g.iter().any(|v| *v != 0.0));
    let mut j_only = 0.0;
    let s = unsafe { pshape_flow_evaluate(mesh, 0.02, 6.0, &mut j_only, ptr::null_mut(), 0) };
    assert_eq!(s, PshapeStatus::Ok);
    assert_eq!(j_only.to_bits(), j.to_bits());
    let s = unsafe { pshape_flow_evaluate(mesh, -1.0, 6.0, &mut j, ptr::null_mut(), 0) };
    assert_eq!(s, PshapeStatus::InvalidArgument);
    assert!(last_error().contains("viscosity"));
    unsafe { pshape_mesh_free(mesh) };
}

#[test]
fn config_errors_carry_codes() {
    let mut cfg = ptr::null_mut();
    let src = CString::new("p_max = 1.0\n").unwrap();
    assert_eq!(unsafe { pshape_config_from_string(src.as_ptr(), &mut cfg) }, PshapeStatus::Config);
    assert!(last_error().contains("p_max"));
    assert!(cfg.is_null());
    let path = CString::new("/nonexistent/x.cfg").unwrap();
    assert_eq!(unsafe { pshape_config_from_file(path.as_ptr(), &mut cfg) }, PshapeStatus::Io);
    let cfg = pshape_config_new();
    assert_eq!(unsafe { pshape_config_set_levels(cfg, 99) }, PshapeStatus::Config);
    unsafe { pshape_config_free(cfg) };
    unsafe { pshape_config_free(ptr::null_mut()) };
}

#[test]
fn zero_step_run_reports_initial_objective() {
    let dir = tempfile::tempdir().unwrap();
    let src = CString::new("base_resolution = 4\nlevels = 0\nmax_steps = 0\nwrite_vtk = false\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { pshape_config_from_string(src.as_ptr(), &mut cfg) }, PshapeStatus::Ok);
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { pshape_config_set_output_dir(cfg, out.as_ptr()) }, PshapeStatus::Ok);
    let mut log = ptr::null_mut();
    assert_eq!(unsafe { pshape_optimize(cfg, &mut log) }, PshapeStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { pshape_runlog_step_count(log) }, 0);
    assert_eq!(unsafe { pshape_runlog_exit(log) }, PshapeExit::MaxSteps);
    let mut j0 = 0.0;
    assert_eq!(unsafe { pshape_runlog_initial_objective(log, &mut j0) }, PshapeStatus::Ok);
    assert!(j0 > 0.0);
    let mut j = 0.0;
    assert_eq!(unsafe { pshape_runlog_objective(log, 0, &mut j) }, PshapeStatus::InvalidArgument);
    assert!(dir.path().join("run.csv").exists());
    unsafe {
        pshape_runlog_free(log);
        pshape_config_free(cfg);
    }
}

#[test]
fn header_declares_every_export_and_compiles() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pshape.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "pshape_last_error_message",
        "pshape_config_new",
        "pshape_optimize",
        "pshape_runlog_objective",
        "pshape_mesh_benchmark",
        "pshape_flow_evaluate",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    // Syntax-check the header with the system C compiler when one exists.
    if let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
