//! C ABI for `pshape`.
//!
//! Objects cross the boundary as opaque handles created by a
//! `pshape_*_new`/constructor call and released by the matching `_free`.
//! Every fallible call returns a [`PshapeStatus`]; on failure the message
//! is available from [`pshape_last_error_message`] on the same thread.
//! Panics are caught and reported as [`PshapeStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pshape::driver::{parse_config, parse_config_str, run_optimize, ExitStatus, OptimConfig, RunLog};
use pshape::flow::{energy_dissipation, shape_gradient, solve_adjoint, solve_flow, FlowOptions, FlowProblem};
use pshape::mesh::{generate_benchmark_mesh, read_msh, MarkerMap, Mesh};
use pshape::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PshapeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Config = 4,
    Io = 5,
    Mesh = 6,
    Solver = 7,
    NonConvergence = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// How an optimization run ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PshapeExit {
    Converged = 0,
    Stalled = 1,
    MaxSteps = 2,
    /// The run was aborted by an error.
    Aborted = 3,
}

/// Optimization parameters.
pub struct PshapeConfig {
    inner: OptimConfig,
}

/// Log of an optimization run.
pub struct PshapeRunLog {
    inner: RunLog,
}

/// A triangle mesh with boundary markers.
pub struct PshapeMesh {
    inner: Mesh,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PshapeStatus {
    match e {
        Error::Parameter(_) | Error::Contract(_) => PshapeStatus::InvalidArgument,
        Error::Parse { .. } => PshapeStatus::Parse,
        Error::Config { .. } => PshapeStatus::Config,
        Error::Io { .. } => PshapeStatus::Io,
        Error::Topology(_) | Error::Tangling { .. } | Error::DegenerateElement { .. } => PshapeStatus::Mesh,
        Error::NonConvergence { .. } => PshapeStatus::NonConvergence,
        _ => PshapeStatus::Solver,
    }
}

struct Failure(PshapeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PshapeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PshapeStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PshapeStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PshapeStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PshapeStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pshape_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pshape_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
#[no_mangle]
pub extern "C" fn pshape_config_new() -> *mut PshapeConfig {
    Box::into_raw(Box::new(PshapeConfig { inner: OptimConfig::default() }))
}

/// Parses a `key = value` configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_config_from_file(path: *const c_char, out: *mut *mut PshapeConfig) -> PshapeStatus {
    guard(|| {
        let path = text(path, "path")?;
        store(out, PshapeConfig { inner: parse_config(path)? })
    })
}

/// Parses configuration text in the file format.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_config_from_string(source: *const c_char, out: *mut *mut PshapeConfig) -> PshapeStatus {
    guard(|| {
        let source = text(source, "source")?;
        store(out, PshapeConfig { inner: parse_config_str(source)? })
    })
}

/// # Safety
/// `config` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pshape_config_set_output_dir(config: *mut PshapeConfig, path: *const c_char) -> PshapeStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        c.inner.output_dir = PathBuf::from(text(path, "path")?);
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn pshape_config_set_max_steps(config: *mut PshapeConfig, max_steps: usize) -> PshapeStatus {
    guard(|| {
        config.as_mut().ok_or_else(|| null("config"))?.inner.max_steps = max_steps;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn pshape_config_set_levels(config: *mut PshapeConfig, levels: usize) -> PshapeStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(|| null("config"))?;
        let old = c.inner.levels;
        c.inner.levels = levels;
        if let Err(e) = c.inner.validate() {
            c.inner.levels = old;
            return Err(e.into());
        }
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library or be NULL; it must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn pshape_config_free(config: *mut PshapeConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the optimization and writes the outputs to the configured
/// directory. A log is stored in `out` even when the run aborts, holding
/// the steps completed before the error.
///
/// # Safety
/// `config` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_optimize(config: *const PshapeConfig, out: *mut *mut PshapeRunLog) -> PshapeStatus {
    guard(|| {
        let c = borrow(config, "config")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        match run_optimize(&c.inner) {
            Ok(log) => store(out, PshapeRunLog { inner: log }),
            Err(failure) => {
                let failure = *failure;
                store(out, PshapeRunLog { inner: failure.log })?;
                Err(failure.error.into())
            }
        }
    })
}

/// # Safety
/// `log` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn pshape_runlog_exit(log: *const PshapeRunLog) -> PshapeExit {
    match log.as_ref().and_then(|l| l.inner.exit) {
        Some(ExitStatus::Converged) => PshapeExit::Converged,
        Some(ExitStatus::Stalled) => PshapeExit::Stalled,
        Some(ExitStatus::MaxSteps) => PshapeExit::MaxSteps,
        None => PshapeExit::Aborted,
    }
}

/// Number of accepted steps (0 for NULL).
///
/// # Safety
/// `log` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn pshape_runlog_step_count(log: *const PshapeRunLog) -> usize {
    log.as_ref().map_or(0, |l| l.inner.steps.len())
}

/// Number of rejected trial steps (0 for NULL).
///
/// # Safety
/// `log` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn pshape_runlog_rejected_count(log: *const PshapeRunLog) -> usize {
    log.as_ref().map_or(0, |l| l.inner.rejected.len())
}

/// Objective on the initial geometry.
///
/// # Safety
/// `log` must come from this library and `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_runlog_initial_objective(log: *const PshapeRunLog, value: *mut f64) -> PshapeStatus {
    guard(|| {
        let l = borrow(log, "log")?;
        let j0 = l.inner.j0.ok_or_else(|| Failure(PshapeStatus::InvalidArgument, "run has no initial objective".into()))?;
        *value.as_mut().ok_or_else(|| null("value"))? = j0;
        Ok(())
    })
}

/// Objective after accepted step `index` (0-based).
///
/// # Safety
/// `log` must come from this library and `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_runlog_objective(log: *const PshapeRunLog, index: usize, value: *mut f64) -> PshapeStatus {
    guard(|| {
        let l = borrow(log, "log")?;
        let step = l.inner.steps.get(index).ok_or_else(|| {
            Failure(PshapeStatus::InvalidArgument, format!("step {index} out of range ({} steps)", l.inner.steps.len()))
        })?;
        *value.as_mut().ok_or_else(|| null("value"))? = step.j;
        Ok(())
    })
}

/// # Safety
/// `log` must come from this library or be NULL; it must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn pshape_runlog_free(log: *mut PshapeRunLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Benchmark channel `[-length/2, length/2] x [-height/2, height/2]` around
/// a centered square obstacle, refined `levels` times.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_mesh_benchmark(
    length: f64,
    height: f64,
    obstacle_edge: f64,
    base_resolution: usize,
    levels: usize,
    out: *mut *mut PshapeMesh,
) -> PshapeStatus {
    guard(|| {
        if levels > 6 {
            return Err(Failure(PshapeStatus::InvalidArgument, format!("at most 6 refinements, got {levels}")));
        }
        let mut h = generate_benchmark_mesh(length, height, obstacle_edge, base_resolution)?;
        for _ in 0..levels {
            h.refine_uniform()?;
        }
        store(out, PshapeMesh { inner: h.finest().clone() })
    })
}

/// Reads an ASCII MSH 2.2 file with physical tags 1..4 for inflow,
/// outflow, wall and obstacle.
///
/// # Safety
/// `path` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pshape_mesh_read_msh(path: *const c_char, out: *mut *mut PshapeMesh) -> PshapeStatus {
    guard(|| {
        let path = text(path, "path")?;
        store(out, PshapeMesh { inner: read_msh(path, &MarkerMap::default())? })
    })
}

/// # Safety
/// `mesh` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn pshape_mesh_node_count(mesh: *const PshapeMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.n_nodes())
}

/// # Safety
/// `mesh` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn pshape_mesh_triangle_count(mesh: *const PshapeMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.inner.n_triangles())
}

/// Copies node coordinates `x0 y0 x1 y1 ...` into `buffer` of `len` doubles.
///
/// # Safety
/// `buffer` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pshape_mesh_nodes(mesh: *const PshapeMesh, buffer: *mut f64, len: usize) -> PshapeStatus {
    guard(|| {
        let m = borrow(mesh, "mesh")?;
        let data: Vec<f64> = m.inner.nodes().iter().flatten().copied().collect();
        copy_out(&data, buffer, len)
    })
}

unsafe fn copy_out(data: &[f64], buffer: *mut f64, len: usize) -> Result<(), Failure> {
    if buffer.is_null() {
        return Err(null("buffer"));
    }
    if len < data.len() {
        return Err(Failure(
            PshapeStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", data.len()),
        ));
    }
    std::slice::from_raw_parts_mut(buffer, data.len()).copy_from_slice(data);
    Ok(())
}

/// # Safety
/// `mesh` must come from this library or be NULL; it must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn pshape_mesh_free(mesh: *mut PshapeMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Solves the channel flow with viscosity `nu` and inflow height
/// `inflow_height`; stores the energy dissipation in `objective` and, when
/// `gradient` is not NULL, its shape gradient (`2 * nodes` doubles).
///
/// # Safety
/// `objective` must be valid; `gradient` must be NULL or point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pshape_flow_evaluate(
    mesh: *const PshapeMesh,
    nu: f64,
    inflow_height: f64,
    objective: *mut f64,
    gradient: *mut f64,
    len: usize,
) -> PshapeStatus {
    guard(|| {
        let m = &borrow(mesh, "mesh")?.inner;
        let out = objective.as_mut().ok_or_else(|| null("objective"))?;
        if !gradient.is_null() && len < 2 * m.n_nodes() {
            return Err(Failure(
                PshapeStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", 2 * m.n_nodes()),
            ));
        }
        let problem = FlowProblem::channel(nu, inflow_height);
        let state = solve_flow(m, &problem, &FlowOptions::default(), None)?;
        *out = energy_dissipation(m, &state)?;
        if !gradient.is_null() {
            let adjoint = solve_adjoint(m, &problem, &state)?;
            copy_out(&shape_gradient(m, &problem, &state, &adjoint)?, gradient, len)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_arguments_are_reported() {
        let mut out: *mut PshapeConfig = std::ptr::null_mut();
        let s = unsafe { pshape_config_from_string(std::ptr::null(), &mut out) };
        assert_eq!(s, PshapeStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(pshape_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("source"));
        assert!(out.is_null());
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Parameter("x".into())), PshapeStatus::InvalidArgument);
        assert_eq!(
            status_of(&Error::NonConvergence { what: "x".into(), iterations: 1, residual: 1.0 }),
            PshapeStatus::NonConvergence
        );
    }

    #[test]
    fn panics_are_caught() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, PshapeStatus::Panic);
        let msg = unsafe { CStr::from_ptr(pshape_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }
}
