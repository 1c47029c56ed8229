//! C interface to the solver.
//!
//! A simulation is an opaque `DscSimulation` handle created from a TOML
//! configuration and released with `dsc_simulation_free`. Every fallible
//! call returns a `DscStatus`; the message for the most recent failure on
//! the calling thread is available from `dsc_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use dsc_core::dsc_state::{checkpoint, Field};
use dsc_core::sim::{write_vtk, SimConfig, Simulation};
use dsc_core::DscError;

/// Opaque simulation handle.
pub struct DscSimulation {
    sim: Simulation,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Mesh = 4,
    Numerical = 5,
    NoConvergence = 6,
    Io = 7,
    Panic = 8,
}

/// Cell-centred quantity selector for `dsc_simulation_read_field`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DscField {
    Temperature = 0,
    VelocityX = 1,
    VelocityY = 2,
    VelocityZ = 3,
    Pressure = 4,
}

impl From<DscField> for Field {
    fn from(f: DscField) -> Self {
        match f {
            DscField::Temperature => Field::T,
            DscField::VelocityX => Field::Ux,
            DscField::VelocityY => Field::Uy,
            DscField::VelocityZ => Field::Uz,
            DscField::Pressure => Field::P,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &DscError) -> DscStatus {
    match e {
        DscError::AtStep { source, .. } => status_of(source),
        DscError::Config(_) | DscError::Checkpoint(_) => DscStatus::Config,
        DscError::InvalidParameter(_) => DscStatus::InvalidArgument,
        DscError::Orientation { .. }
        | DscError::DegenerateCell { .. }
        | DscError::SingularCell { .. }
        | DscError::NonConformingMesh(_)
        | DscError::MeshFormat { .. } => DscStatus::Mesh,
        DscError::NoConvergence { .. } => DscStatus::NoConvergence,
        DscError::Io(_) => DscStatus::Io,
        _ => DscStatus::Numerical,
    }
}

enum Failure {
    Status(DscStatus, String),
    Core(DscError),
}

impl From<DscError> for Failure {
    fn from(e: DscError) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DscStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            DscStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(DscStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(DscStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn sim_ref<'a>(p: *const DscSimulation) -> Result<&'a DscSimulation, Failure> {
    p.as_ref().ok_or_else(|| null("simulation"))
}

unsafe fn sim_mut<'a>(p: *mut DscSimulation) -> Result<&'a mut DscSimulation, Failure> {
    p.as_mut().ok_or_else(|| null("simulation"))
}

fn build(cfg: &SimConfig, base: &Path) -> Result<Box<DscSimulation>, Failure> {
    let setup = cfg.setup(base)?;
    let sim = Simulation::from_setup(&setup)?;
    Ok(Box::new(DscSimulation { sim }))
}

/// Creates a simulation from a configuration file. Relative paths inside
/// the file resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_from_file(path: *const c_char, out: *mut *mut DscSimulation) -> DscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = PathBuf::from(str_arg(path, "path")?);
        let cfg = SimConfig::load(&path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        *out = Box::into_raw(build(&cfg, base)?);
        Ok(())
    })
}

/// Creates a simulation from configuration text. `base_dir` resolves
/// relative paths and may be null for the current directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string, `base_dir` null or
/// NUL-terminated, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_from_str(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut DscSimulation,
) -> DscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SimConfig::from_toml_str(str_arg(toml, "toml")?)?;
        let base = if base_dir.is_null() {
            PathBuf::from(".")
        } else {
            PathBuf::from(str_arg(base_dir, "base_dir")?)
        };
        *out = Box::into_raw(build(&cfg, &base)?);
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from a `dsc_simulation_from_*` call and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_free(sim: *mut DscSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances `steps` full cycles. On failure the state is left as it was
/// after the last successful cycle.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_step(sim: *mut DscSimulation, steps: u64) -> DscStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        for _ in 0..steps {
            let before = (s.sim.store.clone(), s.sim.grid);
            if let Err(e) = s.sim.step() {
                (s.sim.store, s.sim.grid) = before;
                return Err(e.into());
            }
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_cell_count(sim: *const DscSimulation, out: *mut usize) -> DscStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.sim.store.n_cells();
        Ok(())
    })
}

/// Completed cycles and the port time level in seconds.
///
/// # Safety
/// `sim` must be a live handle; `step` and `time` may each be null.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_clock(sim: *const DscSimulation, step: *mut u64, time: *mut f64) -> DscStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if let Some(step) = step.as_mut() {
            *step = s.sim.grid.step;
        }
        if let Some(time) = time.as_mut() {
            *time = s.sim.grid.port_time();
        }
        Ok(())
    })
}

/// Copies the node values of one field into `buf`, which must hold at
/// least the cell count.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_read_field(
    sim: *const DscSimulation,
    field: DscField,
    buf: *mut f64,
    len: usize,
) -> DscStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let values = &s.sim.store.get(field.into()).node;
        if len < values.len() {
            return Err(Failure::Status(
                DscStatus::InvalidArgument,
                format!("buffer holds {len} values, {} needed", values.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, values.len()).copy_from_slice(values);
        Ok(())
    })
}

/// Writes a legacy VTK snapshot.
///
/// # Safety
/// `sim` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_write_vtk(sim: *const DscSimulation, path: *const c_char) -> DscStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let path = Path::new(str_arg(path, "path")?);
        let title = format!("dsc step {}", s.sim.grid.step);
        write_vtk(&s.sim.model.topo, &s.sim.store, path, &title)?;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_save_checkpoint(sim: *const DscSimulation, path: *const c_char) -> DscStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        checkpoint::save(Path::new(str_arg(path, "path")?), &s.sim.store, &s.sim.grid)?;
        Ok(())
    })
}

/// Replaces the state with a checkpoint written for the same mesh.
///
/// # Safety
/// `sim` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dsc_simulation_load_checkpoint(sim: *mut DscSimulation, path: *const c_char) -> DscStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        let (store, grid) = checkpoint::load(Path::new(str_arg(path, "path")?))?;
        s.sim.restore(store, grid)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dsc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dsc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
