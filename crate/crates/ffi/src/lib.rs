//! C ABI for the chbs simulator.
//!
//! Every function returns a [`ChbsStatus`]; on failure the message is kept in
//! thread-local storage and can be read with [`chbs_last_error`]. Simulations
//! are opaque handles created by `chbs_simulation_*` constructors and released
//! with [`chbs_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chbs::cli::RunSpec;
use chbs::forcing::Forcing;
use chbs::monotone::{GraphKind, GraphSpec};
use chbs::scheme::{self, SchemeConfig, SchemeState};
use chbs::spaces::{mean, poincare_constant};
use chbs::{DiscreteDomain, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChbsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numerical = 4,
    Compatibility = 5,
    Config = 6,
    Io = 7,
    StepFailed = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChbsGraphKind {
    Polynomial = 0,
    Logarithmic = 1,
    Obstacle = 2,
}

impl From<ChbsGraphKind> for GraphKind {
    fn from(k: ChbsGraphKind) -> Self {
        match k {
            ChbsGraphKind::Polynomial => GraphKind::Polynomial,
            ChbsGraphKind::Logarithmic => GraphKind::Logarithmic,
            ChbsGraphKind::Obstacle => GraphKind::Obstacle,
        }
    }
}

/// A trajectory together with its mesh, scheme and forcing.
pub struct ChbsSimulation {
    dom: DiscreteDomain,
    cfg: SchemeConfig,
    forcing: Forcing,
    state: SchemeState,
    total_steps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ChbsStatus {
    match e {
        Error::Domain(_) => ChbsStatus::Domain,
        Error::Numerical(_) => ChbsStatus::Numerical,
        Error::Shape { .. } | Error::Precondition(_) => ChbsStatus::InvalidArgument,
        Error::Config(_) | Error::Parse { .. } => ChbsStatus::Config,
        Error::Compatibility(_) => ChbsStatus::Compatibility,
        Error::StepFailed { .. } => ChbsStatus::StepFailed,
        Error::Io { .. } => ChbsStatus::Io,
    }
}

struct Failure(ChbsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ChbsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ChbsStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            ChbsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ChbsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn sim_ref<'a>(p: *const ChbsSimulation) -> Result<&'a ChbsSimulation, Failure> {
    p.as_ref().ok_or_else(|| null("simulation"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ChbsStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn from_spec(spec: RunSpec) -> Result<ChbsSimulation, Failure> {
    let dom = spec.domain()?;
    let data = spec.data(&dom)?;
    let state = scheme::initialize(&dom, &spec.scheme, &data.u0, &data.forcing.sample(&dom, 0.0))?;
    Ok(ChbsSimulation {
        total_steps: spec.scheme.num_steps(),
        dom,
        cfg: spec.scheme,
        forcing: data.forcing,
        state,
    })
}

fn publish(sim: ChbsSimulation, out: *mut *mut ChbsSimulation) {
    // SAFETY: checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(sim)) };
}

/// Reads a TOML run configuration from `path` and initializes a simulation.
/// Relative paths inside the file resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_from_file(path: *const c_char, out: *mut *mut ChbsSimulation) -> ChbsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        out_ref(out, "out")?;
        publish(from_spec(RunSpec::load(Path::new(path))?)?, out);
        Ok(())
    })
}

/// Like [`chbs_simulation_from_file`] with the configuration given as text;
/// relative paths resolve against the working directory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_from_str(text: *const c_char, out: *mut *mut ChbsSimulation) -> ChbsStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        out_ref(out, "out")?;
        publish(from_spec(RunSpec::parse(text, "<string>", Path::new("."))?)?, out);
        Ok(())
    })
}

/// # Safety
/// `sim` must come from a constructor of this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_free(sim: *mut ChbsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one step. `*finished` is set to 1 once `t_end` has been reached
/// (in which case no step is taken), else 0.
///
/// # Safety
/// `sim` must be a live handle and `finished` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_step(sim: *mut ChbsSimulation, finished: *mut i32) -> ChbsStatus {
    guard(|| {
        let sim = out_ref(sim, "simulation")?;
        let finished = out_ref(finished, "finished")?;
        if sim.state.step_index >= sim.total_steps {
            *finished = 1;
            return Ok(());
        }
        *finished = 0;
        let t_next = (sim.state.step_index + 1) as f64 * sim.cfg.tau;
        let f = sim.forcing.sample(&sim.dom, t_next);
        let (mut next, _) = scheme::step(&sim.dom, &sim.cfg, &sim.state, &f)?;
        next.t = t_next;
        sim.state = next;
        Ok(())
    })
}

/// Steps until `t_end`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_run(sim: *mut ChbsSimulation) -> ChbsStatus {
    let mut finished = 0;
    loop {
        let status = chbs_simulation_step(sim, &mut finished);
        if status != ChbsStatus::Ok || finished == 1 {
            return status;
        }
    }
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_time(sim: *const ChbsSimulation, out: *mut f64) -> ChbsStatus {
    guard(|| {
        *out_ref(out, "out")? = sim_ref(sim)?.state.t;
        Ok(())
    })
}

/// Number of mesh nodes, the length expected by the field accessors.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_num_nodes(sim: *const ChbsSimulation, out: *mut usize) -> ChbsStatus {
    guard(|| {
        *out_ref(out, "out")? = sim_ref(sim)?.dom.num_nodes();
        Ok(())
    })
}

unsafe fn copy_field(
    sim: *const ChbsSimulation,
    buf: *mut f64,
    len: usize,
    pick: impl FnOnce(&SchemeState) -> Vec<f64>,
) -> ChbsStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let values = pick(&sim.state);
        if len < values.len() {
            return Err(Failure(
                ChbsStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Copies the nodal order parameter `u` into `buf`.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_copy_u(sim: *const ChbsSimulation, buf: *mut f64, len: usize) -> ChbsStatus {
    copy_field(sim, buf, len, |s| s.u().bulk)
}

/// Copies the nodal chemical potential into `buf`.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_copy_mu(sim: *const ChbsSimulation, buf: *mut f64, len: usize) -> ChbsStatus {
    copy_field(sim, buf, len, |s| s.mu.bulk.clone())
}

/// Mean of `u` over bulk and boundary.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_mean(sim: *const ChbsSimulation, out: *mut f64) -> ChbsStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        *out_ref(out, "out")? = mean(&sim.dom, &sim.state.u())?;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_simulation_energy(sim: *const ChbsSimulation, out: *mut f64) -> ChbsStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        *out_ref(out, "out")? = scheme::energy(&sim.dom, &sim.cfg, &sim.state)?;
        Ok(())
    })
}

/// Yosida approximation of a prototype graph at `r`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_yosida(kind: ChbsGraphKind, eps: f64, r: f64, out: *mut f64) -> ChbsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Failure(ChbsStatus::InvalidArgument, format!("eps must be positive, got {eps}")));
        }
        *out = GraphSpec::prototype(kind.into()).yosida(eps, r)?;
        Ok(())
    })
}

/// Poincaré constant of the unit square mesh with `n` nodes per side.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chbs_poincare_constant(n: usize, out: *mut f64) -> ChbsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = poincare_constant(&DiscreteDomain::build_unit_square(n)?)?;
        Ok(())
    })
}

/// Copies the message of the last failed call on this thread into `buf`
/// (NUL-terminated, truncated to `len`) and returns the full message length
/// excluding the terminator.
///
/// # Safety
/// `buf` must be valid for `len` writes or null.
#[no_mangle]
pub unsafe extern "C" fn chbs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// NUL-terminated library version.
#[no_mangle]
pub extern "C" fn chbs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
