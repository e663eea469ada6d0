//! C ABI over `xzdelegate`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every entry point returns an [`XzStatus`]; on failure
//! a message is available from [`xz_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use xzdelegate::config::{parse_circuit, ExperimentConfig};
use xzdelegate::energy::vgs_accept_prob_analytic;
use xzdelegate::hamiltonian::{compile_hamiltonian, history_state, padding_for, CompileOptions, CompileReport};
use xzdelegate::report::{self, Command, Output};
use xzdelegate::{Bits, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Parse = 4,
    InvalidArgument = 5,
    Runtime = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XzCommand {
    Compile = 0,
    Spectrum = 1,
    Vgs = 2,
    Qpip1 = 3,
    Qpip0 = 4,
    Blind = 5,
}

impl From<XzCommand> for Command {
    fn from(c: XzCommand) -> Self {
        match c {
            XzCommand::Compile => Command::Compile,
            XzCommand::Spectrum => Command::Spectrum,
            XzCommand::Vgs => Command::Vgs,
            XzCommand::Qpip1 => Command::Qpip1,
            XzCommand::Qpip0 => Command::Qpip0,
            XzCommand::Blind => Command::Blind,
        }
    }
}

/// A parsed experiment configuration.
pub struct XzConfig(ExperimentConfig);

/// A finished command with its JSON record and optional trace.
pub struct XzReport {
    json: CString,
    trace: Option<CString>,
}

/// A compiled Hamiltonian together with its history state.
pub struct XzHamiltonian {
    report: CompileReport,
    x: Bits,
    history_accept: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> XzStatus {
    match e {
        Error::Config(_) => XzStatus::Config,
        Error::Parse { .. } | Error::InvalidBits(_) | Error::InvalidCircuit(_) => XzStatus::Parse,
        Error::InvalidArgument(_) | Error::LengthMismatch { .. } | Error::WireOutOfRange { .. } => {
            XzStatus::InvalidArgument
        }
        _ => XzStatus::Runtime,
    }
}

fn guard<F: FnOnce() -> Result<(), XzStatus>>(f: F) -> XzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XzStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside xzdelegate".into());
            XzStatus::Panic
        }
    }
}

fn fail(e: Error) -> XzStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, XzStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(XzStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8".into());
        XzStatus::InvalidUtf8
    })
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, XzStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output pointer".into());
        XzStatus::NullPointer
    })
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, XzStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        XzStatus::NullPointer
    })
}

/// The message of the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn xz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn xz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xz_config_from_toml(toml: *const c_char, out: *mut *mut XzConfig) -> XzStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let cfg = ExperimentConfig::from_toml(str_arg(toml)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(XzConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle from [`xz_config_from_toml`].
#[no_mangle]
pub unsafe extern "C" fn xz_config_set_seed(cfg: *mut XzConfig, seed: u64) -> XzStatus {
    guard(|| {
        out_arg(cfg)?.0.seed = Some(seed);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle from [`xz_config_from_toml`].
#[no_mangle]
pub unsafe extern "C" fn xz_config_set_trials(cfg: *mut XzConfig, trials: usize) -> XzStatus {
    guard(|| {
        let cfg = out_arg(cfg)?;
        if trials == 0 {
            return Err(fail(Error::Config("trials must be positive".into())));
        }
        cfg.0.trials = Some(trials);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from [`xz_config_from_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xz_config_free(cfg: *mut XzConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs `command` under `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xz_run(cfg: *const XzConfig, command: XzCommand, out: *mut *mut XzReport) -> XzStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let cfg = handle(cfg)?;
        let Output { record, trace } = report::run(command.into(), &cfg.0).map_err(fail)?;
        let cstr = |s: String| CString::new(s).map_err(|e| fail(Error::Protocol(e.to_string())));
        let json = cstr(Output { record, trace: None }.render())?;
        let trace = trace.map(cstr).transpose()?;
        *out = Box::into_raw(Box::new(XzReport { json, trace }));
        Ok(())
    })
}

/// The JSON record, owned by `report`.
///
/// # Safety
/// `report` must be a live handle from [`xz_run`].
#[no_mangle]
pub unsafe extern "C" fn xz_report_json(report: *const XzReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// The per-trial trace, or NULL when the command produces none.
///
/// # Safety
/// `report` must be a live handle from [`xz_run`].
#[no_mangle]
pub unsafe extern "C" fn xz_report_trace(report: *const XzReport) -> *const c_char {
    report.as_ref().and_then(|r| r.trace.as_ref()).map_or(ptr::null(), |t| t.as_ptr())
}

/// # Safety
/// `report` must be NULL or a handle from [`xz_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xz_report_free(report: *mut XzReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of identity gates appended to a circuit of `gates` gates for
/// output error `epsilon`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xz_padding_for(gates: usize, epsilon: f64, out: *mut usize) -> XzStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = padding_for(gates, epsilon).map_err(fail)?;
        Ok(())
    })
}

/// Compiles a circuit in the text format on input `x` (a `0`/`1` string).
/// A negative `padding` selects the padding implied by `epsilon`.
///
/// # Safety
/// `circuit` and `x` must be NUL-terminated strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_compile(
    circuit: *const c_char,
    x: *const c_char,
    epsilon: f64,
    padding: i64,
    out: *mut *mut XzHamiltonian,
) -> XzStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let c = parse_circuit(str_arg(circuit)?).map_err(fail)?;
        let x: Bits = str_arg(x)?.parse().map_err(fail)?;
        let padding = usize::try_from(padding).ok();
        let report = compile_hamiltonian(&c, &x, epsilon, padding, CompileOptions::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(XzHamiltonian { report, x, history_accept: None }));
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle from [`xz_hamiltonian_compile`].
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_qubits(h: *const XzHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.report.qubits)
}

/// # Safety
/// `h` must be a live handle from [`xz_hamiltonian_compile`].
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_term_count(h: *const XzHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.report.hamiltonian.len())
}

/// # Safety
/// `h` must be a live handle from [`xz_hamiltonian_compile`].
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_padded_steps(h: *const XzHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.report.t_padded)
}

/// Term `index` as a weight and X/Z masks over little-endian wires.
///
/// # Safety
/// `h` must be a live handle and the output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_term(
    h: *const XzHamiltonian,
    index: usize,
    alpha: *mut f64,
    xmask: *mut u64,
    zmask: *mut u64,
) -> XzStatus {
    guard(|| {
        let h = handle(h)?;
        let (alpha, xmask, zmask) = (out_arg(alpha)?, out_arg(xmask)?, out_arg(zmask)?);
        let Some((a, t)) = h.report.hamiltonian.terms().get(index) else {
            set_error(format!("term {index} out of range"));
            return Err(XzStatus::OutOfRange);
        };
        (*alpha, *xmask, *zmask) = (*a, t.xmask(), t.zmask());
        Ok(())
    })
}

/// Acceptance probability of the single-shot energy test on the history
/// state. Computed once and cached on the handle.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_history_accept(h: *mut XzHamiltonian, out: *mut f64) -> XzStatus {
    guard(|| {
        let h = out_arg(h)?;
        let out = out_arg(out)?;
        if h.history_accept.is_none() {
            let psi = history_state(&h.report.circuit_padded, &h.x).map_err(fail)?;
            h.history_accept = Some(vgs_accept_prob_analytic(&h.report.hamiltonian, &psi).map_err(fail)?);
        }
        *out = h.history_accept.unwrap_or_default();
        Ok(())
    })
}

/// # Safety
/// `h` must be NULL or a handle from [`xz_hamiltonian_compile`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xz_hamiltonian_free(h: *mut XzHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
