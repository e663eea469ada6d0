use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use xzdelegate_ffi::*;

const CONFIG: &str = r#"
padding = 2
trials = 200
[circuit]
n = 1
out = [0]
gates = ["H 0"]
"#;

fn config(text: &str) -> *mut XzConfig {
    let text = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { xz_config_from_toml(text.as_ptr(), &mut cfg) }, XzStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(xz_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn run_compile_and_read_json() {
    let cfg = config(CONFIG);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { xz_run(cfg, XzCommand::Compile, &mut report) }, XzStatus::Ok);
    let json = unsafe { CStr::from_ptr(xz_report_json(report)) }.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["t_padded"], 3);
    assert!(unsafe { xz_report_trace(report) }.is_null());
    unsafe {
        xz_report_free(report);
        xz_config_free(cfg);
    }
}

#[test]
fn missing_seed_is_a_config_error() {
    let cfg = config(CONFIG);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { xz_run(cfg, XzCommand::Vgs, &mut report) }, XzStatus::Config);
    assert!(report.is_null());
    assert!(last_error().contains("seed"));

    assert_eq!(unsafe { xz_config_set_seed(cfg, 9) }, XzStatus::Ok);
    assert_eq!(unsafe { xz_run(cfg, XzCommand::Vgs, &mut report) }, XzStatus::Ok);
    let trace = unsafe { CStr::from_ptr(xz_report_trace(report)) }.to_str().unwrap();
    assert_eq!(trace.lines().count(), 201);
    unsafe {
        xz_report_free(report);
        xz_config_free(cfg);
    }
}

#[test]
fn bad_input_is_rejected() {
    let mut cfg = ptr::null_mut();
    let bad = CString::new("nonsense = true").unwrap();
    assert_eq!(unsafe { xz_config_from_toml(bad.as_ptr(), &mut cfg) }, XzStatus::Config);
    assert!(cfg.is_null());
    assert_eq!(unsafe { xz_config_from_toml(ptr::null(), &mut cfg) }, XzStatus::NullPointer);
    assert_eq!(unsafe { xz_run(ptr::null(), XzCommand::Compile, ptr::null_mut()) }, XzStatus::NullPointer);

    let cfg = config(CONFIG);
    assert_eq!(unsafe { xz_config_set_trials(cfg, 0) }, XzStatus::Config);
    unsafe { xz_config_free(cfg) };
    unsafe { xz_config_free(ptr::null_mut()) };
}

#[test]
fn hamiltonian_handle() {
    let circuit = CString::new("n=1\nout=0\nH 0\n").unwrap();
    let x = CString::new("1").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { xz_hamiltonian_compile(circuit.as_ptr(), x.as_ptr(), 0.5, 2, &mut h) }, XzStatus::Ok);
    unsafe {
        assert_eq!(xz_hamiltonian_padded_steps(h), 3);
        assert_eq!(xz_hamiltonian_qubits(h), 4);
        let n = xz_hamiltonian_term_count(h);
        assert!(n > 0);
        let (mut a, mut xm, mut zm) = (0.0, 0u64, 0u64);
        let mut l1 = 0.0;
        for i in 0..n {
            assert_eq!(xz_hamiltonian_term(h, i, &mut a, &mut xm, &mut zm), XzStatus::Ok);
            assert!((xm | zm) < 1 << 4);
            l1 += f64::abs(a);
        }
        assert!(l1 > 0.0);
        assert_eq!(xz_hamiltonian_term(h, n, &mut a, &mut xm, &mut zm), XzStatus::OutOfRange);
        let mut p = 0.0;
        assert_eq!(xz_hamiltonian_history_accept(h, &mut p), XzStatus::Ok);
        assert!((p - 0.5).abs() < 1e-9, "{p}");
        xz_hamiltonian_free(h);
    }

    let bad = CString::new("n=1\nout=0\nQ 0\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { xz_hamiltonian_compile(bad.as_ptr(), x.as_ptr(), 0.5, -1, &mut h) }, XzStatus::Parse);
    assert!(h.is_null());
}

#[test]
fn padding_and_version() {
    let mut p = 0usize;
    assert_eq!(unsafe { xz_padding_for(2, 0.5, &mut p) }, XzStatus::Ok);
    assert_eq!(p, 24);
    assert_eq!(unsafe { xz_padding_for(2, 1.5, &mut p) }, XzStatus::InvalidArgument);
    let v = unsafe { CStr::from_ptr(xz_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/xzdelegate.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["xz_run", "xz_config_from_toml", "xz_hamiltonian_term", "XZ_STATUS_PANIC"] {
        assert!(text.contains(f), "{f}");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
