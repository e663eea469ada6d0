use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const TWO_GATES: &str = r#"
x = "0"
epsilon = 0.5

[circuit]
n = 1
m = 1
out = [0]
gates = ["H 0", "I 1"]
"#;

const HADAMARD: &str = r#"
x = "0"
padding = 1

[circuit]
n = 1
out = [0]
gates = ["H 0"]
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xzdelegate-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn config(name: &str, text: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xzdelegate")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn compile_reports_the_padded_length() {
    let cfg = config("compile.toml", TWO_GATES);
    let v = json(&run(&["compile", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["t_padded"], 26);
    assert_eq!(v["qubits"], 28);
}

#[test]
fn unknown_keys_are_config_errors() {
    let cfg = config("unknown.toml", &format!("{TWO_GATES}\n[vgs]\nshots = 3\n"));
    let out = run(&["compile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let bad = config("bad.toml", "epsilon = 2.0\n");
    assert_eq!(run(&["compile", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn randomized_commands_need_a_seed() {
    let cfg = config("noseed.toml", HADAMARD);
    let out = run(&["vgs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let cfg = config("seeded.toml", HADAMARD);
    let args = ["vgs", "--config", cfg.to_str().unwrap(), "--seed", "5", "--trials", "2000"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["vgs", "--config", cfg.to_str().unwrap(), "--seed", "6", "--trials", "2000"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_writes_the_record_and_the_trace() {
    let cfg = config("out.toml", HADAMARD);
    let path = scratch("vgs.json");
    let out = run(&["vgs", "--config", cfg.to_str().unwrap(), "--seed", "1", "--trials", "300", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.get("monte_carlo").is_some());
    let trace = std::fs::read_to_string(format!("{}.trace", path.display())).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("trial,term,r,verdict"));
    assert_eq!(lines.count(), 300);
}

#[test]
fn honest_qpip1_reports_an_accept_rate() {
    let cfg = config("qpip1.toml", &format!("{HADAMARD}\n[qpip1]\ncopies = 16\ntested = 8\nkappa = 0.1\n"));
    let v = json(&run(&["qpip1", "--config", cfg.to_str().unwrap(), "--seed", "2", "--trials", "1000"]));
    let rate = v["estimate"]["accept_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
    assert!((v["honest_copy_accept"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn reused_pads_leak_the_input() {
    let cfg = config(
        "blind.toml",
        "x = \"0001\"\n[blind]\nprotocol = \"echo\"\nscheme = \"otp-reusing\"\nexperiment = \"blindness\"\n",
    );
    let v = json(&run(&["blind", "--config", cfg.to_str().unwrap(), "--seed", "3", "--trials", "200"]));
    let adv = v["blindness"]["advantage"].as_f64().unwrap();
    assert!(adv.abs() > 0.0, "{v}");
}

#[test]
fn runtime_failures_exit_with_one() {
    // Auto padding gives 28 qubits, beyond the simulator's register.
    let cfg = config("big.toml", TWO_GATES);
    let out = run(&["vgs", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}
