//! Experiment configuration (TOML) and the plain-text circuit format.
//!
//! Circuit files hold one gate per line (`H q`, `T a b c`, `I q`) after the
//! header lines `n=`, `m=` and `out=`. Blank lines and `#` comments are
//! ignored.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bits::Bits;
use crate::blind::AdversaryKind;
use crate::error::{Error, Result};
use crate::hamiltonian::{CompileOptions, EigenMethod, InputWeight, WeightMode};
use crate::qpip1::{Qpip1Overrides, ScaleMode};
use crate::qsim::{Circuit, Gate};

fn parse_wire(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad wire {tok:?}") })
}

pub fn parse_gate(text: &str, line: usize) -> Result<Gate> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let wires = |k: usize| -> Result<Vec<usize>> {
        if toks.len() != k + 1 {
            return Err(Error::Parse { line, msg: format!("{} takes {k} wire(s)", toks[0]) });
        }
        toks[1..].iter().map(|t| parse_wire(t, line)).collect()
    };
    match toks.first().copied() {
        Some("H") => Ok(Gate::Hadamard(wires(1)?[0])),
        Some("I") => Ok(Gate::Identity(wires(1)?[0])),
        Some("T") => {
            let w = wires(3)?;
            Ok(Gate::Toffoli(w[0], w[1], w[2]))
        }
        _ => Err(Error::Parse { line, msg: format!("unknown gate {text:?}") }),
    }
}

fn parse_wire_list(value: &str, line: usize) -> Result<Vec<usize>> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(|t| parse_wire(t, line)).collect()
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let (mut n, mut m, mut out) = (None, None, None);
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some((key, value)) = body.split_once('=') {
            let value = value.trim();
            match key.trim() {
                "n" => n = Some(parse_wire(value, line)?),
                "m" => m = Some(parse_wire(value, line)?),
                "out" => out = Some(parse_wire_list(value, line)?),
                other => return Err(Error::Parse { line, msg: format!("unknown header {other:?}") }),
            }
        } else {
            gates.push(parse_gate(body, line)?);
        }
    }
    let missing = |h: &str| Error::Parse { line: 0, msg: format!("missing header {h}=") };
    Circuit::new(n.ok_or_else(|| missing("n"))?, m.unwrap_or(0), gates, out.ok_or_else(|| missing("out"))?)
}

/// Renders a circuit in the file format.
pub fn circuit_to_text(c: &Circuit) -> String {
    let mut s = format!("n={}\nm={}\nout={}\n", c.n(), c.m(), c.outputs().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","));
    for g in c.gates() {
        match g {
            Gate::Hadamard(q) => s += &format!("H {q}\n"),
            Gate::Identity(q) => s += &format!("I {q}\n"),
            Gate::Toffoli(a, b, t) => s += &format!("T {a} {b} {t}\n"),
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineCircuit {
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    pub out: Vec<usize>,
    pub gates: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectrumConfig {
    #[serde(default)]
    pub method: EigenMethod,
    pub k: Option<usize>,
    /// Also run the other solver and report the largest disagreement.
    #[serde(default)]
    pub cross_check: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VgsState {
    #[default]
    History,
    /// The history state plus a random perturbation of norm `perturbation`.
    Perturbed,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct VgsConfig {
    #[serde(default)]
    pub state: VgsState,
    pub perturbation: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qpip1Strategy {
    #[default]
    Honest,
    /// Every copy is `|0...0>`.
    Zero,
    /// Every copy is an independent random state.
    Random,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Qpip1Config {
    #[serde(default)]
    pub scale_mode: ScaleMode,
    pub copies: Option<usize>,
    pub tested: Option<usize>,
    pub kappa: Option<f64>,
    #[serde(default = "one")]
    pub lambda: u64,
    #[serde(default)]
    pub strategy: Qpip1Strategy,
}

fn one() -> u64 {
    1
}

impl Default for Qpip1Config {
    fn default() -> Self {
        Qpip1Config { scale_mode: ScaleMode::Desk, copies: None, tested: None, kappa: None, lambda: 1, strategy: Qpip1Strategy::Honest }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qpip0Strategy {
    #[default]
    Honest,
    /// One broken copy among honest ones.
    OneBreak,
    /// Every copy broken; outside what the binding property permits.
    AllBreak,
    /// One aborting copy among honest ones.
    OneAbort,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Qpip0Config {
    pub copies: Option<usize>,
    #[serde(default)]
    pub strategy: Qpip0Strategy,
    pub test_pass_prob: Option<f64>,
    /// Hadamard-round bits of broken copies: `uniform` or an output string.
    pub bits: Option<String>,
    /// Index of the deviating copy (default 0).
    pub position: Option<usize>,
    /// Run the single-copy protocol instead.
    #[serde(default)]
    pub naive: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlindProtocolName {
    #[default]
    Echo,
    Chain,
    Qpip0,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Transparent,
    Otp,
    OtpReusing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlindExperiment {
    /// One execution; the report carries the transcript.
    #[default]
    Run,
    Simulation,
    Blindness,
    Fuzz,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BlindConfig {
    #[serde(default)]
    pub protocol: BlindProtocolName,
    #[serde(default)]
    pub scheme: SchemeName,
    #[serde(default)]
    pub adversary: Option<AdversaryKind>,
    #[serde(default)]
    pub experiment: BlindExperiment,
    pub rounds: Option<usize>,
    pub copies: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub circuit: Option<InlineCircuit>,
    pub circuit_file: Option<PathBuf>,
    pub x: Option<Bits>,
    pub epsilon: Option<f64>,
    pub padding: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    #[serde(default)]
    pub weights: WeightMode,
    #[serde(default)]
    pub input_weight: InputWeight,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub vgs: VgsConfig,
    #[serde(default)]
    pub qpip1: Qpip1Config,
    #[serde(default)]
    pub qpip0: Qpip0Config,
    #[serde(default)]
    pub blind: BlindConfig,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub const DEFAULT_EPSILON: f64 = 0.5;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.circuit.is_some() && self.circuit_file.is_some() {
            return Err(Error::Config("give either `circuit` or `circuit-file`, not both".into()));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Config(format!("epsilon {eps} must lie in (0, 1)")));
            }
        }
        if self.trials == Some(0) {
            return Err(Error::Config("trials must be positive".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(DEFAULT_EPSILON)
    }

    pub fn compile_options(&self) -> CompileOptions {
        CompileOptions { weights: self.weights, input: self.input_weight }
    }

    pub fn circuit(&self) -> Result<Circuit> {
        let config_err = |e: Error| Error::Config(e.to_string());
        match (&self.circuit, &self.circuit_file) {
            (Some(c), None) => {
                let gates = c.gates.iter().enumerate().map(|(i, g)| parse_gate(g, i + 1)).collect::<Result<Vec<_>>>();
                Circuit::new(c.n, c.m, gates.map_err(config_err)?, c.out.clone()).map_err(config_err)
            }
            (None, Some(path)) => {
                let path = self.base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                parse_circuit(&text).map_err(config_err)
            }
            _ => Err(Error::Config("no circuit given".into())),
        }
    }

    /// The input, defaulting to all zeros.
    pub fn input(&self, circuit: &Circuit) -> Result<Bits> {
        let x = self.x.clone().unwrap_or_else(|| Bits::zeros(circuit.n()));
        if x.len() != circuit.n() {
            return Err(Error::Config(format!("x has {} bits, circuit takes {}", x.len(), circuit.n())));
        }
        Ok(x)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("this command is randomized and needs a seed".into()))
    }

    pub fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn qpip1_overrides(&self) -> Qpip1Overrides {
        Qpip1Overrides { copies: self.qpip1.copies, tested: self.qpip1.tested, kappa: self.qpip1.kappa, padding: self.padding }
    }
}
