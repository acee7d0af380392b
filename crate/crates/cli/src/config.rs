//! Flat `key = value` experiment configuration.
//!
//! A config file holds one entry per line; `#` starts a comment. Command-line
//! overrides are merged on top of the file entries before validation, so the
//! same keys are accepted in both places.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mvsim_core::gatekit;
use mvsim_core::{AlgorithmOp, Channel, ChannelSet, NoiseModel, Step};

use crate::error::{CliError, CliResult};

pub const DEFAULT_STEPS: usize = 20;
pub const DEFAULT_MVN_QUBITS: usize = 5;

pub const KEYS: &[&str] = &[
    "experiment",
    "nq",
    "steps",
    "seed",
    "p",
    "epsilon",
    "p1",
    "p2",
    "paths",
    "channels",
    "suppress",
    "initial",
    "circuit",
    "format",
    "out",
    "workers",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Mv1,
    Mv2,
    Mvn,
    Custom,
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mv1" => Ok(Self::Mv1),
            "mv2" => Ok(Self::Mv2),
            "mvn" => Ok(Self::Mvn),
            "custom" => Ok(Self::Custom),
            _ => Err(CliError::Config(format!(
                "unknown experiment '{s}' (expected mv1, mv2, mvn or custom)"
            ))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mv1 => "mv1",
            Self::Mv2 => "mv2",
            Self::Mvn => "mvn",
            Self::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(CliError::Config(format!(
                "unknown format '{s}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub nq: usize,
    pub steps: usize,
    /// `None` when neither the file nor the overrides set one.
    pub seed: Option<u64>,
    /// Noise parameters; `suppressed` is filled from the suppression list.
    pub model: NoiseModel,
    /// Decimal index of the initial basis state.
    pub initial: usize,
    /// Gate steps for `custom` experiments.
    pub circuit: Vec<Step>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// Raw entries before validation; later insertions replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut raw = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_entry(line).ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            if raw.entries.contains_key(&key.to_ascii_lowercase()) {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
            if !KEYS.contains(&key.to_ascii_lowercase().as_str()) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            raw.insert(&key, value)?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Sets `key`, replacing any earlier value.
    pub fn insert(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        self.entries.insert(key, value.into().trim().to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> CliResult<()> {
        let (key, value) = split_entry(assignment)
            .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
        self.insert(&key, value)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let kind: ExperimentKind = self.get("experiment").unwrap_or("mv1").parse()?;
        let explicit_nq = self.parse_num::<usize>("nq")?;
        let nq = match (kind, explicit_nq) {
            (ExperimentKind::Mv1, None | Some(1)) => 1,
            (ExperimentKind::Mv2, None | Some(2)) => 2,
            (ExperimentKind::Mv1, Some(n)) => return Err(conflict("mv1", 1, n)),
            (ExperimentKind::Mv2, Some(n)) => return Err(conflict("mv2", 2, n)),
            (ExperimentKind::Mvn, n) => {
                let n = n.unwrap_or(DEFAULT_MVN_QUBITS);
                if n < 2 {
                    return Err(CliError::Config(format!("mvn needs nq >= 2, got {n}")));
                }
                n
            }
            (ExperimentKind::Custom, Some(n)) if n >= 1 => n,
            (ExperimentKind::Custom, _) => {
                return Err(CliError::Config("custom experiments need nq >= 1".into()))
            }
        };
        if nq > mvsim_core::qstate::MAX_QUBITS {
            return Err(CliError::Config(format!(
                "nq = {nq} exceeds the supported maximum"
            )));
        }

        let circuit = match (kind, self.get("circuit")) {
            (ExperimentKind::Custom, Some(text)) => parse_circuit(text)?,
            (ExperimentKind::Custom, None) => {
                return Err(CliError::Config("custom experiments need a circuit".into()))
            }
            (_, Some(_)) => {
                return Err(CliError::Config(format!(
                    "'circuit' only applies to custom experiments, not {kind}"
                )))
            }
            (_, None) => Vec::new(),
        };

        let steps = self.parse_num::<usize>("steps")?.unwrap_or(DEFAULT_STEPS);
        let seed = self.parse_num::<u64>("seed")?;

        let mut model = NoiseModel::default();
        if kind == ExperimentKind::Mv1 {
            model = model.with_p1(1.0);
        }
        match (
            self.parse_num::<f64>("p")?,
            self.parse_num::<f64>("epsilon")?,
        ) {
            (Some(p), Some(eps)) if (p + eps - 1.0).abs() > 1e-12 => {
                return Err(CliError::Config(format!(
                    "p = {p} and epsilon = {eps} do not sum to 1"
                )))
            }
            (Some(p), _) => model = model.with_p(p),
            (None, Some(eps)) => model = model.with_p(1.0 - eps),
            (None, None) => {}
        }
        match (self.parse_num::<f64>("p1")?, self.parse_num::<f64>("p2")?) {
            (Some(p1), Some(p2)) if (p1 + p2 - 1.0).abs() > 1e-12 => {
                return Err(CliError::Config(format!(
                    "p1 = {p1} and p2 = {p2} do not sum to 1"
                )))
            }
            (Some(p1), _) => model = model.with_p1(p1),
            (None, Some(p2)) => model = model.with_p1(1.0 - p2),
            (None, None) => {}
        }
        if let Some(paths) = self.parse_num::<usize>("paths")? {
            model = model.with_paths(paths);
        }
        if let Some(list) = self.get("channels") {
            model = model.with_channels(parse_channels(list)?);
        }
        if let Some(list) = self.get("suppress") {
            model.suppressed = parse_channels(list)?;
        }
        model = model.with_seed(seed.unwrap_or(0));
        model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let initial = match self.get("initial") {
            None => 0,
            Some(text) => parse_initial(text, nq)?,
        };
        let format = self
            .get("format")
            .map(str::parse)
            .transpose()?
            .unwrap_or_default();
        let out = self.get("out").filter(|s| !s.is_empty()).map(PathBuf::from);
        let workers = self.parse_num::<usize>("workers")?;
        if workers == Some(0) {
            return Err(CliError::Config("workers must be positive".into()));
        }

        let config = ExperimentConfig {
            kind,
            nq,
            steps,
            seed,
            model,
            initial,
            circuit,
            format,
            out,
            workers,
        };
        let needed = config.algorithm_len();
        if steps < needed {
            return Err(CliError::Config(format!(
                "{kind} needs at least {needed} steps, got {steps}"
            )));
        }
        Ok(config)
    }

    fn parse_num<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Config(format!("invalid value '{v}' for '{key}'")))
            })
            .transpose()
    }
}

impl ExperimentConfig {
    /// Number of leading steps occupied by the algorithm and its interludes.
    pub fn algorithm_len(&self) -> usize {
        match self.kind {
            ExperimentKind::Mv1 => 3,
            ExperimentKind::Mv2 => 7,
            ExperimentKind::Mvn => 2 * self.nq - 1,
            ExperimentKind::Custom => self.circuit.len(),
        }
    }

    /// The seed, or a config error for runs that must be reproducible.
    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| {
            CliError::Config("a seed is required (set 'seed' or pass --seed)".into())
        })
    }
}

fn conflict(kind: &str, forced: usize, got: usize) -> CliError {
    CliError::Config(format!("{kind} forces nq = {forced}, got nq = {got}"))
}

fn split_entry(line: &str) -> Option<(String, String)> {
    let (k, v) = line.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

/// Comma-separated channel names; `none` or an empty list gives the empty set.
pub fn parse_channels(list: &str) -> CliResult<ChannelSet> {
    let mut set = ChannelSet::empty();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name.eq_ignore_ascii_case("none") {
            continue;
        }
        if name.eq_ignore_ascii_case("all") {
            Channel::ALL.into_iter().for_each(|c| set.insert(c));
            continue;
        }
        let c = Channel::from_name(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown channel '{name}' (expected x, y, z or general)"
            ))
        })?;
        set.insert(c);
    }
    Ok(set)
}

/// A ket label such as `|01>` (exactly `nq` digits) or a decimal basis index.
fn parse_initial(text: &str, nq: usize) -> CliResult<usize> {
    let text = text.trim();
    let label = text
        .strip_prefix('|')
        .and_then(|t| t.strip_suffix('>').or_else(|| t.strip_suffix('⟩')));
    let n = if let Some(bits) = label {
        if bits.len() != nq || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(CliError::Config(format!(
                "initial state '{text}' is not a {nq}-qubit label"
            )));
        }
        usize::from_str_radix(bits, 2).expect("validated binary digits")
    } else {
        text.parse::<usize>()
            .map_err(|_| CliError::Config(format!("invalid initial state '{text}'")))?
    };
    if n >= 1usize << nq {
        return Err(CliError::Config(format!(
            "initial index {n} out of range for {nq} qubits"
        )));
    }
    Ok(n)
}

/// Parses `;`-separated circuit steps: `h(1)`, `x(2)`, `y(1)`, `z(3)`,
/// `cnot(1,2)`, `cz(1,2)`, `toffoli(1,2,3)` and `noise`. Qubit ranges are
/// checked later against `nq` when the schedule is built.
pub fn parse_circuit(text: &str) -> CliResult<Vec<Step>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_step)
        .collect()
}

fn parse_step(token: &str) -> CliResult<Step> {
    let bad = || CliError::Config(format!("invalid circuit step '{token}'"));
    let lower = token.to_ascii_lowercase();
    if lower == "noise" || lower == "n" {
        return Ok(Step::NoiseOnly);
    }
    let (name, rest) = lower.split_once('(').ok_or_else(bad)?;
    let args = rest.strip_suffix(')').ok_or_else(bad)?;
    let qubits: Vec<usize> = args
        .split(',')
        .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let arity_ok = |k: usize| {
        if qubits.len() == k {
            Ok(())
        } else {
            Err(bad())
        }
    };
    let op = match name.trim() {
        "h" => {
            arity_ok(1)?;
            AlgorithmOp::hadamard(qubits[0])
        }
        "x" | "y" | "z" => {
            arity_ok(1)?;
            let k = match name.trim() {
                "x" => 1,
                "y" => 2,
                _ => 3,
            };
            let gate = gatekit::pauli(k).expect("valid Pauli index");
            AlgorithmOp::new(name.trim().to_ascii_uppercase(), gate, qubits)?
        }
        "cnot" => {
            arity_ok(2)?;
            AlgorithmOp::cnot(qubits[0], qubits[1])
        }
        "cz" => {
            arity_ok(2)?;
            AlgorithmOp::new(
                "CZ",
                gatekit::controlled_phase(std::f64::consts::PI),
                qubits,
            )?
        }
        "toffoli" => {
            arity_ok(3)?;
            AlgorithmOp::toffoli(qubits[0], qubits[1], qubits[2])
        }
        _ => return Err(bad()),
    };
    Ok(Step::Algorithm(op))
}
