//! JSON documents accepted by the command line: channel files, noise models
//! and experiment configs. See `docs/schema.md` for the field reference.

use std::fmt;
use std::path::Path;

use krausprop_core::bounds::Sampler;
use krausprop_core::channels::{
    standard_kraus, ErrorKind, GateError, KrausChannel, ProbabilisticError, StructuredDqKraus, StructuredSqKraus,
    ThermalRelaxation,
};
use krausprop_core::circuit::{GateKind, NoiseModel, NoiseRule};
use krausprop_core::linalg::ComplexMatrix;
use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A validation failure located by a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses a JSON document, reporting the path of the offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        ConfigError::new(path, e.into_inner())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| ConfigError::new(e.path, format!("{} ({})", e.message, path.display())))
}

/// Complex numbers are written as `[re, im]`.
pub type ComplexSpec = [f64; 2];

/// A square matrix as a list of rows.
pub type MatrixSpec = Vec<Vec<ComplexSpec>>;

/// Six parameters of a structured single-qubit channel. `a1` and `b1` may
/// be omitted, in which case they are fixed by normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredSqSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    pub a2: f64,
    pub a3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    pub b2: f64,
    pub b3: f64,
}

impl StructuredSqSpec {
    pub fn build(&self, path: &str) -> Result<StructuredSqKraus, ConfigError> {
        let k = match (self.a1, self.b1) {
            (None, None) => StructuredSqKraus::from_off_diagonal(self.a2, self.a3, self.b2, self.b3),
            (Some(a1), Some(b1)) => StructuredSqKraus::new(a1, self.a2, self.a3, b1, self.b2, self.b3),
            _ => return Err(ConfigError::new(path, "give both a1 and b1 or neither")),
        };
        k.map_err(|e| ConfigError::new(path, e))
    }

    pub fn from_kraus(k: &StructuredSqKraus) -> Self {
        Self {
            a1: Some(k.a1()),
            a2: k.a2(),
            a3: k.a3(),
            b1: Some(k.b1()),
            b2: k.b2(),
            b3: k.b3(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermSpec {
    X { p: f64 },
    Y { p: f64 },
    Z { p: f64 },
    Reset0 { p: f64 },
    Reset1 { p: f64 },
    Depolarizing { p: f64 },
    /// Either a library gate name or an explicit matrix.
    CustomUnitary {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gate: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<MatrixSpec>,
    },
}

impl TermSpec {
    fn p(&self) -> f64 {
        match self {
            TermSpec::X { p }
            | TermSpec::Y { p }
            | TermSpec::Z { p }
            | TermSpec::Reset0 { p }
            | TermSpec::Reset1 { p }
            | TermSpec::Depolarizing { p }
            | TermSpec::CustomUnitary { p, .. } => *p,
        }
    }

    fn build(&self, path: &str) -> Result<(ErrorKind, f64), ConfigError> {
        let p = self.p();
        check_probability(&format!("{path}.p"), p)?;
        let kind = match self {
            TermSpec::X { .. } => ErrorKind::X,
            TermSpec::Y { .. } => ErrorKind::Y,
            TermSpec::Z { .. } => ErrorKind::Z,
            TermSpec::Reset0 { .. } => ErrorKind::Reset0,
            TermSpec::Reset1 { .. } => ErrorKind::Reset1,
            TermSpec::Depolarizing { .. } => ErrorKind::Depolarizing,
            TermSpec::CustomUnitary { gate, matrix, .. } => match (gate, matrix) {
                (Some(name), None) => {
                    let kind = GateKind::parse(name).map_err(|e| ConfigError::new(format!("{path}.gate"), e))?;
                    ErrorKind::CustomUnitary(kind.matrix())
                }
                (None, Some(m)) => ErrorKind::CustomUnitary(build_matrix(m, &format!("{path}.matrix"))?),
                _ => return Err(ConfigError::new(path, "custom_unitary needs exactly one of `gate` or `matrix`")),
            },
        };
        Ok((kind, p))
    }

    fn from_kind(kind: &ErrorKind, p: f64) -> Self {
        match kind {
            ErrorKind::X => TermSpec::X { p },
            ErrorKind::Y => TermSpec::Y { p },
            ErrorKind::Z => TermSpec::Z { p },
            ErrorKind::Reset0 => TermSpec::Reset0 { p },
            ErrorKind::Reset1 => TermSpec::Reset1 { p },
            ErrorKind::Depolarizing => TermSpec::Depolarizing { p },
            ErrorKind::CustomUnitary(u) => TermSpec::CustomUnitary {
                p,
                gate: None,
                matrix: Some(matrix_spec(u)),
            },
        }
    }
}

/// Kind names accepted by the `standard` channel type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardKind {
    X,
    Y,
    Z,
    Reset0,
    Reset1,
    Depolarizing,
}

impl StandardKind {
    fn kind(self) -> ErrorKind {
        match self {
            StandardKind::X => ErrorKind::X,
            StandardKind::Y => ErrorKind::Y,
            StandardKind::Z => ErrorKind::Z,
            StandardKind::Reset0 => ErrorKind::Reset0,
            StandardKind::Reset1 => ErrorKind::Reset1,
            StandardKind::Depolarizing => ErrorKind::Depolarizing,
        }
    }
}

/// Relaxation times and gate duration share one time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSpec {
    pub t1: f64,
    pub t2: f64,
    pub gate_time: f64,
    /// Excited-state population of the equilibrium state.
    #[serde(default)]
    pub p1: f64,
}

impl ThermalSpec {
    fn build(&self, path: &str) -> Result<GateError, ConfigError> {
        check_unit_interval(&format!("{path}.p1"), self.p1)?;
        let th = ThermalRelaxation::new(self.t1, self.t2, self.gate_time, self.p1).map_err(|e| ConfigError::new(path, e))?;
        th.to_gate_error().map_err(|e| ConfigError::new(path, e))
    }
}

fn default_arity() -> usize {
    1
}

/// A gate error. Tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    StructuredSq(StructuredSqSpec),
    StructuredDq {
        first: StructuredSqSpec,
        second: StructuredSqSpec,
    },
    Kraus {
        #[serde(default = "default_arity")]
        arity: usize,
        matrices: Vec<MatrixSpec>,
    },
    Probabilistic {
        #[serde(default = "default_arity")]
        arity: usize,
        terms: Vec<TermSpec>,
    },
    ThermalRelaxation(ThermalSpec),
    /// Independent thermal relaxation on both targets; both must take the
    /// Kraus branch.
    ThermalRelaxationDq {
        first: ThermalSpec,
        second: ThermalSpec,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    PhaseDamping {
        lambda: f64,
    },
    /// Kraus form of a single-qubit probabilistic error.
    Standard {
        kind: StandardKind,
        p: f64,
    },
    Composed {
        parts: Vec<ChannelSpec>,
    },
}

fn check_probability(path: &str, p: f64) -> Result<(), ConfigError> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("probability must be in [0, 1), got {p}")))
    }
}

fn check_unit_interval(path: &str, x: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be in [0, 1], got {x}")))
    }
}

fn build_matrix(rows: &MatrixSpec, path: &str) -> Result<ComplexMatrix, ConfigError> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ConfigError::new(format!("{path}[{i}]"), format!("expected {n} entries, got {}", row.len())));
        }
        data.extend(row.iter().map(|[re, im]| Complex::new(*re, *im)));
    }
    ComplexMatrix::new(n, n, data).map_err(|e| ConfigError::new(path, e))
}

pub fn matrix_spec(m: &ComplexMatrix) -> MatrixSpec {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl ChannelSpec {
    /// Builds the core error, validating every field.
    pub fn build(&self, path: &str) -> Result<GateError, ConfigError> {
        let err = |e: &dyn fmt::Display| ConfigError::new(path, e);
        Ok(match self {
            ChannelSpec::StructuredSq(p) => GateError::StructuredSq(p.build(path)?),
            ChannelSpec::StructuredDq { first, second } => GateError::StructuredDq(StructuredDqKraus::new(
                first.build(&format!("{path}.first"))?,
                second.build(&format!("{path}.second"))?,
            )),
            ChannelSpec::Kraus { arity, matrices } => {
                let mats = matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| build_matrix(m, &format!("{path}.matrices[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                GateError::Kraus(KrausChannel::new(*arity, mats).map_err(|e| err(&e))?)
            }
            ChannelSpec::Probabilistic { arity, terms } => {
                let terms = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t.build(&format!("{path}.terms[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                GateError::Probabilistic(ProbabilisticError::new(*arity, terms).map_err(|e| err(&e))?)
            }
            ChannelSpec::ThermalRelaxation(th) => th.build(path)?,
            ChannelSpec::ThermalRelaxationDq { first, second } => {
                let part = |th: &ThermalSpec, p: String| match th.build(&p)? {
                    GateError::StructuredSq(k) => Ok(k),
                    _ => Err(ConfigError::new(p, "two-qubit thermal relaxation needs T1 < T2 <= 2 T1")),
                };
                GateError::StructuredDq(StructuredDqKraus::new(
                    part(first, format!("{path}.first"))?,
                    part(second, format!("{path}.second"))?,
                ))
            }
            ChannelSpec::AmplitudeDamping { gamma } => {
                check_unit_interval(&format!("{path}.gamma"), *gamma)?;
                GateError::StructuredSq(StructuredSqKraus::amplitude_damping(*gamma).map_err(|e| err(&e))?)
            }
            ChannelSpec::PhaseDamping { lambda } => {
                check_unit_interval(&format!("{path}.lambda"), *lambda)?;
                GateError::StructuredSq(StructuredSqKraus::phase_damping(*lambda).map_err(|e| err(&e))?)
            }
            ChannelSpec::Standard { kind, p } => {
                check_probability(&format!("{path}.p"), *p)?;
                GateError::Kraus(standard_kraus(&kind.kind(), *p).map_err(|e| err(&e))?)
            }
            ChannelSpec::Composed { parts } => {
                let parts = parts
                    .iter()
                    .enumerate()
                    .map(|(i, part)| part.build(&format!("{path}.parts[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                GateError::composed(parts).map_err(|e| err(&e))?
            }
        })
    }

    /// Serializable form of a core error.
    pub fn from_gate_error(e: &GateError) -> Self {
        match e {
            GateError::Kraus(k) => ChannelSpec::Kraus {
                arity: k.arity(),
                matrices: k.matrices().iter().map(matrix_spec).collect(),
            },
            GateError::StructuredSq(k) => ChannelSpec::StructuredSq(StructuredSqSpec::from_kraus(k)),
            GateError::StructuredDq(k) => ChannelSpec::StructuredDq {
                first: StructuredSqSpec::from_kraus(&k.first),
                second: StructuredSqSpec::from_kraus(&k.second),
            },
            GateError::Probabilistic(p) => ChannelSpec::Probabilistic {
                arity: p.arity(),
                terms: p.terms().iter().map(|(k, p)| TermSpec::from_kind(k, *p)).collect(),
            },
            GateError::Composed(parts) => ChannelSpec::Composed {
                parts: parts.iter().map(ChannelSpec::from_gate_error).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRuleSpec {
    /// Gate name (`I`, `H`, `CP`, `CNOT`, ...) or `*`.
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    pub error: ChannelSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModelSpec {
    pub rules: Vec<NoiseRuleSpec>,
}

impl NoiseModelSpec {
    pub fn build(&self, path: &str, n_qubits: usize) -> Result<NoiseModel, ConfigError> {
        let mut rules = Vec::with_capacity(self.rules.len());
        for (i, rule) in self.rules.iter().enumerate() {
            let rp = format!("{path}.rules[{i}]");
            let gate = rule.gate.trim();
            if gate != "*" && !gate.eq_ignore_ascii_case("cp") {
                GateKind::parse(&rule.gate).map_err(|e| ConfigError::new(format!("{rp}.gate"), e))?;
            }
            if let Some(q) = &rule.qubits {
                if let Some(&bad) = q.iter().find(|&&q| q >= n_qubits) {
                    return Err(ConfigError::new(format!("{rp}.qubits"), format!("qubit {bad} out of range for {n_qubits} qubit(s)")));
                }
            }
            let error = rule.error.build(&format!("{rp}.error"))?;
            rules.push(NoiseRule::new(&rule.gate, rule.qubits.clone(), error));
        }
        NoiseModel::new(rules).map_err(|e| ConfigError::new(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    KrausIdentity,
    ProbIdentity,
    QftMixed,
    Custom,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::KrausIdentity => "kraus_identity",
            ExperimentKind::ProbIdentity => "prob_identity",
            ExperimentKind::QftMixed => "qft_mixed",
            ExperimentKind::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::KrausIdentity, Self::ProbIdentity, Self::QftMixed, Self::Custom]
            .into_iter()
            .find(|k| k.label() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Trajectories,
    Both,
}

impl Mode {
    pub fn exact(&self) -> bool {
        matches!(self, Mode::Exact | Mode::Both)
    }

    pub fn trajectories(&self) -> bool {
        matches!(self, Mode::Trajectories | Mode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthSpec {
    pub start: usize,
    pub stop: usize,
    pub stride: usize,
}

impl DepthSpec {
    /// `start, start + stride, …` up to `stop`, with `stop` appended if the
    /// stride misses it.
    pub fn grid(&self) -> Vec<usize> {
        let mut ms: Vec<usize> = (self.start..=self.stop).step_by(self.stride.max(1)).collect();
        if ms.last() != Some(&self.stop) {
            ms.push(self.stop);
        }
        ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerSpec {
    #[default]
    PaperReal,
    HaarComplex,
}

impl SamplerSpec {
    pub fn sampler(self) -> Sampler {
        match self {
            SamplerSpec::PaperReal => Sampler::PaperReal,
            SamplerSpec::HaarComplex => Sampler::HaarComplex,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_samples() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    #[serde(default = "default_true")]
    pub auto_estimate: bool,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub r_override: Option<f64>,
    #[serde(default)]
    pub sampler: SamplerSpec,
}

impl Default for BoundSpec {
    fn default() -> Self {
        Self {
            auto_estimate: true,
            samples: default_samples(),
            r_override: None,
            sampler: SamplerSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub gate: String,
    pub targets: Vec<usize>,
}

fn default_shots() -> usize {
    1000
}

/// One experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_qubits: usize,
    pub depth: DepthSpec,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
    pub mode: Mode,
    pub noise_model: NoiseModelSpec,
    #[serde(default)]
    pub bound: BoundSpec,
    /// Computational basis state the run starts from.
    #[serde(default)]
    pub initial_state: usize,
    /// Gate sequence for `custom`, repeated until it reaches `depth.stop`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<Vec<GateSpec>>,
}

/// A validated config with its noise model built.
pub struct ValidConfig {
    pub noise: NoiseModel,
    pub sampler: Sampler,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<ValidConfig, ConfigError> {
        let max = krausprop_core::linalg::MAX_QUBITS;
        if self.n_qubits == 0 || self.n_qubits > max {
            return Err(ConfigError::new("n_qubits", format!("must be between 1 and {max}, got {}", self.n_qubits)));
        }
        if matches!(self.experiment, ExperimentKind::KrausIdentity | ExperimentKind::ProbIdentity) && self.n_qubits != 1 {
            return Err(ConfigError::new("n_qubits", format!("{} runs on a single qubit", self.experiment.label())));
        }
        if self.depth.stride == 0 {
            return Err(ConfigError::new("depth.stride", "must be at least 1"));
        }
        if self.depth.stop == 0 {
            return Err(ConfigError::new("depth.stop", "must be at least 1"));
        }
        if self.depth.start > self.depth.stop {
            return Err(ConfigError::new("depth.start", format!("must not exceed depth.stop ({})", self.depth.stop)));
        }
        if self.mode.trajectories() && self.shots == 0 {
            return Err(ConfigError::new("shots", "must be at least 1 when trajectories are requested"));
        }
        if self.initial_state >= 1 << self.n_qubits {
            return Err(ConfigError::new("initial_state", format!("basis index out of range for {} qubit(s)", self.n_qubits)));
        }
        if self.bound.samples == 0 {
            return Err(ConfigError::new("bound.samples", "must be at least 1"));
        }
        if let Some(r) = self.bound.r_override {
            check_probability("bound.r_override", r)?;
        }
        match (&self.experiment, &self.circuit) {
            (ExperimentKind::Custom, None) => return Err(ConfigError::new("circuit", "required for custom experiments")),
            (ExperimentKind::Custom, Some(gates)) if gates.is_empty() => {
                return Err(ConfigError::new("circuit", "must contain at least one gate"))
            }
            (ExperimentKind::Custom, Some(_)) => {}
            (_, Some(_)) => return Err(ConfigError::new("circuit", "only allowed for custom experiments")),
            (_, None) => {}
        }
        let noise = self.noise_model.build("noise_model", self.n_qubits)?;
        Ok(ValidConfig {
            noise,
            sampler: self.bound.sampler.sampler(),
        })
    }
}
