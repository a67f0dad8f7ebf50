//! Gates, circuits and per-gate noise binding.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use num_complex::Complex;
use thiserror::Error;

use crate::channels::GateError;
use crate::linalg::{apply_left_with, check_targets, ComplexMatrix, LinalgError, TargetLayout, C64, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate {gate} acts on {expected} qubit(s) but {got} target(s) were given")]
    TargetCount {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("qubit count must be between 1 and {MAX_QUBITS}, got {0}")]
    QubitCount(usize),
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("gate {index} ({gate}) acts on {gate_arity} qubit(s) but the matching noise rule {rule} has arity {error_arity}")]
    NoiseArity {
        index: usize,
        gate: String,
        rule: usize,
        gate_arity: usize,
        error_arity: usize,
    },
    #[error("noise rule {rule} lists {qubits} qubit(s) for an error of arity {arity}")]
    RuleQubits { rule: usize, qubits: usize, arity: usize },
    #[error("circuits act on different qubit counts ({0} vs {1})")]
    QubitMismatch(usize, usize),
}

/// Library gate kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    /// Controlled phase `diag(1, 1, 1, e^{iφ})`.
    Cp(f64),
    /// First target is the control.
    Cnot,
    Cz,
    Swap,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cp(_) | GateKind::Cnot | GateKind::Cz | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Lower-case base name used for noise matching (`cp` for every phase).
    pub fn base_name(&self) -> &'static str {
        match self {
            GateKind::I => "i",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::T => "t",
            GateKind::Cp(_) => "cp",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
        }
    }

    /// Parses `I`, `X`, `Y`, `Z`, `H`, `S`, `T`, `CNOT` (or `CX`), `CZ`,
    /// `SWAP` and `CP(φ)` with `φ` in radians, case-insensitively.
    pub fn parse(name: &str) -> Result<Self, CircuitError> {
        let lower = name.trim().to_ascii_lowercase();
        let kind = match lower.as_str() {
            "i" | "id" => GateKind::I,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "t" => GateKind::T,
            "cnot" | "cx" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "swap" => GateKind::Swap,
            other => {
                let phi = other
                    .strip_prefix("cp(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .and_then(|arg| arg.trim().parse::<f64>().ok())
                    .filter(|phi| phi.is_finite());
                match phi {
                    Some(phi) => GateKind::Cp(phi),
                    None => return Err(CircuitError::UnknownGate(String::from(name))),
                }
            }
        };
        Ok(kind)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let c = |re: f64, im: f64| Complex::new(re, im);
        let r = FRAC_1_SQRT_2;
        let entries: Vec<C64> = match *self {
            GateKind::I => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
            GateKind::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
            GateKind::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
            GateKind::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
            GateKind::H => vec![c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)],
            GateKind::S => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
            GateKind::T => vec![c(1., 0.), c(0., 0.), c(0., 0.), Complex::from_polar(1.0, FRAC_PI_4)],
            GateKind::Cp(phi) => {
                let one = c(1.0, 0.0);
                return ComplexMatrix::from_diag(&[one, one, one, Complex::from_polar(1.0, phi)]);
            }
            GateKind::Cz => {
                let one = c(1.0, 0.0);
                return ComplexMatrix::from_diag(&[one, one, one, -one]);
            }
            GateKind::Cnot => return permutation(&[0, 1, 3, 2]),
            GateKind::Swap => return permutation(&[0, 2, 1, 3]),
        };
        ComplexMatrix::new(2, 2, entries).expect("2x2 shape")
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Cp(phi) => write!(f, "CP({phi})"),
            other => f.write_str(&other.base_name().to_ascii_uppercase()),
        }
    }
}

fn permutation(images: &[usize]) -> ComplexMatrix {
    let dim = images.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (col, &row) in images.iter().enumerate() {
        m[(row, col)] = Complex::new(1.0, 0.0);
    }
    m
}

/// A library gate placed on specific qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: ComplexMatrix,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Result<Self, CircuitError> {
        if targets.len() != kind.arity() {
            return Err(CircuitError::TargetCount {
                gate: format!("{kind}"),
                expected: kind.arity(),
                got: targets.len(),
            });
        }
        check_targets(targets, MAX_QUBITS)?;
        Ok(Self {
            kind,
            targets: targets.to_vec(),
            matrix: kind.matrix(),
        })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn name(&self) -> String {
        format!("{}", self.kind)
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }
}

/// Looks up a gate by name (see [`GateKind::parse`]).
pub fn gate_library(name: &str, targets: &[usize]) -> Result<Gate, CircuitError> {
    Gate::new(GateKind::parse(name)?, targets)
}

/// Ordered gate sequence on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self, CircuitError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(CircuitError::QubitCount(n_qubits));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        check_targets(gate.targets(), self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn add(&mut self, kind: GateKind, targets: &[usize]) -> Result<(), CircuitError> {
        self.push(Gate::new(kind, targets)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The first `m` gates (all of them if `m` exceeds the length).
    pub fn truncated(&self, m: usize) -> Self {
        Self {
            n_qubits: self.n_qubits,
            gates: self.gates[..m.min(self.gates.len())].to_vec(),
        }
    }

    pub fn append(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        if other.n_qubits != self.n_qubits {
            return Err(CircuitError::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Product of all gates, last gate leftmost.
    pub fn unitary(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(1 << self.n_qubits);
        for g in &self.gates {
            let layout = TargetLayout::new(g.targets(), self.n_qubits);
            u = apply_left_with(g.matrix(), &layout, &u);
        }
        u
    }
}

/// One-qubit circuit of `n_gates` identity gates.
pub fn identity_chain(n_gates: usize) -> Result<Circuit, CircuitError> {
    if n_gates == 0 {
        return Err(CircuitError::ZeroCount);
    }
    let gate = Gate::new(GateKind::I, &[0])?;
    Ok(Circuit {
        n_qubits: 1,
        gates: vec![gate; n_gates],
    })
}

/// QFT as H and controlled phases followed by the reversing swaps;
/// `n + n(n−1)/2 + ⌊n/2⌋` gates. With qubit 0 as the most significant bit the
/// unitary is the DFT matrix `F_jk = ω^{jk}/√N`.
pub fn qft_circuit(n: usize) -> Result<Circuit, CircuitError> {
    let mut c = Circuit::new(n)?;
    for j in 0..n {
        c.add(GateKind::H, &[j])?;
        for k in j + 1..n {
            let phi = PI / (1u64 << (k - j)) as f64;
            c.add(GateKind::Cp(phi), &[k, j])?;
        }
    }
    for j in 0..n / 2 {
        c.add(GateKind::Swap, &[j, n - 1 - j])?;
    }
    Ok(c)
}

/// `c` concatenated with itself `times` times.
pub fn repeat_circuit(c: &Circuit, times: usize) -> Result<Circuit, CircuitError> {
    if times == 0 {
        return Err(CircuitError::ZeroCount);
    }
    let mut gates = Vec::with_capacity(c.gates.len() * times);
    for _ in 0..times {
        gates.extend_from_slice(&c.gates);
    }
    Ok(Circuit {
        n_qubits: c.n_qubits,
        gates,
    })
}

/// Gate selector of a noise rule.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRule {
    /// Case-insensitive gate base name (`cp` matches every phase), or `*`
    /// for any gate whose arity equals the error's.
    pub gate: String,
    /// If set, the gate's targets must equal this list, in order.
    pub qubits: Option<Vec<usize>>,
    pub error: GateError,
}

impl NoiseRule {
    pub fn new(gate: &str, qubits: Option<Vec<usize>>, error: GateError) -> Self {
        Self {
            gate: String::from(gate),
            qubits,
            error,
        }
    }

    fn is_wildcard(&self) -> bool {
        self.gate.trim() == "*"
    }

    fn name_matches(&self, gate: &Gate) -> bool {
        if self.is_wildcard() {
            return self.error.arity().map_or(true, |a| a == gate.arity());
        }
        let wanted = self.gate.trim().to_ascii_lowercase();
        let base = gate.kind().base_name();
        wanted == base || (wanted == "cx" && base == "cnot") || (wanted == "id" && base == "i")
    }

    pub fn matches(&self, gate: &Gate) -> bool {
        self.name_matches(gate) && self.qubits.as_deref().map_or(true, |q| q == gate.targets())
    }
}

/// Ordered rules; the first matching rule supplies a gate's error.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseModel {
    rules: Vec<NoiseRule>,
}

impl NoiseModel {
    pub fn new(rules: Vec<NoiseRule>) -> Result<Self, CircuitError> {
        for (i, rule) in rules.iter().enumerate() {
            if let (Some(q), Some(a)) = (&rule.qubits, rule.error.arity()) {
                if q.len() != a {
                    return Err(CircuitError::RuleQubits {
                        rule: i,
                        qubits: q.len(),
                        arity: a,
                    });
                }
            }
        }
        Ok(Self { rules })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rules(&self) -> &[NoiseRule] {
        &self.rules
    }

    /// Index of the first rule matching `gate`.
    pub fn matching_rule(&self, gate: &Gate) -> Option<usize> {
        self.rules.iter().position(|r| r.matches(gate))
    }
}

/// A circuit with the error (if any) attached to each gate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyCircuit {
    circuit: Circuit,
    attached: Vec<Option<GateError>>,
}

impl NoisyCircuit {
    pub fn noiseless(circuit: Circuit) -> Self {
        let attached = vec![None; circuit.len()];
        Self { circuit, attached }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn attached(&self) -> &[Option<GateError>] {
        &self.attached
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    pub fn len(&self) -> usize {
        self.circuit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuit.is_empty()
    }

    /// `(gate, error)` pairs in circuit order.
    pub fn steps(&self) -> impl Iterator<Item = (&Gate, Option<&GateError>)> {
        self.circuit.gates.iter().zip(self.attached.iter().map(Option::as_ref))
    }

    /// The first `m` gates with their errors.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.len());
        Self {
            circuit: self.circuit.truncated(m),
            attached: self.attached[..m].to_vec(),
        }
    }
}

/// Attaches the first matching rule's error to every gate.
pub fn attach_noise(c: &Circuit, nm: &NoiseModel) -> Result<NoisyCircuit, CircuitError> {
    let mut attached = Vec::with_capacity(c.len());
    for (index, gate) in c.gates.iter().enumerate() {
        let slot = match nm.matching_rule(gate) {
            None => None,
            Some(rule) => {
                let error = &nm.rules[rule].error;
                if let Some(a) = error.arity() {
                    if a != gate.arity() {
                        return Err(CircuitError::NoiseArity {
                            index,
                            gate: gate.name(),
                            rule,
                            gate_arity: gate.arity(),
                            error_arity: a,
                        });
                    }
                }
                Some(error.clone())
            }
        };
        attached.push(slot);
    }
    Ok(NoisyCircuit {
        circuit: c.clone(),
        attached,
    })
}
