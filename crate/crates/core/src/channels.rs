//! Error models: general Kraus channels, the structured single- and
//! double-qubit Kraus families, probabilistic errors and thermal relaxation,
//! together with composition and probabilistic-to-Kraus conversion.
//!
//! A structured single-qubit channel has the four Kraus operators
//!
//! ```text
//! V1 = diag(a1, b1)   V2 = diag(a2, b2)   V3 = [[0, 0], [a3, 0]]   V4 = [[0, b3], [0, 0]]
//! ```
//!
//! with `a1² + a2² + a3² = 1` and `b1² + b2² + b3² = 1`. Its action on a
//! single-qubit state is
//!
//! ```text
//! K(ρ) = [[A ρ00 + B, C ρ01], [C ρ10, 1 − A ρ00 − B]]
//! A = 1 − a3² − b3²,  B = b3²,  C = a1 b1 + a2 b2
//! ```
//!
//! so only `s = a1² + a2²`, `t = b1² + b2²` and `C` matter; any parameters on
//! the same `(s, t, C)` triple give the same channel.
//!
//! Probabilities follow the "error happens with probability p" convention:
//! a term `(kind, p)` applies its effect with probability `p` and leaves the
//! state alone otherwise.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::linalg::{
    check_targets, conjugate_with, kraus_sum_local, replace_marginal, tensor_product, ComplexMatrix,
    DensityMatrix, LinalgError, TargetLayout, C64,
};

/// Tolerance for `Σ V†V = I`, the structured-parameter constraints and
/// unitarity of custom error unitaries.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Tolerance for probability sums and solver hypotheses.
pub const PROBABILITY_TOL: f64 = 1e-12;

const ZERO: C64 = Complex::new(0.0, 0.0);
const ONE: C64 = Complex::new(1.0, 0.0);
const I: C64 = Complex::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("arity must be 1 or 2, got {0}")]
    BadArity(usize),
    #[error("channel acts on {expected} qubit(s) but {got} target(s) were given")]
    ArityMismatch { expected: usize, got: usize },
    #[error("Kraus operator {index} is {rows}x{cols}, expected {dim}x{dim}")]
    MatrixSize {
        index: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("a Kraus channel needs at least one operator")]
    Empty,
    #[error("Kraus operators violate sum V†V = I by {0:.3e}")]
    NotNormalized(f64),
    #[error("{name} = {value} is not a valid probability")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("error probabilities sum to {0}, more than 1")]
    ProbabilitySum(f64),
    #[error("custom error matrix deviates from unitary by {0:.3e}")]
    NotUnitary(f64),
    #[error("{kind} errors are not supported on {arity}-qubit targets")]
    UnsupportedForArity { kind: &'static str, arity: usize },
    #[error("non-finite structured parameter")]
    NonFinite,
    #[error("structured parameters violate {which} by {deviation:.3e}")]
    Constraint { which: &'static str, deviation: f64 },
    #[error("no solution: need 0 <= s, t <= 1 and s*t >= r^2 (s = {s}, t = {t}, r = {r})")]
    SolverHypothesis { s: f64, t: f64, r: f64 },
    #[error(
        "composition requires a3^2 + a3'^2 <= 1 and b3^2 + b3'^2 <= 1 (got {a_sum:.6}, {b_sum:.6})"
    )]
    CompositionAssumption { a_sum: f64, b_sum: f64 },
    #[error("conversion to Kraus form requires p_X = p_Y (got p_X = {px}, p_Y = {py})")]
    PauliAsymmetry { px: f64, py: f64 },
    #[error("custom unitary errors have no structured Kraus form")]
    UnsupportedKind,
    #[error("conversion to structured Kraus form needs a single-qubit error")]
    NotSingleQubit,
    #[error("invalid thermal relaxation parameters: {0}")]
    InvalidThermal(&'static str),
    #[error("composed error mixes arities {0} and {1}")]
    MixedArity(usize, usize),
}

fn check_probability(name: &'static str, p: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ChannelError::InvalidProbability { name, value: p })
    }
}

fn check_arity(arity: usize) -> Result<(), ChannelError> {
    if matches!(arity, 1 | 2) {
        Ok(())
    } else {
        Err(ChannelError::BadArity(arity))
    }
}

fn check_target_count(arity: usize, targets: &[usize]) -> Result<(), ChannelError> {
    if targets.len() == arity {
        Ok(())
    } else {
        Err(ChannelError::ArityMismatch {
            expected: arity,
            got: targets.len(),
        })
    }
}

fn real2(data: [f64; 4]) -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &data).expect("2x2 shape")
}

pub fn pauli_x() -> ComplexMatrix {
    real2([0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).expect("2x2 shape")
}

pub fn pauli_z() -> ComplexMatrix {
    real2([1.0, 0.0, 0.0, -1.0])
}

/// General channel `ρ ↦ Σ V ρ V†` on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    matrices: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates operator sizes and `‖Σ V†V − I‖_F ≤ 1e-10`.
    pub fn new(arity: usize, matrices: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        check_arity(arity)?;
        if matrices.is_empty() {
            return Err(ChannelError::Empty);
        }
        let dim = 1 << arity;
        for (index, v) in matrices.iter().enumerate() {
            if v.rows() != dim || v.cols() != dim {
                return Err(ChannelError::MatrixSize {
                    index,
                    rows: v.rows(),
                    cols: v.cols(),
                    dim,
                });
            }
        }
        let channel = Self { arity, matrices };
        let dev = channel.normalization_error();
        if !(dev <= NORMALIZATION_TOL) {
            return Err(ChannelError::NotNormalized(dev));
        }
        Ok(channel)
    }

    pub fn identity(arity: usize) -> Result<Self, ChannelError> {
        check_arity(arity)?;
        Ok(Self {
            arity,
            matrices: vec![ComplexMatrix::identity(1 << arity)],
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    /// `‖Σ V†V − I‖_F`.
    pub fn normalization_error(&self) -> f64 {
        let dim = 1 << self.arity;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for v in &self.matrices {
            acc.add_scaled(&(&v.dagger() * v), 1.0);
        }
        acc.frobenius_distance(&ComplexMatrix::identity(dim))
    }

    /// `Σ_j V_j ρ V_j†` with each `V_j` embedded on `targets`.
    pub fn apply(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix, ChannelError> {
        check_target_count(self.arity, targets)?;
        let n = rho.n_qubits();
        let out = kraus_sum_local(&self.matrices, targets, n, rho.matrix())?;
        Ok(DensityMatrix::from_matrix_unchecked(n, out))
    }
}

/// The six-parameter single-qubit Kraus family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredSqKraus {
    a1: f64,
    a2: f64,
    a3: f64,
    b1: f64,
    b2: f64,
    b3: f64,
}

impl StructuredSqKraus {
    /// Validates `a1²+a2²+a3² = 1` and `b1²+b2²+b3² = 1` within 1e-10.
    pub fn new(a1: f64, a2: f64, a3: f64, b1: f64, b2: f64, b3: f64) -> Result<Self, ChannelError> {
        let k = Self { a1, a2, a3, b1, b2, b3 };
        if k.params().iter().any(|x| !x.is_finite()) {
            return Err(ChannelError::NonFinite);
        }
        let da = (a1 * a1 + a2 * a2 + a3 * a3 - 1.0).abs();
        if da > NORMALIZATION_TOL {
            return Err(ChannelError::Constraint {
                which: "a1^2 + a2^2 + a3^2 = 1",
                deviation: da,
            });
        }
        let db = (b1 * b1 + b2 * b2 + b3 * b3 - 1.0).abs();
        if db > NORMALIZATION_TOL {
            return Err(ChannelError::Constraint {
                which: "b1^2 + b2^2 + b3^2 = 1",
                deviation: db,
            });
        }
        Ok(k)
    }

    /// Fills in `a1 = √(1 − a2² − a3²)` and `b1 = √(1 − b2² − b3²)`.
    pub fn from_off_diagonal(a2: f64, a3: f64, b2: f64, b3: f64) -> Result<Self, ChannelError> {
        let ra = 1.0 - a2 * a2 - a3 * a3;
        let rb = 1.0 - b2 * b2 - b3 * b3;
        if !(ra >= 0.0) {
            return Err(ChannelError::Constraint {
                which: "a2^2 + a3^2 <= 1",
                deviation: -ra,
            });
        }
        if !(rb >= 0.0) {
            return Err(ChannelError::Constraint {
                which: "b2^2 + b3^2 <= 1",
                deviation: -rb,
            });
        }
        Self::new(libm::sqrt(ra), a2, a3, libm::sqrt(rb), b2, b3)
    }

    pub fn identity() -> Self {
        Self {
            a1: 1.0,
            a2: 0.0,
            a3: 0.0,
            b1: 1.0,
            b2: 0.0,
            b3: 0.0,
        }
    }

    /// Amplitude damping with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self, ChannelError> {
        check_probability("gamma", gamma)?;
        Self::new(1.0, 0.0, 0.0, libm::sqrt(1.0 - gamma), 0.0, libm::sqrt(gamma))
    }

    /// Phase damping with parameter `lambda`; off-diagonals scale by `√(1 − λ)`.
    pub fn phase_damping(lambda: f64) -> Result<Self, ChannelError> {
        check_probability("lambda", lambda)?;
        Self::new(1.0, 0.0, 0.0, libm::sqrt(1.0 - lambda), libm::sqrt(lambda), 0.0)
    }

    /// `(a1, a2, a3, b1, b2, b3)`.
    pub fn params(&self) -> [f64; 6] {
        [self.a1, self.a2, self.a3, self.b1, self.b2, self.b3]
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn b3(&self) -> f64 {
        self.b3
    }

    /// `A = 1 − a3² − b3²`.
    pub fn big_a(&self) -> f64 {
        1.0 - self.a3 * self.a3 - self.b3 * self.b3
    }

    /// `B = b3²`.
    pub fn big_b(&self) -> f64 {
        self.b3 * self.b3
    }

    /// `C = a1 b1 + a2 b2`.
    pub fn big_c(&self) -> f64 {
        self.a1 * self.b1 + self.a2 * self.b2
    }

    /// `s = a1² + a2²`, the weight kept on `|0⟩⟨0|`.
    pub fn s(&self) -> f64 {
        self.a1 * self.a1 + self.a2 * self.a2
    }

    /// `t = b1² + b2²`, the weight kept on `|1⟩⟨1|`.
    pub fn t(&self) -> f64 {
        self.b1 * self.b1 + self.b2 * self.b2
    }

    /// Whether `det [[a1, a2], [b1, b2]] ≠ 0`. Recorded, not enforced.
    pub fn det_nonzero(&self) -> bool {
        (self.a1 * self.b2 - self.a2 * self.b1).abs() > PROBABILITY_TOL
    }

    /// The four 2×2 Kraus operators.
    pub fn matrices(&self) -> [ComplexMatrix; 4] {
        [
            real2([self.a1, 0.0, 0.0, self.b1]),
            real2([self.a2, 0.0, 0.0, self.b2]),
            real2([0.0, 0.0, self.a3, 0.0]),
            real2([0.0, self.b3, 0.0, 0.0]),
        ]
    }

    pub fn expand(&self) -> KrausChannel {
        KrausChannel {
            arity: 1,
            matrices: self.matrices().into(),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix, target: usize) -> Result<DensityMatrix, ChannelError> {
        let n = rho.n_qubits();
        let out = self.apply_matrix(rho.matrix(), target, n)?;
        Ok(DensityMatrix::from_matrix_unchecked(n, out))
    }

    /// Block-form application on target `target` of an `n`-qubit operator:
    /// `[[R00, R01], [R10, R11]] ↦ [[s R00 + b3² R11, C R01], [C R10, a3² R00 + t R11]]`.
    pub(crate) fn apply_matrix(&self, m: &ComplexMatrix, target: usize, n: usize) -> Result<ComplexMatrix, ChannelError> {
        check_targets(&[target], n)?;
        let dim = 1usize << n;
        if m.rows() != dim || m.cols() != dim {
            return Err(LinalgError::DimensionMismatch {
                left: (dim, dim),
                right: (m.rows(), m.cols()),
            }
            .into());
        }
        let (s, t, c) = (self.s(), self.t(), self.big_c());
        let (a3sq, b3sq) = (self.a3 * self.a3, self.b3 * self.b3);
        let bit = 1usize << (n - 1 - target);
        let src = m.as_slice();
        let mut out = vec![ZERO; dim * dim];
        for i in (0..dim).filter(|i| i & bit == 0) {
            for j in (0..dim).filter(|j| j & bit == 0) {
                let r00 = src[i * dim + j];
                let r01 = src[i * dim + j + bit];
                let r10 = src[(i + bit) * dim + j];
                let r11 = src[(i + bit) * dim + j + bit];
                out[i * dim + j] = r00 * s + r11 * b3sq;
                out[i * dim + j + bit] = r01 * c;
                out[(i + bit) * dim + j] = r10 * c;
                out[(i + bit) * dim + j + bit] = r00 * a3sq + r11 * t;
            }
        }
        Ok(ComplexMatrix::new(dim, dim, out)?)
    }
}

/// Tensor product of two structured single-qubit channels, `first` acting on
/// the first target and `second` on the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredDqKraus {
    pub first: StructuredSqKraus,
    pub second: StructuredSqKraus,
}

impl StructuredDqKraus {
    pub fn new(first: StructuredSqKraus, second: StructuredSqKraus) -> Self {
        Self { first, second }
    }

    pub fn identity() -> Self {
        Self::new(StructuredSqKraus::identity(), StructuredSqKraus::identity())
    }

    /// The 16 operators `V_{1i} ⊗ V_{2j}`, `i` outer.
    pub fn expand(&self) -> KrausChannel {
        let mut matrices = Vec::with_capacity(16);
        for v1 in self.first.matrices() {
            for v2 in &self.second.matrices() {
                matrices.push(tensor_product(&v1, v2).expect("4x4 fits"));
            }
        }
        KrausChannel { arity: 2, matrices }
    }

    pub fn apply(&self, rho: &DensityMatrix, targets: [usize; 2]) -> Result<DensityMatrix, ChannelError> {
        let n = rho.n_qubits();
        let out = self.apply_matrix(rho.matrix(), targets, n)?;
        Ok(DensityMatrix::from_matrix_unchecked(n, out))
    }

    pub(crate) fn apply_matrix(&self, m: &ComplexMatrix, targets: [usize; 2], n: usize) -> Result<ComplexMatrix, ChannelError> {
        check_targets(&targets, n)?;
        let mid = self.first.apply_matrix(m, targets[0], n)?;
        self.second.apply_matrix(&mid, targets[1], n)
    }
}

/// Error events of a probabilistic error.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorKind {
    X,
    Y,
    Z,
    /// Replace the targets with `|0…0⟩⟨0…0|`.
    Reset0,
    /// Replace the targets with `|1…1⟩⟨1…1|`.
    Reset1,
    /// Replace the targets with the maximally mixed state.
    Depolarizing,
    /// Conjugate the targets by a unitary of matching size.
    CustomUnitary(ComplexMatrix),
}

impl ErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorKind::X => "X",
            ErrorKind::Y => "Y",
            ErrorKind::Z => "Z",
            ErrorKind::Reset0 => "Reset0",
            ErrorKind::Reset1 => "Reset1",
            ErrorKind::Depolarizing => "Depolarizing",
            ErrorKind::CustomUnitary(_) => "CustomUnitary",
        }
    }

    fn validate(&self, arity: usize) -> Result<(), ChannelError> {
        match self {
            ErrorKind::X | ErrorKind::Y | ErrorKind::Z if arity != 1 => Err(ChannelError::UnsupportedForArity {
                kind: self.name(),
                arity,
            }),
            ErrorKind::CustomUnitary(u) => {
                let dim = 1 << arity;
                if u.rows() != dim || u.cols() != dim {
                    return Err(ChannelError::MatrixSize {
                        index: 0,
                        rows: u.rows(),
                        cols: u.cols(),
                        dim,
                    });
                }
                let dev = u.unitarity_error();
                if dev > NORMALIZATION_TOL {
                    return Err(ChannelError::NotUnitary(dev));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Applies the effect to `m` on `targets` of an `n`-qubit register.
    pub(crate) fn apply_matrix(&self, m: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix, LinalgError> {
        let arity = targets.len();
        let dim = 1usize << arity;
        let conj = |u: &ComplexMatrix| -> Result<ComplexMatrix, LinalgError> {
            check_targets(targets, n)?;
            Ok(conjugate_with(u, &TargetLayout::new(targets, n), m))
        };
        match self {
            ErrorKind::X => conj(&pauli_x()),
            ErrorKind::Y => conj(&pauli_y()),
            ErrorKind::Z => conj(&pauli_z()),
            ErrorKind::CustomUnitary(u) => conj(u),
            ErrorKind::Reset0 => {
                let mut sigma = ComplexMatrix::zeros(dim, dim);
                sigma[(0, 0)] = ONE;
                replace_marginal(m, targets, n, &sigma)
            }
            ErrorKind::Reset1 => {
                let mut sigma = ComplexMatrix::zeros(dim, dim);
                sigma[(dim - 1, dim - 1)] = ONE;
                replace_marginal(m, targets, n, &sigma)
            }
            ErrorKind::Depolarizing => {
                let sigma = ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64);
                replace_marginal(m, targets, n, &sigma)
            }
        }
    }
}

/// Mixture of discrete error events; with probability `1 − Σp` nothing happens.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticError {
    arity: usize,
    terms: Vec<(ErrorKind, f64)>,
}

impl ProbabilisticError {
    pub fn new(arity: usize, terms: Vec<(ErrorKind, f64)>) -> Result<Self, ChannelError> {
        check_arity(arity)?;
        let mut total = 0.0;
        for (kind, p) in &terms {
            check_probability(kind.name(), *p)?;
            kind.validate(arity)?;
            total += p;
        }
        if total > 1.0 + PROBABILITY_TOL {
            return Err(ChannelError::ProbabilitySum(total));
        }
        Ok(Self { arity, terms })
    }

    /// Single-qubit error with one event.
    pub fn single(kind: ErrorKind, p: f64) -> Result<Self, ChannelError> {
        Self::new(1, vec![(kind, p)])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[(ErrorKind, f64)] {
        &self.terms
    }

    /// `Σ p_i`, the probability that some error occurs.
    pub fn total_probability(&self) -> f64 {
        self.terms.iter().map(|(_, p)| p).sum()
    }

    /// `1 − Σ p_i`, clamped at 0.
    pub fn no_error_probability(&self) -> f64 {
        (1.0 - self.total_probability()).max(0.0)
    }

    /// Summed probability of every term of the given kind (custom unitaries
    /// compare by matrix).
    pub fn probability_of(&self, kind: &ErrorKind) -> f64 {
        self.terms.iter().filter(|(k, _)| k == kind).map(|(_, p)| p).sum()
    }

    /// Mixture semantics: `(1 − Σp)ρ + Σ p_i E_i(ρ)`.
    pub fn apply_exact(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix, ChannelError> {
        let n = rho.n_qubits();
        let out = self.apply_exact_matrix(rho.matrix(), targets, n)?;
        Ok(DensityMatrix::from_matrix_unchecked(n, out))
    }

    pub(crate) fn apply_exact_matrix(&self, m: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix, ChannelError> {
        check_target_count(self.arity, targets)?;
        check_targets(targets, n)?;
        let mut acc = m.scale_real(self.no_error_probability());
        for (kind, p) in &self.terms {
            if *p == 0.0 {
                continue;
            }
            acc.add_scaled(&kind.apply_matrix(m, targets, n)?, *p);
        }
        Ok(acc)
    }

    /// Draws which event happens: `None` for no error, else the term index.
    /// Always consumes exactly one uniform draw.
    pub fn sample_event<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (i, (_, p)) in self.terms.iter().enumerate() {
            cum += p;
            if u < cum {
                return Some(i);
            }
        }
        None
    }

    /// Trajectory semantics: applies one randomly drawn event.
    pub fn sample<R: Rng + ?Sized>(&self, rho: &DensityMatrix, targets: &[usize], rng: &mut R) -> Result<DensityMatrix, ChannelError> {
        let n = rho.n_qubits();
        let out = self.sample_matrix(rho.matrix(), targets, n, rng)?;
        Ok(DensityMatrix::from_matrix_unchecked(n, out))
    }

    pub(crate) fn sample_matrix<R: Rng + ?Sized>(
        &self,
        m: &ComplexMatrix,
        targets: &[usize],
        n: usize,
        rng: &mut R,
    ) -> Result<ComplexMatrix, ChannelError> {
        check_target_count(self.arity, targets)?;
        check_targets(targets, n)?;
        match self.sample_event(rng) {
            None => Ok(m.clone()),
            Some(i) => Ok(self.terms[i].0.apply_matrix(m, targets, n)?),
        }
    }
}

/// Thermal relaxation over a gate of duration `gate_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRelaxation {
    t1: f64,
    t2: f64,
    gate_time: f64,
    p1: f64,
}

impl ThermalRelaxation {
    pub fn new(t1: f64, t2: f64, gate_time: f64, p1: f64) -> Result<Self, ChannelError> {
        if !(t1 > 0.0 && t1.is_finite()) {
            return Err(ChannelError::InvalidThermal("T1 must be positive"));
        }
        if !(t2 > 0.0 && t2.is_finite()) {
            return Err(ChannelError::InvalidThermal("T2 must be positive"));
        }
        if !(gate_time >= 0.0 && gate_time.is_finite()) {
            return Err(ChannelError::InvalidThermal("gate time must be non-negative"));
        }
        if !(0.0..=1.0).contains(&p1) {
            return Err(ChannelError::InvalidThermal("p1 must lie in [0, 1]"));
        }
        Ok(Self { t1, t2, gate_time, p1 })
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn gate_time(&self) -> f64 {
        self.gate_time
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    /// `1 − e^{−t/T1}`.
    pub fn p_reset(&self) -> f64 {
        -libm::expm1(-self.gate_time / self.t1)
    }

    /// Off-diagonal decay factor `e^{−t/T2}`.
    pub fn coherence(&self) -> f64 {
        libm::exp(-self.gate_time / self.t2)
    }

    /// Branch predicate: the Kraus representation is used when `T1 < T2`,
    /// the probabilistic one otherwise. This follows the published
    /// convention, which is the reverse of the usual physical one.
    pub fn kraus_branch(&self) -> bool {
        self.t1 < self.t2
    }

    /// Converts to a gate error following [`Self::kraus_branch`].
    ///
    /// Kraus branch: the structured channel with `a3² = p1·p_reset`,
    /// `b3² = p0·p_reset` and off-diagonal factor `e^{−t/T2}`. It exists only
    /// for `T2 ≤ 2 T1`; beyond that no CPTP map has these populations and
    /// coherence.
    ///
    /// Probabilistic branch: resets with `p_R0 = p0·p_reset`,
    /// `p_R1 = p1·p_reset` and a phase flip with
    /// `p_Z = (1 − p_reset)/2 · (1 − e^{−t(1/T2 − 1/T1)})`.
    pub fn to_gate_error(&self) -> Result<GateError, ChannelError> {
        let pr = self.p_reset();
        let (p0, p1) = (self.p0(), self.p1);
        if self.kraus_branch() {
            let a3sq = p1 * pr;
            let b3sq = p0 * pr;
            let s = 1.0 - a3sq;
            let t = 1.0 - b3sq;
            let r = self.coherence();
            let (a1, a2, b1, b2) = solve_param_system(s, t, r).map_err(|_| {
                ChannelError::InvalidThermal("Kraus form needs T2 <= 2 T1")
            })?;
            let k = StructuredSqKraus::new(a1, a2, libm::sqrt(a3sq), b1, b2, libm::sqrt(b3sq))?;
            Ok(GateError::StructuredSq(k))
        } else {
            let rate = 1.0 / self.t2 - 1.0 / self.t1;
            let pz = 0.5 * (1.0 - pr) * -libm::expm1(-self.gate_time * rate);
            let terms = vec![
                (ErrorKind::Reset0, p0 * pr),
                (ErrorKind::Reset1, p1 * pr),
                (ErrorKind::Z, pz),
            ];
            Ok(GateError::Probabilistic(ProbabilisticError::new(1, terms)?))
        }
    }
}

/// Solves `a1²+a2² = s`, `b1²+b2² = t`, `a1b1+a2b2 = r` for `(a1, a2, b1, b2)`.
///
/// The solution set is a circle; the representative with `b = (√t, 0)` and
/// `a = √s (cos θ, sin θ)`, `θ = arccos(r/√(st))`, is returned.
pub fn solve_param_system(s: f64, t: f64, r: f64) -> Result<(f64, f64, f64, f64), ChannelError> {
    let tol = PROBABILITY_TOL;
    let in_range = |x: f64| x >= -tol && x <= 1.0 + tol;
    if !(in_range(s) && in_range(t) && r.is_finite() && s * t >= r * r - tol) {
        return Err(ChannelError::SolverHypothesis { s, t, r });
    }
    let s = s.clamp(0.0, 1.0);
    let t = t.clamp(0.0, 1.0);
    let (rs, rt) = (libm::sqrt(s), libm::sqrt(t));
    if rt == 0.0 {
        return Ok((rs, 0.0, 0.0, 0.0));
    }
    if rs == 0.0 {
        return Ok((0.0, 0.0, rt, 0.0));
    }
    let cos = (r / (rs * rt)).clamp(-1.0, 1.0);
    let theta = libm::acos(cos);
    Ok((rs * cos, rs * libm::sin(theta), rt, 0.0))
}

/// The structured channel equal to `k2 ∘ k1` (`k1` applied first).
pub fn compose_sq_kraus(k1: &StructuredSqKraus, k2: &StructuredSqKraus) -> Result<StructuredSqKraus, ChannelError> {
    let a_sum = k1.a3 * k1.a3 + k2.a3 * k2.a3;
    let b_sum = k1.b3 * k1.b3 + k2.b3 * k2.b3;
    if a_sum > 1.0 + NORMALIZATION_TOL || b_sum > 1.0 + NORMALIZATION_TOL {
        return Err(ChannelError::CompositionAssumption { a_sum, b_sum });
    }
    let (a1, b1, c1) = (k1.big_a(), k1.big_b(), k1.big_c());
    let (a2, b2, c2) = (k2.big_a(), k2.big_b(), k2.big_c());
    let s = a1 * a2 + b1 * a2 + b2;
    let t = 1.0 - b1 * a2 - b2;
    let (x1, x2, y1, y2) = solve_param_system(s, t, c1 * c2)?;
    let a3 = libm::sqrt((1.0 - x1 * x1 - x2 * x2).max(0.0));
    let b3 = libm::sqrt((1.0 - y1 * y1 - y2 * y2).max(0.0));
    StructuredSqKraus::new(x1, x2, a3, y1, y2, b3)
}

/// Factorwise composition of double-qubit channels, `k1` applied first.
pub fn compose_dq_kraus(k1: &StructuredDqKraus, k2: &StructuredDqKraus) -> Result<StructuredDqKraus, ChannelError> {
    Ok(StructuredDqKraus::new(
        compose_sq_kraus(&k1.first, &k2.first)?,
        compose_sq_kraus(&k1.second, &k2.second)?,
    ))
}

/// Structured Kraus form with the same action as a single-qubit
/// probabilistic error. Requires `p_X = p_Y`; custom unitaries are rejected.
pub fn prob_to_kraus(p: &ProbabilisticError) -> Result<StructuredSqKraus, ChannelError> {
    if p.arity != 1 {
        return Err(ChannelError::NotSingleQubit);
    }
    if p.terms.iter().any(|(k, _)| matches!(k, ErrorKind::CustomUnitary(_))) {
        return Err(ChannelError::UnsupportedKind);
    }
    let px = p.probability_of(&ErrorKind::X);
    let py = p.probability_of(&ErrorKind::Y);
    if (px - py).abs() > PROBABILITY_TOL {
        return Err(ChannelError::PauliAsymmetry { px, py });
    }
    let pz = p.probability_of(&ErrorKind::Z);
    let pr0 = p.probability_of(&ErrorKind::Reset0);
    let pr1 = p.probability_of(&ErrorKind::Reset1);
    let pd = p.probability_of(&ErrorKind::Depolarizing);
    let pi = p.no_error_probability();
    let s = pi + pz + pr0 + 0.5 * pd;
    let t = pi + pz + pr1 + 0.5 * pd;
    let (a1, a2, b1, b2) = solve_param_system(s, t, pi - pz)?;
    let a3 = libm::sqrt((1.0 - a1 * a1 - a2 * a2).max(0.0));
    let b3 = libm::sqrt((1.0 - b1 * b1 - b2 * b2).max(0.0));
    StructuredSqKraus::new(a1, a2, a3, b1, b2, b3)
}

/// Kraus form of a single-qubit error that occurs with probability `p`.
pub fn standard_kraus(kind: &ErrorKind, p: f64) -> Result<KrausChannel, ChannelError> {
    check_probability(kind.name(), p)?;
    let keep = ComplexMatrix::identity(2).scale_real(libm::sqrt(1.0 - p));
    let sp = libm::sqrt(p);
    let matrices = match kind {
        ErrorKind::X => vec![keep, pauli_x().scale_real(sp)],
        ErrorKind::Y => vec![keep, pauli_y().scale_real(sp)],
        ErrorKind::Z => vec![keep, pauli_z().scale_real(sp)],
        ErrorKind::Reset0 => vec![keep, real2([sp, 0.0, 0.0, 0.0]), real2([0.0, sp, 0.0, 0.0])],
        ErrorKind::Reset1 => vec![keep, real2([0.0, 0.0, sp, 0.0]), real2([0.0, 0.0, 0.0, sp])],
        ErrorKind::Depolarizing => {
            let w = 0.5 * sp;
            vec![
                ComplexMatrix::identity(2).scale_real(libm::sqrt(1.0 - 0.75 * p)),
                pauli_x().scale_real(w),
                pauli_y().scale_real(w),
                pauli_z().scale_real(w),
            ]
        }
        ErrorKind::CustomUnitary(_) => return Err(ChannelError::UnsupportedKind),
    };
    KrausChannel::new(1, matrices)
}

/// Error attached to a gate.
#[derive(Debug, Clone, PartialEq)]
pub enum GateError {
    Kraus(KrausChannel),
    StructuredSq(StructuredSqKraus),
    StructuredDq(StructuredDqKraus),
    Probabilistic(ProbabilisticError),
    /// Components applied in list order, first element first.
    Composed(Vec<GateError>),
}

/// How probabilistic components are applied.
pub enum ApplyMode<'a> {
    /// Mixture (expectation) semantics.
    Exact,
    /// One sampled event per probabilistic component. Kraus components are
    /// still applied as channels.
    Sampled(&'a mut dyn RngCore),
}

impl GateError {
    /// Builds a composed error, checking that all components share an arity.
    pub fn composed(parts: Vec<GateError>) -> Result<Self, ChannelError> {
        let mut seen: Option<usize> = None;
        for part in &parts {
            if let Some(a) = part.arity() {
                match seen {
                    Some(b) if a != b => return Err(ChannelError::MixedArity(b, a)),
                    _ => seen = Some(a),
                }
            }
        }
        Ok(GateError::Composed(parts))
    }

    /// Number of qubits acted on; `None` for an empty composition, which fits
    /// any gate.
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateError::Kraus(k) => Some(k.arity),
            GateError::StructuredSq(_) => Some(1),
            GateError::StructuredDq(_) => Some(2),
            GateError::Probabilistic(p) => Some(p.arity),
            GateError::Composed(parts) => parts.iter().find_map(GateError::arity),
        }
    }

    /// True when some component is sampled in trajectory mode.
    pub fn has_probabilistic(&self) -> bool {
        match self {
            GateError::Probabilistic(_) => true,
            GateError::Composed(parts) => parts.iter().any(GateError::has_probabilistic),
            _ => false,
        }
    }

    /// Flattened components in application order.
    pub fn components(&self) -> Vec<&GateError> {
        match self {
            GateError::Composed(parts) => parts.iter().flat_map(GateError::components).collect(),
            other => vec![other],
        }
    }

    pub fn apply(&self, rho: &DensityMatrix, targets: &[usize], mode: ApplyMode<'_>) -> Result<DensityMatrix, ChannelError> {
        let n = rho.n_qubits();
        let out = self.apply_matrix(rho.matrix(), targets, n, mode)?;
        Ok(DensityMatrix::from_matrix_unchecked(n, out))
    }

    pub fn apply_exact(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix, ChannelError> {
        self.apply(rho, targets, ApplyMode::Exact)
    }

    pub(crate) fn apply_matrix(
        &self,
        m: &ComplexMatrix,
        targets: &[usize],
        n: usize,
        mut mode: ApplyMode<'_>,
    ) -> Result<ComplexMatrix, ChannelError> {
        if let Some(a) = self.arity() {
            check_target_count(a, targets)?;
        }
        match self {
            GateError::Kraus(k) => Ok(kraus_sum_local(&k.matrices, targets, n, m)?),
            GateError::StructuredSq(k) => k.apply_matrix(m, targets[0], n),
            GateError::StructuredDq(k) => k.apply_matrix(m, [targets[0], targets[1]], n),
            GateError::Probabilistic(p) => match mode {
                ApplyMode::Exact => p.apply_exact_matrix(m, targets, n),
                ApplyMode::Sampled(rng) => p.sample_matrix(m, targets, n, rng),
            },
            GateError::Composed(parts) => {
                let mut cur = m.clone();
                for part in parts {
                    let sub = match &mut mode {
                        ApplyMode::Exact => ApplyMode::Exact,
                        ApplyMode::Sampled(rng) => ApplyMode::Sampled(&mut **rng),
                    };
                    cur = part.apply_matrix(&cur, targets, n, sub)?;
                }
                Ok(cur)
            }
        }
    }

    /// Number of channel applications this error performs; used for
    /// numerical-hygiene bookkeeping.
    pub fn application_count(&self) -> usize {
        match self {
            GateError::Composed(parts) => parts.iter().map(GateError::application_count).sum(),
            _ => 1,
        }
    }
}

/// Random structured channel with `a3², b3² ∈ [0, max_leak]` and the
/// remaining weight split at a uniform angle. Returns parameters satisfying
/// the composition assumption whenever `max_leak ≤ 0.5`.
pub fn random_structured_sq<R: Rng + ?Sized>(max_leak: f64, rng: &mut R) -> StructuredSqKraus {
    let a3sq = max_leak * rng.random::<f64>();
    let b3sq = max_leak * rng.random::<f64>();
    let ta = core::f64::consts::FRAC_PI_2 * rng.random::<f64>();
    let tb = core::f64::consts::FRAC_PI_2 * rng.random::<f64>();
    let ra = libm::sqrt(1.0 - a3sq);
    let rb = libm::sqrt(1.0 - b3sq);
    StructuredSqKraus {
        a1: ra * libm::cos(ta),
        a2: ra * libm::sin(ta),
        a3: libm::sqrt(a3sq),
        b1: rb * libm::cos(tb),
        b2: rb * libm::sin(tb),
        b3: libm::sqrt(b3sq),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_complex_density;
    use crate::rng::derived_rng;

    fn state(data: [f64; 4]) -> DensityMatrix {
        DensityMatrix::new(real2(data)).unwrap()
    }

    fn fig2() -> StructuredSqKraus {
        StructuredSqKraus::from_off_diagonal(0.001, 0.08, 0.001, 0.008).unwrap()
    }

    #[test]
    fn phase_damping_fixes_diagonal_states() {
        let rho = state([0.7, 0.0, 0.0, 0.3]);
        let k = StructuredSqKraus::phase_damping(0.3).unwrap().expand();
        let out = k.apply(&rho, &[0]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_amplitude_damping_resets() {
        let k = StructuredSqKraus::amplitude_damping(1.0).unwrap().expand();
        let mut rng = derived_rng(0, 0);
        for _ in 0..20 {
            let rho = random_complex_density(2, &mut rng).unwrap();
            let out = k.apply(&rho, &[0]).unwrap();
            assert!(out.matrix().max_abs_diff(DensityMatrix::zero_state(1).unwrap().matrix()) < 1e-15);
        }
    }

    #[test]
    fn amplitude_damping_hand_example() {
        let rho = state([0.5, 0.5, 0.5, 0.5]);
        let out = StructuredSqKraus::amplitude_damping(0.2).unwrap().expand().apply(&rho, &[0]).unwrap();
        let want = real2([0.6, 0.5 * libm::sqrt(0.8), 0.5 * libm::sqrt(0.8), 0.4]);
        assert!(out.matrix().max_abs_diff(&want) < 1e-12);
        assert!((out.matrix()[(0, 1)].re - 0.4472).abs() < 1e-4);
    }

    #[test]
    fn block_form_matches_kraus_sum() {
        let mut rng = derived_rng(1, 0);
        for _ in 0..20 {
            let k = random_structured_sq(0.5, &mut rng);
            let rho = random_complex_density(8, &mut rng).unwrap();
            for target in 0..3 {
                let fast = k.apply(&rho, target).unwrap();
                let slow = k.expand().apply(&rho, &[target]).unwrap();
                assert!(fast.matrix().max_abs_diff(slow.matrix()) < 1e-14);
            }
        }
    }

    #[test]
    fn identity_structured_expands_to_identity() {
        let m = StructuredSqKraus::identity().matrices();
        assert_eq!(m[0], ComplexMatrix::identity(2));
        for v in &m[1..] {
            assert_eq!(v.frobenius_norm_sq(), 0.0);
        }
    }

    #[test]
    fn fig2_channel_is_normalized() {
        assert!(fig2().expand().normalization_error() < 1e-12);
        assert!(fig2().det_nonzero());
    }

    #[test]
    fn structured_constraint_is_enforced() {
        assert!(matches!(
            StructuredSqKraus::new(1.0, 0.1, 0.0, 1.0, 0.0, 0.0),
            Err(ChannelError::Constraint { .. })
        ));
        assert!(matches!(
            StructuredSqKraus::new(f64::NAN, 0.0, 0.0, 1.0, 0.0, 0.0),
            Err(ChannelError::NonFinite)
        ));
    }

    #[test]
    fn kraus_channel_rejects_unnormalized() {
        let v = ComplexMatrix::identity(2).scale_real(0.9);
        assert!(matches!(KrausChannel::new(1, vec![v]), Err(ChannelError::NotNormalized(_))));
        assert!(matches!(
            KrausChannel::new(1, vec![ComplexMatrix::identity(4)]),
            Err(ChannelError::MatrixSize { .. })
        ));
    }

    #[test]
    fn z_mixture_scales_off_diagonal() {
        let rho = state([0.5, 0.5, 0.5, 0.5]);
        let p = ProbabilisticError::single(ErrorKind::Z, 0.1).unwrap();
        let out = p.apply_exact(&rho, &[0]).unwrap();
        assert!(out.matrix().max_abs_diff(&real2([0.5, 0.4, 0.4, 0.5])) < 1e-15);
    }

    #[test]
    fn certain_reset1() {
        let p = ProbabilisticError::single(ErrorKind::Reset1, 1.0).unwrap();
        let rho = state([0.3, 0.2, 0.2, 0.7]);
        let out = p.apply_exact(&rho, &[0]).unwrap();
        assert!(out.matrix().max_abs_diff(DensityMatrix::basis_state(1, 1).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn certain_x_flips_in_sampled_mode() {
        let p = ProbabilisticError::single(ErrorKind::X, 1.0).unwrap();
        let mut rng = derived_rng(9, 0);
        let out = p.sample(&DensityMatrix::zero_state(1).unwrap(), &[0], &mut rng).unwrap();
        assert_eq!(out, DensityMatrix::basis_state(1, 1).unwrap());
    }

    #[test]
    fn probabilistic_validation() {
        assert!(matches!(
            ProbabilisticError::new(1, vec![(ErrorKind::X, 0.6), (ErrorKind::Z, 0.6)]),
            Err(ChannelError::ProbabilitySum(_))
        ));
        assert!(matches!(
            ProbabilisticError::single(ErrorKind::X, -0.1),
            Err(ChannelError::InvalidProbability { .. })
        ));
        assert!(matches!(
            ProbabilisticError::new(2, vec![(ErrorKind::X, 0.1)]),
            Err(ChannelError::UnsupportedForArity { .. })
        ));
        let bad = ErrorKind::CustomUnitary(real2([1.0, 0.0, 0.0, 0.5]));
        assert!(matches!(ProbabilisticError::single(bad, 0.1), Err(ChannelError::NotUnitary(_))));
    }

    #[test]
    fn solver_examples() {
        assert_eq!(solve_param_system(1.0, 1.0, 1.0).unwrap(), (1.0, 0.0, 1.0, 0.0));
        let (a1, a2, b1, b2) = solve_param_system(1.0, 1.0, 0.0).unwrap();
        assert!(a1.abs() < 1e-15 && (a2 - 1.0).abs() < 1e-15 && b1 == 1.0 && b2 == 0.0);
        let (a1, a2, b1, b2) = solve_param_system(0.5, 0.5, 0.25).unwrap();
        let theta = libm::atan2(a2, a1) - libm::atan2(b2, b1);
        assert!((theta - core::f64::consts::FRAC_PI_3).abs() < 1e-12);
        assert!((a1 * a1 + a2 * a2 - 0.5).abs() < 1e-12);
        assert!((a1 * b1 + a2 * b2 - 0.25).abs() < 1e-12);
        assert!(matches!(
            solve_param_system(0.5, 0.5, 0.6),
            Err(ChannelError::SolverHypothesis { .. })
        ));
        assert!(solve_param_system(1.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn phase_damping_composition_multiplies_coherence() {
        let k = compose_sq_kraus(
            &StructuredSqKraus::phase_damping(0.1).unwrap(),
            &StructuredSqKraus::phase_damping(0.2).unwrap(),
        )
        .unwrap();
        assert!((k.big_c() - libm::sqrt(0.9 * 0.8)).abs() < 1e-12);
    }

    #[test]
    fn composition_assumption_checked() {
        let k = StructuredSqKraus::from_off_diagonal(0.0, 0.8, 0.0, 0.0).unwrap();
        assert!(matches!(
            compose_sq_kraus(&k, &k),
            Err(ChannelError::CompositionAssumption { .. })
        ));
    }

    #[test]
    fn pauli_asymmetry_rejected() {
        let p = ProbabilisticError::new(1, vec![(ErrorKind::X, 0.1), (ErrorKind::Y, 0.2)]).unwrap();
        assert!(matches!(prob_to_kraus(&p), Err(ChannelError::PauliAsymmetry { .. })));
    }

    #[test]
    fn thermal_zero_time_is_identity() {
        for (t1, t2) in [(50.0, 70.0), (50.0, 30.0)] {
            let e = ThermalRelaxation::new(t1, t2, 0.0, 0.2).unwrap().to_gate_error().unwrap();
            let rho = state([0.3, 0.2, 0.2, 0.7]);
            let out = e.apply_exact(&rho, &[0]).unwrap();
            assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        }
    }

    #[test]
    fn thermal_branches_agree_on_populations_and_coherence() {
        let rho = state([0.3, 0.2, 0.2, 0.7]);
        for (t1, t2) in [(50.0, 80.0), (50.0, 40.0)] {
            let th = ThermalRelaxation::new(t1, t2, 3.0, 0.1).unwrap();
            let out = th.to_gate_error().unwrap().apply_exact(&rho, &[0]).unwrap();
            let pr = th.p_reset();
            let want00 = 0.3 * (1.0 - pr) + pr * th.p0();
            assert!((out.matrix()[(0, 0)].re - want00).abs() < 1e-14);
            assert!((out.matrix()[(0, 1)].re - 0.2 * th.coherence()).abs() < 1e-14);
        }
    }

    #[test]
    fn thermal_kraus_branch_needs_t2_below_twice_t1() {
        let th = ThermalRelaxation::new(10.0, 25.0, 1.0, 0.0).unwrap();
        assert!(th.kraus_branch());
        assert!(matches!(th.to_gate_error(), Err(ChannelError::InvalidThermal(_))));
    }

    #[test]
    fn composed_order_and_empty() {
        let rho = state([0.5, 0.5, 0.5, 0.5]);
        let empty = GateError::composed(vec![]).unwrap();
        assert_eq!(empty.apply_exact(&rho, &[0]).unwrap(), rho);
        let z = GateError::Probabilistic(ProbabilisticError::single(ErrorKind::Z, 0.1).unwrap());
        let twice = GateError::composed(vec![z.clone(), z]).unwrap();
        let out = twice.apply_exact(&rho, &[0]).unwrap();
        assert!((out.matrix()[(0, 1)].re - 0.5 * 0.64).abs() < 1e-15);
    }

    #[test]
    fn composed_rejects_mixed_arity() {
        let sq = GateError::StructuredSq(StructuredSqKraus::identity());
        let dq = GateError::StructuredDq(StructuredDqKraus::identity());
        assert!(matches!(GateError::composed(vec![sq, dq]), Err(ChannelError::MixedArity(1, 2))));
    }

    #[test]
    fn kraus_in_sampled_mode_matches_exact() {
        let e = GateError::StructuredSq(fig2());
        let rho = state([0.3, 0.2, 0.2, 0.7]);
        let mut rng = derived_rng(2, 0);
        let a = e.apply(&rho, &[0], ApplyMode::Sampled(&mut rng)).unwrap();
        let b = e.apply_exact(&rho, &[0]).unwrap();
        assert_eq!(a, b);
    }
}
