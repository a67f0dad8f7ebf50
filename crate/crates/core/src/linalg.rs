//! Dense complex linear algebra for small qubit registers.
//!
//! Matrices are stored row-major. Qubit 0 is the leftmost tensor factor, i.e.
//! the most significant bit of a basis-state index, so a single-qubit operator
//! `U` on qubit `j` of an `n`-qubit register is `I ⊗ … ⊗ U ⊗ … ⊗ I` with `U`
//! in position `j` counted from the left.
//!
//! Operators are never expanded to full `N × N` matrices on the hot paths:
//! [`conjugate_local`] and friends act on the target qubits' index blocks
//! directly, costing `O(N² · 2^k)` for a `k`-qubit operator. [`embed_gate`]
//! builds the full matrix and is used where the explicit operator is wanted.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use thiserror::Error;

/// Complex amplitude type used throughout the crate.
pub type C64 = Complex<f64>;

/// Largest supported register size.
pub const MAX_QUBITS: usize = 12;
/// Largest supported matrix dimension, `2^MAX_QUBITS`.
pub const MAX_DIM: usize = 1 << MAX_QUBITS;
/// Default tolerance for density-matrix structural checks.
pub const DENSITY_TOL: f64 = 1e-10;
/// Allowed deviation of a pure state's norm from 1.
pub const PURE_STATE_TOL: f64 = 1e-12;

const ZERO: C64 = Complex::new(0.0, 0.0);
const ONE: C64 = Complex::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("shape {rows}x{cols} needs {} entries, got {len}", rows * cols)]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} exceeds the {MAX_QUBITS}-qubit limit")]
    TooLarge(usize),
    #[error("dimension {0} is not a power of two")]
    NotQubitDimension(usize),
    #[error("qubit {index} out of range for a {n}-qubit register")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("target qubit {0} listed twice")]
    DuplicateTarget(usize),
    #[error("a {dim}x{dim} operator cannot act on {targets} target qubit(s)")]
    OperatorSize { dim: usize, targets: usize },
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(DensityReport),
    #[error("state vector norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting shape errors and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, LinalgError> {
        Self::new(rows, cols, data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        m
    }

    /// Outer product `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m.data[i * v.len() + j] = ui * vj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex::new(factor, 0.0))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(self.mismatch(rhs));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// In-place `self += factor * rhs`; shapes must agree.
    pub fn add_scaled(&mut self, rhs: &Self, factor: f64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b * factor;
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self, LinalgError> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(self.mismatch(rhs));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn mismatch(&self, rhs: &Self) -> LinalgError {
        LinalgError::DimensionMismatch {
            left: (self.rows, self.cols),
            right: (rhs.rows, rhs.cols),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_norm_sq())
    }

    /// `‖self − other‖_F`; shapes must agree.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        libm::sqrt(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum(),
        )
    }

    /// Largest entrywise modulus of `self − other`; shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖U†U − I‖_F`, or infinity for non-square input.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = &self.dagger() * self;
        gram.frobenius_distance(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Largest `|m_ij − conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(hermitian_eigenvalues(&self.hermitian_part()))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on a shape mismatch; use [`ComplexMatrix::checked_mul`] otherwise.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let rows = a.rows.checked_mul(b.rows).unwrap_or(usize::MAX);
    let cols = a.cols.checked_mul(b.cols).unwrap_or(usize::MAX);
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(LinalgError::TooLarge(rows.max(cols)));
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a.data[ai * a.cols + aj];
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                let row = ai * b.rows + bi;
                for bj in 0..b.cols {
                    out.data[row * cols + aj * b.cols + bj] = x * b.data[bi * b.cols + bj];
                }
            }
        }
    }
    Ok(out)
}

/// Number of qubits for a `2^n`-dimensional space.
pub fn qubits_for_dim(dim: usize) -> Result<usize, LinalgError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(LinalgError::NotQubitDimension(dim));
    }
    if dim > MAX_DIM {
        return Err(LinalgError::TooLarge(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub(crate) fn check_targets(targets: &[usize], n: usize) -> Result<(), LinalgError> {
    if n > MAX_QUBITS {
        return Err(LinalgError::TooLarge(1usize.checked_shl(n as u32).unwrap_or(usize::MAX)));
    }
    for (k, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(LinalgError::QubitOutOfRange { index: t, n });
        }
        if targets[..k].contains(&t) {
            return Err(LinalgError::DuplicateTarget(t));
        }
    }
    Ok(())
}

fn check_operator(op: &ComplexMatrix, targets: &[usize], n: usize) -> Result<(), LinalgError> {
    if !op.is_square() {
        return Err(LinalgError::NotSquare {
            rows: op.rows,
            cols: op.cols,
        });
    }
    if targets.is_empty() || op.rows != 1 << targets.len() {
        return Err(LinalgError::OperatorSize {
            dim: op.rows,
            targets: targets.len(),
        });
    }
    check_targets(targets, n)
}

/// Index bookkeeping for operators acting on a subset of qubits.
///
/// `offsets[a]` scatters the bits of operator index `a` onto the target
/// positions (`targets[0]` is the operator's most significant bit) and `bases`
/// lists every register index with all target bits cleared.
#[derive(Debug, Clone)]
pub(crate) struct TargetLayout {
    offsets: Vec<usize>,
    bases: Vec<usize>,
}

impl TargetLayout {
    pub(crate) fn new(targets: &[usize], n: usize) -> Self {
        let k = targets.len();
        let offsets = (0..1usize << k)
            .map(|a| {
                targets.iter().enumerate().fold(0, |acc, (p, &t)| {
                    let bit = (a >> (k - 1 - p)) & 1;
                    acc | (bit << (n - 1 - t))
                })
            })
            .collect();
        let mask: usize = targets.iter().map(|&t| 1 << (n - 1 - t)).sum();
        let bases = (0..1usize << n).filter(|i| i & mask == 0).collect();
        Self { offsets, bases }
    }
}

pub(crate) fn apply_left_with(op: &ComplexMatrix, layout: &TargetLayout, m: &ComplexMatrix) -> ComplexMatrix {
    let d = layout.offsets.len();
    let cols = m.cols;
    let mut out = ComplexMatrix::zeros(m.rows, cols);
    let mut buf = vec![ZERO; d];
    for &b in &layout.bases {
        for j in 0..cols {
            for (slot, off) in buf.iter_mut().zip(&layout.offsets) {
                *slot = m.data[(b + off) * cols + j];
            }
            for (c, off) in layout.offsets.iter().enumerate() {
                let row = &op.data[c * d..(c + 1) * d];
                out.data[(b + off) * cols + j] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
            }
        }
    }
    out
}

fn apply_right_dagger(m: &ComplexMatrix, op: &ComplexMatrix, layout: &TargetLayout) -> ComplexMatrix {
    let d = layout.offsets.len();
    let cols = m.cols;
    let mut out = ComplexMatrix::zeros(m.rows, cols);
    let mut buf = vec![ZERO; d];
    for i in 0..m.rows {
        let in_row = &m.data[i * cols..(i + 1) * cols];
        let out_row = &mut out.data[i * cols..(i + 1) * cols];
        for &b in &layout.bases {
            for (slot, off) in buf.iter_mut().zip(&layout.offsets) {
                *slot = in_row[b + off];
            }
            for (c, off) in layout.offsets.iter().enumerate() {
                let row = &op.data[c * d..(c + 1) * d];
                out_row[b + off] = row.iter().zip(&buf).map(|(x, y)| x.conj() * y).sum();
            }
        }
    }
    out
}

/// Builds the full `2^n × 2^n` operator acting as `g` on `targets` (in order)
/// and as the identity elsewhere.
pub fn embed_gate(g: &ComplexMatrix, targets: &[usize], n: usize) -> Result<ComplexMatrix, LinalgError> {
    check_operator(g, targets, n)?;
    if !matches!(targets.len(), 1 | 2) {
        return Err(LinalgError::OperatorSize {
            dim: g.rows,
            targets: targets.len(),
        });
    }
    let layout = TargetLayout::new(targets, n);
    Ok(apply_left_with(g, &layout, &ComplexMatrix::identity(1 << n)))
}

/// `Õ m Õ†` where `Õ` is `op` embedded on `targets` of an `n`-qubit register.
pub fn conjugate_local(
    op: &ComplexMatrix,
    targets: &[usize],
    n: usize,
    m: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    check_operator(op, targets, n)?;
    if m.rows != 1 << n || m.cols != 1 << n {
        return Err(LinalgError::DimensionMismatch {
            left: (1 << n, 1 << n),
            right: (m.rows, m.cols),
        });
    }
    let layout = TargetLayout::new(targets, n);
    Ok(conjugate_with(op, &layout, m))
}

pub(crate) fn conjugate_with(op: &ComplexMatrix, layout: &TargetLayout, m: &ComplexMatrix) -> ComplexMatrix {
    apply_right_dagger(&apply_left_with(op, layout, m), op, layout)
}

/// `Σ_k Õ_k m Õ_k†` for operators `ops` on `targets`.
pub fn kraus_sum_local(
    ops: &[ComplexMatrix],
    targets: &[usize],
    n: usize,
    m: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    for op in ops {
        check_operator(op, targets, n)?;
    }
    let layout = TargetLayout::new(targets, n);
    let mut acc = ComplexMatrix::zeros(m.rows, m.cols);
    for op in ops {
        acc.add_scaled(&conjugate_with(op, &layout, m), 1.0);
    }
    Ok(acc)
}

/// Traces out `targets` and re-inserts `sigma` in their place:
/// `out = sigma_targets ⊗ tr_targets(m)`, keeping qubit positions.
pub fn replace_marginal(
    m: &ComplexMatrix,
    targets: &[usize],
    n: usize,
    sigma: &ComplexMatrix,
) -> Result<ComplexMatrix, LinalgError> {
    check_operator(sigma, targets, n)?;
    let layout = TargetLayout::new(targets, n);
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let d = layout.offsets.len();
    for &bi in &layout.bases {
        for &bj in &layout.bases {
            let reduced: C64 = layout
                .offsets
                .iter()
                .map(|off| m.data[(bi + off) * dim + bj + off])
                .sum();
            if reduced == ZERO {
                continue;
            }
            for (c, oc) in layout.offsets.iter().enumerate() {
                for (e, oe) in layout.offsets.iter().enumerate() {
                    out.data[(bi + oc) * dim + bj + oe] = sigma.data[c * d + e] * reduced;
                }
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The matrix is mapped to the real symmetric `[[Re, −Im], [Im, Re]]`, whose
/// spectrum is that of the input with every eigenvalue doubled, and
/// diagonalized by cyclic Jacobi rotations.
fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows;
    match n {
        0 => return Vec::new(),
        1 => return vec![h.data[0].re],
        2 => {
            let (a, d, b) = (h.data[0].re, h.data[3].re, h.data[1]);
            let mean = 0.5 * (a + d);
            let radius = libm::hypot(0.5 * (a - d), b.norm());
            return vec![mean - radius, mean + radius];
        }
        _ => {}
    }
    let size = 2 * n;
    let mut s = vec![0.0; size * size];
    for i in 0..n {
        for j in 0..n {
            let z = h.data[i * n + j];
            s[i * size + j] = z.re;
            s[(i + n) * size + j + n] = z.re;
            s[i * size + j + n] = -z.im;
            s[(i + n) * size + j] = z.im;
        }
    }
    let mut eig = jacobi_eigenvalues(&mut s, size);
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub tolerance: f64,
    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub hermitian_deviation: f64,
    /// `|tr ρ − 1|`, including any imaginary part of the trace.
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub frobenius_norm_sq: f64,
}

impl DensityReport {
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation <= self.tolerance
    }

    pub fn has_unit_trace(&self) -> bool {
        self.trace_deviation <= self.tolerance
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -self.tolerance
    }

    pub fn is_valid(&self) -> bool {
        self.is_hermitian() && self.has_unit_trace() && self.is_psd()
    }
}

impl fmt::Display for DensityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermitian deviation {:.3e}{}, trace deviation {:.3e}{}, min eigenvalue {:.3e}{} (tol {:.1e})",
            self.hermitian_deviation,
            if self.is_hermitian() { "" } else { " [FAIL]" },
            self.trace_deviation,
            if self.has_unit_trace() { "" } else { " [FAIL]" },
            self.min_eigenvalue,
            if self.is_psd() { "" } else { " [FAIL]" },
            self.tolerance,
        )
    }
}

/// Checks Hermiticity, unit trace and positivity of a square matrix.
///
/// Non-square input reports infinite deviations rather than failing.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> DensityReport {
    if !m.is_square() {
        return DensityReport {
            tolerance: tol,
            hermitian_deviation: f64::INFINITY,
            trace_deviation: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
            frobenius_norm_sq: m.frobenius_norm_sq(),
        };
    }
    let eig = hermitian_eigenvalues(&m.hermitian_part());
    DensityReport {
        tolerance: tol,
        hermitian_deviation: m.hermitian_deviation(),
        trace_deviation: (m.trace() - ONE).norm(),
        min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        frobenius_norm_sq: m.frobenius_norm_sq(),
    }
}

/// Hermitian, positive semi-definite, unit-trace state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` at [`DENSITY_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self, LinalgError> {
        Self::with_tolerance(matrix, DENSITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self, LinalgError> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        let n_qubits = qubits_for_dim(matrix.rows)?;
        let report = validate_density(&matrix, tol);
        if !report.is_valid() {
            return Err(LinalgError::InvalidDensity(report));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Wraps a matrix produced by a trace-preserving map of a valid state.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows, 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    /// `|index⟩⟨index|` on `n` qubits.
    pub fn basis_state(n: usize, index: usize) -> Result<Self, LinalgError> {
        check_targets(&[], n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(LinalgError::BasisIndex { index, dim });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.data[index * dim + index] = ONE;
        Ok(Self { n_qubits: n, matrix: m })
    }

    pub fn zero_state(n: usize) -> Result<Self, LinalgError> {
        Self::basis_state(n, 0)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self, LinalgError> {
        check_targets(&[], n)?;
        let dim = 1usize << n;
        Ok(Self {
            n_qubits: n,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            n_qubits: state.n_qubits,
            matrix: ComplexMatrix::outer(&state.amplitudes, &state.amplitudes),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.frobenius_norm_sq()
    }

    pub fn validate(&self, tol: f64) -> DensityReport {
        validate_density(&self.matrix, tol)
    }

    /// Replaces the state by its Hermitian part and, if the trace drifted by
    /// more than `trace_tol`, rescales to unit trace. Returns the trace drift
    /// observed before the correction.
    pub fn rehermitize(&mut self, trace_tol: f64) -> f64 {
        self.matrix = self.matrix.hermitian_part();
        let tr = self.matrix.trace().re;
        let drift = (tr - 1.0).abs();
        if drift > trace_tol && tr > 0.0 {
            self.matrix = self.matrix.scale_real(1.0 / tr);
        }
        drift
    }

    /// Convex combination `(1 − w)·self + w·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self, LinalgError> {
        if self.dim() != other.dim() {
            return Err(self.matrix.mismatch(&other.matrix));
        }
        let mut m = self.matrix.scale_real(1.0 - w);
        m.add_scaled(&other.matrix, w);
        Ok(Self::from_matrix_unchecked(self.n_qubits, m))
    }
}

/// `‖a − b‖_F²`.
pub fn frobenius_distance_sq(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, LinalgError> {
    if a.dim() != b.dim() {
        return Err(a.matrix.mismatch(&b.matrix));
    }
    let d = a.matrix.frobenius_distance(&b.matrix);
    Ok(d * d)
}

/// Unit vector of `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, LinalgError> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm = libm::sqrt(amplitudes.iter().map(|z| z.norm_sqr()).sum());
        if !((norm - 1.0).abs() <= PURE_STATE_TOL) {
            return Err(LinalgError::NotNormalized(norm - 1.0));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|z| z.norm_sqr()).sum())
    }
}

/// `R(θ) · diag(λ, 1 − λ) · R(θ)ᵀ` with `R(θ)` the plane rotation by `θ`.
pub fn rotated_diagonal_state(theta: f64, lambda: f64) -> DensityMatrix {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let mu = 1.0 - lambda;
    let m00 = c * c * lambda + s * s * mu;
    let m11 = s * s * lambda + c * c * mu;
    let m01 = c * s * (lambda - mu);
    let m = ComplexMatrix::from_real(2, 2, &[m00, m01, m01, m11]).expect("2x2 shape");
    DensityMatrix::from_matrix_unchecked(1, m)
}

/// Random real single-qubit state `R(θ)ΛR(θ)ᵀ`, `θ ~ U[0, 2π)`, `λ ~ U[0, 1]`.
pub fn random_density_matrix_2x2<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let theta = core::f64::consts::TAU * rng.random::<f64>();
    let lambda = rng.random::<f64>();
    rotated_diagonal_state(theta, lambda)
}

/// Random real state `QΛQᵀ` of dimension `dim` with `Q` Haar on O(dim) and
/// the spectrum uniform on the simplex. For `dim = 2` this is exactly
/// [`random_density_matrix_2x2`].
pub fn random_real_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix, LinalgError> {
    let n = qubits_for_dim(dim)?;
    if dim == 2 {
        return Ok(random_density_matrix_2x2(rng));
    }
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| Complex::new(StandardNormal.sample(rng), 0.0))
                .collect()
        })
        .collect();
    gram_schmidt(&mut cols);
    let spectrum = simplex_point(dim, rng);
    Ok(DensityMatrix::from_matrix_unchecked(n, spectral_sum(&cols, &spectrum)))
}

/// Random complex state `UΛU†` with `U` Haar on U(dim) and the spectrum
/// uniform on the simplex.
pub fn random_complex_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix, LinalgError> {
    let n = qubits_for_dim(dim)?;
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|_| complex_gaussian_vec(dim, rng)).collect();
    gram_schmidt(&mut cols);
    let spectrum = simplex_point(dim, rng);
    Ok(DensityMatrix::from_matrix_unchecked(n, spectral_sum(&cols, &spectrum)))
}

/// Haar-random pure state on `n` qubits (normalized complex Gaussian vector).
pub fn random_pure_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState, LinalgError> {
    check_targets(&[], n)?;
    let mut v = complex_gaussian_vec(1 << n, rng);
    let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    for z in &mut v {
        *z /= norm;
    }
    Ok(PureState {
        n_qubits: n,
        amplitudes: v,
    })
}

fn complex_gaussian_vec<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

fn simplex_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn gram_schmidt(cols: &mut [Vec<C64>]) {
    for k in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(k);
        let v = &mut rest[0];
        for q in done.iter() {
            let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, qa) in v.iter_mut().zip(q) {
                *x -= proj * qa;
            }
        }
        let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn spectral_sum(cols: &[Vec<C64>], spectrum: &[f64]) -> ComplexMatrix {
    let dim = cols.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (v, &w) in cols.iter().zip(spectrum) {
        m.add_scaled(&ComplexMatrix::outer(v, v), w);
    }
    m
}
