//! Noiseless, exact-channel and trajectory evolution of noisy circuits.
//!
//! Every evolution records the state after selected gate counts `m`
//! (checkpoints). Each gate step is `ρ ↦ E(U ρ U†)` with `E` the attached
//! error, if any. In trajectory mode probabilistic errors draw one event per
//! application from a per-shot stream, while Kraus errors still act as
//! channels.

use alloc::vec::Vec;

use thiserror::Error;

use crate::channels::{ApplyMode, ChannelError, GateError};
use crate::circuit::{Circuit, NoisyCircuit};
use crate::linalg::{conjugate_with, ComplexMatrix, DensityMatrix, LinalgError, TargetLayout, MAX_QUBITS};
use crate::rng::derived_rng;

/// Channel applications between re-Hermitization passes.
pub const HYGIENE_INTERVAL: usize = 64;
/// Trace drift above which a state is renormalized.
pub const TRACE_DRIFT_TOL: f64 = 1e-12;
/// Default checkpoint spacing.
pub const DEFAULT_STRIDE: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("initial state has {state} qubit(s) but the circuit has {circuit}")]
    QubitMismatch { state: usize, circuit: usize },
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("checkpoints must be strictly increasing and at most {len}; got {m} after {prev:?}")]
    BadCheckpoint { m: usize, prev: Option<usize>, len: usize },
    #[error("second-moment evaluation needs 2n <= {MAX_QUBITS} qubits, got n = {0}")]
    TooLargeForSecondMoment(usize),
    #[error("gate {index}: {source}")]
    Channel { index: usize, source: ChannelError },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// States recorded at increasing gate counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub checkpoints: Vec<(usize, DensityMatrix)>,
}

impl EvolutionTrace {
    pub fn ms(&self) -> Vec<usize> {
        self.checkpoints.iter().map(|(m, _)| *m).collect()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.checkpoints.last().map(|(_, rho)| rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub m: usize,
    pub value: f64,
    pub std_err: Option<f64>,
}

/// Error values indexed by gate count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorSeries {
    pub points: Vec<SeriesPoint>,
}

impl ErrorSeries {
    pub fn ms(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `stride, 2·stride, …` up to `len`, with `len` itself appended if missed.
pub fn checkpoint_grid(len: usize, stride: usize) -> Result<Vec<usize>, SimError> {
    if stride == 0 {
        return Err(SimError::ZeroStride);
    }
    let mut ms: Vec<usize> = (1..=len / stride).map(|k| k * stride).collect();
    if len > 0 && ms.last() != Some(&len) {
        ms.push(len);
    }
    Ok(ms)
}

fn check_checkpoints(ms: &[usize], len: usize) -> Result<(), SimError> {
    let mut prev: Option<usize> = None;
    for &m in ms {
        if m > len || prev.is_some_and(|p| m <= p) {
            return Err(SimError::BadCheckpoint { m, prev, len });
        }
        prev = Some(m);
    }
    Ok(())
}

fn check_state(rho0: &DensityMatrix, n: usize) -> Result<(), SimError> {
    if rho0.n_qubits() != n {
        return Err(SimError::QubitMismatch {
            state: rho0.n_qubits(),
            circuit: n,
        });
    }
    Ok(())
}

/// Per-gate target layouts, computed once per circuit.
struct Layouts(Vec<TargetLayout>);

impl Layouts {
    fn new(c: &Circuit) -> Self {
        Self(c.gates().iter().map(|g| TargetLayout::new(g.targets(), c.n_qubits())).collect())
    }
}

/// Tracks channel applications and periodically cleans up rounding drift.
struct Hygiene {
    applications: usize,
}

impl Hygiene {
    fn new() -> Self {
        Self { applications: 0 }
    }

    fn record(&mut self, count: usize, m: &mut ComplexMatrix) {
        let before = self.applications / HYGIENE_INTERVAL;
        self.applications += count;
        if self.applications / HYGIENE_INTERVAL == before {
            return;
        }
        *m = m.hermitian_part();
        let tr = m.trace().re;
        let drift = (tr - 1.0).abs();
        if drift > TRACE_DRIFT_TOL && tr > 0.0 {
            log::debug!("trace drift {drift:.3e} after {} channel applications", self.applications);
            *m = m.scale_real(1.0 / tr);
        }
    }
}

/// `U_m ⋯ U_1 ρ0 U_1† ⋯ U_m†` at each checkpoint of the stride grid.
pub fn run_noiseless(c: &Circuit, rho0: &DensityMatrix, stride: usize) -> Result<EvolutionTrace, SimError> {
    run_noiseless_at(c, rho0, &checkpoint_grid(c.len(), stride)?)
}

/// [`run_noiseless`] recorded at explicit gate counts.
pub fn run_noiseless_at(c: &Circuit, rho0: &DensityMatrix, ms: &[usize]) -> Result<EvolutionTrace, SimError> {
    check_state(rho0, c.n_qubits())?;
    check_checkpoints(ms, c.len())?;
    let layouts = Layouts::new(c);
    let n = c.n_qubits();
    let mut m = rho0.matrix().clone();
    let mut out = Vec::with_capacity(ms.len());
    let mut next = ms.iter().peekable();
    while next.peek() == Some(&&0) {
        out.push((0, rho0.clone()));
        next.next();
    }
    for (k, gate) in c.gates().iter().enumerate() {
        let Some(&&target) = next.peek() else { break };
        m = conjugate_with(gate.matrix(), &layouts.0[k], &m);
        if k + 1 == target {
            out.push((target, DensityMatrix::from_matrix_unchecked(n, m.clone())));
            next.next();
        }
    }
    Ok(EvolutionTrace { checkpoints: out })
}

fn evolve(
    nc: &NoisyCircuit,
    layouts: &Layouts,
    rho0: &DensityMatrix,
    ms: &[usize],
    mut mode: ApplyMode<'_>,
    mut visit: impl FnMut(usize, &ComplexMatrix),
) -> Result<(), SimError> {
    let n = nc.n_qubits();
    let mut m = rho0.matrix().clone();
    let mut hygiene = Hygiene::new();
    let mut next = ms.iter().peekable();
    while next.peek() == Some(&&0) {
        visit(0, &m);
        next.next();
    }
    for (k, (gate, error)) in nc.steps().enumerate() {
        let Some(&&target) = next.peek() else { break };
        m = conjugate_with(gate.matrix(), &layouts.0[k], &m);
        if let Some(e) = error {
            let sub = match &mut mode {
                ApplyMode::Exact => ApplyMode::Exact,
                ApplyMode::Sampled(rng) => ApplyMode::Sampled(&mut **rng),
            };
            m = e
                .apply_matrix(&m, gate.targets(), n, sub)
                .map_err(|source| SimError::Channel { index: k, source })?;
            hygiene.record(e.application_count(), &mut m);
        }
        if k + 1 == target {
            visit(target, &m);
            next.next();
        }
    }
    Ok(())
}

/// Deterministic evolution with every error applied as a channel (mixture
/// semantics for probabilistic errors), at each checkpoint of the stride grid.
pub fn run_exact_channel(nc: &NoisyCircuit, rho0: &DensityMatrix, stride: usize) -> Result<EvolutionTrace, SimError> {
    run_exact_channel_at(nc, rho0, &checkpoint_grid(nc.len(), stride)?)
}

/// [`run_exact_channel`] recorded at explicit gate counts.
pub fn run_exact_channel_at(nc: &NoisyCircuit, rho0: &DensityMatrix, ms: &[usize]) -> Result<EvolutionTrace, SimError> {
    check_state(rho0, nc.n_qubits())?;
    check_checkpoints(ms, nc.len())?;
    let n = nc.n_qubits();
    let mut out = Vec::with_capacity(ms.len());
    evolve(nc, &Layouts::new(nc.circuit()), rho0, ms, ApplyMode::Exact, |m, mat| {
        out.push((m, DensityMatrix::from_matrix_unchecked(n, mat.clone())));
    })?;
    Ok(EvolutionTrace { checkpoints: out })
}

/// `‖ρ̃_m − ρ_m‖_F²` between the exact-channel and noiseless evolutions.
///
/// This is the distance of the averaged noisy state. For trajectory noise it
/// is at most the mean per-shot distance, see [`expected_error_series`].
pub fn error_series_exact(nc: &NoisyCircuit, rho0: &DensityMatrix, stride: usize) -> Result<ErrorSeries, SimError> {
    error_series_exact_at(nc, rho0, &checkpoint_grid(nc.len(), stride)?)
}

pub fn error_series_exact_at(nc: &NoisyCircuit, rho0: &DensityMatrix, ms: &[usize]) -> Result<ErrorSeries, SimError> {
    let ideal = run_noiseless_at(nc.circuit(), rho0, ms)?;
    let noisy = run_exact_channel_at(nc, rho0, ms)?;
    let points = ideal
        .checkpoints
        .iter()
        .zip(&noisy.checkpoints)
        .map(|((m, rho), (_, tilde))| {
            let d = tilde.matrix().frobenius_distance(rho.matrix());
            SeriesPoint {
                m: *m,
                value: d * d,
                std_err: None,
            }
        })
        .collect();
    Ok(ErrorSeries { points })
}

/// Everything a single trajectory shot needs; shared read-only across shots.
pub struct TrajectoryPlan<'a> {
    nc: &'a NoisyCircuit,
    rho0: &'a DensityMatrix,
    ms: Vec<usize>,
    ideal: Vec<ComplexMatrix>,
    layouts: Layouts,
    seed: u64,
}

impl<'a> TrajectoryPlan<'a> {
    pub fn new(nc: &'a NoisyCircuit, rho0: &'a DensityMatrix, ms: &[usize], seed: u64) -> Result<Self, SimError> {
        let ideal = run_noiseless_at(nc.circuit(), rho0, ms)?
            .checkpoints
            .into_iter()
            .map(|(_, rho)| rho.into_matrix())
            .collect();
        Ok(Self {
            nc,
            rho0,
            ms: ms.to_vec(),
            ideal,
            layouts: Layouts::new(nc.circuit()),
            seed,
        })
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.ms
    }

    /// Squared distances to the noiseless states at each checkpoint for
    /// shot `shot`, which draws from stream `shot` of the plan's seed.
    pub fn run_shot(&self, shot: u64) -> Result<Vec<f64>, SimError> {
        let mut rng = derived_rng(self.seed, shot);
        let mut out = Vec::with_capacity(self.ms.len());
        evolve(
            self.nc,
            &self.layouts,
            self.rho0,
            &self.ms,
            ApplyMode::Sampled(&mut rng),
            |_, mat| {
                let d = mat.frobenius_distance(&self.ideal[out.len()]);
                out.push(d * d);
            },
        )?;
        Ok(out)
    }

    /// Mean and standard error per checkpoint from per-shot rows in shot order.
    pub fn summarize(&self, per_shot: &[Vec<f64>]) -> ErrorSeries {
        summarize_shots(&self.ms, per_shot)
    }
}

/// Sum by recursive halving; the result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and standard error (`s/√n`, 0 for a single sample).
pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, libm::sqrt(var / n as f64))
}

/// Per-checkpoint mean and standard error of per-shot rows.
pub fn summarize_shots(ms: &[usize], per_shot: &[Vec<f64>]) -> ErrorSeries {
    let points = ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let column: Vec<f64> = per_shot.iter().map(|row| row[i]).collect();
            let (value, se) = mean_and_std_err(&column);
            SeriesPoint {
                m,
                value,
                std_err: Some(se),
            }
        })
        .collect();
    ErrorSeries { points }
}

/// Mean of `‖ρ̃_m^{(s)} − ρ_m‖_F²` over `shots` trajectories, at the stride
/// grid. Shot `s` uses stream `s` of `seed`.
pub fn run_trajectories(
    nc: &NoisyCircuit,
    rho0: &DensityMatrix,
    stride: usize,
    shots: usize,
    seed: u64,
) -> Result<ErrorSeries, SimError> {
    run_trajectories_at(nc, rho0, &checkpoint_grid(nc.len(), stride)?, shots, seed)
}

pub fn run_trajectories_at(
    nc: &NoisyCircuit,
    rho0: &DensityMatrix,
    ms: &[usize],
    shots: usize,
    seed: u64,
) -> Result<ErrorSeries, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let plan = TrajectoryPlan::new(nc, rho0, ms, seed)?;
    let rows = (0..shots as u64).map(|s| plan.run_shot(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(plan.summarize(&rows))
}

/// Exact expectation `E‖ρ̃_m − ρ_m‖_F²` over trajectories, without sampling.
///
/// Evolves the second moment `M = E[ρ̃ ⊗ ρ̃]` on a doubled register (copy 1
/// on qubits `0..n`, copy 2 on `n..2n`): gates and Kraus errors act on both
/// copies, and each probabilistic event acts on both copies jointly. Then
/// `E‖ρ̃ − ρ‖² = tr(SWAP·M) − 2 Re tr(E[ρ̃] ρ) + tr ρ²`. Needs `2n ≤ 12`.
pub fn expected_error_series(nc: &NoisyCircuit, rho0: &DensityMatrix, stride: usize) -> Result<ErrorSeries, SimError> {
    expected_error_series_at(nc, rho0, &checkpoint_grid(nc.len(), stride)?)
}

pub fn expected_error_series_at(nc: &NoisyCircuit, rho0: &DensityMatrix, ms: &[usize]) -> Result<ErrorSeries, SimError> {
    let n = nc.n_qubits();
    check_state(rho0, n)?;
    check_checkpoints(ms, nc.len())?;
    if 2 * n > MAX_QUBITS {
        return Err(SimError::TooLargeForSecondMoment(n));
    }
    let ideal = run_noiseless_at(nc.circuit(), rho0, ms)?;
    let dim = 1usize << n;
    let mut second = crate::linalg::tensor_product(rho0.matrix(), rho0.matrix())?;
    let mut points = Vec::with_capacity(ms.len());
    let mut next = ms.iter().zip(&ideal.checkpoints).peekable();
    let record = |m: usize, second: &ComplexMatrix, rho: &DensityMatrix| -> SeriesPoint {
        SeriesPoint {
            m,
            value: second_moment_distance(second, rho.matrix(), dim),
            std_err: None,
        }
    };
    while let Some((&0, (_, rho))) = next.peek() {
        points.push(record(0, &second, rho));
        next.next();
    }
    for (k, (gate, error)) in nc.steps().enumerate() {
        let Some(&(&target, _)) = next.peek() else { break };
        let t = gate.targets();
        let shifted: Vec<usize> = t.iter().map(|q| q + n).collect();
        for targets in [t, &shifted[..]] {
            let layout = TargetLayout::new(targets, 2 * n);
            second = conjugate_with(gate.matrix(), &layout, &second);
        }
        if let Some(e) = error {
            second = doubled_error(e, &second, t, &shifted, 2 * n).map_err(|source| SimError::Channel { index: k, source })?;
        }
        if k + 1 == target {
            let (_, (_, rho)) = next.next().expect("peeked");
            points.push(record(target, &second, rho));
        }
    }
    Ok(ErrorSeries { points })
}

fn doubled_error(
    e: &GateError,
    m: &ComplexMatrix,
    t1: &[usize],
    t2: &[usize],
    n2: usize,
) -> Result<ComplexMatrix, ChannelError> {
    match e {
        GateError::Probabilistic(p) => {
            let mut acc = m.scale_real(p.no_error_probability());
            for (kind, prob) in p.terms() {
                if *prob == 0.0 {
                    continue;
                }
                let once = kind.apply_matrix(m, t1, n2)?;
                acc.add_scaled(&kind.apply_matrix(&once, t2, n2)?, *prob);
            }
            Ok(acc)
        }
        GateError::Composed(parts) => {
            let mut cur = m.clone();
            for part in parts {
                cur = doubled_error(part, &cur, t1, t2, n2)?;
            }
            Ok(cur)
        }
        deterministic => {
            let once = deterministic.apply_matrix(m, t1, n2, ApplyMode::Exact)?;
            deterministic.apply_matrix(&once, t2, n2, ApplyMode::Exact)
        }
    }
}

/// `tr(SWAP·M) − 2 Re tr(ρ₁ ρ) + tr ρ²` with `ρ₁` the first-copy marginal.
fn second_moment_distance(second: &ComplexMatrix, rho: &ComplexMatrix, dim: usize) -> f64 {
    let big = dim * dim;
    let s = second.as_slice();
    let mut swap_trace = 0.0;
    let mut cross = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            // ⟨i j| M |j i⟩
            swap_trace += s[(i * dim + j) * big + j * dim + i].re;
        }
        for k in 0..dim {
            let marginal: num_complex::Complex<f64> = (0..dim).map(|j| s[(i * dim + j) * big + k * dim + j]).sum();
            cross += (marginal * rho[(k, i)]).re;
        }
    }
    (swap_trace - 2.0 * cross + rho.frobenius_norm_sq()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::channels::{ErrorKind, ProbabilisticError, StructuredSqKraus};
    use crate::circuit::{attach_noise, identity_chain, qft_circuit, GateKind, NoiseModel, NoiseRule};

    fn reset1_chain(len: usize, p: f64) -> NoisyCircuit {
        let e = GateError::Probabilistic(ProbabilisticError::single(ErrorKind::Reset1, p).unwrap());
        let nm = NoiseModel::new(vec![NoiseRule::new("I", None, e)]).unwrap();
        attach_noise(&identity_chain(len).unwrap(), &nm).unwrap()
    }

    #[test]
    fn grid_includes_final_gate() {
        assert_eq!(checkpoint_grid(250, 100).unwrap(), vec![100, 200, 250]);
        assert_eq!(checkpoint_grid(200, 100).unwrap(), vec![100, 200]);
        assert!(checkpoint_grid(10, 0).is_err());
    }

    #[test]
    fn identity_chain_is_static() {
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        let trace = run_noiseless(&identity_chain(100).unwrap(), &rho0, 10).unwrap();
        assert_eq!(trace.checkpoints.len(), 10);
        assert!(trace.checkpoints.iter().all(|(_, r)| r == &rho0));
    }

    #[test]
    fn x_flips() {
        let mut c = Circuit::new(1).unwrap();
        c.add(GateKind::X, &[0]).unwrap();
        let out = run_noiseless(&c, &DensityMatrix::zero_state(1).unwrap(), 1).unwrap();
        assert_eq!(out.last().unwrap(), &DensityMatrix::basis_state(1, 1).unwrap());
    }

    #[test]
    fn qft_of_zero_is_uniform() {
        let out = run_noiseless(&qft_circuit(3).unwrap(), &DensityMatrix::zero_state(3).unwrap(), 100).unwrap();
        let m = out.last().unwrap().matrix();
        assert!(m.as_slice().iter().all(|z| (z - 0.125).norm() < 1e-12));
    }

    #[test]
    fn noiseless_attachments_match_noiseless_run() {
        let c = qft_circuit(3).unwrap();
        let rho0 = DensityMatrix::zero_state(3).unwrap();
        let a = run_noiseless(&c, &rho0, 2).unwrap();
        let b = run_exact_channel(&NoisyCircuit::noiseless(c), &rho0, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reset1_exact_closed_form() {
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        let nc = reset1_chain(500, 0.005);
        let trace = run_exact_channel(&nc, &rho0, 50).unwrap();
        for (m, rho) in &trace.checkpoints {
            let keep = libm::pow(0.995, *m as f64);
            assert!((rho.matrix()[(0, 0)].re - keep).abs() < 1e-12);
            assert!((rho.matrix()[(1, 1)].re - (1.0 - keep)).abs() < 1e-12);
        }
        // the averaged state sits at squared distance 2(1 − 0.995^m)²
        let series = error_series_exact(&nc, &rho0, 50).unwrap();
        for p in &series.points {
            let x = 1.0 - libm::pow(0.995, p.m as f64);
            assert!((p.value - 2.0 * x * x).abs() < 1e-12);
        }
    }

    #[test]
    fn reset1_second_moment_closed_form() {
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        let series = expected_error_series(&reset1_chain(500, 0.005), &rho0, 50).unwrap();
        for p in &series.points {
            let want = 2.0 * (1.0 - libm::pow(0.995, p.m as f64));
            assert!((p.value - want).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn trajectories_are_reproducible_and_zero_without_noise() {
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        let nc = reset1_chain(200, 0.0);
        let s = run_trajectories(&nc, &rho0, 50, 20, 3).unwrap();
        assert!(s.points.iter().all(|p| p.value == 0.0));
        let nc = reset1_chain(200, 0.01);
        let a = run_trajectories(&nc, &rho0, 50, 50, 3).unwrap();
        let b = run_trajectories(&nc, &rho0, 50, 50, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fig2_chain_conserves_trace() {
        let k = StructuredSqKraus::from_off_diagonal(0.001, 0.08, 0.001, 0.008).unwrap();
        let nm = NoiseModel::new(vec![NoiseRule::new("I", None, GateError::StructuredSq(k))]).unwrap();
        let nc = attach_noise(&identity_chain(2000).unwrap(), &nm).unwrap();
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        let trace = run_exact_channel(&nc, &rho0, 100).unwrap();
        for (_, rho) in &trace.checkpoints {
            assert!(rho.validate(1e-9).is_valid());
        }
    }

    #[test]
    fn statistics_helpers() {
        assert_eq!(mean_and_std_err(&[2.0]), (2.0, 0.0));
        let (m, se) = mean_and_std_err(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - libm::sqrt(5.0 / 3.0 / 4.0)).abs() < 1e-15);
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
        assert!((pairwise_sum(&xs) - 49950.0).abs() < 1e-9);
    }

    #[test]
    fn bad_checkpoints_rejected() {
        let nc = reset1_chain(10, 0.1);
        let rho0 = DensityMatrix::zero_state(1).unwrap();
        assert!(matches!(
            run_exact_channel_at(&nc, &rho0, &[5, 5]),
            Err(SimError::BadCheckpoint { .. })
        ));
        assert!(matches!(
            run_exact_channel_at(&nc, &rho0, &[11]),
            Err(SimError::BadCheckpoint { .. })
        ));
        let two = DensityMatrix::zero_state(2).unwrap();
        assert!(matches!(run_exact_channel(&nc, &two, 1), Err(SimError::QubitMismatch { .. })));
    }
}
