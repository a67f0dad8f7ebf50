//! Contraction constants and closed-form error-propagation bounds.
//!
//! For a channel `K` and states `ρ̃, ρ` the contraction functional is
//!
//! ```text
//! F(ρ̃, ρ) = (‖K(ρ̃) − ρ‖² − ‖ρ̃ − ρ‖²) / (2 − ‖ρ̃ − ρ‖²)
//! ```
//!
//! so that `‖K(ρ̃) − ρ‖² = (1 − F)‖ρ̃ − ρ‖² + 2F`. Any `q ≥ sup F` turns a
//! chain of `m` such channels into the plateau bound `2(1 − (1 − q)^m)`;
//! probabilistic errors with probability `p` contribute the same way with
//! `p` in place of `q`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::channels::{ApplyMode, ChannelError, GateError, StructuredDqKraus, StructuredSqKraus};
use crate::linalg::{random_complex_density, random_real_density, DensityMatrix, LinalgError};
use crate::rng::derived_rng;

/// Denominator below which [`f_functional`] moves both states toward `I/N`.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;
/// Mixing weight of that perturbation.
pub const PERTURBATION: f64 = 1e-6;
/// Samples per independently seeded chunk in [`estimate_q`] and
/// [`estimate_gamma`]; chunk `c` draws from stream `c`.
pub const SAMPLE_CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("channel acts on {channel} qubit(s) but the states have {state}")]
    QubitMismatch { channel: usize, state: usize },
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("mixed bound needs {m_p} probabilities, got {got}")]
    ProbabilityCount { m_p: usize, got: usize },
}

/// Random-state distribution for sup estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    /// Real states `RΛRᵀ`: a uniform rotation angle and uniform spectrum for
    /// one qubit, Haar-orthogonal `Q` and a flat-Dirichlet spectrum beyond.
    #[default]
    PaperReal,
    /// Complex states `UΛU†`, Haar `U` and flat-Dirichlet spectrum.
    HaarComplex,
}

impl Sampler {
    pub fn label(&self) -> &'static str {
        match self {
            Sampler::PaperReal => "paper_real",
            Sampler::HaarComplex => "haar_complex",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<DensityMatrix, LinalgError> {
        match self {
            Sampler::PaperReal => random_real_density(dim, rng),
            Sampler::HaarComplex => random_complex_density(dim, rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Q,
    Delta,
    Gamma,
    P,
    R,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::Q => "q",
            BoundKind::Delta => "delta",
            BoundKind::Gamma => "gamma",
            BoundKind::P => "p",
            BoundKind::R => "r",
        }
    }
}

/// An estimated constant with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEstimate {
    pub kind: BoundKind,
    pub value: f64,
    /// Random samples used; 0 for closed forms.
    pub samples: u64,
    pub seed: Option<u64>,
    pub method: String,
}

impl BoundEstimate {
    fn closed(kind: BoundKind, value: f64, method: &str) -> Self {
        Self {
            kind,
            value,
            samples: 0,
            seed: None,
            method: String::from(method),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// `γ·m`, a bound on `‖ρ̃_m − ρ_m‖_F` (not squared).
    Linear,
    /// `2(1 − (1 − r)^m)`, a bound on the squared distance.
    Plateau,
    /// `2(1 − (1 − q)^{m_K} Π(1 − p_k))`.
    Mixed,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::Linear => "linear",
            CurveKind::Plateau => "plateau",
            CurveKind::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub kind: CurveKind,
    /// `r` for plateau curves, `γ` for linear ones.
    pub parameter: f64,
    pub points: Vec<(usize, f64)>,
}

fn channel_targets(k: &GateError, n: usize) -> Result<Vec<usize>, BoundError> {
    match k.arity() {
        Some(a) if a != n => Err(BoundError::QubitMismatch { channel: a, state: n }),
        Some(a) => Ok((0..a).collect()),
        None => Ok((0..n).collect()),
    }
}

fn apply_whole(k: &GateError, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix, BoundError> {
    Ok(k.apply(rho, targets, ApplyMode::Exact)?)
}

/// `F(ρ̃, ρ)` for `k` applied (with mixture semantics) to every qubit of
/// the states. Near `‖ρ̃ − ρ‖² = 2` both states are first mixed with `I/N`
/// at weight `1e-6`.
pub fn f_functional(k: &GateError, rho_tilde: &DensityMatrix, rho: &DensityMatrix) -> Result<f64, BoundError> {
    if rho_tilde.dim() != rho.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: (rho_tilde.dim(), rho_tilde.dim()),
            right: (rho.dim(), rho.dim()),
        }
        .into());
    }
    let targets = channel_targets(k, rho.n_qubits())?;
    let before = rho_tilde.matrix().frobenius_distance(rho.matrix());
    let before_sq = before * before;
    if 2.0 - before_sq >= DENOMINATOR_FLOOR {
        return f_at(k, rho_tilde, rho, &targets);
    }
    let mixed = DensityMatrix::maximally_mixed(rho.n_qubits())?;
    let rt = rho_tilde.mix(&mixed, PERTURBATION)?;
    let r = rho.mix(&mixed, PERTURBATION)?;
    f_at(k, &rt, &r, &targets)
}

fn f_at(k: &GateError, rho_tilde: &DensityMatrix, rho: &DensityMatrix, targets: &[usize]) -> Result<f64, BoundError> {
    let before = rho_tilde.matrix().frobenius_distance(rho.matrix());
    let after = apply_whole(k, rho_tilde, targets)?.matrix().frobenius_distance(rho.matrix());
    let before_sq = before * before;
    Ok((after * after - before_sq) / (2.0 - before_sq))
}

/// Largest `F` over `count` independent `(ρ̃, ρ)` pairs drawn from stream
/// `chunk` of `seed`; `-∞` if `count` is 0.
pub fn max_f_chunk(k: &GateError, dim: usize, sampler: Sampler, seed: u64, chunk: u64, count: u64) -> Result<f64, BoundError> {
    let mut rng = derived_rng(seed, chunk);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..count {
        let rho_tilde = sampler.sample(dim, &mut rng)?;
        let rho = sampler.sample(dim, &mut rng)?;
        best = best.max(f_functional(k, &rho_tilde, &rho)?);
    }
    Ok(best)
}

/// `(chunk index, sample count)` for each chunk of a `samples`-sized run.
pub fn sample_chunks(samples: u64) -> impl Iterator<Item = (u64, u64)> {
    let full = samples / SAMPLE_CHUNK;
    let rest = samples % SAMPLE_CHUNK;
    (0..full)
        .map(|c| (c, SAMPLE_CHUNK))
        .chain((rest > 0).then_some((full, rest)))
}

/// State dimension a channel's constants are estimated on.
pub fn channel_dim(k: &GateError) -> usize {
    1 << k.arity().unwrap_or(1)
}

/// `q̂ = max(0, max F)` over `samples` random pairs. The first `N` samples of
/// a larger run are exactly the samples of an `N`-sample run, so `q̂` never
/// decreases with `samples` for a fixed seed.
pub fn estimate_q(k: &GateError, samples: u64, seed: u64, sampler: Sampler) -> Result<BoundEstimate, BoundError> {
    if samples == 0 {
        return Err(BoundError::ZeroSamples);
    }
    let dim = channel_dim(k);
    let mut best = f64::NEG_INFINITY;
    for (chunk, count) in sample_chunks(samples) {
        best = best.max(max_f_chunk(k, dim, sampler, seed, chunk, count)?);
    }
    Ok(q_estimate(best, samples, seed, sampler))
}

/// Wraps a raw sampled maximum of `F` as a `q` estimate.
pub fn q_estimate(max_f: f64, samples: u64, seed: u64, sampler: Sampler) -> BoundEstimate {
    BoundEstimate {
        kind: BoundKind::Q,
        value: max_f.max(0.0),
        samples,
        seed: Some(seed),
        method: alloc::format!("sampled_sup_{}", sampler.label()),
    }
}

/// `max over x ∈ [0, 1]` of the squared norm of `K(uu†)` with `|u₀|² = x`:
/// `f(x) = (Ax + B)² + (1 − Ax − B)² + 2C²x(1 − x)`.
pub fn max_pure_output_purity(k: &StructuredSqKraus) -> f64 {
    let (a, b, c) = (k.big_a(), k.big_b(), k.big_c());
    let f = |x: f64| {
        let d = a * x + b;
        d * d + (1.0 - d) * (1.0 - d) + 2.0 * c * c * x * (1.0 - x)
    };
    let mut best = f(0.0).max(f(1.0));
    let curvature = a * a - c * c;
    if curvature != 0.0 {
        let x = (a - 2.0 * a * b - c * c) / (2.0 * curvature);
        if (0.0..=1.0).contains(&x) {
            best = best.max(f(x));
        }
    }
    best
}

/// `δ̂ = 1 − max over pure states of ‖K(uu†)‖_F²`, in closed form. It is 0
/// whenever the channel maps some pure state to a pure state.
pub fn estimate_delta(k: &StructuredSqKraus) -> BoundEstimate {
    let delta = (1.0 - max_pure_output_purity(k)).clamp(0.0, 1.0);
    BoundEstimate::closed(BoundKind::Delta, delta, "closed_form_pure_state")
}

/// `1 − (1 − δ̂₁)(1 − δ̂₂)` from the factorwise single-qubit maxima.
pub fn estimate_delta_dq(k: &StructuredDqKraus) -> BoundEstimate {
    let p1 = max_pure_output_purity(&k.first).min(1.0);
    let p2 = max_pure_output_purity(&k.second).min(1.0);
    let delta = (1.0 - p1 * p2).clamp(0.0, 1.0);
    BoundEstimate::closed(BoundKind::Delta, delta, "closed_form_factorwise")
}

/// `(2 − δ)/2`.
pub fn q_from_delta(delta: f64) -> Result<f64, BoundError> {
    if !(0.0..=2.0).contains(&delta) {
        return Err(BoundError::OutOfRange {
            name: "delta",
            value: delta,
            range: "[0, 2]",
        });
    }
    Ok((2.0 - delta) / 2.0)
}

/// Largest `‖K(ρ) − ρ‖_F` over `count` states from stream `chunk`.
pub fn max_displacement_chunk(k: &GateError, dim: usize, sampler: Sampler, seed: u64, chunk: u64, count: u64) -> Result<f64, BoundError> {
    let mut rng = derived_rng(seed, chunk);
    let targets = channel_targets(k, dim.trailing_zeros() as usize)?;
    let mut best: f64 = 0.0;
    for _ in 0..count {
        let rho = sampler.sample(dim, &mut rng)?;
        let out = apply_whole(k, &rho, &targets)?;
        best = best.max(out.matrix().frobenius_distance(rho.matrix()));
    }
    Ok(best)
}

/// Per-gate displacement constant `γ`: sampled `max ‖K(ρ) − ρ‖_F` for each
/// Kraus-type component, `2p` for each probabilistic component, summed over
/// the components of a composition.
pub fn estimate_gamma(k: &GateError, samples: u64, seed: u64, sampler: Sampler) -> Result<BoundEstimate, BoundError> {
    let dim = channel_dim(k);
    estimate_gamma_by(k, samples, seed, |part, part_seed| {
        let mut best: f64 = 0.0;
        for (chunk, count) in sample_chunks(samples) {
            best = best.max(max_displacement_chunk(part, dim, sampler, part_seed, chunk, count)?);
        }
        Ok(best)
    })
}

/// [`estimate_gamma`] with the sampled maximum for one component supplied by
/// `sampled_max(component, component_seed)`.
pub fn estimate_gamma_by<F>(k: &GateError, samples: u64, seed: u64, mut sampled_max: F) -> Result<BoundEstimate, BoundError>
where
    F: FnMut(&GateError, u64) -> Result<f64, BoundError>,
{
    if samples == 0 {
        return Err(BoundError::ZeroSamples);
    }
    let mut total = 0.0;
    let mut sampled = false;
    for (index, part) in k.components().into_iter().enumerate() {
        match part {
            GateError::Probabilistic(p) => total += 2.0 * p.total_probability(),
            GateError::Composed(_) => {}
            other => {
                sampled = true;
                // each component draws from its own seed so adding a component
                // does not change the others' samples
                total += sampled_max(other, seed.wrapping_add(index as u64))?;
            }
        }
    }
    Ok(BoundEstimate {
        kind: BoundKind::Gamma,
        value: total,
        samples: if sampled { samples } else { 0 },
        seed: sampled.then_some(seed),
        method: String::from(if sampled { "sampled_displacement" } else { "closed_form_2p" }),
    })
}

/// Largest total error probability over the probabilistic components of
/// `errors`.
pub fn estimate_p<'a>(errors: impl IntoIterator<Item = &'a GateError>) -> BoundEstimate {
    let p = errors
        .into_iter()
        .flat_map(GateError::components)
        .filter_map(|e| match e {
            GateError::Probabilistic(p) => Some(p.total_probability()),
            _ => None,
        })
        .fold(0.0, f64::max);
    BoundEstimate::closed(BoundKind::P, p, "max_error_probability")
}

/// `r = max(p, q)`.
pub fn combine_r(p: &BoundEstimate, q: &BoundEstimate) -> BoundEstimate {
    BoundEstimate::closed(BoundKind::R, p.value.max(q.value), "max_p_q")
}

fn check_unit(name: &'static str, x: f64) -> Result<(), BoundError> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(BoundError::OutOfRange {
            name,
            value: x,
            range: "[0, 1)",
        })
    }
}

/// `2(1 − (1 − r)^m)`.
pub fn plateau_value(r: f64, m: usize) -> f64 {
    2.0 * -libm::expm1(m as f64 * libm::log1p(-r))
}

/// Points `(m, 2(1 − (1 − r)^m))`.
pub fn plateau_bound(r: f64, ms: &[usize]) -> Result<BoundCurve, BoundError> {
    check_unit("r", r)?;
    Ok(BoundCurve {
        kind: CurveKind::Plateau,
        parameter: r,
        points: ms.iter().map(|&m| (m, plateau_value(r, m))).collect(),
    })
}

/// Points `(m, γ·m)`; bounds the distance, not its square.
pub fn linear_bound(gamma: f64, ms: &[usize]) -> Result<BoundCurve, BoundError> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(BoundError::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, inf)",
        });
    }
    Ok(BoundCurve {
        kind: CurveKind::Linear,
        parameter: gamma,
        points: ms.iter().map(|&m| (m, gamma * m as f64)).collect(),
    })
}

/// Both forms of the bound for `m_K` Kraus gates and `m_P` probabilistic ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedBound {
    /// `2(1 − (1 − q)^{m_K} Π(1 − p_k))`.
    pub intermediate: f64,
    /// `2(1 − (1 − r)^{m_K + m_P})`, `r = max(q, p_1, …)`.
    pub relaxed: f64,
    pub r: f64,
}

pub fn mixed_bound(p_list: &[f64], q: f64, m_k: usize, m_p: usize) -> Result<MixedBound, BoundError> {
    check_unit("q", q)?;
    if p_list.len() != m_p {
        return Err(BoundError::ProbabilityCount { m_p, got: p_list.len() });
    }
    let mut log_keep = m_k as f64 * libm::log1p(-q);
    let mut r = q;
    for &p in p_list {
        check_unit("p", p)?;
        log_keep += libm::log1p(-p);
        r = r.max(p);
    }
    Ok(MixedBound {
        intermediate: 2.0 * -libm::expm1(log_keep),
        relaxed: plateau_value(r, m_k + m_p),
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{ErrorKind, KrausChannel, ProbabilisticError};

    fn fig2() -> StructuredSqKraus {
        StructuredSqKraus::from_off_diagonal(0.001, 0.08, 0.001, 0.008).unwrap()
    }

    fn identity() -> GateError {
        GateError::Kraus(KrausChannel::identity(1).unwrap())
    }

    #[test]
    fn identity_channel_constants() {
        let zero = DensityMatrix::zero_state(1).unwrap();
        let one = DensityMatrix::basis_state(1, 1).unwrap();
        assert_eq!(f_functional(&identity(), &zero, &one).unwrap(), 0.0);
        assert_eq!(f_functional(&identity(), &zero, &zero).unwrap(), 0.0);
        assert_eq!(estimate_q(&identity(), 1000, 0, Sampler::PaperReal).unwrap().value, 0.0);
        assert_eq!(estimate_delta(&StructuredSqKraus::identity()).value, 0.0);
        assert_eq!(estimate_gamma(&identity(), 100, 0, Sampler::HaarComplex).unwrap().value, 0.0);
    }

    #[test]
    fn q_prefix_property() {
        let k = GateError::StructuredSq(fig2());
        let small = estimate_q(&k, 5000, 4, Sampler::PaperReal).unwrap().value;
        let large = estimate_q(&k, 20000, 4, Sampler::PaperReal).unwrap().value;
        assert!(small <= large);
        assert!(large > 0.0 && large < 1.0);
    }

    #[test]
    fn chunks_cover_samples() {
        let chunks: Vec<_> = sample_chunks(2 * SAMPLE_CHUNK + 5).collect();
        assert_eq!(chunks, [(0, SAMPLE_CHUNK), (1, SAMPLE_CHUNK), (2, 5)]);
        assert_eq!(sample_chunks(SAMPLE_CHUNK).count(), 1);
    }

    #[test]
    fn delta_examples() {
        let phase_flip = StructuredSqKraus::phase_damping(0.4).unwrap();
        assert_eq!(estimate_delta(&phase_flip).value, 0.0);
        let d = estimate_delta(&fig2()).value;
        assert!(d > 0.0);
        let q = q_from_delta(d).unwrap();
        assert!(q > 0.0 && q < 1.0);
    }

    #[test]
    fn q_from_delta_range() {
        assert_eq!(q_from_delta(0.0).unwrap(), 1.0);
        assert_eq!(q_from_delta(2.0).unwrap(), 0.0);
        assert!(q_from_delta(2.5).is_err());
    }

    #[test]
    fn gamma_closed_form_for_reset() {
        let e = GateError::Probabilistic(ProbabilisticError::single(ErrorKind::Reset1, 0.005).unwrap());
        let g = estimate_gamma(&e, 10, 0, Sampler::PaperReal).unwrap();
        assert!((g.value - 0.01).abs() < 1e-15);
        assert_eq!(g.samples, 0);
    }

    #[test]
    fn plateau_examples() {
        assert!(plateau_bound(0.0, &[1, 10, 100]).unwrap().points.iter().all(|p| p.1 == 0.0));
        let v = plateau_value(5.620e-3, 100);
        assert!((v - 0.86168).abs() < 1e-4, "{v}");
        assert!(plateau_value(1.076e-2, 2000) > 1.999);
        assert!(plateau_bound(1.0, &[1]).is_err());
    }

    #[test]
    fn linear_examples() {
        assert_eq!(linear_bound(0.01, &[100]).unwrap().points[0].1, 1.0);
        assert!(linear_bound(-1.0, &[1]).is_err());
    }

    #[test]
    fn mixed_reduces_to_plateau() {
        let b = mixed_bound(&[], 0.01, 50, 0).unwrap();
        assert!((b.intermediate - plateau_value(0.01, 50)).abs() < 1e-15);
        let b = mixed_bound(&[0.02; 30], 0.0, 0, 30).unwrap();
        assert!((b.intermediate - plateau_value(0.02, 30)).abs() < 1e-14);
        assert!(b.intermediate <= b.relaxed + 1e-15);
        assert!(matches!(mixed_bound(&[0.1], 0.0, 0, 2), Err(BoundError::ProbabilityCount { .. })));
    }

    #[test]
    fn degenerate_denominator_is_perturbed() {
        let zero = DensityMatrix::zero_state(1).unwrap();
        let one = DensityMatrix::basis_state(1, 1).unwrap();
        let f = f_functional(&GateError::StructuredSq(fig2()), &zero, &one).unwrap();
        assert!(f.is_finite() && f <= 1.0);
    }
}
