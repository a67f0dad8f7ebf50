//! Experiment runs: circuit construction, simulation and bound estimation.

use krausprop_core::bounds::{combine_r, estimate_p, linear_bound, plateau_bound, BoundCurve, BoundEstimate, BoundKind, CurveKind};
use krausprop_core::channels::GateError;
use krausprop_core::circuit::{attach_noise, identity_chain, qft_circuit, repeat_circuit, Circuit, GateKind};
use krausprop_core::linalg::DensityMatrix;
use krausprop_core::simulator::{error_series_exact_at, expected_error_series_at, ErrorSeries};
use krausprop_core::NoisyCircuit;
use serde::{Deserialize, Serialize};

use crate::parallel;
use crate::schema::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

/// Largest register for which the per-shot expected error is computed
/// alongside the averaged-state error in exact mode.
pub const SECOND_MOMENT_MAX_QUBITS: usize = 4;

/// Slack allowed above the squared-distance ceiling of 2.
const CEILING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesLabel {
    /// `‖E[ρ̃_m] − ρ_m‖²` from the averaged (mixture) evolution.
    Exact,
    /// `E‖ρ̃_m − ρ_m‖²` over trajectories, computed without sampling.
    SecondMoment,
    /// Sampled mean of `‖ρ̃_m − ρ_m‖²`.
    Trajectories,
}

impl SeriesLabel {
    pub fn label(&self) -> &'static str {
        match self {
            SeriesLabel::Exact => "exact",
            SeriesLabel::SecondMoment => "second_moment",
            SeriesLabel::Trajectories => "trajectories",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub m: usize,
    pub value: f64,
    pub std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub label: SeriesLabel,
    pub points: Vec<PointRecord>,
}

impl SeriesRecord {
    fn new(label: SeriesLabel, s: &ErrorSeries) -> Self {
        let points = s
            .points
            .iter()
            .map(|p| PointRecord {
                m: p.m,
                value: p.value,
                std_err: p.std_err,
            })
            .collect();
        Self { label, points }
    }

    pub fn value_at(&self, m: usize) -> Option<&PointRecord> {
        self.points.iter().find(|p| p.m == m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    SquaredDistance,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub kind: String,
    /// What the curve bounds: the squared Frobenius distance or the distance.
    pub quantity: Quantity,
    pub parameter: f64,
    pub points: Vec<(usize, f64)>,
}

impl CurveRecord {
    fn new(c: &BoundCurve) -> Self {
        let quantity = match c.kind {
            CurveKind::Linear => Quantity::Distance,
            _ => Quantity::SquaredDistance,
        };
        Self {
            kind: String::from(c.kind.label()),
            quantity,
            parameter: c.parameter,
            points: c.points.clone(),
        }
    }

    pub fn value_at(&self, m: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == m).map(|p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub kind: String,
    pub value: f64,
    pub samples: u64,
    pub seed: Option<u64>,
    pub method: String,
    /// Noise rule the estimate belongs to; absent for aggregates.
    pub source: Option<String>,
}

impl EstimateRecord {
    fn new(e: &BoundEstimate, source: Option<String>) -> Self {
        Self {
            kind: String::from(e.kind.label()),
            value: e.value,
            samples: e.samples,
            seed: e.seed,
            method: e.method.clone(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: String,
    pub generator: String,
    pub config: ExperimentConfig,
    pub grid: Vec<usize>,
    pub series: Vec<SeriesRecord>,
    pub bounds: Vec<CurveRecord>,
    pub estimates: Vec<EstimateRecord>,
}

impl ExperimentResult {
    pub fn series(&self, label: SeriesLabel) -> Option<&SeriesRecord> {
        self.series.iter().find(|s| s.label == label)
    }

    /// Series reported in the CSV `empirical` column: trajectories, then the
    /// second moment, then the averaged-state error.
    pub fn empirical(&self) -> Option<&SeriesRecord> {
        [SeriesLabel::Trajectories, SeriesLabel::SecondMoment, SeriesLabel::Exact]
            .into_iter()
            .find_map(|l| self.series(l))
    }

    pub fn curve(&self, kind: &str) -> Option<&CurveRecord> {
        self.bounds.iter().find(|c| c.kind == kind)
    }

    /// Aggregate estimate of the given kind (`q`, `p`, `r`, `gamma`).
    pub fn estimate(&self, kind: &str) -> Option<&EstimateRecord> {
        self.estimates.iter().find(|e| e.kind == kind && e.source.is_none())
    }
}

fn repeat_to_length(base: &Circuit, len: usize) -> Result<Circuit, CliError> {
    let times = len.div_ceil(base.len());
    Ok(repeat_circuit(base, times).map_err(CliError::runtime)?.truncated(len))
}

/// The experiment's circuit, `depth.stop` gates long.
pub fn build_circuit(cfg: &ExperimentConfig) -> Result<Circuit, CliError> {
    let len = cfg.depth.stop;
    match cfg.experiment {
        ExperimentKind::KrausIdentity | ExperimentKind::ProbIdentity => identity_chain(len).map_err(CliError::runtime),
        ExperimentKind::QftMixed => {
            let qft = qft_circuit(cfg.n_qubits).map_err(|e| ConfigError::new("n_qubits", e))?;
            repeat_to_length(&qft, len)
        }
        ExperimentKind::Custom => {
            let mut base = Circuit::new(cfg.n_qubits).map_err(|e| ConfigError::new("n_qubits", e))?;
            for (i, g) in cfg.circuit.iter().flatten().enumerate() {
                let kind = GateKind::parse(&g.gate).map_err(|e| ConfigError::new(format!("circuit[{i}].gate"), e))?;
                base.add(kind, &g.targets).map_err(|e| ConfigError::new(format!("circuit[{i}].targets"), e))?;
            }
            repeat_to_length(&base, len)
        }
    }
}

fn has_kraus_part(e: &GateError) -> bool {
    e.components().iter().any(|c| !matches!(c, GateError::Probabilistic(_)))
}

struct Estimates {
    records: Vec<EstimateRecord>,
    r: f64,
    gamma: f64,
}

/// Per-rule `q̂` and `γ̂` for the rules the circuit uses, then `p̂` and `r`.
fn estimate_constants(cfg: &ExperimentConfig, nc: &NoisyCircuit, used: &[(usize, GateError)]) -> Result<Estimates, CliError> {
    let sampler = cfg.bound.sampler.sampler();
    let samples = cfg.bound.samples;
    let mut records = Vec::new();
    let mut q_max: Option<f64> = None;
    let mut gamma: f64 = 0.0;
    for (rule, error) in used {
        let source = Some(format!("noise_model.rules[{rule}]"));
        let seed = cfg.seed.wrapping_add(*rule as u64);
        if has_kraus_part(error) {
            let q = parallel::estimate_q(error, samples, seed, sampler).map_err(CliError::runtime)?;
            q_max = Some(q_max.unwrap_or(0.0).max(q.value));
            records.push(EstimateRecord::new(&q, source.clone()));
        }
        let g = parallel::estimate_gamma(error, samples, seed, sampler).map_err(CliError::runtime)?;
        gamma = gamma.max(g.value);
        records.push(EstimateRecord::new(&g, source));
    }
    let q = BoundEstimate {
        kind: BoundKind::Q,
        value: q_max.unwrap_or(0.0),
        samples: if q_max.is_some() { samples } else { 0 },
        seed: q_max.map(|_| cfg.seed),
        method: String::from(if q_max.is_some() { "max_over_rules" } else { "no_kraus_errors" }),
    };
    let p = estimate_p(nc.attached().iter().flatten());
    let mut r = combine_r(&p, &q);
    if let Some(over) = cfg.bound.r_override {
        r.value = over;
        r.method = String::from("override");
    }
    let g = BoundEstimate {
        kind: BoundKind::Gamma,
        value: gamma,
        samples: 0,
        seed: None,
        method: String::from("max_over_rules"),
    };
    let value = r.value;
    records.extend([q, p, r, g].iter().map(|e| EstimateRecord::new(e, None)));
    Ok(Estimates { records, r: value, gamma })
}

/// Runs `cfg` with at most `threads` workers (`None` for the default).
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult, CliError> {
    let valid = cfg.validate()?;
    let circuit = build_circuit(cfg)?;
    let nc = attach_noise(&circuit, &valid.noise).map_err(|e| ConfigError::new("noise_model", e))?;
    let rho0 = DensityMatrix::basis_state(cfg.n_qubits, cfg.initial_state).map_err(|e| ConfigError::new("initial_state", e))?;
    let grid = cfg.depth.grid();
    let pool = parallel::build_pool(threads).map_err(CliError::Runtime)?;

    pool.install(|| {
        let mut series = Vec::new();
        if cfg.mode.exact() {
            let exact = error_series_exact_at(&nc, &rho0, &grid).map_err(CliError::runtime)?;
            series.push(SeriesRecord::new(SeriesLabel::Exact, &exact));
            if cfg.n_qubits <= SECOND_MOMENT_MAX_QUBITS {
                let second = expected_error_series_at(&nc, &rho0, &grid).map_err(CliError::runtime)?;
                series.push(SeriesRecord::new(SeriesLabel::SecondMoment, &second));
            }
        }
        if cfg.mode.trajectories() {
            let traj = parallel::run_trajectories_at(&nc, &rho0, &grid, cfg.shots, cfg.seed).map_err(CliError::runtime)?;
            series.push(SeriesRecord::new(SeriesLabel::Trajectories, &traj));
        }
        for s in &series {
            if let Some(p) = s.points.iter().find(|p| p.value > 2.0 + CEILING_TOL) {
                log::warn!("{} series exceeds 2 at m = {}: {}", s.label.label(), p.m, p.value);
            }
        }

        let used: Vec<(usize, GateError)> = valid
            .noise
            .rules()
            .iter()
            .enumerate()
            .filter(|(_, rule)| circuit.gates().iter().any(|g| rule.matches(g)))
            .map(|(i, rule)| (i, rule.error.clone()))
            .collect();
        let mut bounds = Vec::new();
        let mut estimates = Vec::new();
        if cfg.bound.auto_estimate {
            let est = estimate_constants(cfg, &nc, &used)?;
            bounds.push(CurveRecord::new(&plateau_bound(est.r, &grid).map_err(CliError::runtime)?));
            bounds.push(CurveRecord::new(&linear_bound(est.gamma, &grid).map_err(CliError::runtime)?));
            estimates = est.records;
        } else if let Some(r) = cfg.bound.r_override {
            bounds.push(CurveRecord::new(&plateau_bound(r, &grid).map_err(CliError::runtime)?));
            estimates.push(EstimateRecord {
                kind: String::from("r"),
                value: r,
                samples: 0,
                seed: None,
                method: String::from("override"),
                source: None,
            });
        }

        Ok(ExperimentResult {
            schema_version: String::from(SCHEMA_VERSION),
            generator: format!("krausprop {}", env!("CARGO_PKG_VERSION")),
            config: cfg.clone(),
            grid: grid.clone(),
            series,
            bounds,
            estimates,
        })
    })
}
