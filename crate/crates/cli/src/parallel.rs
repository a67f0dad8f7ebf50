//! Rayon-backed versions of the sampling loops. Every task draws from its
//! own derived stream and results are reduced in a fixed order, so outputs do
//! not depend on the worker count.

use anyhow::{bail, Context, Result};
use krausprop_core::bounds::{
    channel_dim, estimate_gamma_by, max_displacement_chunk, max_f_chunk, q_estimate, sample_chunks, BoundError,
    BoundEstimate, Sampler,
};
use krausprop_core::channels::GateError;
use krausprop_core::linalg::DensityMatrix;
use krausprop_core::simulator::{ErrorSeries, SimError, TrajectoryPlan};
use krausprop_core::NoisyCircuit;
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "KRAUSPROP_THREADS";

/// Worker count from `KRAUSPROP_THREADS`, or `None` for the rayon default.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{THREADS_VAR}: {e}"),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("{THREADS_VAR} must be a positive integer, got `{v}`"),
        },
    }
}

pub fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().context("cannot start worker pool")
}

fn max_over_chunks<F>(samples: u64, f: F) -> Result<f64, BoundError>
where
    F: Fn(u64, u64) -> Result<f64, BoundError> + Sync,
{
    let chunks: Vec<(u64, u64)> = sample_chunks(samples).collect();
    let maxima = chunks.par_iter().map(|&(chunk, count)| f(chunk, count)).collect::<Result<Vec<f64>, _>>()?;
    Ok(maxima.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Same value as `bounds::estimate_q` for the same arguments.
pub fn estimate_q(k: &GateError, samples: u64, seed: u64, sampler: Sampler) -> Result<BoundEstimate, BoundError> {
    if samples == 0 {
        return Err(BoundError::ZeroSamples);
    }
    let dim = channel_dim(k);
    let best = max_over_chunks(samples, |chunk, count| max_f_chunk(k, dim, sampler, seed, chunk, count))?;
    Ok(q_estimate(best, samples, seed, sampler))
}

/// Same value as `bounds::estimate_gamma` for the same arguments.
pub fn estimate_gamma(k: &GateError, samples: u64, seed: u64, sampler: Sampler) -> Result<BoundEstimate, BoundError> {
    let dim = channel_dim(k);
    estimate_gamma_by(k, samples, seed, |part, part_seed| {
        let best = max_over_chunks(samples, |chunk, count| {
            max_displacement_chunk(part, dim, sampler, part_seed, chunk, count)
        })?;
        Ok(best.max(0.0))
    })
}

/// Same value as `simulator::run_trajectories_at` for the same arguments.
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
    let rows = (0..shots as u64)
        .into_par_iter()
        .map(|s| plan.run_shot(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(plan.summarize(&rows))
}
