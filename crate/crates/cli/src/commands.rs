//! Subcommand implementations. Each writes its primary output to `out` and
//! returns an error carrying the exit status.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use krausprop_core::bounds::{estimate_delta, estimate_delta_dq, q_from_delta};
use krausprop_core::channels::{compose_dq_kraus, compose_sq_kraus, prob_to_kraus, GateError};

use crate::emit::{csv_string, emit_csv, emit_json, emit_svg_plot};
use crate::experiment::run_experiment;
use crate::parallel;
use crate::schema::{read_json, ChannelSpec, ConfigError, ExperimentConfig, ExperimentKind, SamplerSpec};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "krausprop", version, about = "Noise-channel simulation and error-propagation bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerArg {
    PaperReal,
    HaarComplex,
}

impl From<SamplerArg> for SamplerSpec {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::PaperReal => SamplerSpec::PaperReal,
            SamplerArg::HaarComplex => SamplerSpec::HaarComplex,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write CSV and JSON (and optionally SVG) results.
    Experiment {
        /// kraus_identity, prob_identity, qft_mixed or custom; must match the config.
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's qubit count.
        #[arg(long)]
        n_qubits: Option<usize>,
    },
    /// Sampled supremum of the contraction functional for a channel file.
    EstimateQ {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "paper-real")]
        sampler: SamplerArg,
    },
    /// Closed-form purity-loss constant of a structured channel.
    EstimateDelta {
        #[arg(long)]
        channel: PathBuf,
    },
    /// Single structured channel equivalent to applying `lhs` then `rhs`.
    Compose {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structured Kraus form of a single-qubit probabilistic error.
    Convert {
        #[arg(long)]
        prob: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a config without bound estimation; prints CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_channel(path: &Path) -> Result<GateError, CliError> {
    let spec: ChannelSpec = read_json(path)?;
    Ok(spec.build("")?)
}

fn write_channel(path: &Path, e: &GateError) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&ChannelSpec::from_gate_error(e)).map_err(CliError::runtime)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::runtime(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::runtime(e)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let threads = parallel::thread_limit().map_err(|e| CliError::Validation(format!("{e:#}")))?;
    match cli.command {
        Command::Experiment {
            name,
            config,
            out: dir,
            svg,
            seed,
            n_qubits,
        } => {
            let kind = ExperimentKind::parse(&name).ok_or_else(|| {
                CliError::Validation(format!("unknown experiment `{name}` (expected kraus_identity, prob_identity, qft_mixed or custom)"))
            })?;
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if cfg.experiment != kind {
                return Err(ConfigError::new("experiment", format!("config is for {} but {name} was requested", cfg.experiment.label())).into());
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = n_qubits {
                cfg.n_qubits = n;
            }
            let start = Instant::now();
            let res = run_experiment(&cfg, threads)?;
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or(&name).to_string();
            let base = match n_qubits {
                Some(n) => format!("{stem}_n{n}"),
                None => stem,
            };
            std::fs::create_dir_all(&dir).map_err(io)?;
            let csv = dir.join(format!("{base}.csv"));
            let json = dir.join(format!("{base}.json"));
            emit_csv(&res, &csv)?;
            emit_json(&res, &json)?;
            writeln!(out, "wrote {}", csv.display()).map_err(io)?;
            writeln!(out, "wrote {}", json.display()).map_err(io)?;
            if svg {
                let path = dir.join(format!("{base}.svg"));
                emit_svg_plot(&res, &path)?;
                writeln!(out, "wrote {}", path.display()).map_err(io)?;
            }
            for e in res.estimates.iter().filter(|e| e.source.is_none()) {
                writeln!(out, "{} = {} ({})", e.kind, e.value, e.method).map_err(io)?;
            }
            eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
        }
        Command::EstimateQ {
            channel,
            samples,
            seed,
            sampler,
        } => {
            let k = load_channel(&channel)?;
            if samples == 0 {
                return Err(CliError::Validation(String::from("--samples must be at least 1")));
            }
            let sampler = SamplerSpec::from(sampler).sampler();
            let pool = parallel::build_pool(threads).map_err(CliError::Runtime)?;
            let q = pool.install(|| parallel::estimate_q(&k, samples, seed, sampler)).map_err(CliError::runtime)?;
            writeln!(out, "{}", q.value).map_err(io)?;
            eprintln!("samples {} seed {} method {}", q.samples, seed, q.method);
        }
        Command::EstimateDelta { channel } => {
            let delta = match load_channel(&channel)? {
                GateError::StructuredSq(k) => estimate_delta(&k),
                GateError::StructuredDq(k) => estimate_delta_dq(&k),
                _ => return Err(CliError::Validation(String::from("estimate-delta needs a structured_sq or structured_dq channel"))),
            };
            writeln!(out, "{}", delta.value).map_err(io)?;
            let q = q_from_delta(delta.value).map_err(CliError::runtime)?;
            eprintln!("method {} q_from_delta {q}", delta.method);
        }
        Command::Compose { lhs, rhs, out: path } => {
            let composed = match (load_channel(&lhs)?, load_channel(&rhs)?) {
                (GateError::StructuredSq(a), GateError::StructuredSq(b)) => {
                    GateError::StructuredSq(compose_sq_kraus(&a, &b).map_err(|e| CliError::Validation(e.to_string()))?)
                }
                (GateError::StructuredDq(a), GateError::StructuredDq(b)) => {
                    GateError::StructuredDq(compose_dq_kraus(&a, &b).map_err(|e| CliError::Validation(e.to_string()))?)
                }
                _ => return Err(CliError::Validation(String::from("compose needs two structured_sq or two structured_dq channels"))),
            };
            write_channel(&path, &composed)?;
            writeln!(out, "wrote {}", path.display()).map_err(io)?;
        }
        Command::Convert { prob, out: path } => {
            let k = match load_channel(&prob)? {
                GateError::Probabilistic(p) => prob_to_kraus(&p).map_err(|e| CliError::Validation(e.to_string()))?,
                _ => return Err(CliError::Validation(String::from("convert needs a probabilistic channel"))),
            };
            write_channel(&path, &GateError::StructuredSq(k))?;
            writeln!(out, "wrote {}", path.display()).map_err(io)?;
        }
        Command::Simulate { config, seed } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.bound.auto_estimate = false;
            let res = run_experiment(&cfg, threads)?;
            out.write_all(csv_string(&res).as_bytes()).map_err(io)?;
        }
    }
    Ok(())
}
