//! Experiment configuration, seeded execution, persisted traces and
//! summaries, and long-format plot tables.

mod config;
mod plot;

pub use config::{
    AlgorithmKind, ClassSpec, ExperimentConfig, GameSource, GeneratorSpec, Threshold,
};
pub use plot::{emit_plot_data, load_traces, PlotRow, PlotTable};

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{ContinuousState, DynamicsConfig, SmoothDynamics};
use crate::error::{Error, Result};
use crate::game::{PayoffModel, StochasticGame};
use crate::learners::{Algorithm, Learner};
use crate::trace::Trace;

/// RNG of one seed: the master seed selects the key and the seed value the
/// stream, so adding or reordering seeds never changes existing streams.
pub fn seed_rng(master_seed: u64, seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(seed);
    rng
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Final metrics of one seed, or the error that stopped it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub trace_file: Option<String>,
    pub error: Option<String>,
    /// Last trace row, by column.
    pub final_metrics: BTreeMap<String, f64>,
}

/// Across-seed distribution of one final metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdOutcome {
    pub metric: String,
    pub max: f64,
    pub min_pass_fraction: f64,
    pub passed_seeds: usize,
    pub total_seeds: usize,
    pub pass: bool,
}

/// Result of [`run_experiment`], persisted as `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryReport {
    pub algorithm: String,
    pub seeds: Vec<SeedOutcome>,
    pub metrics: BTreeMap<String, MetricSummary>,
    pub thresholds: Vec<ThresholdOutcome>,
    /// True iff every seed finished and every threshold holds.
    pub pass: bool,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Runs one seed of a validated configuration.
pub fn run_seed(
    cfg: &ExperimentConfig,
    game: &StochasticGame<f64>,
    seed: u64,
) -> Result<Trace<f64>> {
    let mut rng = seed_rng(cfg.master_seed, seed);
    let beta = cfg.temperature()?;
    match cfg.algorithm {
        kind @ (AlgorithmKind::Sfp | AlgorithmKind::Mfp) => {
            let algorithm = if kind == AlgorithmKind::Sfp {
                Algorithm::Sfp
            } else {
                Algorithm::Mfp
            };
            let learner = Learner::new(algorithm, beta)
                .with_noise(cfg.noise.clone())
                .with_regularizer(cfg.regularizer);
            let steps = cfg
                .steps
                .ok_or_else(|| Error::Config("missing steps".into()))?;
            let mut state = learner.initial_state(game, cfg.schedule, cfg.initial_state, rng)?;
            learner.run_standard(&mut state, game, steps, cfg.cadence)
        }
        AlgorithmKind::Sbrd | AlgorithmKind::Mbrd => {
            let t_end = cfg
                .t_end
                .ok_or_else(|| Error::Config("missing t_end".into()))?;
            let mut initial = ContinuousState::initial(game, cfg.algorithm == AlgorithmKind::Mbrd);
            if cfg.random_initial_profile {
                for s in 0..game.num_states() {
                    for block in initial.profile.at_mut(s) {
                        let draws: Vec<f64> =
                            block.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
                        let total: f64 = draws.iter().sum();
                        for (p, d) in block.iter_mut().zip(draws) {
                            *p = d / total;
                        }
                    }
                }
            }
            let mut dyn_cfg = DynamicsConfig::new(beta, cfg.rate, cfg.lambda.clone());
            dyn_cfg.regularizer = cfg.regularizer;
            let system = SmoothDynamics::new(game, dyn_cfg, &initial)?;
            let cadence = usize::try_from(cfg.cadence)
                .map_err(|_| Error::Config("cadence too large".into()))?;
            system
                .run_standard(&initial, t_end, cfg.step_size, cfg.method, cadence)
                .map(|(_, trace)| trace)
        }
    }
}

/// Validates `cfg`, runs every seed (in parallel), writes one CSV per seed
/// and `summary.json` into the output directory, and returns the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SummaryReport> {
    let game = cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let results: Vec<(u64, Result<Trace<f64>>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| (seed, run_seed(cfg, &game, seed)))
        .collect();

    let mut seeds = Vec::with_capacity(results.len());
    for (seed, result) in results {
        let outcome = match result {
            Ok(trace) => {
                let name = trace_file_name(seed);
                write_trace(&cfg.output_dir.join(&name), &trace)?;
                let final_metrics = trace
                    .rows
                    .last()
                    .map(|row| {
                        trace
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.values.iter().copied())
                            .collect()
                    })
                    .unwrap_or_default();
                SeedOutcome {
                    seed,
                    trace_file: Some(name),
                    error: None,
                    final_metrics,
                }
            }
            Err(e) => SeedOutcome {
                seed,
                trace_file: None,
                error: Some(e.to_string()),
                final_metrics: BTreeMap::new(),
            },
        };
        seeds.push(outcome);
    }
    let report = summarize(cfg, seeds);
    write_summary(&cfg.output_dir.join(SUMMARY_FILE), &report)?;
    Ok(report)
}

fn summarize(cfg: &ExperimentConfig, seeds: Vec<SeedOutcome>) -> SummaryReport {
    let mut per_metric: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in &seeds {
        for (k, &v) in &s.final_metrics {
            per_metric.entry(k.clone()).or_default().push(v);
        }
    }
    let metrics = per_metric
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            let summary = MetricSummary {
                min: v[0],
                q25: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q75: quantile(&v, 0.75),
                max: v[v.len() - 1],
            };
            (k, summary)
        })
        .collect();
    let thresholds: Vec<ThresholdOutcome> = cfg
        .thresholds
        .iter()
        .map(|t| {
            let passed_seeds = seeds
                .iter()
                .filter(|s| s.final_metrics.get(&t.metric).is_some_and(|&v| v <= t.max))
                .count();
            let needed = (t.min_pass_fraction * seeds.len() as f64 - 1e-9).ceil() as usize;
            ThresholdOutcome {
                metric: t.metric.clone(),
                max: t.max,
                min_pass_fraction: t.min_pass_fraction,
                passed_seeds,
                total_seeds: seeds.len(),
                pass: passed_seeds >= needed,
            }
        })
        .collect();
    let pass = seeds.iter().all(|s| s.error.is_none()) && thresholds.iter().all(|t| t.pass);
    SummaryReport {
        algorithm: cfg.algorithm.to_string(),
        seeds,
        metrics,
        thresholds,
        pass,
    }
}

pub fn write_trace(path: &Path, trace: &Trace<f64>) -> Result<()> {
    let file = fs::File::create(path)?;
    trace.write_csv(BufWriter::new(file))
}

fn write_summary(path: &Path, report: &SummaryReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Output paths a configuration will produce.
pub fn expected_outputs(cfg: &ExperimentConfig) -> Vec<PathBuf> {
    cfg.seeds
        .iter()
        .map(|&s| cfg.output_dir.join(trace_file_name(s)))
        .chain(std::iter::once(cfg.output_dir.join(SUMMARY_FILE)))
        .collect()
}
