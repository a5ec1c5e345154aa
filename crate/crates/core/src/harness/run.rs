use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ProblemFamily, Schedule};
use crate::algorithms::{
    run_centralized_extra_step, run_decentralized_extra_step, run_extra_step_local_sgd,
    run_local_sgda, Checkpoint, RunOptions, RunResult, RunStatus,
};
use crate::error::{Error, Result};
use crate::metrics::{error_floor, Metric, MetricSuite};
use crate::model::{ProblemInstance, StochasticOracle};
use crate::problems::{lb_saddle_point, solve_reference, LowerBoundSpec};
use crate::topology::GossipMatrix;

pub const CSV_HEADER: [&str; 7] = [
    "checkpoint",
    "comm_rounds",
    "oracle_calls",
    "dist_sq",
    "gap",
    "grad_norm_sq",
    "consensus_err",
];

const METRICS: [Metric; 4] = [Metric::DistSq, Metric::Gap, Metric::GradNormSq, Metric::ConsensusErr];
const METRIC_NAMES: [&str; 4] = ["dist_sq", "gap", "grad_norm_sq", "consensus_err"];
const REFERENCE_MAX_ITERS: usize = 5_000_000;

/// Files and notes produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub seed_files: Vec<PathBuf>,
    pub aggregate_files: Vec<PathBuf>,
    pub metadata: PathBuf,
    pub warnings: Vec<String>,
    pub groups: Vec<GroupSummary>,
}

/// One step size of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub label: String,
    pub gamma: f64,
    pub within_theory: bool,
    pub seeds: Vec<SeedSummary>,
    pub aggregate: String,
    /// Seed-mean of the last recorded `dist_sq`, when available.
    pub final_dist_sq: Option<f64>,
    pub final_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub file: String,
    pub status: RunStatus,
    pub comm_rounds_used: usize,
    pub oracle_samples_per_node: u64,
    pub floor_dist_sq: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct ReferenceInfo {
    available: bool,
    residual: Option<f64>,
    iterations: Option<usize>,
    note: Option<String>,
}

/// Everything needed to run single seeds of a configuration.
pub struct Prepared {
    pub problem: ProblemInstance,
    pub gossip: Option<GossipMatrix>,
    pub schedules: Vec<Schedule>,
    pub metrics: MetricSuite,
    pub z0: Option<DVector<f64>>,
    reference: ReferenceInfo,
    pub warnings: Vec<String>,
}

type Validated = (ProblemInstance, Option<GossipMatrix>, Option<DVector<f64>>, Vec<Schedule>);

fn validate(config: &ExperimentConfig) -> Result<Validated> {
    if config.seeds == 0 {
        return Err(Error::Config("seeds must be >= 1".into()));
    }
    let w = config.metrics.floor_window;
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::Config(format!("floor_window must lie in (0, 1], got {w}")));
    }
    let problem = config.build_problem()?;
    let gossip = config.build_gossip(problem.nodes())?;
    let z0 = config.start(&problem)?;
    let schedules = config
        .gammas(&problem)?
        .into_iter()
        .map(|g| config.schedule(g))
        .collect::<Result<Vec<_>>>()?;
    Ok((problem, gossip, z0, schedules))
}

/// Cross-field validation only; no reference solve.
pub fn prepare_check(config: &ExperimentConfig) -> Result<()> {
    validate(config).map(|_| ())
}

/// Validates `config` and builds the problem, schedules and reference.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let (problem, gossip, z0, schedules) = validate(config)?;
    let mut warnings = Vec::new();
    for s in &schedules {
        if !s.within_theory(&problem) {
            warnings.push(format!(
                "step {:e} exceeds the theoretical bound for {}",
                s.gamma(),
                config.algorithm_name()
            ));
        }
    }
    let (reference_point, reference) = if config.metrics.dist_sq {
        reference_for(config, &problem)
    } else {
        (
            None,
            ReferenceInfo {
                available: false,
                residual: None,
                iterations: None,
                note: Some("dist_sq disabled".into()),
            },
        )
    };
    if let Some(note) = &reference.note {
        if config.metrics.dist_sq {
            warnings.push(format!("dist_sq skipped: {note}"));
        }
    }
    let metrics = MetricSuite {
        reference: reference_point,
        gap: config.metrics.gap,
        grad_norm: config.metrics.grad_norm,
        floor_window: config.metrics.floor_window,
    };
    Ok(Prepared {
        problem,
        gossip,
        schedules,
        metrics,
        z0,
        reference,
        warnings,
    })
}

fn reference_for(config: &ExperimentConfig, problem: &ProblemInstance) -> (Option<DVector<f64>>, ReferenceInfo) {
    if let ProblemFamily::LowerBound { l, mu, n, delta } = &config.problem.family {
        let spec = LowerBoundSpec {
            l: *l,
            mu: *mu,
            n: *n,
            d: *delta,
            b_nodes: vec![0],
        };
        return match lb_saddle_point(&spec) {
            Ok(z) => {
                let residual = problem.eval_mean(z.as_vector()).map(|f| f.norm()).ok();
                (
                    Some(z.into_vector()),
                    ReferenceInfo {
                        available: true,
                        residual,
                        iterations: None,
                        note: None,
                    },
                )
            }
            Err(e) => (None, unavailable(e)),
        };
    }
    match solve_reference(problem, config.metrics.reference_tol, REFERENCE_MAX_ITERS) {
        Ok(r) => (
            Some(r.point.into_vector()),
            ReferenceInfo {
                available: true,
                residual: Some(r.residual),
                iterations: Some(r.iterations),
                note: None,
            },
        ),
        Err(e) => (None, unavailable(e)),
    }
}

fn unavailable(e: Error) -> ReferenceInfo {
    ReferenceInfo {
        available: false,
        residual: None,
        iterations: None,
        note: Some(e.to_string()),
    }
}

impl Prepared {
    /// Runs one seed with the `index`-th step size.
    pub fn run_seed(&self, index: usize, seed: u64, checkpoint_every: usize) -> Result<RunResult> {
        let oracle = StochasticOracle::new(&self.problem, seed);
        let opts = RunOptions {
            z0: self.z0.clone(),
            metrics: self.metrics.clone(),
            checkpoint_every,
            parallel_nodes: false,
            stop_dist_sq: None,
        };
        match &self.schedules[index] {
            Schedule::Centralized(s) => run_centralized_extra_step(&oracle, s, &opts),
            Schedule::Decentralized(s) => {
                let g = self
                    .gossip
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing gossip matrix".into()))?;
                run_decentralized_extra_step(&oracle, g, s, &opts)
            }
            Schedule::ExtraStepLocal(s) => run_extra_step_local_sgd(&oracle, s, &opts),
            Schedule::DescentAscentLocal(s) => run_local_sgda(&oracle, s, &opts),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

/// Per-seed trajectory in the standard column layout.
pub fn write_trajectory_csv(path: &Path, checkpoints: &[Checkpoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(CSV_HEADER)?;
    for c in checkpoints {
        w.write_record([
            c.t.to_string(),
            c.comm_rounds.to_string(),
            c.oracle_calls.to_string(),
            fmt_opt(c.dist_sq),
            fmt_opt(c.gap),
            fmt_opt(c.grad_norm_sq),
            fmt_opt(c.consensus_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-checkpoint mean/min/max over runs. Runs that stopped early contribute
/// only to the checkpoints they reached; `seeds` counts contributors.
pub fn write_aggregate_csv(path: &Path, runs: &[RunResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["checkpoint".to_string(), "comm_rounds".into(), "oracle_calls".into(), "seeds".into()];
    for name in METRIC_NAMES {
        for stat in ["mean", "min", "max"] {
            header.push(format!("{name}_{stat}"));
        }
    }
    w.write_record(&header)?;
    let longest = runs.iter().map(|r| r.checkpoints.len()).max().unwrap_or(0);
    for i in 0..longest {
        let present: Vec<&Checkpoint> = runs.iter().filter_map(|r| r.checkpoints.get(i)).collect();
        let first = present[0];
        let mut row = vec![
            first.t.to_string(),
            first.comm_rounds.to_string(),
            first.oracle_calls.to_string(),
            present.len().to_string(),
        ];
        for metric in METRICS {
            let values: Vec<f64> = present.iter().filter_map(|c| metric.of(c)).collect();
            if values.is_empty() {
                row.extend([String::new(), String::new(), String::new()]);
            } else {
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                // Rounding in the mean must not break min <= mean <= max.
                row.extend([mean.clamp(min, max).to_string(), min.to_string(), max.to_string()]);
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn check_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let probe = dir.join(".write_probe");
    File::create(&probe)?;
    std::fs::remove_file(&probe)?;
    Ok(())
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every (step size, seed) pair and writes per-seed CSVs, one aggregate
/// CSV per step size, and `metadata.json`.
///
/// All validation (config, problem, schedules, output directory) happens
/// before the first run starts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    prepare_check(config)?;
    check_writable(&config.output_dir)?;
    let prepared = prepare(config)?;
    let alg = config.algorithm_name();
    let multi = prepared.schedules.len() > 1;
    let seeds: Vec<u64> = (0..config.seeds).map(|i| config.seed_base + i).collect();
    let mut outcome = ExperimentOutcome {
        seed_files: Vec::new(),
        aggregate_files: Vec::new(),
        metadata: config.output_dir.join("metadata.json"),
        warnings: prepared.warnings.clone(),
        groups: Vec::new(),
    };

    for (index, sched) in prepared.schedules.iter().enumerate() {
        let label = if multi { format!("{alg}_g{index}") } else { alg.to_string() };
        let runs: Vec<RunResult> = in_pool(config.workers, || {
            seeds
                .par_iter()
                .map(|&seed| prepared.run_seed(index, seed, config.checkpoint_every))
                .collect::<Result<Vec<_>>>()
        })??;
        let mut seed_summaries = Vec::new();
        for (seed, run) in seeds.iter().zip(&runs) {
            let name = format!("{label}_seed{seed}.csv");
            let path = config.output_dir.join(&name);
            write_trajectory_csv(&path, &run.checkpoints)?;
            outcome.seed_files.push(path);
            seed_summaries.push(SeedSummary {
                seed: *seed,
                file: name,
                status: run.status,
                comm_rounds_used: run.comm_rounds_used,
                oracle_samples_per_node: run.oracle_samples_per_node,
                floor_dist_sq: error_floor(run, Metric::DistSq, config.metrics.floor_window).ok(),
            });
        }
        let aggregate = format!("{label}_aggregate.csv");
        let path = config.output_dir.join(&aggregate);
        write_aggregate_csv(&path, &runs)?;
        outcome.aggregate_files.push(path);
        let final_mean = |metric: Metric| -> Option<f64> {
            let v: Option<Vec<f64>> = runs.iter().map(|r| r.checkpoints.last().and_then(|c| metric.of(c))).collect();
            v.map(|v| v.iter().sum::<f64>() / v.len() as f64)
        };
        outcome.groups.push(GroupSummary {
            label,
            gamma: sched.gamma(),
            within_theory: sched.within_theory(&prepared.problem),
            seeds: seed_summaries,
            aggregate,
            final_dist_sq: final_mean(Metric::DistSq),
            final_gap: final_mean(Metric::Gap),
        });
    }

    let meta = prepared.problem.meta();
    let metadata = serde_json::json!({
        "name": config.name,
        "library_version": crate::VERSION,
        "config": config,
        "config_toml": config.to_toml()?,
        "problem": {
            "nodes": prepared.problem.nodes(),
            "nx": prepared.problem.nx(),
            "ny": prepared.problem.ny(),
            "l": meta.l,
            "l_max": meta.l_max,
            "mu": meta.mu,
            "sigma2": meta.sigma2,
        },
        "reference": prepared.reference,
        "seeds": seeds,
        "groups": outcome.groups,
        "warnings": outcome.warnings,
    });
    let mut f = BufWriter::new(File::create(&outcome.metadata)?);
    serde_json::to_writer_pretty(&mut f, &metadata)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(outcome)
}
