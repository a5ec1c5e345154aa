use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{
    AlgorithmConfig, ExperimentConfig, MetricsConfig, ProblemConfig, ProblemFamily, StepBase, StepConfig,
    DEFAULT_GAMMA_GRID,
};
use super::run::{run_experiment, ExperimentOutcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::Config(format!("unknown scale `{other}` (desk or paper)"))),
        }
    }
}

/// Instance and budget per scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    pub n: usize,
    pub nodes: usize,
    pub lambda_max: f64,
    pub sigma2: f64,
    /// Local steps of the local methods.
    pub steps: usize,
    pub seeds: u64,
    pub checkpoint_every: usize,
}

impl Scale {
    pub fn params(self) -> ScaleParams {
        match self {
            Scale::Desk => ScaleParams {
                n: 20,
                nodes: 10,
                lambda_max: 100.0,
                sigma2: 100.0,
                steps: 3000,
                seeds: 5,
                checkpoint_every: 3,
            },
            Scale::Paper => ScaleParams {
                n: 100,
                nodes: 100,
                lambda_max: 1000.0,
                sigma2: 10000.0,
                steps: 30000,
                seeds: 5,
                checkpoint_every: 30,
            },
        }
    }
}

/// One experiment inside a group.
#[derive(Debug, Clone)]
pub struct Figure1Run {
    pub group: &'static str,
    pub config: ExperimentConfig,
}

/// All configurations of the suite, rooted at `out`.
///
/// Every run starts from zero and uses equal oracle budgets per node
/// (`2·steps` samples), so the server method with batch `b` gets
/// `steps/b` iterations.
pub fn figure1_configs(scale: Scale, out: &Path) -> Vec<Figure1Run> {
    let p = scale.params();
    let base = |group: &'static str, label: String, algorithm: AlgorithmConfig, step: StepConfig| Figure1Run {
        group,
        config: ExperimentConfig {
            name: format!("figure1_{group}_{label}"),
            problem: ProblemConfig {
                family: ProblemFamily::Bilinear {
                    n: p.n,
                    nodes: p.nodes,
                    lambda_max: p.lambda_max,
                    coef_bound: p.lambda_max,
                    seed: 1,
                    epsilon: None,
                    mu_reg: None,
                },
                sigma2: p.sigma2,
            },
            topology: None,
            algorithm,
            step,
            seeds: p.seeds,
            seed_base: 0,
            metrics: MetricsConfig {
                grad_norm: false,
                ..MetricsConfig::default()
            },
            checkpoint_every: p.checkpoint_every,
            z0: Some(vec![0.0; 2 * p.n]),
            output_dir: out.join(group).join(label),
            workers: 0,
        },
    };
    let grid = || StepConfig {
        grid: Some(DEFAULT_GAMMA_GRID.to_vec()),
        base: StepBase::L,
        ..StepConfig::default()
    };
    let fifteen = || StepConfig {
        scale: Some(15.0),
        base: StepBase::L,
        ..StepConfig::default()
    };
    let local = |h| AlgorithmConfig::ExtraStepLocalSgd { steps: p.steps, h };
    let server = |batch: usize| AlgorithmConfig::CentralizedExtraStep {
        comm_budget: None,
        oracle_budget: None,
        iterations: Some(p.steps / batch),
        batch: Some(batch),
        r: 1,
    };

    let mut runs = vec![
        base("a", "eslsgd_h3".into(), local(3), grid()),
        base(
            "a",
            "local_sgda_h3".into(),
            AlgorithmConfig::LocalSgda { steps: p.steps, h: 3 },
            grid(),
        ),
    ];
    for h in [1, 2, 3, 5, 10] {
        runs.push(base("b", format!("eslsgd_h{h}"), local(h), fifteen()));
    }
    let mut server_b1 = base("b", "server_b1".into(), server(1), fifteen());
    server_b1.config.checkpoint_every = 1;
    runs.push(server_b1);
    runs.push(base("c", "eslsgd_h3".into(), local(3), grid()));
    let mut server_b6 = base("c", "server_b6".into(), server(6), grid());
    server_b6.config.checkpoint_every = 1;
    runs.push(server_b6);
    runs
}

#[derive(Debug, Clone)]
pub struct Figure1Report {
    pub out: PathBuf,
    pub runs: Vec<(Figure1Run, ExperimentOutcome)>,
    pub summary: PathBuf,
}

/// Runs the three groups and writes `summary.csv` with, per run and step
/// size, the seed-mean final distance and gap and whether it is the best
/// step of its run.
pub fn figure1_suite(scale: Scale, out: &Path) -> Result<Figure1Report> {
    std::fs::create_dir_all(out)?;
    let configs = figure1_configs(scale, out);
    // Validate everything before the first run.
    for r in &configs {
        super::run::prepare_check(&r.config)?;
    }
    let mut runs = Vec::new();
    for r in configs {
        let outcome = run_experiment(&r.config)?;
        runs.push((r, outcome));
    }
    let summary = out.join("summary.csv");
    let mut w = BufWriter::new(File::create(&summary)?);
    writeln!(w, "group,run,label,gamma,final_dist_sq,final_gap,best_step")?;
    for (r, o) in &runs {
        let best = o
            .groups
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.final_dist_sq.filter(|v| v.is_finite()).map(|v| (i, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i);
        for (i, g) in o.groups.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.group,
                r.config.name,
                g.label,
                g.gamma,
                g.final_dist_sq.map(|v| v.to_string()).unwrap_or_default(),
                g.final_gap.map(|v| v.to_string()).unwrap_or_default(),
                best == Some(i)
            )?;
        }
    }
    w.flush()?;
    Ok(Figure1Report {
        out: out.to_path_buf(),
        runs,
        summary,
    })
}
