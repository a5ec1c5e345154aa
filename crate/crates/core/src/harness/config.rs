use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algorithms::{ScheduleCentralized, ScheduleDecentralized, ScheduleLocal};
use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::problems::{
    gen_bilinear, gen_lower_bound_instance, gen_opposed_rotation, problem_from_json, regularize,
    regularize_with_modulus, LowerBoundSpec,
};
use crate::topology::{GossipMatrix, Topology, TopologyKind};

/// Default γ-grid: `γ = 1/(c·L)` for each `c`.
pub const DEFAULT_GAMMA_GRID: [f64; 5] = [4.0, 15.0, 50.0, 150.0, 500.0];

/// Top-level experiment description, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemConfig,
    /// Needed by the decentralized method only.
    #[serde(default)]
    pub topology: Option<TopologyKind>,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub step: StepConfig,
    /// Number of seeds `R`.
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Seeds are `seed_base, seed_base + 1, …`.
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default = "default_every")]
    pub checkpoint_every: usize,
    /// Starting point; defaults to the projected origin.
    #[serde(default)]
    pub z0: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    /// Upper bound on concurrently running seeds; 0 means the rayon default.
    #[serde(default)]
    pub workers: usize,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_seeds() -> u64 {
    1
}

fn default_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(flatten)]
    pub family: ProblemFamily,
    /// Oracle variance `σ²`.
    #[serde(default)]
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemFamily {
    Bilinear {
        n: usize,
        nodes: usize,
        lambda_max: f64,
        coef_bound: f64,
        seed: u64,
        /// Target accuracy `ε` for the `ε/(4Ω²)` regularization.
        #[serde(default)]
        epsilon: Option<f64>,
        /// Explicit regularization modulus; wins over `epsilon`.
        #[serde(default)]
        mu_reg: Option<f64>,
    },
    OpposedRotation {
        n: usize,
        nodes: usize,
        eps: f64,
        spin: f64,
        radius: f64,
        seed: u64,
    },
    /// Lower-bound construction on a path of `delta + 1` nodes.
    LowerBound {
        l: f64,
        mu: f64,
        n: usize,
        delta: usize,
    },
    /// Problem stored as JSON.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    /// Budget form (`comm_budget`, `oracle_budget`) or explicit
    /// (`iterations`, `batch`).
    CentralizedExtraStep {
        #[serde(default)]
        comm_budget: Option<usize>,
        #[serde(default)]
        oracle_budget: Option<usize>,
        #[serde(default)]
        iterations: Option<usize>,
        #[serde(default)]
        batch: Option<usize>,
        #[serde(default = "one")]
        r: usize,
    },
    DecentralizedExtraStep {
        #[serde(default)]
        comm_budget: Option<usize>,
        #[serde(default)]
        oracle_budget: Option<usize>,
        #[serde(default)]
        iterations: Option<usize>,
        #[serde(default)]
        batch: Option<usize>,
        p: usize,
    },
    ExtraStepLocalSgd { steps: usize, h: usize },
    LocalSgda { steps: usize, h: usize },
}

fn one() -> usize {
    1
}

/// Which constant the step is scaled by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepBase {
    #[default]
    L,
    LMax,
}

/// Exactly one of `gamma`, `scale` or `grid`; with none, the default grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    #[serde(default)]
    pub gamma: Option<f64>,
    /// `γ = 1/(scale·L)`.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub base: StepBase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "yes")]
    pub dist_sq: bool,
    #[serde(default = "yes")]
    pub gap: bool,
    #[serde(default = "yes")]
    pub grad_norm: bool,
    #[serde(default = "default_window")]
    pub floor_window: f64,
    #[serde(default = "default_reference_tol")]
    pub reference_tol: f64,
}

fn yes() -> bool {
    true
}

fn default_window() -> f64 {
    crate::metrics::DEFAULT_FLOOR_WINDOW
}

fn default_reference_tol() -> f64 {
    crate::problems::DEFAULT_REFERENCE_TOL
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            dist_sq: true,
            gap: true,
            grad_norm: true,
            floor_window: default_window(),
            reference_tol: default_reference_tol(),
        }
    }
}

/// A validated schedule for one step size.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Centralized(ScheduleCentralized),
    Decentralized(ScheduleDecentralized),
    ExtraStepLocal(ScheduleLocal),
    DescentAscentLocal(ScheduleLocal),
}

impl Schedule {
    pub fn gamma(&self) -> f64 {
        match self {
            Schedule::Centralized(s) => s.gamma,
            Schedule::Decentralized(s) => s.gamma,
            Schedule::ExtraStepLocal(s) | Schedule::DescentAscentLocal(s) => s.gamma,
        }
    }

    pub fn within_theory(&self, problem: &ProblemInstance) -> bool {
        let meta = problem.meta();
        match self {
            Schedule::Centralized(s) => s.within_theory(meta),
            Schedule::Decentralized(s) => s.within_theory(meta),
            Schedule::ExtraStepLocal(s) => s.within_theory(meta),
            // No convergence theory for the baseline.
            Schedule::DescentAscentLocal(_) => true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path` and applies `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings). Overrides win.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut value: toml::Table = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_problem(&self) -> Result<ProblemInstance> {
        let p = match &self.problem.family {
            ProblemFamily::Bilinear {
                n,
                nodes,
                lambda_max,
                coef_bound,
                seed,
                epsilon,
                mu_reg,
            } => {
                let base = gen_bilinear(*n, *nodes, *lambda_max, *coef_bound, *seed)?;
                let anchor = base.default_start();
                match (mu_reg, epsilon) {
                    (Some(mu), _) => regularize_with_modulus(&base, *mu, &anchor)?,
                    (None, Some(eps)) => regularize(&base, *eps, &anchor)?,
                    (None, None) => base,
                }
            }
            ProblemFamily::OpposedRotation {
                n,
                nodes,
                eps,
                spin,
                radius,
                seed,
            } => gen_opposed_rotation(*n, *nodes, *eps, *spin, *radius, *seed)?,
            ProblemFamily::LowerBound { l, mu, n, delta } => {
                let topo = Topology::build(TopologyKind::Path, delta + 1)?;
                let spec = LowerBoundSpec {
                    l: *l,
                    mu: *mu,
                    n: *n,
                    d: *delta,
                    b_nodes: vec![0],
                };
                gen_lower_bound_instance(&spec, &topo)?
            }
            ProblemFamily::File { path } => problem_from_json(&std::fs::read_to_string(path)?)?,
        };
        p.with_sigma2(self.problem.sigma2)
    }

    pub fn build_gossip(&self, nodes: usize) -> Result<Option<GossipMatrix>> {
        match (&self.algorithm, &self.topology) {
            (AlgorithmConfig::DecentralizedExtraStep { .. }, None) => Err(Error::Config(
                "decentralized_extra_step needs a [topology] table".into(),
            )),
            (AlgorithmConfig::DecentralizedExtraStep { .. }, Some(t)) => {
                Ok(Some(GossipMatrix::laplacian(&Topology::build(*t, nodes)?)?))
            }
            _ => Ok(None),
        }
    }

    /// Step sizes to run, resolved against the problem constants.
    pub fn gammas(&self, problem: &ProblemInstance) -> Result<Vec<f64>> {
        let s = &self.step;
        let set = [s.gamma.is_some(), s.scale.is_some(), s.grid.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if set > 1 {
            return Err(Error::Config("step: give only one of gamma, scale, grid".into()));
        }
        let base = match s.base {
            StepBase::L => problem.meta().l,
            StepBase::LMax => problem.meta().l_max,
        };
        let scaled = |c: f64| -> Result<f64> {
            if !(c > 0.0) || !(base > 0.0) {
                return Err(Error::Config(format!("cannot scale step by {c} with constant {base}")));
            }
            Ok(1.0 / (c * base))
        };
        let gammas = if let Some(g) = s.gamma {
            vec![g]
        } else if let Some(c) = s.scale {
            vec![scaled(c)?]
        } else {
            let grid = s.grid.clone().unwrap_or_else(|| DEFAULT_GAMMA_GRID.to_vec());
            grid.into_iter().map(scaled).collect::<Result<_>>()?
        };
        if gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::Config(format!("step sizes must be positive, got {gammas:?}")));
        }
        Ok(gammas)
    }

    pub fn schedule(&self, gamma: f64) -> Result<Schedule> {
        let pick = |budget: (Option<usize>, Option<usize>), explicit: (Option<usize>, Option<usize>)| {
            match (budget, explicit) {
                ((Some(k), Some(t)), (None, None)) => Ok((true, k, t)),
                ((None, None), (Some(k), Some(b))) => Ok((false, k, b)),
                _ => Err(Error::Config(
                    "give either comm_budget and oracle_budget, or iterations and batch".into(),
                )),
            }
        };
        Ok(match &self.algorithm {
            AlgorithmConfig::CentralizedExtraStep {
                comm_budget,
                oracle_budget,
                iterations,
                batch,
                r,
            } => {
                let s = match pick((*comm_budget, *oracle_budget), (*iterations, *batch))? {
                    (true, k, t) => ScheduleCentralized::new(k, t, *r, gamma)?,
                    (false, k, b) => ScheduleCentralized::from_iterations(k, b, *r, gamma)?,
                };
                Schedule::Centralized(s)
            }
            AlgorithmConfig::DecentralizedExtraStep {
                comm_budget,
                oracle_budget,
                iterations,
                batch,
                p,
            } => {
                let s = match pick((*comm_budget, *oracle_budget), (*iterations, *batch))? {
                    (true, k, t) => ScheduleDecentralized::new(k, t, *p, gamma)?,
                    (false, k, b) => ScheduleDecentralized::from_iterations(k, b, *p, gamma)?,
                };
                Schedule::Decentralized(s)
            }
            AlgorithmConfig::ExtraStepLocalSgd { steps, h } => {
                Schedule::ExtraStepLocal(ScheduleLocal::every(*steps, *h, gamma)?)
            }
            AlgorithmConfig::LocalSgda { steps, h } => {
                Schedule::DescentAscentLocal(ScheduleLocal::every(*steps, *h, gamma)?)
            }
        })
    }

    pub fn start(&self, problem: &ProblemInstance) -> Result<Option<DVector<f64>>> {
        match &self.z0 {
            None => Ok(None),
            Some(v) => {
                crate::error::check_dim(problem.dim(), v.len())?;
                Ok(Some(DVector::from_vec(v.clone())))
            }
        }
    }

    pub fn algorithm_name(&self) -> &'static str {
        match self.algorithm {
            AlgorithmConfig::CentralizedExtraStep { .. } => "centralized_extra_step",
            AlgorithmConfig::DecentralizedExtraStep { .. } => "decentralized_extra_step",
            AlgorithmConfig::ExtraStepLocalSgd { .. } => "extra_step_local_sgd",
            AlgorithmConfig::LocalSgda { .. } => "local_sgda",
        }
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
