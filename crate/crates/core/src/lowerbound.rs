//! Probes for the zero-chain construction: how far nonzero coordinates
//! spread per communication round, and the geometric approximation error of
//! the construction's solution.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    run_centralized_extra_step_observed, run_decentralized_extra_step_observed,
    run_extra_step_local_sgd_observed, Observer, RunOptions, ScheduleCentralized,
    ScheduleDecentralized, ScheduleLocal,
};
use crate::error::{Error, Result};
use crate::metrics::MetricSuite;
use crate::model::StochasticOracle;
use crate::problems::{gen_lower_bound_instance, lb_normal_solve, lb_reference_solution, LowerBoundSpec};
use crate::topology::{GossipMatrix, Topology, TopologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeAlgorithm {
    Centralized,
    Decentralized,
    LocalExtraStep,
}

impl ProbeAlgorithm {
    pub const ALL: [ProbeAlgorithm; 3] = [
        ProbeAlgorithm::Centralized,
        ProbeAlgorithm::Decentralized,
        ProbeAlgorithm::LocalExtraStep,
    ];
}

/// Zero-chain probe on a path of `Δ + 1` nodes with `f₂` on node 0 and `f₁`
/// on node `Δ` (so `d = Δ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroChainConfig {
    pub algorithm: ProbeAlgorithm,
    pub l: f64,
    pub mu: f64,
    pub n: usize,
    /// Path length `Δ`.
    pub delta: usize,
    /// Communication budget `K`.
    pub comm_budget: usize,
    /// Oracle budget per node (centralized and decentralized) or number of
    /// local steps (local method).
    pub oracle_budget: usize,
    /// Defaults to `1/(4L)` of the constructed instance.
    pub gamma: Option<f64>,
    /// FastMix rounds for the decentralized method.
    pub fastmix_rounds: usize,
    /// Must be 0.
    pub sigma2: f64,
    /// Must be zero when given.
    pub z0: Option<Vec<f64>>,
}

impl ZeroChainConfig {
    pub fn new(algorithm: ProbeAlgorithm, l: f64, mu: f64, n: usize, delta: usize, k: usize, t: usize) -> Self {
        Self {
            algorithm,
            l,
            mu,
            n,
            delta,
            comm_budget: k,
            oracle_budget: t,
            gamma: None,
            fastmix_rounds: 1,
            sigma2: 0.0,
            z0: None,
        }
    }
}

/// Highest nonzero coordinates (1-based, 0 when the block is all zero) on
/// every node after one communication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRecord {
    pub comm_rounds: usize,
    pub x_frontier: Vec<usize>,
    pub y_frontier: Vec<usize>,
    /// `⌊rounds/d⌋ + 1`: nodes holding `f₁` light coordinate 1 on their own.
    pub cap: usize,
}

impl FrontierRecord {
    pub fn max_frontier(&self) -> usize {
        self.x_frontier
            .iter()
            .chain(&self.y_frontier)
            .copied()
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroChainReport {
    pub algorithm: ProbeAlgorithm,
    pub d: usize,
    pub comm_budget: usize,
    pub comm_rounds_used: usize,
    /// `⌊K/d⌋`.
    pub cap: usize,
    /// Bound applied to the terminal iterates: `max(1, ⌈K_used/d⌉)`.
    pub terminal_cap: usize,
    pub records: Vec<FrontierRecord>,
    /// Highest nonzero coordinate over all nodes at termination.
    pub final_frontier: usize,
    pub pass: bool,
}

impl ZeroChainReport {
    /// CSV with one row per (communication record, node).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["comm_rounds", "node", "x_frontier", "y_frontier", "cap"])?;
        for r in &self.records {
            for (node, (x, y)) in r.x_frontier.iter().zip(&r.y_frontier).enumerate() {
                w.write_record([
                    r.comm_rounds.to_string(),
                    node.to_string(),
                    x.to_string(),
                    y.to_string(),
                    r.cap.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// 1-based index of the last entry that is not exactly zero; 0 if none.
/// Signed zeros count as zero.
pub fn frontier(block: &[f64]) -> usize {
    block.iter().rposition(|v| *v != 0.0).map_or(0, |i| i + 1)
}

fn node_frontiers(z: &DVector<f64>, n: usize) -> (usize, usize) {
    let s = z.as_slice();
    (frontier(&s[..n]), frontier(&s[n..]))
}

struct FrontierObserver {
    n: usize,
    d: usize,
    records: Vec<FrontierRecord>,
}

impl Observer for FrontierObserver {
    fn on_communication(&mut self, comm_rounds: usize, nodes: &[DVector<f64>]) {
        let (x_frontier, y_frontier) = nodes.iter().map(|z| node_frontiers(z, self.n)).unzip();
        self.records.push(FrontierRecord {
            comm_rounds,
            x_frontier,
            y_frontier,
            cap: comm_rounds / self.d + 1,
        });
    }
}

/// Evenly spaced averaging steps ending at `T − 1`.
fn spaced_syncs(steps: usize, syncs: usize) -> Vec<usize> {
    (1..=syncs).map(|j| (j * steps).div_ceil(syncs) - 1).collect()
}

pub fn probe_zero_chain(cfg: &ZeroChainConfig) -> Result<ZeroChainReport> {
    if cfg.sigma2 != 0.0 {
        return Err(Error::InvalidArgument(
            "zero-chain probe needs sigma2 = 0".into(),
        ));
    }
    if let Some(z0) = &cfg.z0 {
        if z0.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidArgument(
                "zero-chain probe needs a zero starting point".into(),
            ));
        }
    }
    if cfg.delta == 0 {
        return Err(Error::InvalidArgument("path length must be >= 1".into()));
    }
    let d = cfg.delta;
    let topology = Topology::build(TopologyKind::Path, d + 1)?;
    let spec = LowerBoundSpec {
        l: cfg.l,
        mu: cfg.mu,
        n: cfg.n,
        d,
        b_nodes: vec![0],
    };
    let problem = gen_lower_bound_instance(&spec, &topology)?;
    let gamma = cfg.gamma.unwrap_or(1.0 / (4.0 * problem.meta().l));
    let oracle = StochasticOracle::with_sigma2(&problem, 0.0, 0);
    let opts = RunOptions {
        z0: Some(DVector::zeros(2 * cfg.n)),
        metrics: MetricSuite::none(),
        ..RunOptions::default()
    };
    let mut obs = FrontierObserver {
        n: cfg.n,
        d,
        records: Vec::new(),
    };
    let result = match cfg.algorithm {
        ProbeAlgorithm::Centralized => {
            let sched = ScheduleCentralized::new(cfg.comm_budget, cfg.oracle_budget, d, gamma)?;
            run_centralized_extra_step_observed(&oracle, &sched, &opts, &mut obs)?
        }
        ProbeAlgorithm::Decentralized => {
            let gossip = GossipMatrix::laplacian(&topology)?;
            let sched =
                ScheduleDecentralized::new(cfg.comm_budget, cfg.oracle_budget, cfg.fastmix_rounds, gamma)?;
            run_decentralized_extra_step_observed(&oracle, &gossip, &sched, &opts, &mut obs)?
        }
        ProbeAlgorithm::LocalExtraStep => {
            let syncs = cfg.comm_budget / d;
            if syncs == 0 {
                return Err(Error::InvalidSchedule(format!(
                    "K = {} buys no averaging at distance {d}",
                    cfg.comm_budget
                )));
            }
            if cfg.oracle_budget < syncs {
                return Err(Error::InvalidSchedule(format!(
                    "T = {} is smaller than the {syncs} averaging steps",
                    cfg.oracle_budget
                )));
            }
            let sched = ScheduleLocal::new(cfg.oracle_budget, spaced_syncs(cfg.oracle_budget, syncs), gamma)?
                .with_rounds_per_sync(d)?;
            run_extra_step_local_sgd_observed(&oracle, &sched, &opts, &mut obs)?
        }
    };
    let terminal_cap = result.comm_rounds_used.div_ceil(d).max(1);
    let final_frontier = result
        .final_nodes
        .iter()
        .chain(std::iter::once(&result.output))
        .map(|z| {
            let (x, y) = node_frontiers(z, cfg.n);
            x.max(y)
        })
        .max()
        .unwrap_or(0);
    let live_ok = obs.records.iter().all(|r| r.max_frontier() <= r.cap);
    Ok(ZeroChainReport {
        algorithm: cfg.algorithm,
        d,
        comm_budget: cfg.comm_budget,
        comm_rounds_used: result.comm_rounds_used,
        cap: cfg.comm_budget / d,
        terminal_cap,
        records: obs.records,
        final_frontier,
        pass: live_ok && final_frontier <= terminal_cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionBoundReport {
    /// `‖ȳ* − y*‖` from the direct solve.
    pub err: f64,
    /// The same error computed without cancellation: `ȳ* − y*` solves
    /// `(AᵀA + αI)δ = q^{n+1}/(1 − q)·e_n`.
    pub err_structured: f64,
    /// `q^{n+1}/(α(1 − q))`.
    pub bound: f64,
    /// Size of double-precision rounding in `y*`; direct errors below it
    /// carry no information.
    pub rounding_floor: f64,
    pub pass: bool,
}

/// `‖ȳ* − y*‖` against `q^{n+1}/(α(1 − q))`.
///
/// When the bound sits below double-precision resolution the direct error
/// only has to stay at rounding level and the structured error carries the
/// check.
pub fn probe_solution_bound(l: f64, mu: f64, n: usize) -> Result<SolutionBoundReport> {
    let spec = LowerBoundSpec {
        l,
        mu,
        n,
        d: 1,
        b_nodes: vec![0],
    };
    let r = lb_reference_solution(&spec)?;
    let err = (&r.y_approx - &r.y_exact).norm();
    let q = spec.q();
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = q.powi(n as i32 + 1) / (1.0 - q);
    let err_structured = lb_normal_solve(&spec, &rhs)?.norm();
    let rounding_floor = 1e3 * f64::EPSILON * r.y_exact.norm();
    let tol = r.bound * (1.0 + 1e-9);
    let pass = err_structured <= tol && (err <= tol || (r.bound < rounding_floor && err <= rounding_floor));
    Ok(SolutionBoundReport {
        err,
        err_structured,
        bound: r.bound,
        rounding_floor,
        pass,
    })
}
