//! Distributed extragradient methods and a local descent-ascent baseline.
//!
//! Every runner returns a [`RunResult`] with exact budget accounting:
//! communication rounds used and stochastic samples drawn per node.

mod centralized;
mod decentralized;
mod local;
mod schedule;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use centralized::{run_centralized_extra_step, run_centralized_extra_step_observed};
pub use decentralized::{run_decentralized_extra_step, run_decentralized_extra_step_observed};
pub use local::{
    run_extra_step_local_sgd, run_extra_step_local_sgd_observed, run_local_sgda,
    run_local_sgda_observed,
};
pub use schedule::{ScheduleCentralized, ScheduleDecentralized, ScheduleLocal};

use crate::error::{check_dim, Result};
use crate::metrics::{MetricEvaluator, MetricSuite};
use crate::model::{NodeStream, ProblemInstance, StochasticOracle};

/// Iterates with `‖z‖` above this count as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    CentralizedExtraStep,
    DecentralizedExtraStep,
    ExtraStepLocalSgd,
    LocalSgda,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CentralizedExtraStep => "centralized_extra_step",
            Algorithm::DecentralizedExtraStep => "decentralized_extra_step",
            Algorithm::ExtraStepLocalSgd => "extra_step_local_sgd",
            Algorithm::LocalSgda => "local_sgda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Stopped early on the distance target.
    Converged,
    BudgetExhausted,
    /// Non-finite iterate or `‖z‖ > 10¹²`.
    Diverged,
}

/// Metrics at one point of the trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Checkpoint {
    /// Iterations (centralized, decentralized) or local steps (local methods) completed.
    pub t: usize,
    pub comm_rounds: usize,
    /// Stochastic samples drawn per node so far.
    pub oracle_calls: u64,
    pub dist_sq: Option<f64>,
    pub gap: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    pub consensus_err: Option<f64>,
    /// The nodes were just averaged (local methods only).
    pub synced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub status: RunStatus,
    pub checkpoints: Vec<Checkpoint>,
    /// The method's official output: the server iterate, the node mean, or
    /// the last synchronized average for the local methods.
    pub output: DVector<f64>,
    /// Mean of the node iterates at termination.
    pub final_mean: DVector<f64>,
    pub final_nodes: Vec<DVector<f64>>,
    pub comm_rounds_used: usize,
    pub oracle_samples_per_node: u64,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Starting point, projected onto the feasible set; defaults to the
    /// projection of the origin.
    pub z0: Option<DVector<f64>>,
    pub metrics: MetricSuite,
    /// Record every this many iterations (or local steps); the first and
    /// last points are always recorded.
    pub checkpoint_every: usize,
    /// Evaluate nodes on the rayon pool; results do not depend on it.
    pub parallel_nodes: bool,
    /// Stop with [`RunStatus::Converged`] once `dist_sq` falls to this value.
    pub stop_dist_sq: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            z0: None,
            metrics: MetricSuite::default(),
            checkpoint_every: 1,
            parallel_nodes: false,
            stop_dist_sq: None,
        }
    }
}

/// One round of local updates in the local methods.
pub struct LocalUpdate<'a> {
    pub step: usize,
    pub before: &'a [DVector<f64>],
    /// Stochastic operator value each node stepped with.
    pub applied: &'a [DVector<f64>],
    /// Node iterates after the step, before any averaging.
    pub after: &'a [DVector<f64>],
}

/// Hooks into a run. Both default to no-ops.
pub trait Observer {
    /// Called after every communication with the cumulative round count and
    /// the node iterates that resulted from it.
    fn on_communication(&mut self, _comm_rounds: usize, _nodes: &[DVector<f64>]) {}

    fn on_local_update(&mut self, _update: &LocalUpdate<'_>) {}

    /// Whether [`Observer::on_local_update`] should be fed.
    fn wants_local_updates(&self) -> bool {
        false
    }
}

pub struct NoObserver;

impl Observer for NoObserver {}

pub(crate) fn is_diverged(z: &DVector<f64>) -> bool {
    !z.iter().all(|v| v.is_finite()) || z.norm() > DIVERGENCE_NORM
}

pub(crate) fn mean_of(vs: &[DVector<f64>]) -> DVector<f64> {
    let mut acc = DVector::zeros(vs[0].len());
    for v in vs {
        acc += v;
    }
    acc / vs.len() as f64
}

fn consensus_of(nodes: &[DVector<f64>], mean: &DVector<f64>) -> f64 {
    nodes.iter().map(|z| (z - mean).norm_squared()).sum::<f64>() / nodes.len() as f64
}

pub(crate) fn start_point(problem: &ProblemInstance, opts: &RunOptions) -> Result<DVector<f64>> {
    match &opts.z0 {
        Some(z0) => {
            check_dim(problem.dim(), z0.len())?;
            problem.set().project(z0)
        }
        None => Ok(problem.default_start()),
    }
}

/// Draws `f(m, stream_m)` for every node, on the rayon pool if requested.
pub(crate) fn per_node<T, F>(streams: &mut [NodeStream], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut NodeStream) -> Result<T> + Sync + Send,
{
    if parallel {
        streams
            .par_iter_mut()
            .enumerate()
            .map(|(m, s)| f(m, s))
            .collect()
    } else {
        streams
            .iter_mut()
            .enumerate()
            .map(|(m, s)| f(m, s))
            .collect()
    }
}

pub(crate) fn streams_for(oracle: &StochasticOracle<'_>) -> Vec<NodeStream> {
    (0..oracle.problem().nodes()).map(|m| oracle.stream(m)).collect()
}

/// Checkpoint bookkeeping shared by the runners.
pub(crate) struct Recorder<'a> {
    eval: MetricEvaluator<'a>,
    every: usize,
    stop_dist_sq: Option<f64>,
    pub checkpoints: Vec<Checkpoint>,
}

impl<'a> Recorder<'a> {
    pub fn new(problem: &ProblemInstance, opts: &'a RunOptions) -> Result<Self> {
        Ok(Self {
            eval: opts.metrics.evaluator(problem)?,
            every: opts.checkpoint_every.max(1),
            stop_dist_sq: opts.stop_dist_sq,
            checkpoints: Vec::new(),
        })
    }

    pub fn due(&self, t: usize, last: bool) -> bool {
        last || t.is_multiple_of(self.every)
    }

    /// Records a checkpoint; returns true when the stop target is reached.
    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        t: usize,
        comm_rounds: usize,
        oracle_calls: u64,
        mean: &DVector<f64>,
        nodes: Option<&[DVector<f64>]>,
        synced: bool,
    ) -> bool {
        let v = self.eval.eval(mean);
        let consensus_err = Some(nodes.map_or(0.0, |n| consensus_of(n, mean)));
        self.checkpoints.push(Checkpoint {
            t,
            comm_rounds,
            oracle_calls,
            dist_sq: v.dist_sq,
            gap: v.gap,
            grad_norm_sq: v.grad_norm_sq,
            consensus_err,
            synced,
        });
        matches!((self.stop_dist_sq, v.dist_sq), (Some(target), Some(d)) if d <= target)
    }
}
