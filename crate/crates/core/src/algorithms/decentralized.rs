use nalgebra::{DMatrix, DVector};

use super::{
    is_diverged, mean_of, per_node, start_point, streams_for, Algorithm, NoObserver, Observer,
    Recorder, RunOptions, RunResult, RunStatus, ScheduleDecentralized,
};
use crate::consensus::fastmix_matrix;
use crate::error::{check_dim, Result};
use crate::model::{FeasibleSet, StochasticOracle};
use crate::topology::GossipMatrix;

/// Gossip-based extragradient: local batch steps, each followed by `P`
/// rounds of FastMix and a per-node projection.
pub fn run_decentralized_extra_step(
    oracle: &StochasticOracle<'_>,
    gossip: &GossipMatrix,
    sched: &ScheduleDecentralized,
    opts: &RunOptions,
) -> Result<RunResult> {
    run_decentralized_extra_step_observed(oracle, gossip, sched, opts, &mut NoObserver)
}

fn mix_and_project(
    local: &[DVector<f64>],
    gossip: &GossipMatrix,
    rounds: usize,
    set: &FeasibleSet,
) -> Result<Vec<DVector<f64>>> {
    let d = local[0].len();
    let z = DMatrix::from_fn(local.len(), d, |m, j| local[m][j]);
    let mixed = fastmix_matrix(&z, gossip, rounds);
    (0..local.len())
        .map(|m| set.project(&mixed.row(m).transpose()))
        .collect()
}

pub fn run_decentralized_extra_step_observed(
    oracle: &StochasticOracle<'_>,
    gossip: &GossipMatrix,
    sched: &ScheduleDecentralized,
    opts: &RunOptions,
    observer: &mut dyn Observer,
) -> Result<RunResult> {
    let problem = oracle.problem();
    check_dim(problem.nodes(), gossip.nodes())?;
    let set = problem.set();
    let (k, b, p, gamma) = (sched.iterations(), sched.batch(), sched.p, sched.gamma);
    let mut streams = streams_for(oracle);
    let mut rec = Recorder::new(problem, opts)?;
    let z0 = start_point(problem, opts)?;
    let mut nodes = vec![z0; problem.nodes()];
    let mut comm = 0;
    let mut calls = 0u64;
    let mut status = RunStatus::BudgetExhausted;
    if rec.record(0, comm, calls, &mean_of(&nodes), Some(&nodes), false) {
        status = RunStatus::Converged;
    }

    for t in 0..k {
        if status == RunStatus::Converged {
            break;
        }
        let current = &nodes;
        let local = per_node(&mut streams, opts.parallel_nodes, |m, s| {
            Ok(&current[m] - oracle.sample_batch(s, &current[m], b)? * gamma)
        })?;
        let half = mix_and_project(&local, gossip, p, set)?;
        comm += p;
        observer.on_communication(comm, &half);

        let half_ref = &half;
        let local = per_node(&mut streams, opts.parallel_nodes, |m, s| {
            Ok(&current[m] - oracle.sample_batch(s, &half_ref[m], b)? * gamma)
        })?;
        nodes = mix_and_project(&local, gossip, p, set)?;
        comm += p;
        calls += 2 * b as u64;
        observer.on_communication(comm, &nodes);

        let diverged = half.iter().chain(&nodes).any(is_diverged);
        let last = t + 1 == k || diverged;
        if rec.due(t + 1, last) && rec.record(t + 1, comm, calls, &mean_of(&nodes), Some(&nodes), false) {
            status = RunStatus::Converged;
        }
        if diverged {
            status = RunStatus::Diverged;
            break;
        }
    }

    let mean = mean_of(&nodes);
    Ok(RunResult {
        algorithm: Algorithm::DecentralizedExtraStep,
        status,
        checkpoints: rec.checkpoints,
        output: mean.clone(),
        final_mean: mean,
        final_nodes: nodes,
        comm_rounds_used: comm,
        oracle_samples_per_node: calls,
    })
}
