use nalgebra::DVector;

use super::{
    is_diverged, mean_of, per_node, start_point, streams_for, Algorithm, LocalUpdate, NoObserver,
    Observer, Recorder, RunOptions, RunResult, RunStatus, ScheduleLocal,
};
use crate::error::Result;
use crate::model::StochasticOracle;

#[derive(Clone, Copy, PartialEq)]
enum LocalRule {
    ExtraStep,
    DescentAscent,
}

/// Local single-sample extragradient with periodic exact averaging.
///
/// Local steps are projected onto the feasible set (the identity when it is
/// unconstrained). Checkpoints track the virtual mean of the nodes; the
/// official output is the last synchronized average.
pub fn run_extra_step_local_sgd(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleLocal,
    opts: &RunOptions,
) -> Result<RunResult> {
    run_local(oracle, sched, opts, &mut NoObserver, LocalRule::ExtraStep)
}

pub fn run_extra_step_local_sgd_observed(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleLocal,
    opts: &RunOptions,
    observer: &mut dyn Observer,
) -> Result<RunResult> {
    run_local(oracle, sched, opts, observer, LocalRule::ExtraStep)
}

/// Same structure with plain simultaneous descent-ascent steps
/// `z ← P(z − γF_m(z, ξ))`, one sample per step.
pub fn run_local_sgda(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleLocal,
    opts: &RunOptions,
) -> Result<RunResult> {
    run_local(oracle, sched, opts, &mut NoObserver, LocalRule::DescentAscent)
}

pub fn run_local_sgda_observed(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleLocal,
    opts: &RunOptions,
    observer: &mut dyn Observer,
) -> Result<RunResult> {
    run_local(oracle, sched, opts, observer, LocalRule::DescentAscent)
}

fn run_local(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleLocal,
    opts: &RunOptions,
    observer: &mut dyn Observer,
    rule: LocalRule,
) -> Result<RunResult> {
    let problem = oracle.problem();
    let set = problem.set();
    let gamma = sched.gamma;
    let mut streams = streams_for(oracle);
    let mut rec = Recorder::new(problem, opts)?;
    let z0 = start_point(problem, opts)?;
    let mut nodes = vec![z0.clone(); problem.nodes()];
    let mut synced = z0;
    let mut comm = 0;
    let mut calls = 0u64;
    let samples_per_step = match rule {
        LocalRule::ExtraStep => 2,
        LocalRule::DescentAscent => 1,
    };
    let mut status = RunStatus::BudgetExhausted;
    if rec.record(0, comm, calls, &mean_of(&nodes), Some(&nodes), true) {
        status = RunStatus::Converged;
    }
    let comm_steps = sched.comm_steps();
    let mut next_comm = 0;
    let track = observer.wants_local_updates();

    for t in 0..sched.steps {
        if status == RunStatus::Converged {
            break;
        }
        let current = &nodes;
        let stepped = per_node(&mut streams, opts.parallel_nodes, |m, s| {
            let z = &current[m];
            let g = match rule {
                LocalRule::ExtraStep => {
                    let half = set.project(&(z - oracle.sample(s, z)? * gamma))?;
                    oracle.sample(s, &half)?
                }
                LocalRule::DescentAscent => oracle.sample(s, z)?,
            };
            let next = set.project(&(z - &g * gamma))?;
            Ok((next, g))
        })?;
        calls += samples_per_step;
        let (after, applied): (Vec<DVector<f64>>, Vec<DVector<f64>>) = stepped.into_iter().unzip();
        if track {
            observer.on_local_update(&LocalUpdate {
                step: t,
                before: &nodes,
                applied: &applied,
                after: &after,
            });
        }
        nodes = after;
        let communicate = comm_steps.get(next_comm) == Some(&t);
        if communicate {
            next_comm += 1;
            synced = mean_of(&nodes);
            for z in nodes.iter_mut() {
                z.copy_from(&synced);
            }
            comm += sched.rounds_per_sync;
            observer.on_communication(comm, &nodes);
        }
        let diverged = nodes.iter().any(is_diverged);
        let last = t + 1 == sched.steps || diverged;
        if rec.due(t + 1, last)
            && rec.record(t + 1, comm, calls, &mean_of(&nodes), Some(&nodes), communicate)
        {
            status = RunStatus::Converged;
        }
        if diverged {
            status = RunStatus::Diverged;
            break;
        }
    }

    let algorithm = match rule {
        LocalRule::ExtraStep => Algorithm::ExtraStepLocalSgd,
        LocalRule::DescentAscent => Algorithm::LocalSgda,
    };
    Ok(RunResult {
        algorithm,
        status,
        checkpoints: rec.checkpoints,
        output: synced,
        final_mean: mean_of(&nodes),
        final_nodes: nodes,
        comm_rounds_used: comm,
        oracle_samples_per_node: calls,
    })
}
