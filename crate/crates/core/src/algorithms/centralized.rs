use nalgebra::DVector;

use super::{
    is_diverged, mean_of, per_node, start_point, streams_for, NoObserver, Observer, Recorder,
    RunOptions, RunResult, RunStatus, ScheduleCentralized, Algorithm,
};
use crate::error::Result;
use crate::model::StochasticOracle;

/// Server-side extragradient: every node sends a batch estimate at the server
/// iterate, the server steps with their mean, twice per iteration.
pub fn run_centralized_extra_step(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleCentralized,
    opts: &RunOptions,
) -> Result<RunResult> {
    run_centralized_extra_step_observed(oracle, sched, opts, &mut NoObserver)
}

pub fn run_centralized_extra_step_observed(
    oracle: &StochasticOracle<'_>,
    sched: &ScheduleCentralized,
    opts: &RunOptions,
    observer: &mut dyn Observer,
) -> Result<RunResult> {
    let problem = oracle.problem();
    let set = problem.set();
    let nodes = problem.nodes();
    let (k, b, gamma) = (sched.iterations(), sched.batch(), sched.gamma);
    let mut streams = streams_for(oracle);
    let mut rec = Recorder::new(problem, opts)?;
    let mut z = start_point(problem, opts)?;
    let mut comm = 0;
    let mut calls = 0u64;
    let mut status = RunStatus::BudgetExhausted;
    let stop = rec.record(0, comm, calls, &z, None, false);
    if stop {
        status = RunStatus::Converged;
    }

    let mean_estimate = |streams: &mut [_], point: &DVector<f64>| -> Result<DVector<f64>> {
        let g = per_node(streams, opts.parallel_nodes, |_, s| oracle.sample_batch(s, point, b))?;
        Ok(mean_of(&g))
    };

    for t in 0..k {
        if status == RunStatus::Converged {
            break;
        }
        let g = mean_estimate(&mut streams, &z)?;
        let half = set.project(&(&z - g * gamma))?;
        let g_half = mean_estimate(&mut streams, &half)?;
        z = set.project(&(&z - g_half * gamma))?;
        comm += sched.r;
        calls += 2 * b as u64;
        observer.on_communication(comm, &vec![z.clone(); nodes]);
        let diverged = is_diverged(&half) || is_diverged(&z);
        let last = t + 1 == k || diverged;
        if rec.due(t + 1, last) && rec.record(t + 1, comm, calls, &z, None, false) {
            status = RunStatus::Converged;
        }
        if diverged {
            status = RunStatus::Diverged;
            break;
        }
    }

    Ok(RunResult {
        algorithm: Algorithm::CentralizedExtraStep,
        status,
        checkpoints: rec.checkpoints,
        output: z.clone(),
        final_mean: z.clone(),
        final_nodes: vec![z; nodes],
        comm_rounds_used: comm,
        oracle_samples_per_node: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricSuite;
    use crate::model::{FeasibleSet, LocalOperator, ProblemInstance};
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn one_step_on_xy() {
        let op = LocalOperator::bilinear(dmatrix![1.0], dvector![0.0], dvector![0.0]).unwrap();
        let p = ProblemInstance::with_exact_constants(vec![op], FeasibleSet::unconstrained(2), 0.0, 0.0)
            .unwrap();
        let oracle = StochasticOracle::new(&p, 0);
        let sched = ScheduleCentralized::from_iterations(1, 1, 1, 0.25).unwrap();
        let opts = RunOptions {
            z0: Some(dvector![1.0, 1.0]),
            metrics: MetricSuite::none(),
            ..RunOptions::default()
        };
        let r = run_centralized_extra_step(&oracle, &sched, &opts).unwrap();
        assert_eq!(r.output, dvector![0.6875, 1.1875]);
        assert_eq!(r.comm_rounds_used, 1);
        assert_eq!(r.oracle_samples_per_node, 2);
        assert_eq!(r.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn budget_matches_schedule() {
        let op = LocalOperator::bilinear(dmatrix![1.0], dvector![0.5], dvector![0.0]).unwrap();
        let p = ProblemInstance::with_exact_constants(
            vec![op.clone(), op],
            FeasibleSet::cube(2, 1.0).unwrap(),
            0.0,
            1.0,
        )
        .unwrap();
        let oracle = StochasticOracle::new(&p, 3);
        let sched = ScheduleCentralized::new(100, 1000, 2, 0.1).unwrap();
        let r = run_centralized_extra_step(&oracle, &sched, &RunOptions::default()).unwrap();
        assert_eq!(r.comm_rounds_used, 100);
        assert_eq!(r.oracle_samples_per_node, 1000);
        assert_eq!(r.checkpoints.len(), 51);
    }
}
