//! Randomized property checks runnable from the command line.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algorithms::{
    run_centralized_extra_step, run_decentralized_extra_step, run_extra_step_local_sgd_observed,
    LocalUpdate, Observer, RunOptions, ScheduleCentralized, ScheduleDecentralized, ScheduleLocal,
};
use crate::consensus::{consensus_error, fastmix, NodeMatrix};
use crate::error::Result;
use crate::lowerbound::{probe_solution_bound, probe_zero_chain, ProbeAlgorithm, ZeroChainConfig};
use crate::metrics::MetricSuite;
use crate::model::{FeasibleSet, StochasticOracle};
use crate::problems::{gap, gen_bilinear, regularize_with_modulus, solve_reference};
use crate::topology::{GossipMatrix, Topology, TopologyKind};

#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub pass: bool,
    pub detail: String,
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn projection(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyOutcome> {
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..8);
        let set = match rng.random_range(0..3) {
            0 => FeasibleSet::unconstrained(n),
            1 => FeasibleSet::cube(n, rng.random_range(0.1..3.0))?,
            _ => FeasibleSet::ball(normal_vec(rng, n, 1.0).as_slice().to_vec(), rng.random_range(0.1..3.0))?,
        };
        let (a, b) = (normal_vec(rng, n, 3.0), normal_vec(rng, n, 3.0));
        let (pa, pb) = (set.project(&a)?, set.project(&b)?);
        worst = worst.max((set.project(&pa)? - &pa).amax());
        worst = worst.max((pa - pb).norm() - (a - b).norm());
    }
    Ok(PropertyOutcome {
        name: "projection idempotent and nonexpansive",
        cases,
        pass: worst <= 1e-12,
        detail: format!("worst violation {worst:.2e}"),
    })
}

fn gossip_and_fastmix(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyOutcome> {
    let kinds = [TopologyKind::Path, TopologyKind::Ring, TopologyKind::Star, TopologyKind::Complete];
    let mut worst_kernel = 0.0f64;
    let mut worst_mean = 0.0f64;
    let mut grew = 0;
    for _ in 0..cases {
        let m = rng.random_range(3..12);
        let kind = kinds[rng.random_range(0..kinds.len())];
        let g = GossipMatrix::laplacian(&Topology::build(kind, m)?)?;
        let ones = DVector::from_element(m, 1.0);
        worst_kernel = worst_kernel.max((g.matrix() * &ones).amax());
        let z = NodeMatrix::from_matrix(DMatrix::from_fn(m, 3, |_, _| rng.sample::<f64, _>(StandardNormal)))?;
        let p = rng.random_range(1..15);
        let out = fastmix(&z, &g, p)?;
        worst_mean = worst_mean.max((out.mean_row() - z.mean_row()).norm() / z.mean_row().norm().max(1e-300));
        // Always contracts for P large enough; here only require no growth.
        if consensus_error(&out) > consensus_error(&z) * (1.0 + 1e-12) && p >= 5 {
            grew += 1;
        }
    }
    Ok(PropertyOutcome {
        name: "gossip kernel and FastMix average preservation",
        cases,
        pass: worst_kernel <= 1e-12 && worst_mean <= 1e-11 && grew == 0,
        detail: format!("max |W1| {worst_kernel:.2e}, max mean drift {worst_mean:.2e}, growth cases {grew}"),
    })
}

fn gap_vs_distance(rng: &mut ChaCha8Rng, cases: usize) -> Result<PropertyOutcome> {
    let base = gen_bilinear(4, 3, 10.0, 5.0, rng.random())?;
    let problem = regularize_with_modulus(&base, 1.0, &DVector::zeros(8))?;
    let z_star = solve_reference(&problem, 1e-12, 1_000_000)?.point.into_vector();
    let mu = problem.meta().mu;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cases {
        let scale = [1e-3, 0.1, 1.0][rng.random_range(0..3)];
        let z = problem.set().project(&(&z_star + normal_vec(rng, 8, scale)))?;
        let g = gap(&problem, &z)?;
        worst = worst.max(0.5 * mu * (&z - &z_star).norm_squared() - g);
    }
    Ok(PropertyOutcome {
        name: "gap dominates (mu/2) dist_sq",
        cases,
        pass: worst <= 1e-9,
        detail: format!("max (mu/2)dist_sq - gap = {worst:.2e}"),
    })
}

struct MeanCheck {
    gamma: f64,
    worst: f64,
}

impl Observer for MeanCheck {
    fn on_local_update(&mut self, u: &LocalUpdate<'_>) {
        let m = u.before.len() as f64;
        let mean = |v: &[DVector<f64>]| v.iter().fold(DVector::zeros(v[0].len()), |a, b| a + b) / m;
        let predicted = mean(u.before) - mean(u.applied) * self.gamma;
        self.worst = self.worst.max((mean(u.after) - predicted).amax());
    }

    fn wants_local_updates(&self) -> bool {
        true
    }
}

fn runs(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<PropertyOutcome>> {
    let base = gen_bilinear(3, 4, 5.0, 1.0, rng.random())?;
    let free = crate::model::ProblemInstance::new(
        base.locals().to_vec(),
        FeasibleSet::unconstrained(6),
        base.meta().clone(),
    )?;
    let strong = regularize_with_modulus(&free, 1.0, &DVector::zeros(6))?;
    let z_star = solve_reference(&strong, 1e-12, 1_000_000)?.point.into_vector();
    let g = GossipMatrix::laplacian(&Topology::build(TopologyKind::Ring, 4)?)?;
    let gamma = 1.0 / (4.0 * strong.meta().l);
    let opts = RunOptions {
        z0: Some(DVector::from_element(6, 1.0)),
        metrics: MetricSuite::with_reference(z_star),
        ..RunOptions::default()
    };

    let mut monotone_bad = 0;
    let deterministic = StochasticOracle::new(&strong, 0);
    let r1 = run_centralized_extra_step(&deterministic, &ScheduleCentralized::from_iterations(60, 1, 1, gamma)?, &opts)?;
    let r2 = run_decentralized_extra_step(
        &deterministic,
        &g,
        &ScheduleDecentralized::from_iterations(60, 1, 20, gamma)?,
        &opts,
    )?;
    for r in [&r1, &r2] {
        for w in r.checkpoints.windows(2) {
            if w[1].dist_sq.unwrap() > w[0].dist_sq.unwrap() * (1.0 + 1e-12) + 1e-20 {
                monotone_bad += 1;
            }
        }
    }

    let noisy = strong.clone().with_sigma2(1.0)?;
    let mut nondeterministic = 0;
    let mut mean_worst = 0.0f64;
    for _ in 0..cases {
        let seed = rng.random();
        let oracle = StochasticOracle::new(&noisy, seed);
        let sched = ScheduleLocal::every(rng.random_range(5..40), rng.random_range(1..6), gamma)?;
        let mut check = MeanCheck { gamma, worst: 0.0 };
        let a = run_extra_step_local_sgd_observed(&oracle, &sched, &opts, &mut check)?;
        let par = RunOptions {
            parallel_nodes: true,
            ..opts.clone()
        };
        let b = crate::algorithms::run_extra_step_local_sgd(&oracle, &sched, &par)?;
        if a.final_nodes != b.final_nodes || a.checkpoints != b.checkpoints {
            nondeterministic += 1;
        }
        mean_worst = mean_worst.max(check.worst);
    }
    Ok(vec![
        PropertyOutcome {
            name: "monotone decrease without noise (algorithms 1 and 2)",
            cases: 2,
            pass: monotone_bad == 0,
            detail: format!("{monotone_bad} increasing steps"),
        },
        PropertyOutcome {
            name: "seed determinism across node parallelism",
            cases,
            pass: nondeterministic == 0,
            detail: format!("{nondeterministic} mismatching runs"),
        },
        PropertyOutcome {
            name: "virtual mean follows averaged local steps",
            cases,
            pass: mean_worst <= 1e-12,
            detail: format!("max deviation {mean_worst:.2e}"),
        },
    ])
}

fn lower_bound(rng: &mut ChaCha8Rng, cases: usize) -> Result<Vec<PropertyOutcome>> {
    let mut failures = Vec::new();
    for _ in 0..cases {
        let delta = rng.random_range(1..5);
        let k = rng.random_range(delta.max(2)..delta + 12);
        let n = 2 * k + 2;
        for alg in ProbeAlgorithm::ALL {
            let cfg = ZeroChainConfig::new(alg, 10.0, 1.0, n, delta, k, 4 * k + 8);
            let report = probe_zero_chain(&cfg)?;
            if !report.pass {
                failures.push(format!("{alg:?} delta={delta} K={k}"));
            }
        }
    }
    let mut bound_fail = Vec::new();
    for _ in 0..cases {
        let ratio = rng.random_range(1.5..200.0);
        let n = rng.random_range(1..120);
        if !probe_solution_bound(ratio, 1.0, n)?.pass {
            bound_fail.push(format!("L/mu={ratio:.2} n={n}"));
        }
    }
    Ok(vec![
        PropertyOutcome {
            name: "zero-chain frontier for all three algorithms",
            cases: 3 * cases,
            pass: failures.is_empty(),
            detail: format!("failures {failures:?}"),
        },
        PropertyOutcome {
            name: "geometric solution bound",
            cases,
            pass: bound_fail.is_empty(),
            detail: format!("failures {bound_fail:?}"),
        },
    ])
}

/// Runs every property with `cases` random instances each.
pub fn run_property_suite(seed: u64, cases: usize) -> Result<Vec<PropertyOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        projection(&mut rng, cases)?,
        gossip_and_fastmix(&mut rng, cases)?,
        gap_vs_distance(&mut rng, cases)?,
    ];
    out.extend(runs(&mut rng, cases.min(50))?);
    out.extend(lower_bound(&mut rng, cases.min(20))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_small_case_count() {
        for o in run_property_suite(3, 10).unwrap() {
            assert!(o.pass, "{}: {}", o.name, o.detail);
        }
    }
}
