//! Acceptance suite. Every criterion prints one PASS/FAIL line; the binary
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use saddlenet::algorithms::{
    run_centralized_extra_step, run_centralized_extra_step_observed,
    run_decentralized_extra_step, run_decentralized_extra_step_observed,
    run_extra_step_local_sgd, run_local_sgda, Checkpoint, Observer, RunOptions, RunResult,
    RunStatus, ScheduleCentralized, ScheduleDecentralized, ScheduleLocal,
};
use saddlenet::consensus::{consensus_error, contraction_bound, fastmix, NodeMatrix};
use saddlenet::lowerbound::{probe_solution_bound, probe_zero_chain, ProbeAlgorithm, ZeroChainConfig};
use saddlenet::metrics::{error_floor_of, Metric, MetricSuite};
use saddlenet::model::{FeasibleSet, ProblemInstance, StochasticOracle};
use saddlenet::problems::{
    gap, gen_bilinear, gen_lower_bound_instance, gen_opposed_rotation, regularize_with_modulus,
    solve_reference, LowerBoundSpec,
};
use saddlenet::topology::{GossipMatrix, Topology, TopologyKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn reference(problem: &ProblemInstance) -> DVector<f64> {
    solve_reference(problem, 1e-10, 5_000_000)
        .expect("reference solve")
        .point
        .into_vector()
}

/// Averages a per-checkpoint metric over runs with identical checkpoint grids.
fn mean_trajectory(runs: &[RunResult], metric: Metric) -> Vec<Checkpoint> {
    let len = runs.iter().map(|r| r.checkpoints.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut c = runs[0].checkpoints[i].clone();
            let v = runs.iter().map(|r| metric.of(&r.checkpoints[i]).unwrap()).sum::<f64>() / runs.len() as f64;
            match metric {
                Metric::DistSq => c.dist_sq = Some(v),
                Metric::Gap => c.gap = Some(v),
                Metric::GradNormSq => c.grad_norm_sq = Some(v),
                Metric::ConsensusErr => c.consensus_err = Some(v),
            }
            c
        })
        .collect()
}

// 1. Deterministic per-iteration contraction of Algorithm 1.
fn contraction() -> Outcome {
    let base = gen_bilinear(20, 5, 100.0, 100.0, 11).unwrap();
    let mu = 0.1 * base.meta().l;
    let problem = regularize_with_modulus(&base, mu, &DVector::zeros(40)).unwrap();
    let z_star = reference(&problem);
    let gamma = 1.0 / (4.0 * problem.meta().l);
    let mu = problem.meta().mu;
    let oracle = StochasticOracle::new(&problem, 0);
    let sched = ScheduleCentralized::from_iterations(200, 1, 1, gamma).unwrap();
    let opts = RunOptions {
        metrics: MetricSuite {
            gap: false,
            grad_norm: false,
            ..MetricSuite::with_reference(z_star)
        },
        ..RunOptions::default()
    };
    let run = run_centralized_extra_step(&oracle, &sched, &opts).unwrap();
    let d: Vec<f64> = run.checkpoints.iter().map(|c| c.dist_sq.unwrap()).collect();
    let slack = 1e-10 * d[0];
    let mut worst = f64::NEG_INFINITY;
    for w in d.windows(2) {
        worst = worst.max(w[1] - (1.0 - mu * gamma) * w[0] - slack);
    }
    outcome(
        worst <= 0.0 && d.len() == 201,
        format!(
            "{} iterations, mu*gamma = {:.4}, final dist_sq ratio {:.3e}, worst excess {:.3e}",
            d.len() - 1,
            mu * gamma,
            d[d.len() - 1] / d[0],
            worst
        ),
    )
}

// 2. FastMix contraction and average preservation.
fn fastmix_contraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dim = 4;
    let mut cases = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    let mut worst_literature = 0.0f64;
    let mut worst_mean = 0.0f64;
    let mut zero_bound_hits = 0;
    for kind in [TopologyKind::Path, TopologyKind::Ring, TopologyKind::Star] {
        for m in [3, 5, 10] {
            let g = GossipMatrix::laplacian(&Topology::build(kind, m).unwrap()).unwrap();
            let rho = 1.0 - 1.0 / g.chi().sqrt();
            for p in [1, 5, 10, 20] {
                let bound = contraction_bound(&g, p);
                for _ in 0..50 {
                    let z = DMatrix::from_fn(m, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let z = NodeMatrix::from_matrix(z).unwrap();
                    let out = fastmix(&z, &g, p).unwrap();
                    let ratio = consensus_error(&out) / consensus_error(&z);
                    let drift = (out.mean_row() - z.mean_row()).norm() / z.mean_row().norm();
                    worst_mean = worst_mean.max(drift);
                    cases += 1;
                    if ratio > bound * (1.0 + 1e-6) {
                        violations += 1;
                    }
                    if bound == 0.0 {
                        if ratio > 0.0 {
                            zero_bound_hits += 1;
                        }
                        continue;
                    }
                    let excess = ratio / bound;
                    if excess > worst {
                        worst = excess;
                        worst_case = format!("{kind:?} M={m} P={p}: ratio {ratio:.3e} vs bound {bound:.3e}");
                    }
                    let lit = 14.0 * rho.powi(2 * p as i32);
                    worst_literature = worst_literature.max(ratio / lit);
                }
            }
        }
    }
    let pass = violations == 0 && worst_mean <= 1e-11;
    outcome(
        pass,
        format!(
            "{violations}/{cases} inputs exceed (1-1/sqrt(chi))^(2P) \
             ({zero_bound_hits} of them complete graphs with bound 0 and rounding-level ratio); \
             worst finite-bound case {worst:.2}x: {worst_case}; max ratio/(14 rho^(2P)) = {worst_literature:.3}; max mean drift {worst_mean:.2e}"
        ),
    )
}

// 3. Zero-chain on a path with d = 4, K = 8.
fn zero_chain() -> Outcome {
    let (l, mu, n, delta, k, t) = (10.0, 1.0, 16, 4, 8, 40);
    let topo = Topology::build(TopologyKind::Path, delta + 1).unwrap();
    let spec = LowerBoundSpec {
        l,
        mu,
        n,
        d: delta,
        b_nodes: vec![0],
    };
    let problem = gen_lower_bound_instance(&spec, &topo).unwrap();
    let gamma = 1.0 / (4.0 * problem.meta().l);
    let oracle = StochasticOracle::new(&problem, 0);
    let opts = RunOptions {
        z0: Some(DVector::zeros(2 * n)),
        metrics: MetricSuite::none(),
        ..RunOptions::default()
    };
    let cap = k / delta;
    // Indices are 1-based; "index > cap" means position >= cap.
    let clean = |nodes: &[DVector<f64>]| {
        nodes.iter().all(|z| {
            (cap..n).all(|i| z[i].to_bits() & !(1u64 << 63) == 0 && z[n + i].to_bits() & !(1u64 << 63) == 0)
        })
    };
    let mut details = Vec::new();
    let mut pass = true;

    let r1 = run_centralized_extra_step(&oracle, &ScheduleCentralized::new(k, t, delta, gamma).unwrap(), &opts).unwrap();
    let g = GossipMatrix::laplacian(&topo).unwrap();
    let r2 = run_decentralized_extra_step(&oracle, &g, &ScheduleDecentralized::new(k, t, 1, gamma).unwrap(), &opts)
        .unwrap();
    let syncs = k / delta;
    let steps: Vec<usize> = (1..=syncs).map(|s| s * t / syncs - 1).collect();
    let sched4 = ScheduleLocal::new(t, steps, gamma).unwrap().with_rounds_per_sync(delta).unwrap();
    let r4 = run_extra_step_local_sgd(&oracle, &sched4, &opts).unwrap();
    for (name, r) in [("alg1", &r1), ("alg2", &r2), ("alg4", &r4)] {
        let ok = r.comm_rounds_used <= k && clean(&r.final_nodes) && clean(std::slice::from_ref(&r.output));
        let nonzero = r.final_nodes.iter().any(|z| z.iter().any(|v| *v != 0.0));
        pass &= ok && nonzero;
        details.push(format!("{name} rounds={} ok={ok}", r.comm_rounds_used));
    }
    for alg in ProbeAlgorithm::ALL {
        let report = probe_zero_chain(&ZeroChainConfig::new(alg, l, mu, n, delta, k, t)).unwrap();
        pass &= report.pass && report.final_frontier <= cap;
        details.push(format!("probe {alg:?} frontier={} pass={}", report.final_frontier, report.pass));
    }
    outcome(pass, format!("cap {cap}; {}", details.join(", ")))
}

// 4. Geometric approximation of the lower-bound solution.
fn solution_bound() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (ratio, n) in [(2.0f64, 20), (10.0, 50), (100.0, 100)] {
        let (l, mu) = (ratio, 1.0);
        // Independent oracle: dense LU on the tridiagonal normal matrix.
        let alpha = 4.0 * mu * mu / (l * l);
        let q = 0.5 * (2.0 + alpha - (alpha * alpha + 4.0 * alpha).sqrt());
        let mut system = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            system[(i, i)] = if i == 0 { 1.0 } else { 2.0 } + alpha;
            if i + 1 < n {
                system[(i, i + 1)] = -1.0;
                system[(i + 1, i)] = -1.0;
            }
        }
        let mut e1 = DVector::zeros(n);
        e1[0] = 1.0;
        let y_star = system.lu().solve(&e1).unwrap();
        let y_bar = DVector::from_fn(n, |i, _| q.powi(i as i32 + 1) / (1.0 - q));
        let err = (&y_bar - &y_star).norm();
        let bound = q.powi(n as i32 + 1) / (alpha * (1.0 - q));
        let report = probe_solution_bound(l, mu, n).unwrap();
        let ok = err <= bound * (1.0 + 1e-9) && report.pass;
        pass &= ok;
        details.push(format!("L/mu={ratio} n={n}: err {err:.3e} bound {bound:.3e}"));
    }
    outcome(pass, details.join("; "))
}

// 5. Error floor of Algorithm 1 halves when the batch doubles.
fn variance_floor() -> Outcome {
    let base = gen_bilinear(20, 10, 100.0, 100.0, 5).unwrap();
    let mu = 0.05 * base.meta().l;
    let problem = regularize_with_modulus(&base, mu, &DVector::zeros(40))
        .unwrap()
        .with_sigma2(100.0)
        .unwrap();
    let z_star = reference(&problem);
    let gamma = 1.0 / (4.0 * problem.meta().l);
    let iterations = 1500;
    let floor_for = |batch: usize| {
        let sched = ScheduleCentralized::from_iterations(iterations, batch, 1, gamma).unwrap();
        let opts = RunOptions {
            metrics: MetricSuite {
                gap: false,
                grad_norm: false,
                ..MetricSuite::with_reference(z_star.clone())
            },
            ..RunOptions::default()
        };
        let runs: Vec<RunResult> = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let oracle = StochasticOracle::new(&problem, 1000 + seed);
                run_centralized_extra_step(&oracle, &sched, &opts).unwrap()
            })
            .collect();
        error_floor_of(&mean_trajectory(&runs, Metric::DistSq), Metric::DistSq, 0.2).unwrap()
    };
    let f1 = floor_for(1);
    let f2 = floor_for(2);
    let ratio = f1 / f2;
    outcome(
        (1.5..=2.5).contains(&ratio),
        format!("floor(b=1) {f1:.4e}, floor(b=2) {f2:.4e}, ratio {ratio:.3}"),
    )
}

// 6. Local extra-step floors grow with H; early progress per round is fastest for large H.
fn local_frequency() -> Outcome {
    let problem = gen_bilinear(20, 10, 100.0, 100.0, 7).unwrap().with_sigma2(100.0).unwrap();
    let z_star = reference(&problem);
    let gamma = 1.0 / (15.0 * problem.meta().l);
    let steps = 6000;
    let early_round = 20;
    let hs = [1usize, 3, 10];
    let mut floors = Vec::new();
    let mut early = Vec::new();
    let mut drift = 0.0f64;
    for &h in &hs {
        let sched = ScheduleLocal::every(steps, h, gamma).unwrap();
        let opts = RunOptions {
            metrics: MetricSuite {
                gap: false,
                grad_norm: false,
                ..MetricSuite::with_reference(z_star.clone())
            },
            ..RunOptions::default()
        };
        let runs: Vec<RunResult> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let oracle = StochasticOracle::new(&problem, 500 + seed);
                run_extra_step_local_sgd(&oracle, &sched, &opts).unwrap()
            })
            .collect();
        let mean = mean_trajectory(&runs, Metric::DistSq);
        floors.push(error_floor_of(&mean, Metric::DistSq, 0.2).unwrap());
        // The preceding window must agree, otherwise the run has not plateaued.
        let cut = mean.len() * 4 / 5;
        let before = error_floor_of(&mean[..cut], Metric::DistSq, 0.25).unwrap();
        drift = drift.max((before / floors[floors.len() - 1] - 1.0).abs());
        let at = mean
            .iter()
            .find(|c| c.comm_rounds >= early_round)
            .and_then(|c| c.dist_sq)
            .unwrap();
        early.push(at / mean[0].dist_sq.unwrap());
    }
    let ordered = floors[1] >= 1.05 * floors[0] && floors[2] >= 1.05 * floors[1];
    let fastest = early[2] < early[0] && early[2] < early[1];
    outcome(
        ordered && fastest && drift <= 0.1,
        format!(
            "floors H=1/3/10: {:.4e} {:.4e} {:.4e} (plateau drift {drift:.3}); relative dist_sq after {early_round} rounds: {:.3e} {:.3e} {:.3e}",
            floors[0], floors[1], floors[2], early[0], early[1], early[2]
        ),
    )
}

// 7. Local descent-ascent blows up on a rotation game where local extra step converges.
fn rotation() -> Outcome {
    let n = 5;
    let problem = gen_opposed_rotation(n, 4, 0.01, 10.0, 100.0, 3)
        .unwrap()
        .with_sigma2(0.01)
        .unwrap();
    let l = problem.meta().l;
    let l_max = problem.meta().l_max;
    let z0 = DVector::from_element(2 * n, 1.0);
    let d0 = z0.norm_squared();
    let steps = 2000;
    let opts = RunOptions {
        z0: Some(z0.clone()),
        metrics: MetricSuite::with_reference(DVector::zeros(2 * n)),
        ..RunOptions::default()
    };
    let grid = [4.0, 15.0, 50.0, 150.0, 500.0];
    let mut pass = true;
    let mut details = Vec::new();
    for c in grid {
        let sched = ScheduleLocal::every(steps, 3, 1.0 / (c * l)).unwrap();
        let r = run_local_sgda(&StochasticOracle::new(&problem, 1), &sched, &opts).unwrap();
        let peak = r.checkpoints.iter().filter_map(|c| c.dist_sq).fold(0.0, f64::max);
        let blown = r.status == RunStatus::Diverged || peak > 100.0 * d0;
        pass &= blown;
        details.push(format!("sgda 1/({c}L): peak dist {:.1}x", (peak / d0).sqrt()));
    }
    let sched = ScheduleLocal::every(steps, 3, 1.0 / (4.0 * l_max)).unwrap();
    let r = run_extra_step_local_sgd(&StochasticOracle::new(&problem, 1), &sched, &opts).unwrap();
    let peak = r.checkpoints.iter().filter_map(|c| c.dist_sq).fold(0.0, f64::max);
    let gap0 = gap(&problem, &z0).unwrap();
    let gap_end = gap(&problem, &r.output).unwrap();
    let ok = r.status != RunStatus::Diverged && peak <= 4.0 * d0 && gap_end * 10.0 <= gap0;
    pass &= ok;
    details.push(format!(
        "eslsgd 1/(4L_max): peak dist {:.2}x, gap {gap0:.3e} -> {gap_end:.3e}",
        (peak / d0).sqrt()
    ));
    outcome(pass, details.join("; "))
}

struct Trace(Vec<DVector<f64>>);

impl Observer for Trace {
    fn on_communication(&mut self, _rounds: usize, nodes: &[DVector<f64>]) {
        let mut mean = DVector::zeros(nodes[0].len());
        for z in nodes {
            mean += z;
        }
        self.0.push(mean / nodes.len() as f64);
    }
}

// 8. Complete-graph gossip with one round reproduces the server method.
fn equivalence() -> Outcome {
    let base = gen_bilinear(10, 6, 50.0, 10.0, 9).unwrap();
    let free = ProblemInstance::new(
        base.locals().to_vec(),
        FeasibleSet::unconstrained(20),
        base.meta().clone(),
    )
    .unwrap();
    let problem = regularize_with_modulus(&free, 1.0, &DVector::zeros(20))
        .unwrap()
        .with_sigma2(4.0)
        .unwrap();
    let gamma = 1.0 / (4.0 * problem.meta().l);
    let g = GossipMatrix::laplacian(&Topology::build(TopologyKind::Complete, 6).unwrap()).unwrap();
    let opts = RunOptions {
        z0: Some(DVector::from_element(20, 0.5)),
        metrics: MetricSuite::none(),
        ..RunOptions::default()
    };
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let oracle = StochasticOracle::new(&problem, seed);
        let mut central = Trace(Vec::new());
        run_centralized_extra_step_observed(
            &oracle,
            &ScheduleCentralized::new(50, 100, 1, gamma).unwrap(),
            &opts,
            &mut central,
        )
        .unwrap();
        let mut gossip = Trace(Vec::new());
        run_decentralized_extra_step_observed(
            &oracle,
            &g,
            &ScheduleDecentralized::from_iterations(50, 1, 1, gamma).unwrap(),
            &opts,
            &mut gossip,
        )
        .unwrap();
        if central.0.len() != 50 || gossip.0.len() != 100 {
            return outcome(false, "unexpected iteration counts");
        }
        for (a, b) in central.0.iter().zip(gossip.0.iter().skip(1).step_by(2)) {
            worst = worst.max((a - b).norm() / a.norm().max(1e-300));
        }
    }
    outcome(worst <= 1e-9, format!("50 iterations x 5 seeds, max relative deviation {worst:.2e}"))
}

// 9. Budget accounting on random schedules.
fn budgets() -> Outcome {
    let problem = gen_bilinear(3, 4, 5.0, 1.0, 1).unwrap().with_sigma2(1.0).unwrap();
    let g = GossipMatrix::laplacian(&Topology::build(TopologyKind::Ring, 4).unwrap()).unwrap();
    let gamma = 1.0 / (4.0 * problem.meta().l_max);
    let opts = RunOptions {
        metrics: MetricSuite::none(),
        ..RunOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    let mut made = 0;
    while made < 200 {
        let which = rng.random_range(0..3);
        let seed = rng.random::<u64>();
        let oracle = StochasticOracle::new(&problem, seed);
        match which {
            0 => {
                let (k, t, r) = (rng.random_range(1..60), rng.random_range(1..400), rng.random_range(1..4));
                let Ok(s) = ScheduleCentralized::new(k, t, r, gamma) else { continue };
                let res = run_centralized_extra_step(&oracle, &s, &opts).unwrap();
                let want = 2 * (s.batch() * s.iterations()) as u64;
                if res.comm_rounds_used > k || res.oracle_samples_per_node != want {
                    bad.push(format!("alg1 K={k} T={t} r={r}"));
                }
            }
            1 => {
                let (k, t, p) = (rng.random_range(1..60), rng.random_range(1..400), rng.random_range(1..4));
                let Ok(s) = ScheduleDecentralized::new(k, t, p, gamma) else { continue };
                let res = run_decentralized_extra_step(&oracle, &g, &s, &opts).unwrap();
                let want = 2 * (s.batch() * s.iterations()) as u64;
                if res.comm_rounds_used > k || res.oracle_samples_per_node != want {
                    bad.push(format!("alg2 K={k} T={t} P={p}"));
                }
            }
            _ => {
                let (t, h) = (rng.random_range(1..300), rng.random_range(1..12));
                let Ok(s) = ScheduleLocal::every(t, h, gamma) else { continue };
                let k = s.comm_rounds();
                let res = run_extra_step_local_sgd(&oracle, &s, &opts).unwrap();
                if res.comm_rounds_used > k || res.oracle_samples_per_node != 2 * t as u64 {
                    bad.push(format!("alg4 T={t} H={h}"));
                }
            }
        }
        made += 1;
    }
    outcome(bad.is_empty(), format!("{made} schedules, {} mismatches {:?}", bad.len(), bad))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 contraction of centralized extra step", contraction, Duration::from_secs(5)),
        ("2 FastMix contraction", fastmix_contraction, Duration::from_secs(10)),
        ("3 zero-chain frontier", zero_chain, Duration::from_secs(2)),
        ("4 geometric solution bound", solution_bound, Duration::from_secs(1)),
        ("5 variance floor vs batch", variance_floor, Duration::from_secs(120)),
        ("6 floor ordering over H", local_frequency, Duration::from_secs(120)),
        ("7 descent-ascent vs extra step on rotation", rotation, Duration::from_secs(60)),
        ("8 centralized/decentralized equivalence", equivalence, Duration::from_secs(5)),
        ("9 budget accounting", budgets, Duration::from_secs(10)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let in_time = took <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name} [{:.2}s / {}s]: {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
