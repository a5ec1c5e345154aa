use std::ffi::{c_char, CStr, CString};
use std::ptr;

use saddlenet_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        sn_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn bilinear() -> *mut SnProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { sn_problem_bilinear(4, 3, 10.0, 5.0, 1, &mut p) }, SnStatus::Ok);
    p
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(sn_version()) };
    assert_eq!(v.to_str().unwrap(), saddlenet::VERSION);
}

#[test]
fn null_handles_are_rejected_with_a_message() {
    let mut l = 0.0;
    let s = unsafe { sn_problem_constants(ptr::null(), &mut l, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(s, SnStatus::NullPointer);
    assert!(last_error().contains("problem"));
    assert_eq!(unsafe { sn_problem_dim(ptr::null()) }, 0);
    unsafe {
        sn_problem_free(ptr::null_mut());
        sn_run_free(ptr::null_mut());
    }
}

#[test]
fn library_errors_map_to_status_codes() {
    let mut p = ptr::null_mut();
    let s = unsafe { sn_problem_bilinear(0, 3, 10.0, 5.0, 1, &mut p) };
    assert_eq!(s, SnStatus::InvalidArgument);
    assert!(p.is_null());
    let mut chi = 0.0;
    assert_eq!(unsafe { sn_gossip_chi(SnTopology::Ring, 2, &mut chi) }, SnStatus::InvalidArgument);
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { sn_problem_from_json(bad.as_ptr(), &mut p) }, SnStatus::Parse);
    assert!(!last_error().is_empty());
}

#[test]
fn problem_round_trips_through_json() {
    let p = bilinear();
    unsafe {
        let mut needed = 0usize;
        assert_eq!(sn_problem_to_json(p, ptr::null_mut(), 0, &mut needed), SnStatus::BufferTooSmall);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(sn_problem_to_json(p, buf.as_mut_ptr(), needed, &mut needed), SnStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(sn_problem_from_json(buf.as_ptr(), &mut q), SnStatus::Ok);
        let z = [0.3, -0.2, 0.1, 0.5, -0.4, 0.0, 0.2, 0.9];
        let (mut fa, mut fb) = ([0.0; 8], [0.0; 8]);
        assert_eq!(sn_problem_eval_mean(p, z.as_ptr(), fa.as_mut_ptr(), 8), SnStatus::Ok);
        assert_eq!(sn_problem_eval_mean(q, z.as_ptr(), fb.as_mut_ptr(), 8), SnStatus::Ok);
        assert_eq!(fa, fb);
        sn_problem_free(q);
        sn_problem_free(p);
    }
}

#[test]
fn wrong_lengths_are_dimension_errors() {
    let p = bilinear();
    let z = [0.0; 3];
    let mut out = [0.0; 3];
    let s = unsafe { sn_problem_eval_mean(p, z.as_ptr(), out.as_mut_ptr(), 3) };
    assert_eq!(s, SnStatus::DimensionMismatch);
    let mut small = [0.0; 2];
    let s = unsafe { sn_problem_reference(p, 1e-10, 100_000, small.as_mut_ptr(), 2, ptr::null_mut()) };
    assert_eq!(s, SnStatus::BufferTooSmall);
    unsafe { sn_problem_free(p) };
}

#[test]
fn runs_match_the_rust_api() {
    let base = bilinear();
    let zero = [0.0; 8];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { sn_problem_regularize(base, 0.5, zero.as_ptr(), 8, &mut p) }, SnStatus::Ok);
    let mut l = 0.0;
    unsafe { sn_problem_constants(p, &mut l, ptr::null_mut(), ptr::null_mut()) };
    let mut z_star = [0.0; 8];
    let mut residual = 1.0;
    assert_eq!(
        unsafe { sn_problem_reference(p, 1e-11, 1_000_000, z_star.as_mut_ptr(), 8, &mut residual) },
        SnStatus::Ok
    );
    assert!(residual <= 1e-11);

    let cfg = SnRunConfig {
        sigma2: 1.0,
        seed: 42,
        gamma: 1.0 / (4.0 * l),
        checkpoint_every: 0,
    };
    let mut run = ptr::null_mut();
    let s = unsafe { sn_run_local(p, &cfg, SnLocalRule::ExtraStep, 40, 4, ptr::null(), z_star.as_ptr(), &mut run) };
    assert_eq!(s, SnStatus::Ok);
    let (mut status, mut comm, mut samples, mut count) = (SnRunStatus::Diverged, 0, 0, 0);
    unsafe { sn_run_summary(run, &mut status, &mut comm, &mut samples, &mut count) };
    assert_eq!(status, SnRunStatus::BudgetExhausted);
    assert_eq!((comm, samples), (10, 80));
    assert_eq!(count, 41);
    let mut last = SnCheckpoint {
        t: 0,
        comm_rounds: 0,
        oracle_calls: 0,
        dist_sq: 0.0,
        gap: 0.0,
        grad_norm_sq: 0.0,
        consensus_err: 0.0,
    };
    assert_eq!(unsafe { sn_run_checkpoint(run, 40, &mut last) }, SnStatus::Ok);
    assert_eq!(unsafe { sn_run_checkpoint(run, 41, &mut last) }, SnStatus::InvalidArgument);
    assert_eq!(unsafe { sn_run_checkpoint(run, 40, &mut last) }, SnStatus::Ok);
    assert_eq!(last.t, 40);
    assert!(last.dist_sq.is_finite());
    let mut output = [0.0; 8];
    unsafe { sn_run_output(run, output.as_mut_ptr(), 8) };

    // Same run through the Rust API.
    use nalgebra::DVector;
    use saddlenet::algorithms::{run_extra_step_local_sgd, RunOptions, ScheduleLocal};
    use saddlenet::metrics::MetricSuite;
    use saddlenet::model::StochasticOracle;
    use saddlenet::problems::{gen_bilinear, regularize_with_modulus};
    let rp = regularize_with_modulus(&gen_bilinear(4, 3, 10.0, 5.0, 1).unwrap(), 0.5, &DVector::zeros(8)).unwrap();
    let oracle = StochasticOracle::with_sigma2(&rp, 1.0, 42);
    let opts = RunOptions {
        metrics: MetricSuite::with_reference(DVector::from_column_slice(&z_star)),
        ..RunOptions::default()
    };
    let r = run_extra_step_local_sgd(&oracle, &ScheduleLocal::every(40, 4, cfg.gamma).unwrap(), &opts).unwrap();
    assert_eq!(r.output.as_slice(), &output);
    assert_eq!(r.checkpoints[40].dist_sq, Some(last.dist_sq));
    assert!(last.grad_norm_sq.is_nan() || r.checkpoints[40].grad_norm_sq == Some(last.grad_norm_sq));

    unsafe {
        sn_run_free(run);
        sn_problem_free(p);
        sn_problem_free(base);
    }
}

#[test]
fn centralized_and_decentralized_budgets() {
    let p = bilinear();
    let cfg = SnRunConfig {
        sigma2: 0.0,
        seed: 0,
        gamma: 0.01,
        checkpoint_every: 1,
    };
    unsafe {
        let mut run = ptr::null_mut();
        assert_eq!(
            sn_run_centralized(p, &cfg, 10, 40, 2, ptr::null(), ptr::null(), &mut run),
            SnStatus::Ok
        );
        let (mut comm, mut samples) = (0, 0);
        sn_run_summary(run, ptr::null_mut(), &mut comm, &mut samples, ptr::null_mut());
        // k = 5 iterations, batch 4, two calls each.
        assert_eq!((comm, samples), (10, 40));
        sn_run_free(run);

        assert_eq!(
            sn_run_decentralized(p, &cfg, SnTopology::Path, 20, 40, 2, ptr::null(), ptr::null(), &mut run),
            SnStatus::Ok
        );
        sn_run_summary(run, ptr::null_mut(), &mut comm, ptr::null_mut(), ptr::null_mut());
        assert!(comm <= 20);
        sn_run_free(run);

        assert_eq!(
            sn_run_centralized(p, &cfg, 1, 40, 2, ptr::null(), ptr::null(), &mut run),
            SnStatus::InvalidSchedule
        );
        sn_problem_free(p);
    }
}

#[test]
fn fastmix_preserves_the_average() {
    let z: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
    let mut out = vec![0.0; 12];
    assert_eq!(
        unsafe { sn_fastmix(SnTopology::Star, 4, 3, 5, z.as_ptr(), out.as_mut_ptr()) },
        SnStatus::Ok
    );
    for j in 0..3 {
        let before: f64 = (0..4).map(|i| z[i * 3 + j]).sum();
        let after: f64 = (0..4).map(|i| out[i * 3 + j]).sum();
        assert!((before - after).abs() < 1e-12);
    }
    let mut chi = 0.0;
    unsafe { sn_gossip_chi(SnTopology::Complete, 5, &mut chi) };
    assert!((chi - 1.0).abs() < 1e-12);
}

#[test]
fn probes_pass_on_the_default_instance() {
    let mut summary = SnZeroChainSummary {
        comm_rounds_used: 0,
        final_frontier: 0,
        cap: 0,
        pass: false,
    };
    for alg in [
        SnProbeAlgorithm::Centralized,
        SnProbeAlgorithm::Decentralized,
        SnProbeAlgorithm::LocalExtraStep,
    ] {
        assert_eq!(
            unsafe { sn_probe_zero_chain(alg, 10.0, 1.0, 16, 4, 8, 40, &mut summary) },
            SnStatus::Ok
        );
        assert!(summary.pass, "{alg:?}: {summary:?}");
        assert!(summary.final_frontier <= summary.cap);
    }
    let mut b = SnSolutionBound {
        err: 0.0,
        err_structured: 0.0,
        bound: 0.0,
        pass: false,
    };
    assert_eq!(unsafe { sn_probe_solution_bound(10.0, 1.0, 50, &mut b) }, SnStatus::Ok);
    assert!(b.pass && b.err <= b.bound);
}
