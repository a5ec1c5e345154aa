//! C ABI over `saddlenet`.
//!
//! Objects are opaque handles created by `sn_*_new`-style constructors and
//! released with the matching `*_free`. Every fallible call returns an
//! [`SnStatus`]; on failure a message is kept per thread and can be read
//! with [`sn_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::{DMatrix, DVector};
use saddlenet::algorithms::{
    run_centralized_extra_step, run_decentralized_extra_step, run_extra_step_local_sgd,
    run_local_sgda, RunOptions, RunResult, RunStatus, ScheduleCentralized, ScheduleDecentralized,
    ScheduleLocal,
};
use saddlenet::consensus::{fastmix, NodeMatrix};
use saddlenet::lowerbound::{probe_solution_bound, probe_zero_chain, ProbeAlgorithm, ZeroChainConfig};
use saddlenet::metrics::MetricSuite;
use saddlenet::model::{ProblemInstance, StochasticOracle};
use saddlenet::problems::{
    gap, gen_bilinear, gen_lower_bound_instance, problem_from_json, problem_to_json,
    regularize_with_modulus, solve_reference, LowerBoundSpec,
};
use saddlenet::topology::{GossipMatrix, Topology, TopologyKind};
use saddlenet::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidSchedule = 4,
    Disconnected = 5,
    Unsupported = 6,
    NotConverged = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
    Other = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnTopology {
    Path = 0,
    Star = 1,
    Complete = 2,
    Ring = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnLocalRule {
    ExtraStep = 0,
    DescentAscent = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnRunStatus {
    Converged = 0,
    BudgetExhausted = 1,
    Diverged = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnProbeAlgorithm {
    Centralized = 0,
    Decentralized = 1,
    LocalExtraStep = 2,
}

/// One trajectory checkpoint; absent metrics are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnCheckpoint {
    pub t: u64,
    pub comm_rounds: u64,
    pub oracle_calls: u64,
    pub dist_sq: f64,
    pub gap: f64,
    pub grad_norm_sq: f64,
    pub consensus_err: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnZeroChainSummary {
    pub comm_rounds_used: u64,
    pub final_frontier: u64,
    pub cap: u64,
    pub pass: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnSolutionBound {
    pub err: f64,
    pub err_structured: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Opaque problem handle.
pub struct SnProblem {
    inner: ProblemInstance,
}

/// Opaque run-result handle.
pub struct SnRun {
    inner: RunResult,
}

/// Step sizes, budgets and seeds of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnRunConfig {
    pub sigma2: f64,
    pub seed: u64,
    pub gamma: f64,
    /// Record every this many iterations; 0 is treated as 1.
    pub checkpoint_every: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SnStatus {
    match e {
        Error::InvalidArgument(_) | Error::NodeOutOfRange { .. } | Error::ChiOutOfRange { .. } | Error::UnboundedSet => {
            SnStatus::InvalidArgument
        }
        Error::DimensionMismatch { .. } => SnStatus::DimensionMismatch,
        Error::InvalidSchedule(_) => SnStatus::InvalidSchedule,
        Error::Disconnected => SnStatus::Disconnected,
        Error::Unsupported(_) => SnStatus::Unsupported,
        Error::NotConverged { .. } => SnStatus::NotConverged,
        Error::Parse(_) | Error::Json(_) | Error::Config(_) => SnStatus::Parse,
        _ => SnStatus::Other,
    }
}

/// Internal failure carrying the status to report.
struct Fail(SnStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SnStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SnStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SnStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn problem_ref<'a>(p: *const SnProblem) -> Result<&'a ProblemInstance, Fail> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| null("problem"))
}

unsafe fn run_ref<'a>(r: *const SnRun) -> Result<&'a RunResult, Fail> {
    r.as_ref().map(|r| &r.inner).ok_or_else(|| null("run"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn copy_out(dst: &mut [f64], src: &[f64]) -> Result<(), Fail> {
    if dst.len() < src.len() {
        return Err(Fail(
            SnStatus::BufferTooSmall,
            format!("buffer holds {} values, need {}", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

fn topology_kind(t: SnTopology) -> TopologyKind {
    match t {
        SnTopology::Path => TopologyKind::Path,
        SnTopology::Star => TopologyKind::Star,
        SnTopology::Complete => TopologyKind::Complete,
        SnTopology::Ring => TopologyKind::Ring,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sn_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Random bilinear games on `[-1, 1]^{2n}`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_bilinear(
    n: usize,
    nodes: usize,
    lambda_max: f64,
    coef_bound: f64,
    seed: u64,
    out: *mut *mut SnProblem,
) -> SnStatus {
    guard(|| {
        let inner = gen_bilinear(n, nodes, lambda_max, coef_bound, seed)?;
        store(out, SnProblem { inner })
    })
}

/// Lower-bound construction on a path of `delta + 1` nodes (unconstrained).
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_lower_bound(
    l: f64,
    mu: f64,
    n: usize,
    delta: usize,
    out: *mut *mut SnProblem,
) -> SnStatus {
    guard(|| {
        let topo = Topology::build(TopologyKind::Path, delta + 1)?;
        let spec = LowerBoundSpec {
            l,
            mu,
            n,
            d: delta,
            b_nodes: vec![0],
        };
        store(out, SnProblem {
            inner: gen_lower_bound_instance(&spec, &topo)?,
        })
    })
}

/// Parses a problem from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_from_json(json: *const c_char, out: *mut *mut SnProblem) -> SnStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(SnStatus::Parse, e.to_string()))?;
        store(out, SnProblem {
            inner: problem_from_json(text)?,
        })
    })
}

/// Writes the JSON form into `buf` (NUL-terminated). `needed` receives the
/// byte length including the terminator, also on `BufferTooSmall`.
///
/// # Safety
/// `problem` must be a live handle; `buf` null or `len` writable bytes;
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_to_json(
    problem: *const SnProblem,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> SnStatus {
    guard(|| {
        let text = problem_to_json(problem_ref(problem)?)?;
        if let Some(n) = needed.as_mut() {
            *n = text.len() + 1;
        }
        if buf.is_null() || len < text.len() + 1 {
            return Err(Fail(SnStatus::BufferTooSmall, format!("need {} bytes", text.len() + 1)));
        }
        ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// New problem with `mu_reg·(z − anchor)` added to every node.
///
/// # Safety
/// `problem` must be a live handle, `anchor` `len` readable doubles, `out` a
/// valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_regularize(
    problem: *const SnProblem,
    mu_reg: f64,
    anchor: *const f64,
    len: usize,
    out: *mut *mut SnProblem,
) -> SnStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let anchor = DVector::from_column_slice(slice(anchor, len, "anchor")?);
        store(out, SnProblem {
            inner: regularize_with_modulus(p, mu_reg, &anchor)?,
        })
    })
}

/// # Safety
/// `problem` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_free(problem: *mut SnProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Dimension `n_x + n_y`, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_dim(problem: *const SnProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.dim())
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_nodes(problem: *const SnProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.nodes())
}

/// `L`, `L_max` and `μ`; any output pointer may be null.
///
/// # Safety
/// `problem` must be a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_constants(
    problem: *const SnProblem,
    l: *mut f64,
    l_max: *mut f64,
    mu: *mut f64,
) -> SnStatus {
    guard(|| {
        let m = problem_ref(problem)?.meta();
        for (dst, v) in [(l, m.l), (l_max, m.l_max), (mu, m.mu)] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Averaged operator `F(z)` into `out` (length `len` = dimension).
///
/// # Safety
/// `z` and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_eval_mean(
    problem: *const SnProblem,
    z: *const f64,
    out: *mut f64,
    len: usize,
) -> SnStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let f = p.eval_mean(&DVector::from_column_slice(slice(z, len, "z")?))?;
        copy_out(slice_mut(out, len, "out")?, f.as_slice())
    })
}

/// Gap of the averaged game at `z`.
///
/// # Safety
/// `z` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_gap(problem: *const SnProblem, z: *const f64, len: usize, out: *mut f64) -> SnStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let g = gap(p, &DVector::from_column_slice(slice(z, len, "z")?))?;
        *out.as_mut().ok_or_else(|| null("out"))? = g;
        Ok(())
    })
}

/// Reference solution by deterministic extragradient.
///
/// # Safety
/// `out` must hold `len` doubles; `residual` null or writable.
#[no_mangle]
pub unsafe extern "C" fn sn_problem_reference(
    problem: *const SnProblem,
    tol: f64,
    max_iters: u64,
    out: *mut f64,
    len: usize,
    residual: *mut f64,
) -> SnStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let r = solve_reference(p, tol, max_iters as usize)?;
        copy_out(slice_mut(out, len, "out")?, r.point.as_vector().as_slice())?;
        if let Some(res) = residual.as_mut() {
            *res = r.residual;
        }
        Ok(())
    })
}

unsafe fn run_options(
    problem: &ProblemInstance,
    cfg: &SnRunConfig,
    z0: *const f64,
    reference: *const f64,
) -> Result<RunOptions, Fail> {
    let dim = problem.dim();
    let z0 = if z0.is_null() {
        None
    } else {
        Some(DVector::from_column_slice(slice(z0, dim, "z0")?))
    };
    let mut metrics = MetricSuite::default();
    if !reference.is_null() {
        metrics.reference = Some(DVector::from_column_slice(slice(reference, dim, "reference")?));
    }
    Ok(RunOptions {
        z0,
        metrics,
        checkpoint_every: cfg.checkpoint_every.max(1) as usize,
        ..RunOptions::default()
    })
}

unsafe fn run_with(
    problem: *const SnProblem,
    cfg: *const SnRunConfig,
    z0: *const f64,
    reference: *const f64,
    out: *mut *mut SnRun,
    f: impl FnOnce(&StochasticOracle<'_>, f64, &RunOptions) -> saddlenet::Result<RunResult>,
) -> SnStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        let opts = run_options(p, cfg, z0, reference)?;
        let oracle = StochasticOracle::with_sigma2(p, cfg.sigma2, cfg.seed);
        let inner = f(&oracle, cfg.gamma, &opts)?;
        store(out, SnRun { inner })
    })
}

/// Server-based extragradient with budgets `K`, `T` and server distance `r`.
/// `z0` and `reference` may be null (origin start, no distance metric).
///
/// # Safety
/// Non-null vectors must hold `sn_problem_dim` doubles; `out` a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sn_run_centralized(
    problem: *const SnProblem,
    cfg: *const SnRunConfig,
    comm_budget: usize,
    oracle_budget: usize,
    r: usize,
    z0: *const f64,
    reference: *const f64,
    out: *mut *mut SnRun,
) -> SnStatus {
    run_with(problem, cfg, z0, reference, out, |oracle, gamma, opts| {
        let s = ScheduleCentralized::new(comm_budget, oracle_budget, r, gamma)?;
        run_centralized_extra_step(oracle, &s, opts)
    })
}

/// Gossip extragradient on a named topology with `P` FastMix rounds.
///
/// # Safety
/// As for [`sn_run_centralized`].
#[no_mangle]
pub unsafe extern "C" fn sn_run_decentralized(
    problem: *const SnProblem,
    cfg: *const SnRunConfig,
    topology: SnTopology,
    comm_budget: usize,
    oracle_budget: usize,
    p: usize,
    z0: *const f64,
    reference: *const f64,
    out: *mut *mut SnRun,
) -> SnStatus {
    run_with(problem, cfg, z0, reference, out, |oracle, gamma, opts| {
        let nodes = oracle.problem().nodes();
        let g = GossipMatrix::laplacian(&Topology::build(topology_kind(topology), nodes)?)?;
        let s = ScheduleDecentralized::new(comm_budget, oracle_budget, p, gamma)?;
        run_decentralized_extra_step(oracle, &g, &s, opts)
    })
}

/// Local method with averaging every `h` steps (and at the last step).
///
/// # Safety
/// As for [`sn_run_centralized`].
#[no_mangle]
pub unsafe extern "C" fn sn_run_local(
    problem: *const SnProblem,
    cfg: *const SnRunConfig,
    rule: SnLocalRule,
    steps: usize,
    h: usize,
    z0: *const f64,
    reference: *const f64,
    out: *mut *mut SnRun,
) -> SnStatus {
    run_with(problem, cfg, z0, reference, out, |oracle, gamma, opts| {
        let s = ScheduleLocal::every(steps, h, gamma)?;
        match rule {
            SnLocalRule::ExtraStep => run_extra_step_local_sgd(oracle, &s, opts),
            SnLocalRule::DescentAscent => run_local_sgda(oracle, &s, opts),
        }
    })
}

/// # Safety
/// `run` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sn_run_free(run: *mut SnRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Budgets and status of a finished run; any output may be null.
///
/// # Safety
/// `run` must be a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn sn_run_summary(
    run: *const SnRun,
    status: *mut SnRunStatus,
    comm_rounds_used: *mut u64,
    oracle_samples_per_node: *mut u64,
    checkpoints: *mut u64,
) -> SnStatus {
    guard(|| {
        let r = run_ref(run)?;
        if let Some(s) = status.as_mut() {
            *s = match r.status {
                RunStatus::Converged => SnRunStatus::Converged,
                RunStatus::BudgetExhausted => SnRunStatus::BudgetExhausted,
                RunStatus::Diverged => SnRunStatus::Diverged,
            };
        }
        if let Some(c) = comm_rounds_used.as_mut() {
            *c = r.comm_rounds_used as u64;
        }
        if let Some(o) = oracle_samples_per_node.as_mut() {
            *o = r.oracle_samples_per_node;
        }
        if let Some(k) = checkpoints.as_mut() {
            *k = r.checkpoints.len() as u64;
        }
        Ok(())
    })
}

/// The algorithm's official output point.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sn_run_output(run: *const SnRun, out: *mut f64, len: usize) -> SnStatus {
    guard(|| {
        let r = run_ref(run)?;
        copy_out(slice_mut(out, len, "out")?, r.output.as_slice())
    })
}

/// Checkpoint `index`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_run_checkpoint(run: *const SnRun, index: usize, out: *mut SnCheckpoint) -> SnStatus {
    guard(|| {
        let r = run_ref(run)?;
        let c = r.checkpoints.get(index).ok_or_else(|| {
            Fail(
                SnStatus::InvalidArgument,
                format!("checkpoint {index} out of range ({})", r.checkpoints.len()),
            )
        })?;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out.as_mut().ok_or_else(|| null("out"))? = SnCheckpoint {
            t: c.t as u64,
            comm_rounds: c.comm_rounds as u64,
            oracle_calls: c.oracle_calls,
            dist_sq: nan(c.dist_sq),
            gap: nan(c.gap),
            grad_norm_sq: nan(c.grad_norm_sq),
            consensus_err: nan(c.consensus_err),
        };
        Ok(())
    })
}

/// Gossip condition number `χ` of a named topology.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_gossip_chi(topology: SnTopology, nodes: usize, out: *mut f64) -> SnStatus {
    guard(|| {
        let g = GossipMatrix::laplacian(&Topology::build(topology_kind(topology), nodes)?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = g.chi();
        Ok(())
    })
}

/// `rounds` of FastMix on a row-major `nodes × dim` matrix.
///
/// # Safety
/// `z` and `out` must hold `nodes·dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn sn_fastmix(
    topology: SnTopology,
    nodes: usize,
    dim: usize,
    rounds: usize,
    z: *const f64,
    out: *mut f64,
) -> SnStatus {
    guard(|| {
        let len = nodes
            .checked_mul(dim)
            .ok_or_else(|| Fail(SnStatus::InvalidArgument, "size overflow".into()))?;
        let g = GossipMatrix::laplacian(&Topology::build(topology_kind(topology), nodes)?)?;
        let m = NodeMatrix::from_matrix(DMatrix::from_row_slice(nodes, dim, slice(z, len, "z")?))?;
        let mixed = fastmix(&m, &g, rounds)?.into_matrix();
        let dst = slice_mut(out, len, "out")?;
        for i in 0..nodes {
            for j in 0..dim {
                dst[i * dim + j] = mixed[(i, j)];
            }
        }
        Ok(())
    })
}

/// Zero-chain probe with `γ = 1/(4L)` and one FastMix round.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_probe_zero_chain(
    algorithm: SnProbeAlgorithm,
    l: f64,
    mu: f64,
    n: usize,
    delta: usize,
    comm_budget: usize,
    oracle_budget: usize,
    out: *mut SnZeroChainSummary,
) -> SnStatus {
    guard(|| {
        let alg = match algorithm {
            SnProbeAlgorithm::Centralized => ProbeAlgorithm::Centralized,
            SnProbeAlgorithm::Decentralized => ProbeAlgorithm::Decentralized,
            SnProbeAlgorithm::LocalExtraStep => ProbeAlgorithm::LocalExtraStep,
        };
        let r = probe_zero_chain(&ZeroChainConfig::new(alg, l, mu, n, delta, comm_budget, oracle_budget))?;
        *out.as_mut().ok_or_else(|| null("out"))? = SnZeroChainSummary {
            comm_rounds_used: r.comm_rounds_used as u64,
            final_frontier: r.final_frontier as u64,
            cap: r.terminal_cap as u64,
            pass: r.pass,
        };
        Ok(())
    })
}

/// Error of the geometric approximation to the construction's solution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sn_probe_solution_bound(l: f64, mu: f64, n: usize, out: *mut SnSolutionBound) -> SnStatus {
    guard(|| {
        let r = probe_solution_bound(l, mu, n)?;
        *out.as_mut().ok_or_else(|| null("out"))? = SnSolutionBound {
            err: r.err,
            err_structured: r.err_structured,
            bound: r.bound,
            pass: r.pass,
        };
        Ok(())
    })
}
