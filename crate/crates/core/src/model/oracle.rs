use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::problem::ProblemInstance;
use crate::error::{check_dim, Error, Result};

// Each sample owns a window of 2^20 keystream words (32-bit) at
// `counter << SAMPLE_WORD_SHIFT`; enough for 2^18 normal draws.
const SAMPLE_WORD_SHIFT: u32 = 20;
const MAX_DIM: usize = 1 << 17;

/// Noisy first-order oracle `F_m(z, ξ) = F_m(z) + ξ` with Gaussian `ξ`,
/// `E‖ξ‖² = σ²` (per-coordinate variance `σ²/n`).
///
/// Noise for sample number `c` of node `m` is a pure function of
/// `(seed, m, c)`, so evaluation order across nodes does not matter.
#[derive(Debug, Clone, Copy)]
pub struct StochasticOracle<'a> {
    problem: &'a ProblemInstance,
    sigma2: f64,
    seed: u64,
}

/// Per-node position in the noise stream.
#[derive(Debug, Clone)]
pub struct NodeStream {
    node: usize,
    counter: u64,
    rng: ChaCha8Rng,
}

impl NodeStream {
    pub fn node(&self) -> usize {
        self.node
    }

    /// Number of samples drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }
}

impl<'a> StochasticOracle<'a> {
    /// Oracle with the problem's own `σ²`.
    pub fn new(problem: &'a ProblemInstance, seed: u64) -> Self {
        Self::with_sigma2(problem, problem.meta().sigma2, seed)
    }

    pub fn with_sigma2(problem: &'a ProblemInstance, sigma2: f64, seed: u64) -> Self {
        assert!(
            problem.dim() <= MAX_DIM,
            "dimension {} too large for the noise stream layout",
            problem.dim()
        );
        Self {
            problem,
            sigma2: sigma2.max(0.0),
            seed,
        }
    }

    pub fn problem(&self) -> &'a ProblemInstance {
        self.problem
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, node: usize) -> NodeStream {
        self.stream_at(node, 0)
    }

    pub fn stream_at(&self, node: usize, position: u64) -> NodeStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(node as u64);
        NodeStream {
            node,
            counter: position,
            rng,
        }
    }

    /// Mean of `batch` independent noisy evaluations of `F_m` at `z`.
    pub fn sample_batch(
        &self,
        stream: &mut NodeStream,
        z: &DVector<f64>,
        batch: usize,
    ) -> Result<DVector<f64>> {
        if batch == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        check_dim(self.problem.dim(), z.len())?;
        let mut g = self.problem.eval_operator(stream.node, z)?;
        self.add_noise(stream, &mut g, batch);
        Ok(g)
    }

    /// Single noisy evaluation.
    pub fn sample(&self, stream: &mut NodeStream, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.sample_batch(stream, z, 1)
    }

    /// Adds the averaged noise of the next `batch` samples and advances the stream.
    pub(crate) fn add_noise(&self, stream: &mut NodeStream, g: &mut DVector<f64>, batch: usize) {
        if self.sigma2 == 0.0 {
            stream.counter += batch as u64;
            return;
        }
        let n = g.len();
        let sd = (self.sigma2 / n as f64).sqrt() / batch as f64;
        for _ in 0..batch {
            stream
                .rng
                .set_word_pos((stream.counter as u128) << SAMPLE_WORD_SHIFT);
            for v in g.iter_mut() {
                let e: f64 = stream.rng.sample(StandardNormal);
                *v += sd * e;
            }
            stream.counter += 1;
        }
    }
}
