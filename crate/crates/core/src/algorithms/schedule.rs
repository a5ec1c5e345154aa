use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemMeta;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidSchedule(format!("step size must be positive, got {gamma}")));
    }
    Ok(())
}

/// Budget split for the centralized method: `k = ⌊K/r⌋` server iterations
/// with batches of `b = ⌊T/(2k)⌋` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCentralized {
    pub comm_budget: usize,
    pub oracle_budget: usize,
    /// Hop distance between the server and its farthest node.
    pub r: usize,
    pub gamma: f64,
    iterations: usize,
    batch: usize,
}

impl ScheduleCentralized {
    pub fn new(comm_budget: usize, oracle_budget: usize, r: usize, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if r == 0 {
            return Err(Error::InvalidSchedule("r must be >= 1".into()));
        }
        let iterations = comm_budget / r;
        if iterations == 0 {
            return Err(Error::InvalidSchedule(format!(
                "K = {comm_budget} < r = {r} leaves no iteration"
            )));
        }
        let batch = oracle_budget / (2 * iterations);
        if batch == 0 {
            return Err(Error::InvalidSchedule(format!(
                "T = {oracle_budget} < 2k = {}: reduce K or increase T",
                2 * iterations
            )));
        }
        Ok(Self {
            comm_budget,
            oracle_budget,
            r,
            gamma,
            iterations,
            batch,
        })
    }

    /// Schedule with exactly `k` iterations of batch `b` (`K = kr`, `T = 2kb`).
    pub fn from_iterations(iterations: usize, batch: usize, r: usize, gamma: f64) -> Result<Self> {
        Self::new(iterations * r, 2 * iterations * batch, r, gamma)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    /// `γ ≤ 1/(4L)`.
    pub fn within_theory(&self, meta: &ProblemMeta) -> bool {
        self.gamma <= 1.0 / (4.0 * meta.l) * (1.0 + 1e-12)
    }
}

/// Budget split for the decentralized method. Each iteration runs two
/// FastMix calls of `P` rounds, so `k = ⌊K/(2P)⌋` and `b = ⌊T/(2k)⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDecentralized {
    pub comm_budget: usize,
    pub oracle_budget: usize,
    /// Gossip rounds per FastMix call.
    pub p: usize,
    pub gamma: f64,
    iterations: usize,
    batch: usize,
}

impl ScheduleDecentralized {
    pub fn new(comm_budget: usize, oracle_budget: usize, p: usize, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if p == 0 {
            return Err(Error::InvalidSchedule("P must be >= 1".into()));
        }
        let iterations = comm_budget / (2 * p);
        if iterations == 0 {
            return Err(Error::InvalidSchedule(format!(
                "K = {comm_budget} < 2P = {} leaves no iteration",
                2 * p
            )));
        }
        let batch = oracle_budget / (2 * iterations);
        if batch == 0 {
            return Err(Error::InvalidSchedule(format!(
                "T = {oracle_budget} < 2k = {}: reduce K or increase T",
                2 * iterations
            )));
        }
        Ok(Self {
            comm_budget,
            oracle_budget,
            p,
            gamma,
            iterations,
            batch,
        })
    }

    /// Schedule with exactly `k` iterations of batch `b` (`K = 2kP`, `T = 2kb`).
    pub fn from_iterations(iterations: usize, batch: usize, p: usize, gamma: f64) -> Result<Self> {
        Self::new(2 * iterations * p, 2 * iterations * batch, p, gamma)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn within_theory(&self, meta: &ProblemMeta) -> bool {
        self.gamma <= 1.0 / (4.0 * meta.l) * (1.0 + 1e-12)
    }
}

/// `T` local steps with averaging after every step in `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleLocal {
    pub steps: usize,
    comm_steps: Vec<usize>,
    pub gamma: f64,
    /// Communication rounds charged per averaging event.
    pub rounds_per_sync: usize,
    h: usize,
}

impl ScheduleLocal {
    pub fn new(steps: usize, comm_steps: Vec<usize>, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if steps == 0 {
            return Err(Error::InvalidSchedule("T must be >= 1".into()));
        }
        if comm_steps.is_empty() {
            return Err(Error::InvalidSchedule("I must be nonempty".into()));
        }
        if comm_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule("I must be strictly increasing".into()));
        }
        let last = *comm_steps.last().expect("nonempty");
        if last >= steps {
            return Err(Error::InvalidSchedule(format!(
                "communication step {last} is outside 0..{steps}"
            )));
        }
        // Gaps counted in local steps: before the first event, between events,
        // and after the last one.
        let mut h = comm_steps[0] + 1;
        for w in comm_steps.windows(2) {
            h = h.max(w[1] - w[0]);
        }
        h = h.max(steps - 1 - last);
        Ok(Self {
            steps,
            comm_steps,
            gamma,
            rounds_per_sync: 1,
            h,
        })
    }

    /// Average every `H` steps and at the final step.
    pub fn every(steps: usize, h: usize, gamma: f64) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidSchedule("H must be >= 1".into()));
        }
        let mut comm: Vec<usize> = (0..steps).filter(|t| (t + 1) % h == 0).collect();
        if steps > 0 && comm.last() != Some(&(steps - 1)) {
            comm.push(steps - 1);
        }
        Self::new(steps, comm, gamma)
    }

    pub fn with_rounds_per_sync(mut self, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidSchedule("rounds per sync must be >= 1".into()));
        }
        self.rounds_per_sync = rounds;
        Ok(self)
    }

    pub fn comm_steps(&self) -> &[usize] {
        &self.comm_steps
    }

    /// Largest number of local steps between averaging events.
    pub fn h(&self) -> usize {
        self.h
    }

    /// `K = |I|·rounds_per_sync`.
    pub fn comm_rounds(&self) -> usize {
        self.comm_steps.len() * self.rounds_per_sync
    }

    /// `γ ≤ 1/(21·H·L_max)`.
    pub fn within_theory(&self, meta: &ProblemMeta) -> bool {
        self.gamma <= 1.0 / (21.0 * self.h as f64 * meta.l_max) * (1.0 + 1e-12)
    }
}
