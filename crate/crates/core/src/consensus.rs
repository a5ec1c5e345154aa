//! Accelerated gossip averaging and consensus error.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::topology::GossipMatrix;

/// `M × d` matrix whose row `m` is node `m`'s vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMatrix {
    z: DMatrix<f64>,
}

impl NodeMatrix {
    pub fn from_matrix(z: DMatrix<f64>) -> Result<Self> {
        if z.nrows() == 0 {
            return Err(Error::InvalidArgument("node matrix needs at least one row".into()));
        }
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("node matrix entry".into()));
        }
        Ok(Self { z })
    }

    pub fn from_rows(rows: &[DVector<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidArgument("node matrix needs at least one row".into()))?;
        let d = first.len();
        for r in rows {
            check_dim(d, r.len())?;
        }
        Self::from_matrix(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn nodes(&self) -> usize {
        self.z.nrows()
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn row(&self, m: usize) -> DVector<f64> {
        self.z.row(m).transpose()
    }

    pub fn rows(&self) -> Vec<DVector<f64>> {
        (0..self.nodes()).map(|m| self.row(m)).collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.z
    }

    pub fn mean_row(&self) -> DVector<f64> {
        self.z.row_mean().transpose()
    }
}

/// FastMix momentum `η = (1 − √(1 − λ₂²)) / (1 + √(1 − λ₂²))` with `λ₂ = λ₂(W̃)`.
pub fn momentum(g: &GossipMatrix) -> f64 {
    let l2 = g.mixing_lambda2();
    let s = (1.0 - l2 * l2).max(0.0).sqrt();
    (1.0 - s) / (1.0 + s)
}

/// `P` rounds of `z^{h+1} = (1 + η)W̃z^h − ηz^{h−1}`, `z^{−1} = z⁰ = Z`.
pub fn fastmix(z: &NodeMatrix, g: &GossipMatrix, rounds: usize) -> Result<NodeMatrix> {
    check_dim(g.nodes(), z.nodes())?;
    Ok(NodeMatrix {
        z: fastmix_matrix(&z.z, g, rounds),
    })
}

pub(crate) fn fastmix_matrix(z: &DMatrix<f64>, g: &GossipMatrix, rounds: usize) -> DMatrix<f64> {
    let eta = momentum(g);
    let w = g.mixing();
    let mut prev = z.clone();
    let mut cur = z.clone();
    let mut next = DMatrix::zeros(z.nrows(), z.ncols());
    for _ in 0..rounds {
        next.gemm(1.0 + eta, w, &cur, 0.0);
        next.zip_apply(&prev, |n, p| *n -= eta * p);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `(1/M) Σ_m ‖z_m − z̄‖²`.
pub fn consensus_error(z: &NodeMatrix) -> f64 {
    consensus_error_matrix(&z.z)
}

pub(crate) fn consensus_error_matrix(z: &DMatrix<f64>) -> f64 {
    let mean = z.row_mean();
    let mut acc = 0.0;
    for m in 0..z.nrows() {
        acc += (z.row(m) - &mean).norm_squared();
    }
    acc / z.nrows() as f64
}

/// `(1 − 1/√χ)^{2P}`.
pub fn contraction_bound(g: &GossipMatrix, rounds: usize) -> f64 {
    contraction_rate(g).powi(2 * rounds as i32)
}

fn contraction_rate(g: &GossipMatrix) -> f64 {
    (1.0 - 1.0 / g.chi().sqrt()).max(0.0)
}

/// Smallest `P ≥ 1` with `(1 − 1/√χ)^{2P} ≤ target`.
pub fn rounds_for_accuracy(g: &GossipMatrix, target: f64) -> Result<usize> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ratio target must lie in (0, 1), got {target}"
        )));
    }
    let rho = contraction_rate(g);
    // Complete graphs have χ = 1 up to eigensolver rounding.
    if rho <= 1e-8 {
        return Ok(1);
    }
    let mut p = ((target.ln() / (2.0 * rho.ln())).ceil() as usize).max(1);
    while p > 1 && rho.powi(2 * (p as i32 - 1)) <= target {
        p -= 1;
    }
    while rho.powi(2 * p as i32) > target {
        p += 1;
    }
    Ok(p)
}
