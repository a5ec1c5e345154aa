use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    piece_matrix, FeasibleSet, IteratePoint, LocalOperator, Piece, ProblemInstance,
};
use crate::topology::Topology;

/// Parameters of the zero-chain construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSpec {
    pub l: f64,
    pub mu: f64,
    /// Per-block dimension.
    pub n: usize,
    /// Placement distance between `B` and `B_d`.
    pub d: usize,
    /// Nodes holding `f₂`.
    pub b_nodes: Vec<usize>,
}

/// Node roles: `b` holds `f₂`, `b_d` holds `f₁`, everyone else `f₃`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub b: Vec<usize>,
    pub b_d: Vec<usize>,
}

impl LowerBoundSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.l > self.mu && self.l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need L > mu > 0, got L = {}, mu = {}",
                self.l, self.mu
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("block dimension must be >= 1".into()));
        }
        Ok(())
    }

    /// `α = 4μ²/L²`.
    pub fn alpha(&self) -> f64 {
        4.0 * self.mu * self.mu / (self.l * self.l)
    }

    /// Smaller root of `q² − (2 + α)q + 1 = 0`.
    pub fn q(&self) -> f64 {
        let a = self.alpha();
        0.5 * (2.0 + a - (a * a + 4.0 * a).sqrt())
    }

    /// Roles on `topology`: `B_d` is every node at hop distance `≥ d` from `B`.
    pub fn placement(&self, topology: &Topology) -> Result<Placement> {
        if self.b_nodes.is_empty() {
            return Err(Error::InvalidArgument("B must be nonempty".into()));
        }
        for &v in &self.b_nodes {
            if v >= topology.nodes() {
                return Err(Error::NodeOutOfRange {
                    index: v,
                    nodes: topology.nodes(),
                });
            }
        }
        let mut b = self.b_nodes.clone();
        b.sort_unstable();
        b.dedup();
        let dist = topology.hop_distances(&b);
        let b_d: Vec<usize> = (0..topology.nodes())
            .filter(|&v| dist[v].is_some_and(|h| h >= self.d.max(1)))
            .collect();
        if b_d.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no node is at distance >= {} from B",
                self.d
            )));
        }
        Ok(Placement { b, b_d })
    }
}

/// Places `f₁` on `B_d`, `f₂` on `B` and `f₃` elsewhere; unconstrained set.
pub fn gen_lower_bound_instance(spec: &LowerBoundSpec, topology: &Topology) -> Result<ProblemInstance> {
    spec.validate()?;
    let placement = spec.placement(topology)?;
    let m = topology.nodes() as f64;
    let scale_1 = m / (2.0 * placement.b_d.len() as f64);
    let scale_2 = m / (2.0 * placement.b.len() as f64);
    let locals = (0..topology.nodes())
        .map(|v| {
            let (piece, scale) = if placement.b_d.contains(&v) {
                (Piece::F1, scale_1)
            } else if placement.b.contains(&v) {
                (Piece::F2, scale_2)
            } else {
                (Piece::F3, 1.0)
            };
            LocalOperator::LowerBoundPiece {
                piece,
                l: spec.l,
                mu: spec.mu,
                scale,
                n: spec.n,
            }
        })
        .collect();
    ProblemInstance::with_exact_constants(
        locals,
        FeasibleSet::unconstrained(2 * spec.n),
        spec.mu,
        0.0,
    )
}

/// `A = ½(A₁ + A₂)`: unit diagonal, `−1` superdiagonal.
pub(crate) fn averaged_matrix(n: usize) -> DMatrix<f64> {
    (piece_matrix(Piece::F1, n) + piece_matrix(Piece::F2, n)) * 0.5
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbReference {
    /// Solution of `(AᵀA + αI) y = e₁`.
    pub y_exact: DVector<f64>,
    /// Geometric approximation `qⁱ/(1 − q)`, `i = 1..n`.
    pub y_approx: DVector<f64>,
    /// `q^{n+1}/(α(1 − q))`.
    pub bound: f64,
}

pub fn lb_reference_solution(spec: &LowerBoundSpec) -> Result<LbReference> {
    spec.validate()?;
    let n = spec.n;
    let alpha = spec.alpha();
    let q = spec.q();
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    let y_exact = lb_normal_solve(spec, &e1)?;
    let y_approx = DVector::from_fn(n, |i, _| q.powi(i as i32 + 1) / (1.0 - q));
    let bound = q.powi(n as i32 + 1) / (alpha * (1.0 - q));
    Ok(LbReference {
        y_exact,
        y_approx,
        bound,
    })
}

/// Solves `(AᵀA + αI) y = rhs` by Cholesky.
pub fn lb_normal_solve(spec: &LowerBoundSpec, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    spec.validate()?;
    let n = spec.n;
    crate::error::check_dim(n, rhs.len())?;
    let a = averaged_matrix(n);
    let system = a.tr_mul(&a) + DMatrix::identity(n, n) * spec.alpha();
    Ok(system
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("normal matrix not positive definite".into()))?
        .solve(rhs))
}

/// Exact saddle of the averaged lower-bound objective:
/// `y*` from the linear solve and `x* = −(L/2μ)·A y*`.
pub fn lb_saddle_point(spec: &LowerBoundSpec) -> Result<IteratePoint> {
    let r = lb_reference_solution(spec)?;
    let x = averaged_matrix(spec.n) * &r.y_exact * (-spec.l / (2.0 * spec.mu));
    Ok(IteratePoint::new(&x, &r.y_exact))
}
