use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{IteratePoint, ProblemInstance};

pub const DEFAULT_REFERENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub point: IteratePoint,
    /// Final fixed-point residual `‖z − P(z − γF(z))‖`.
    pub residual: f64,
    pub iterations: usize,
}

/// Deterministic projected extragradient with `γ = 1/(4L)` on the exact
/// averaged operator.
///
/// For `μ > 0` the residual target is tightened to `tol·γμ/(1 + γL)` (capped at
/// `tol`), which bounds `‖z − z*‖` by `tol`; the returned residual is then
/// below `tol` as well.
pub fn solve_reference(problem: &ProblemInstance, tol: f64, max_iters: usize) -> Result<ReferenceSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let meta = problem.meta();
    if meta.mu == 0.0 && problem.set().diameter().is_none() {
        return Err(Error::Unsupported(
            "reference solution needs mu > 0 or a bounded set".into(),
        ));
    }
    let set = problem.set();
    let op = problem.mean_affine();
    let mut z = problem.default_start();
    if meta.l == 0.0 {
        // Zero operator: every feasible point is a solution.
        return Ok(ReferenceSolution {
            point: IteratePoint::from_concat(problem.nx(), z)?,
            residual: 0.0,
            iterations: 0,
        });
    }
    let gamma = 1.0 / (4.0 * meta.l);
    let target = if meta.mu > 0.0 {
        tol * (gamma * meta.mu / (1.0 + gamma * meta.l)).min(1.0)
    } else {
        tol
    };
    let residual_at = |z: &DVector<f64>, fz: &DVector<f64>| -> Result<f64> {
        let step = set.project(&(z - fz * gamma))?;
        Ok((z - step).norm())
    };
    let mut fz = op.apply(&z);
    let mut residual = residual_at(&z, &fz)?;
    for iter in 0..max_iters {
        if residual <= target {
            return Ok(ReferenceSolution {
                point: IteratePoint::from_concat(problem.nx(), z)?,
                residual,
                iterations: iter,
            });
        }
        let half = set.project(&(&z - &fz * gamma))?;
        let f_half = op.apply(&half);
        z = set.project(&(&z - f_half * gamma))?;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("reference solver iterate".into()));
        }
        fz = op.apply(&z);
        residual = residual_at(&z, &fz)?;
    }
    if residual <= target {
        return Ok(ReferenceSolution {
            point: IteratePoint::from_concat(problem.nx(), z)?,
            residual,
            iterations: max_iters,
        });
    }
    Err(Error::NotConverged {
        iters: max_iters,
        residual,
    })
}
