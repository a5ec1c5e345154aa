use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::model::{LocalOperator, ProblemInstance, ProblemMeta};

/// Adds `μ_reg·(z − z₀)` to every local operator with `μ_reg = ε/(4Ω²)`.
pub fn regularize(problem: &ProblemInstance, epsilon: f64, z0: &DVector<f64>) -> Result<ProblemInstance> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let omega = problem.set().diameter().ok_or(Error::UnboundedSet)?;
    if omega == 0.0 {
        return Err(Error::InvalidArgument("feasible set has zero diameter".into()));
    }
    regularize_with_modulus(problem, epsilon / (4.0 * omega * omega), z0)
}

/// Regularization with an explicit modulus; no diameter needed.
pub fn regularize_with_modulus(
    problem: &ProblemInstance,
    mu_reg: f64,
    z0: &DVector<f64>,
) -> Result<ProblemInstance> {
    check_dim(problem.dim(), z0.len())?;
    if !(mu_reg >= 0.0) || !mu_reg.is_finite() {
        return Err(Error::InvalidArgument("regularization modulus must be >= 0".into()));
    }
    let locals = problem
        .locals()
        .iter()
        .map(|op| LocalOperator::Regularized {
            base: Box::new(op.clone()),
            mu: mu_reg,
            anchor: z0.clone(),
        })
        .collect();
    let meta = problem.meta();
    problem.with_parts(
        locals,
        ProblemMeta {
            l: meta.l + mu_reg,
            l_max: meta.l_max + mu_reg,
            mu: meta.mu + mu_reg,
            sigma2: meta.sigma2,
            heterogeneity: meta.heterogeneity,
        },
    )
}
