//! Convergence measures: distance to a reference solution, gap, operator
//! norm and trailing-window error floors.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Checkpoint, RunResult};
use crate::error::{check_dim, Error, Result};
use crate::model::{AffineMap, ProblemInstance};
use crate::problems::GapEvaluator;

pub const DEFAULT_FLOOR_WINDOW: f64 = 0.2;
const MIN_FLOOR_POINTS: usize = 10;

/// Which metrics to record along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSuite {
    /// `z*`; enables `dist_sq`.
    pub reference: Option<DVector<f64>>,
    /// Record the gap when the problem supports it.
    pub gap: bool,
    pub grad_norm: bool,
    /// Trailing fraction of the trajectory used by [`error_floor`].
    pub floor_window: f64,
}

impl Default for MetricSuite {
    fn default() -> Self {
        Self {
            reference: None,
            gap: true,
            grad_norm: true,
            floor_window: DEFAULT_FLOOR_WINDOW,
        }
    }
}

impl MetricSuite {
    pub fn with_reference(reference: DVector<f64>) -> Self {
        Self {
            reference: Some(reference),
            ..Self::default()
        }
    }

    /// No metrics at all; runs only track budgets and iterates.
    pub fn none() -> Self {
        Self {
            reference: None,
            gap: false,
            grad_norm: false,
            floor_window: DEFAULT_FLOOR_WINDOW,
        }
    }

    pub(crate) fn evaluator<'a>(&'a self, problem: &ProblemInstance) -> Result<MetricEvaluator<'a>> {
        if let Some(r) = &self.reference {
            check_dim(problem.dim(), r.len())?;
        }
        let gap = if self.gap {
            GapEvaluator::new(problem).ok()
        } else {
            None
        };
        let op = self.grad_norm.then(|| problem.mean_affine());
        Ok(MetricEvaluator {
            reference: self.reference.as_ref(),
            gap,
            op,
        })
    }
}

/// Metric values at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MetricValues {
    pub dist_sq: Option<f64>,
    pub gap: Option<f64>,
    pub grad_norm_sq: Option<f64>,
}

pub(crate) struct MetricEvaluator<'a> {
    reference: Option<&'a DVector<f64>>,
    gap: Option<GapEvaluator>,
    op: Option<AffineMap>,
}

impl MetricEvaluator<'_> {
    pub(crate) fn eval(&self, z: &DVector<f64>) -> MetricValues {
        MetricValues {
            dist_sq: self.reference.map(|r| (z - r).norm_squared()),
            gap: self.gap.as_ref().and_then(|g| g.eval(z).ok()),
            grad_norm_sq: self.op.as_ref().map(|op| op.apply(z).norm_squared()),
        }
    }
}

/// `‖z − z*‖²`.
pub fn dist_sq(z: &DVector<f64>, z_star: &DVector<f64>) -> Result<f64> {
    check_dim(z_star.len(), z.len())?;
    Ok((z - z_star).norm_squared())
}

/// `(1/k) Σ_t ‖F(z̄^t)‖²` with the exact averaged operator.
pub fn avg_grad_norm_sq(trajectory: &[DVector<f64>], problem: &ProblemInstance) -> Result<f64> {
    if trajectory.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let mut acc = 0.0;
    for z in trajectory {
        acc += problem.eval_mean(z)?.norm_squared();
    }
    Ok(acc / trajectory.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DistSq,
    Gap,
    GradNormSq,
    ConsensusErr,
}

impl Metric {
    pub fn of(self, c: &Checkpoint) -> Option<f64> {
        match self {
            Metric::DistSq => c.dist_sq,
            Metric::Gap => c.gap,
            Metric::GradNormSq => c.grad_norm_sq,
            Metric::ConsensusErr => c.consensus_err,
        }
    }
}

/// Median of sorted values; the mean of the two middle ones for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

/// Median of `metric` over the trailing `window` fraction of checkpoints.
pub fn error_floor(result: &RunResult, metric: Metric, window: f64) -> Result<f64> {
    error_floor_of(&result.checkpoints, metric, window)
}

pub fn error_floor_of(checkpoints: &[Checkpoint], metric: Metric, window: f64) -> Result<f64> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "floor window must lie in (0, 1], got {window}"
        )));
    }
    let take = ((checkpoints.len() as f64 * window).ceil() as usize).min(checkpoints.len());
    let values: Vec<f64> = checkpoints[checkpoints.len() - take..]
        .iter()
        .filter_map(|c| metric.of(c))
        .collect();
    if values.len() < MIN_FLOOR_POINTS {
        return Err(Error::InvalidArgument(format!(
            "floor window holds {} values, need at least {MIN_FLOOR_POINTS}",
            values.len()
        )));
    }
    Ok(median(&values).expect("nonempty"))
}

/// `dist_sq` divided by its initial value, per checkpoint.
pub fn relative_dist_sq(result: &RunResult) -> Option<Vec<f64>> {
    let first = result.checkpoints.first()?.dist_sq?;
    if first == 0.0 {
        return None;
    }
    result
        .checkpoints
        .iter()
        .map(|c| c.dist_sq.map(|d| d / first))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeasibleSet, LocalOperator};
    use nalgebra::{dmatrix, dvector};

    fn checkpoints(values: &[f64]) -> Vec<Checkpoint> {
        values
            .iter()
            .enumerate()
            .map(|(t, v)| Checkpoint {
                t,
                dist_sq: Some(*v),
                ..Checkpoint::default()
            })
            .collect()
    }

    #[test]
    fn dist_sq_values() {
        let z = dvector![1.0, 1.0];
        assert_eq!(dist_sq(&z, &z).unwrap(), 0.0);
        assert_eq!(dist_sq(&z, &dvector![0.0, 0.0]).unwrap(), 2.0);
        let shift = dvector![3.5, -2.0];
        assert_eq!(
            dist_sq(&(&z + &shift), &shift).unwrap(),
            dist_sq(&z, &dvector![0.0, 0.0]).unwrap()
        );
        assert!(dist_sq(&z, &dvector![0.0]).is_err());
    }

    #[test]
    fn grad_norm_values() {
        let op = LocalOperator::bilinear(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![3.0, 4.0], dvector![0.0, 0.0])
            .unwrap();
        let p = ProblemInstance::with_exact_constants(vec![op], FeasibleSet::unconstrained(4), 0.0, 0.0)
            .unwrap();
        assert_eq!(avg_grad_norm_sq(&[DVector::zeros(4)], &p).unwrap(), 25.0);
        // F = (y + b, −x) vanishes at x = 0, y = −b.
        let saddle = dvector![0.0, 0.0, -3.0, -4.0];
        assert_eq!(avg_grad_norm_sq(&[saddle.clone(), saddle], &p).unwrap(), 0.0);
        assert!(avg_grad_norm_sq(&[], &p).is_err());
    }

    #[test]
    fn median_convention() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[1.0, 5.0, 1.0, 5.0]), Some(3.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn floor_of_alternating_window() {
        let mut v = vec![100.0; 40];
        v.extend((0..10).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }));
        let c = checkpoints(&v);
        assert_eq!(error_floor_of(&c, Metric::DistSq, 0.2).unwrap(), 2.0);
        assert!(error_floor_of(&c[..20], Metric::DistSq, 0.2).is_err());
        assert!(error_floor_of(&c, Metric::Gap, 0.2).is_err());
    }
}
