use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Shape of the constraint set `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    Unconstrained { dim: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// Convex feasible set with Euclidean projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetKind", into = "SetKind")]
pub struct FeasibleSet {
    kind: SetKind,
}

impl FeasibleSet {
    pub fn unconstrained(dim: usize) -> Self {
        Self {
            kind: SetKind::Unconstrained { dim },
        }
    }

    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::try_from(SetKind::Box { lower, upper })
    }

    /// Symmetric box `[-radius, radius]^dim`.
    pub fn cube(dim: usize, radius: f64) -> Result<Self> {
        Self::new_box(vec![-radius; dim], vec![radius; dim])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::try_from(SetKind::Ball { center, radius })
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Unconstrained { dim } => *dim,
            SetKind::Box { lower, .. } => lower.len(),
            SetKind::Ball { center, .. } => center.len(),
        }
    }

    pub fn is_box(&self) -> bool {
        matches!(self.kind, SetKind::Box { .. })
    }

    /// Euclidean diameter `Ω_z`; `None` when the set is unbounded.
    pub fn diameter(&self) -> Option<f64> {
        match &self.kind {
            SetKind::Unconstrained { .. } => None,
            SetKind::Box { lower, upper } => Some(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| (u - l) * (u - l))
                    .sum::<f64>()
                    .sqrt(),
            ),
            SetKind::Ball { radius, .. } => Some(2.0 * radius),
        }
    }

    pub fn project(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = z.clone();
        self.project_in_place(&mut out)?;
        Ok(out)
    }

    pub fn project_in_place(&self, z: &mut DVector<f64>) -> Result<()> {
        check_dim(self.dim(), z.len())?;
        match &self.kind {
            SetKind::Unconstrained { .. } => {}
            SetKind::Box { lower, upper } => {
                for ((v, l), u) in z.iter_mut().zip(lower).zip(upper) {
                    *v = v.clamp(*l, *u);
                }
            }
            SetKind::Ball { center, radius } => {
                let dist = z
                    .iter()
                    .zip(center)
                    .map(|(v, c)| (v - c) * (v - c))
                    .sum::<f64>()
                    .sqrt();
                // Points already rescaled onto the sphere can sit a few ulps
                // outside it; leaving them alone keeps projection idempotent.
                let c_max = center.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                let slack = 4.0 * f64::EPSILON * (radius + c_max) * (z.len() as f64).sqrt();
                if dist > *radius + slack {
                    let scale = radius / dist;
                    for (v, c) in z.iter_mut().zip(center) {
                        *v = c + (*v - c) * scale;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: &DVector<f64>, tol: f64) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        match &self.kind {
            SetKind::Unconstrained { .. } => true,
            SetKind::Box { lower, upper } => z
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            SetKind::Ball { center, radius } => {
                let d2: f64 = z.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum();
                d2.sqrt() <= radius + tol
            }
        }
    }
}

impl TryFrom<SetKind> for FeasibleSet {
    type Error = Error;

    fn try_from(kind: SetKind) -> Result<Self> {
        match &kind {
            SetKind::Unconstrained { .. } => {}
            SetKind::Box { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                if lower
                    .iter()
                    .zip(upper)
                    .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
                {
                    return Err(Error::InvalidArgument(
                        "box bounds must be finite with lower <= upper".into(),
                    ));
                }
            }
            SetKind::Ball { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidArgument("ball radius must be > 0".into()));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("ball center must be finite".into()));
                }
            }
        }
        Ok(Self { kind })
    }
}

impl From<FeasibleSet> for SetKind {
    fn from(set: FeasibleSet) -> Self {
        set.kind
    }
}
