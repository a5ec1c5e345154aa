use nalgebra::{DVector, DVectorView};

use crate::error::{check_dim, Result};

/// A point `z = (x, y)` stored as one concatenated vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratePoint {
    nx: usize,
    z: DVector<f64>,
}

impl IteratePoint {
    pub fn new(x: &DVector<f64>, y: &DVector<f64>) -> Self {
        let mut z = DVector::zeros(x.len() + y.len());
        z.rows_mut(0, x.len()).copy_from(x);
        z.rows_mut(x.len(), y.len()).copy_from(y);
        Self { nx: x.len(), z }
    }

    pub fn from_concat(nx: usize, z: DVector<f64>) -> Result<Self> {
        if nx > z.len() {
            return Err(crate::Error::DimensionMismatch {
                expected: nx,
                got: z.len(),
            });
        }
        Ok(Self { nx, z })
    }

    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            z: DVector::zeros(nx + ny),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.z.len() - self.nx
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn x(&self) -> DVectorView<'_, f64> {
        self.z.rows(0, self.nx)
    }

    pub fn y(&self) -> DVectorView<'_, f64> {
        self.z.rows(self.nx, self.ny())
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.z
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(|v| v.is_finite())
    }

    /// `self + alpha * other`, dimension checked.
    pub fn axpy(&self, alpha: f64, other: &IteratePoint) -> Result<IteratePoint> {
        check_dim(self.dim(), other.dim())?;
        check_dim(self.nx, other.nx)?;
        Ok(IteratePoint {
            nx: self.nx,
            z: &self.z + &other.z * alpha,
        })
    }
}
