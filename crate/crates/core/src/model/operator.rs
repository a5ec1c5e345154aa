use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// Which piece of the lower-bound arrangement a node holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    /// Bilinear term with `A₁` plus the linear `e₁ᵀy` term.
    F1,
    /// Bilinear term with `A₂`.
    F2,
    /// Pure quadratic `μ/2‖x‖² − μ/2‖y‖²`.
    F3,
}

/// Local saddle operator `F_m(z) = (∇ₓf_m, −∇_y f_m)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalOperator {
    /// `f = xᵀAy + bᵀx + cᵀy`.
    Bilinear {
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
    },
    /// `F(z) + mu·(z − anchor)`.
    Regularized {
        base: Box<LocalOperator>,
        mu: f64,
        anchor: DVector<f64>,
    },
    /// One of the pieces of the zero-chain construction, `n`-dimensional blocks.
    LowerBoundPiece {
        piece: Piece,
        l: f64,
        mu: f64,
        scale: f64,
        n: usize,
    },
}

impl LocalOperator {
    pub fn bilinear(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        check_dim(a.ncols(), c.len())?;
        Ok(LocalOperator::Bilinear { a, b, c })
    }

    /// `(n_x, n_y)`.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            LocalOperator::Bilinear { a, .. } => (a.nrows(), a.ncols()),
            LocalOperator::Regularized { base, .. } => base.dims(),
            LocalOperator::LowerBoundPiece { n, .. } => (*n, *n),
        }
    }

    pub fn dim(&self) -> usize {
        let (nx, ny) = self.dims();
        nx + ny
    }

    pub fn eval(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), z.len())?;
        let mut out = DVector::zeros(z.len());
        self.eval_into(z, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a preallocated buffer of the right size.
    pub(crate) fn eval_into(&self, z: &DVector<f64>, out: &mut DVector<f64>) {
        match self {
            LocalOperator::Bilinear { a, b, c } => {
                let (nx, ny) = (a.nrows(), a.ncols());
                let x = z.rows(0, nx);
                let y = z.rows(nx, ny);
                {
                    let mut gx = out.rows_mut(0, nx);
                    gx.copy_from(b);
                    gx.gemv(1.0, a, &y, 1.0);
                }
                let mut gy = out.rows_mut(nx, ny);
                gy.copy_from(c);
                gy.gemv_tr(1.0, a, &x, 1.0);
                gy.neg_mut();
            }
            LocalOperator::Regularized { base, mu, anchor } => {
                base.eval_into(z, out);
                for ((o, zi), ai) in out.iter_mut().zip(z.iter()).zip(anchor.iter()) {
                    *o += mu * (zi - ai);
                }
            }
            LocalOperator::LowerBoundPiece {
                piece,
                l,
                mu,
                scale,
                n,
            } => eval_lower_bound(*piece, *l, *mu, *scale, *n, z, out),
        }
    }

    /// Lipschitz constant of this operator (exact for the bilinear and
    /// lower-bound pieces, an upper bound for regularized wrappers).
    pub fn lipschitz(&self) -> f64 {
        match self {
            LocalOperator::Bilinear { a, .. } => spectral_norm(a),
            LocalOperator::Regularized { base, mu, .. } => base.lipschitz() + mu,
            LocalOperator::LowerBoundPiece {
                piece,
                l,
                mu,
                scale,
                n,
            } => match piece {
                Piece::F3 => *mu,
                _ => {
                    let coupling = scale * l / 2.0 * spectral_norm(&piece_matrix(*piece, *n));
                    (mu * mu + coupling * coupling).sqrt()
                }
            },
        }
    }

    /// Returns `(A, b, c)` for plain bilinear operators.
    pub fn as_bilinear(&self) -> Option<(&DMatrix<f64>, &DVector<f64>, &DVector<f64>)> {
        match self {
            LocalOperator::Bilinear { a, b, c } => Some((a, b, c)),
            _ => None,
        }
    }
}

/// Superdiagonal coefficient of row `i` (0-based) of `A₁`/`A₂`.
///
/// `A₁` carries `-2` on rows 2, 4, ... (1-based), `A₂` on rows 1, 3, ...;
/// the diagonal is all ones.
pub fn piece_superdiag(piece: Piece, i: usize, n: usize) -> f64 {
    if i + 1 >= n {
        return 0.0;
    }
    match piece {
        Piece::F1 if i % 2 == 1 => -2.0,
        Piece::F2 if i.is_multiple_of(2) => -2.0,
        _ => 0.0,
    }
}

/// Dense `A₁` (for `F1`), `A₂` (for `F2`) or the zero matrix (for `F3`).
pub fn piece_matrix(piece: Piece, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    if piece == Piece::F3 {
        return a;
    }
    for i in 0..n {
        a[(i, i)] = 1.0;
        if i + 1 < n {
            a[(i, i + 1)] = piece_superdiag(piece, i, n);
        }
    }
    a
}

// Structured evaluation: zero coefficients are skipped, so coordinates that
// are exactly zero stay exactly zero.
fn eval_lower_bound(
    piece: Piece,
    l: f64,
    mu: f64,
    scale: f64,
    n: usize,
    z: &DVector<f64>,
    out: &mut DVector<f64>,
) {
    let coupling = scale * l / 2.0;
    for i in 0..n {
        let xi = z[i];
        let yi = z[n + i];
        let mut gx = mu * xi;
        let mut gy = mu * yi;
        if piece != Piece::F3 {
            // (A y)_i = y_i + s_i y_{i+1}
            let mut ay = yi;
            let s = piece_superdiag(piece, i, n);
            if s != 0.0 {
                ay += s * z[n + i + 1];
            }
            gx += coupling * ay;
            // (Aᵀ x)_i = x_i + s_{i-1} x_{i-1}
            let mut atx = xi;
            if i > 0 {
                let s = piece_superdiag(piece, i - 1, n);
                if s != 0.0 {
                    atx += s * z[i - 1];
                }
            }
            gy -= coupling * atx;
        }
        if piece == Piece::F1 && i == 0 {
            gy -= scale * l * l / (2.0 * mu);
        }
        out[i] = gx;
        out[n + i] = gy;
    }
}

pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}
