use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{spectral_norm, FeasibleSet, LocalOperator, ProblemInstance, ProblemMeta};

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `M` random bilinear games `xᵀA_m y + b_mᵀx + c_mᵀy` on `[-1, 1]^{2n}`.
///
/// Each `A_m = QΛQᵀ` is symmetric positive definite with eigenvalues uniform
/// on `(0, lambda_max]` and the first one pinned at `lambda_max`.
pub fn gen_bilinear(
    n: usize,
    nodes: usize,
    lambda_max: f64,
    coef_bound: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if n == 0 || nodes == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and M >= 1".into()));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::InvalidArgument("lambda_max must be positive".into()));
    }
    if !(coef_bound >= 0.0) || !coef_bound.is_finite() {
        return Err(Error::InvalidArgument("coef_bound must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locals = Vec::with_capacity(nodes);
    let mut mean = DMatrix::zeros(n, n);
    for _ in 0..nodes {
        let q = random_orthogonal(n, &mut rng);
        let lambda = DVector::from_fn(n, |i, _| {
            if i == 0 {
                lambda_max
            } else {
                // 1 − U lies in (0, 1]
                lambda_max * (1.0 - rng.random::<f64>())
            }
        });
        let mut a = &q * DMatrix::from_diagonal(&lambda) * q.transpose();
        a = (&a + a.transpose()) * 0.5;
        let mut coef = |_, _| coef_bound * (2.0 * rng.random::<f64>() - 1.0);
        let b = DVector::from_fn(n, &mut coef);
        let c = DVector::from_fn(n, &mut coef);
        mean += &a;
        locals.push(LocalOperator::bilinear(a, b, c)?);
    }
    mean /= nodes as f64;
    let l = spectral_norm(&mean).min(lambda_max);
    ProblemInstance::new(
        locals,
        FeasibleSet::cube(2 * n, 1.0)?,
        ProblemMeta {
            l,
            l_max: lambda_max,
            mu: 0.0,
            sigma2: 0.0,
            heterogeneity: None,
        },
    )
}

/// Pure-rotation game whose nodes pull in opposite directions.
///
/// Nodes come in pairs `A = εI ± sQ` with a random orthogonal `Q` per pair,
/// so the averaged game is the slow rotation `εI` while every node rotates
/// fast. `b = c = 0`; the set is the box `[-radius, radius]^{2n}`.
pub fn gen_opposed_rotation(
    n: usize,
    nodes: usize,
    eps: f64,
    spin: f64,
    radius: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if n == 0 || nodes < 2 || !nodes.is_multiple_of(2) {
        return Err(Error::InvalidArgument(
            "need n >= 1 and an even number of nodes".into(),
        ));
    }
    if !(eps > 0.0) || !(spin >= 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidArgument(
            "eps and radius must be positive, spin nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locals = Vec::with_capacity(nodes);
    let eye = DMatrix::<f64>::identity(n, n) * eps;
    for _ in 0..nodes / 2 {
        let q = random_orthogonal(n, &mut rng) * spin;
        for a in [&eye + &q, &eye - &q] {
            locals.push(LocalOperator::bilinear(a, DVector::zeros(n), DVector::zeros(n))?);
        }
    }
    ProblemInstance::with_exact_constants(locals, FeasibleSet::cube(2 * n, radius)?, 0.0, 0.0)
}
