use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::operator::{spectral_norm, LocalOperator};
use super::set::FeasibleSet;
use crate::error::{check_dim, Error, Result};

/// Constants attached to a problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    /// Smoothness of the averaged operator.
    pub l: f64,
    /// Per-node smoothness bound.
    pub l_max: f64,
    /// Strong monotonicity modulus (0 for convex-concave).
    pub mu: f64,
    /// Oracle variance `σ²`.
    pub sigma2: f64,
    /// Heterogeneity bound `D`, when known.
    pub heterogeneity: Option<f64>,
}

/// `M` local saddle operators sharing one feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    locals: Vec<LocalOperator>,
    set: FeasibleSet,
    nx: usize,
    ny: usize,
    meta: ProblemMeta,
}

impl ProblemInstance {
    pub fn new(locals: Vec<LocalOperator>, set: FeasibleSet, meta: ProblemMeta) -> Result<Self> {
        let first = locals
            .first()
            .ok_or_else(|| Error::InvalidArgument("a problem needs at least one node".into()))?;
        let (nx, ny) = first.dims();
        for op in &locals[1..] {
            let (ox, oy) = op.dims();
            check_dim(nx, ox)?;
            check_dim(ny, oy)?;
        }
        check_dim(nx + ny, set.dim())?;
        let finite = [meta.l, meta.l_max, meta.mu, meta.sigma2]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
        if !finite {
            return Err(Error::InvalidArgument(
                "problem constants must be finite and nonnegative".into(),
            ));
        }
        if meta.l > meta.l_max * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "L = {} exceeds L_max = {}",
                meta.l, meta.l_max
            )));
        }
        Ok(Self {
            locals,
            set,
            nx,
            ny,
            meta,
        })
    }

    /// Builds an instance whose `L` and `L_max` are the exact spectral norms
    /// of the (affine) averaged and local operators.
    pub fn with_exact_constants(
        locals: Vec<LocalOperator>,
        set: FeasibleSet,
        mu: f64,
        sigma2: f64,
    ) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::InvalidArgument(
                "a problem needs at least one node".into(),
            ));
        }
        let dims = locals[0].dims();
        for op in &locals[1..] {
            let (ox, oy) = op.dims();
            check_dim(dims.0, ox)?;
            check_dim(dims.1, oy)?;
        }
        let jacobians: Vec<DMatrix<f64>> = locals.iter().map(affine_jacobian).collect();
        let mean = jacobians.iter().fold(
            DMatrix::zeros(jacobians[0].nrows(), jacobians[0].ncols()),
            |acc, j| acc + j,
        ) / locals.len() as f64;
        let l = spectral_norm(&mean);
        let l_max = jacobians.iter().map(spectral_norm).fold(0.0, f64::max);
        Self::new(
            locals,
            set,
            ProblemMeta {
                l,
                l_max: l_max.max(l),
                mu,
                sigma2,
                heterogeneity: None,
            },
        )
    }

    pub fn nodes(&self) -> usize {
        self.locals.len()
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dim(&self) -> usize {
        self.nx + self.ny
    }

    pub fn locals(&self) -> &[LocalOperator] {
        &self.locals
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument("sigma2 must be >= 0".into()));
        }
        self.meta.sigma2 = sigma2;
        Ok(self)
    }

    pub fn with_heterogeneity(mut self, d: Option<f64>) -> Self {
        self.meta.heterogeneity = d;
        self
    }

    /// Exact `F_m(z)`.
    pub fn eval_operator(&self, m: usize, z: &DVector<f64>) -> Result<DVector<f64>> {
        let op = self.locals.get(m).ok_or(Error::NodeOutOfRange {
            index: m,
            nodes: self.locals.len(),
        })?;
        op.eval(z)
    }

    /// Exact averaged operator `F(z) = (1/M) Σ F_m(z)`.
    pub fn eval_mean(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), z.len())?;
        let mut acc = DVector::zeros(z.len());
        let mut buf = DVector::zeros(z.len());
        for op in &self.locals {
            op.eval_into(z, &mut buf);
            acc += &buf;
        }
        acc /= self.locals.len() as f64;
        Ok(acc)
    }

    /// Averaged `(A, b, c)` when every node holds a plain bilinear operator.
    pub fn bilinear_average(&self) -> Option<(DMatrix<f64>, DVector<f64>, DVector<f64>)> {
        let mut a = DMatrix::zeros(self.nx, self.ny);
        let mut b = DVector::zeros(self.nx);
        let mut c = DVector::zeros(self.ny);
        for op in &self.locals {
            let (am, bm, cm) = op.as_bilinear()?;
            a += am;
            b += bm;
            c += cm;
        }
        let m = self.locals.len() as f64;
        Some((a / m, b / m, c / m))
    }

    /// Projected starting point: the projection of the origin.
    pub fn default_start(&self) -> DVector<f64> {
        let mut z = DVector::zeros(self.dim());
        self.set
            .project_in_place(&mut z)
            .expect("set dimension checked at construction");
        z
    }

    /// The averaged operator as an explicit affine map `z ↦ Jz + F(0)`.
    pub fn mean_affine(&self) -> AffineMap {
        let n = self.dim();
        let mut jac = DMatrix::zeros(n, n);
        for op in &self.locals {
            jac += affine_jacobian(op);
        }
        jac /= self.locals.len() as f64;
        let offset = self
            .eval_mean(&DVector::zeros(n))
            .expect("dimension matches by construction");
        AffineMap { jac, offset }
    }

    pub(crate) fn with_parts(
        &self,
        locals: Vec<LocalOperator>,
        meta: ProblemMeta,
    ) -> Result<ProblemInstance> {
        ProblemInstance::new(locals, self.set.clone(), meta)
    }
}

/// Explicit affine operator `z ↦ jac·z + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub jac: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut out = self.offset.clone();
        out.gemv(1.0, &self.jac, z, 1.0);
        out
    }
}

/// Jacobian of an affine operator, column `i` = `F(e_i) − F(0)`.
pub fn affine_jacobian(op: &LocalOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut zero_out = DVector::zeros(n);
    op.eval_into(&DVector::zeros(n), &mut zero_out);
    let mut jac = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    let mut col = DVector::zeros(n);
    for i in 0..n {
        e[i] = 1.0;
        op.eval_into(&e, &mut col);
        jac.set_column(i, &(&col - &zero_out));
        e[i] = 0.0;
    }
    jac
}

/// Points used by [`estimate_heterogeneity`]: the origin first, then uniform
/// draws from the ball of radius `radius`, each projected onto `set`.
pub fn heterogeneity_samples(
    set: &FeasibleSet,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Vec<DVector<f64>> {
    let dim = set.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for s in 0..samples {
        let mut z = if s == 0 {
            DVector::zeros(dim)
        } else {
            let dir = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let norm = dir.norm();
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            if norm > 0.0 {
                dir * (r / norm)
            } else {
                dir
            }
        };
        set.project_in_place(&mut z)
            .expect("sample has the set's dimension");
        out.push(z);
    }
    out
}

/// Lower estimate of `D = sup_z max_m ‖F_m(z) − F(z)‖`.
pub fn estimate_heterogeneity(
    problem: &ProblemInstance,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let count = problem.nodes();
    let mut best = 0.0f64;
    for z in heterogeneity_samples(problem.set(), samples, radius, seed) {
        let values = (0..count)
            .map(|m| problem.eval_operator(m, &z))
            .collect::<Result<Vec<_>>>()?;
        // F_m − F = (1/M) Σ_j (F_m − F_j): exact zero when the locals agree.
        for fm in &values {
            let mut dev = DVector::zeros(z.len());
            for fj in &values {
                dev += fm - fj;
            }
            best = best.max(dev.norm() / count as f64);
        }
    }
    Ok(best)
}
