use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::model::{LocalOperator, ProblemInstance, SetKind};

/// Averaged `f = xᵀAy + bᵀx + cᵀy + μ/2‖x − x₀‖² − μ/2‖y − y₀‖²`.
struct QuadraticGame {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    mu: f64,
    anchor: DVector<f64>,
}

fn quadratic_game(problem: &ProblemInstance) -> Result<QuadraticGame> {
    let unsupported = || Error::Unsupported("gap needs bilinear (optionally regularized) locals".into());
    let (nx, ny) = (problem.nx(), problem.ny());
    let mut a = DMatrix::zeros(nx, ny);
    let mut b = DVector::zeros(nx);
    let mut c = DVector::zeros(ny);
    let mut reg: Option<(f64, &DVector<f64>)> = None;
    for (i, op) in problem.locals().iter().enumerate() {
        let (base, this_reg) = match op {
            LocalOperator::Regularized { base, mu, anchor } => (base.as_ref(), Some((*mu, anchor))),
            other => (other, None),
        };
        if i > 0 && this_reg != reg {
            return Err(Error::Unsupported(
                "gap needs the same regularization on every node".into(),
            ));
        }
        reg = this_reg;
        let (am, bm, cm) = base.as_bilinear().ok_or_else(unsupported)?;
        a += am;
        b += bm;
        c += cm;
    }
    let m = problem.nodes() as f64;
    let (mu, anchor) = match reg {
        Some((mu, anchor)) => (mu, anchor.clone()),
        None => (0.0, DVector::zeros(nx + ny)),
    };
    Ok(QuadraticGame {
        a: a / m,
        b: b / m,
        c: c / m,
        mu,
        anchor,
    })
}

// max over t ∈ [lo, hi] of v·t − (μ/2)(t − t0)², minus its value at `cur`.
// The current coordinate is itself a candidate, so the result is ≥ 0.
fn coord_excess(v: f64, mu: f64, t0: f64, lo: f64, hi: f64, cur: f64) -> f64 {
    let phi = |t: f64| v * t - 0.5 * mu * (t - t0) * (t - t0);
    let best = if mu > 0.0 {
        phi((t0 + v / mu).clamp(lo, hi))
    } else {
        phi(lo).max(phi(hi))
    };
    (best - phi(cur)).max(0.0)
}

/// Precomputed closed-form gap for one problem.
///
/// Handles bilinear locals, optionally wrapped in one shared quadratic
/// regularization, on a box.
pub struct GapEvaluator {
    game: QuadraticGame,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nx: usize,
    ny: usize,
}

impl GapEvaluator {
    pub fn new(problem: &ProblemInstance) -> Result<Self> {
        let (lower, upper) = match problem.set().kind() {
            SetKind::Box { lower, upper } => (lower.clone(), upper.clone()),
            _ => return Err(Error::Unsupported("gap is only available on box sets".into())),
        };
        Ok(Self {
            game: quadratic_game(problem)?,
            lower,
            upper,
            nx: problem.nx(),
            ny: problem.ny(),
        })
    }

    /// `max_{y'} f(x, y') − min_{x'} f(x', y)`; `z` is expected to lie in the box.
    pub fn eval(&self, z: &DVector<f64>) -> Result<f64> {
        check_dim(self.nx + self.ny, z.len())?;
        let g = &self.game;
        let (nx, lower, upper) = (self.nx, &self.lower, &self.upper);
        let x = z.rows(0, nx);
        let y = z.rows(nx, self.ny);
        // y-side: v = Aᵀx + c; x-side: minimizing w·t + μ/2(t − x₀)² is maximizing (−w)·t − ...
        let v = g.a.tr_mul(&x) + &g.c;
        let w = &g.a * y + &g.b;
        let mut total = 0.0;
        for j in 0..self.ny {
            let k = nx + j;
            total += coord_excess(v[j], g.mu, g.anchor[k], lower[k], upper[k], y[j]);
        }
        for i in 0..nx {
            total += coord_excess(-w[i], g.mu, g.anchor[i], lower[i], upper[i], x[i]);
        }
        Ok(total)
    }
}

/// Gap over a box in closed form; see [`GapEvaluator`].
pub fn gap(problem: &ProblemInstance, z: &DVector<f64>) -> Result<f64> {
    check_dim(problem.dim(), z.len())?;
    GapEvaluator::new(problem)?.eval(z)
}

/// Gap for plain bilinear problems on a box.
pub fn gap_bilinear(problem: &ProblemInstance, z: &DVector<f64>) -> Result<f64> {
    if problem.bilinear_average().is_none() {
        return Err(Error::Unsupported("gap_bilinear needs plain bilinear locals".into()));
    }
    gap(problem, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeasibleSet;
    use crate::problems::gen_bilinear;
    use nalgebra::{dmatrix, dvector};

    fn xy_on_square() -> ProblemInstance {
        let op = LocalOperator::bilinear(dmatrix![1.0], dvector![0.0], dvector![0.0]).unwrap();
        ProblemInstance::with_exact_constants(vec![op], FeasibleSet::cube(2, 1.0).unwrap(), 0.0, 0.0)
            .unwrap()
    }

    #[test]
    fn xy_gap_values() {
        let p = xy_on_square();
        assert_eq!(gap_bilinear(&p, &dvector![0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(gap_bilinear(&p, &dvector![1.0, 0.0]).unwrap(), 1.0);
    }

    fn f(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(a * y)) + b.dot(x) + c.dot(y)
    }

    fn vertex(n: usize, mask: usize) -> DVector<f64> {
        DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
    }

    #[test]
    fn matches_vertex_enumeration() {
        let n = 5;
        let p = gen_bilinear(n, 3, 4.0, 2.0, 21).unwrap();
        let (a, b, c) = p.bilinear_average().unwrap();
        for k in 0..10 {
            let z = DVector::from_fn(2 * n, |i, _| ((i * 7 + k * 13) as f64 * 0.61).sin());
            let x = z.rows(0, n).into_owned();
            let y = z.rows(n, n).into_owned();
            let max_y = (0..1 << n)
                .map(|m| f(&a, &b, &c, &x, &vertex(n, m)))
                .fold(f64::NEG_INFINITY, f64::max);
            let min_x = (0..1 << n)
                .map(|m| f(&a, &b, &c, &vertex(n, m), &y))
                .fold(f64::INFINITY, f64::min);
            let got = gap_bilinear(&p, &z).unwrap();
            assert!((got - (max_y - min_x)).abs() < 1e-10, "{got} vs {}", max_y - min_x);
        }
    }

    #[test]
    fn rejects_non_box() {
        let op = LocalOperator::bilinear(dmatrix![1.0], dvector![0.0], dvector![0.0]).unwrap();
        let p = ProblemInstance::with_exact_constants(vec![op], FeasibleSet::unconstrained(2), 0.0, 0.0)
            .unwrap();
        assert!(matches!(gap(&p, &dvector![0.0, 0.0]), Err(Error::Unsupported(_))));
    }
}
