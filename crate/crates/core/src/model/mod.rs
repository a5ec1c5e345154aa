//! Domain vocabulary: points, feasible sets, local operators, problem
//! instances and the stochastic oracle.

mod operator;
mod oracle;
mod point;
mod problem;
mod set;

pub use operator::{piece_matrix, piece_superdiag, LocalOperator, Piece};
pub use oracle::{NodeStream, StochasticOracle};
pub use point::IteratePoint;
pub use problem::{
    affine_jacobian, estimate_heterogeneity, AffineMap, heterogeneity_samples, ProblemInstance, ProblemMeta,
};
pub use set::{FeasibleSet, SetKind};

pub(crate) use operator::spectral_norm;
