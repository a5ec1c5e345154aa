//! Problem families: random bilinear games, the regularization wrapper, the
//! zero-chain lower-bound construction, gap evaluation and reference solutions.

mod bilinear;
mod gap;
mod io;
mod lower_bound;
mod reference;
mod regularize;

pub use bilinear::{gen_bilinear, gen_opposed_rotation, random_orthogonal};
pub use gap::{gap, gap_bilinear, GapEvaluator};
pub use io::{problem_from_json, problem_to_json};
pub use lower_bound::{
    gen_lower_bound_instance, lb_normal_solve, lb_reference_solution, lb_saddle_point, LbReference,
    LowerBoundSpec, Placement,
};
pub use reference::{solve_reference, ReferenceSolution, DEFAULT_REFERENCE_TOL};
pub use regularize::{regularize, regularize_with_modulus};
