use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use saddlenet::consensus::{consensus_error, contraction_bound, fastmix, NodeMatrix};
use saddlenet::model::{FeasibleSet, StochasticOracle};
use saddlenet::problems::{gap, gen_bilinear, regularize_with_modulus, solve_reference};
use saddlenet::topology::{GossipMatrix, Topology, TopologyKind};

fn vec_strategy(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

fn set_strategy(n: usize) -> impl Strategy<Value = FeasibleSet> {
    prop_oneof![
        Just(FeasibleSet::unconstrained(n)),
        (0.1f64..3.0).prop_map(move |r| FeasibleSet::cube(n, r).unwrap()),
        (vec_strategy(n, 1.0), 0.1f64..3.0).prop_map(|(c, r)| FeasibleSet::ball(c, r).unwrap()),
    ]
}

/// Brute-force gap of `xᵀAy + bᵀx + cᵀy` on `[−1, 1]ⁿ × [−1, 1]ⁿ` by vertex
/// enumeration; the objective is linear in each block so extrema sit at vertices.
fn vertex_gap(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let n = x.len();
    let f = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * a * y)[(0, 0)] + b.dot(x) + c.dot(y);
    let vertex = |mask: usize| DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 });
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for mask in 0..1usize << n {
        let v = vertex(mask);
        hi = hi.max(f(x, &v));
        lo = lo.min(f(&v, y));
    }
    hi - lo
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        (set, a, b) in (1usize..6).prop_flat_map(|n| (set_strategy(n), vec_strategy(n, 5.0), vec_strategy(n, 5.0)))
    ) {
        let a = DVector::from_vec(a);
        let b = DVector::from_vec(b);
        let pa = set.project(&a).unwrap();
        let pb = set.project(&b).unwrap();
        prop_assert_eq!(set.project(&pa).unwrap(), pa.clone());
        prop_assert!((pa - pb).norm() <= (a - b).norm() + 1e-12);
    }

    #[test]
    fn oracle_is_deterministic_per_seed(seed in any::<u64>(), node in 0usize..3) {
        let p = gen_bilinear(3, 3, 5.0, 1.0, 1).unwrap().with_sigma2(4.0).unwrap();
        let z = DVector::from_element(6, 0.3);
        let draw = || {
            let o = StochasticOracle::new(&p, seed);
            let mut s = o.stream(node);
            (0..5).map(|_| o.sample(&mut s, &z).unwrap()).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(), draw());
    }

    #[test]
    fn regularized_operator_is_strongly_monotone_and_smooth(
        seed in any::<u64>(), mu in 0.01f64..2.0, z1 in vec_strategy(8, 2.0), z2 in vec_strategy(8, 2.0)
    ) {
        let base = gen_bilinear(4, 3, 10.0, 3.0, seed).unwrap();
        let anchor = DVector::from_element(8, 0.1);
        let p = regularize_with_modulus(&base, mu, &anchor).unwrap();
        let (z1, z2) = (DVector::from_vec(z1), DVector::from_vec(z2));
        let df = p.eval_mean(&z1).unwrap() - p.eval_mean(&z2).unwrap();
        let dz = &z1 - &z2;
        prop_assert!(df.dot(&dz) - mu * dz.norm_squared() >= -1e-10);
        prop_assert!(df.norm() <= p.meta().l * dz.norm() + 1e-9);
        // The shift vanishes at the anchor.
        prop_assert_eq!(p.eval_mean(&anchor).unwrap(), base.eval_mean(&anchor).unwrap());
    }

    #[test]
    fn gap_matches_vertex_enumeration(seed in any::<u64>(), x in vec_strategy(4, 1.0), y in vec_strategy(4, 1.0)) {
        let p = gen_bilinear(4, 2, 10.0, 3.0, seed).unwrap();
        let (a, b, c) = p.bilinear_average().unwrap();
        let (x, y) = (DVector::from_vec(x), DVector::from_vec(y));
        let z = DVector::from_iterator(8, x.iter().chain(y.iter()).copied());
        let g = gap(&p, &z).unwrap();
        let oracle = vertex_gap(&a, &b, &c, &x, &y);
        prop_assert!(g >= 0.0);
        prop_assert!((g - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()), "closed form {} vs vertices {}", g, oracle);
    }

    #[test]
    fn fastmix_preserves_the_row_average(
        kind in prop::sample::select(vec![TopologyKind::Path, TopologyKind::Ring, TopologyKind::Star, TopologyKind::Complete]),
        m in 3usize..10, rounds in 0usize..25, seed in any::<u64>()
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = GossipMatrix::laplacian(&Topology::build(kind, m).unwrap()).unwrap();
        let z = NodeMatrix::from_matrix(DMatrix::from_fn(m, 4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let out = fastmix(&z, &g, rounds).unwrap();
        let before = z.mean_row();
        prop_assert!((out.mean_row() - &before).norm() <= 1e-11 * before.norm().max(1.0));
    }
}

#[test]
fn gap_vanishes_at_the_reference_solution() {
    let base = gen_bilinear(5, 4, 20.0, 5.0, 13).unwrap();
    let p = regularize_with_modulus(&base, 0.5, &DVector::zeros(10)).unwrap();
    let z = solve_reference(&p, 1e-11, 2_000_000).unwrap().point.into_vector();
    assert!(gap(&p, &z).unwrap() <= 1e-9);
}

#[test]
fn three_node_path_contracts_within_the_constant_fourteen_bound() {
    // The bare (1 − 1/√χ)^{2P} form is exceeded by FastMix; the acceptance
    // target reports that. The guarantee that holds carries a factor 14.
    use rand::{Rng, SeedableRng};
    let g = GossipMatrix::laplacian(&Topology::build(TopologyKind::Path, 3).unwrap()).unwrap();
    let bound = contraction_bound(&g, 10);
    assert!((bound - (1.0 - 1.0 / 3f64.sqrt()).powi(20)).abs() < 1e-20);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    for _ in 0..50 {
        let z = NodeMatrix::from_matrix(DMatrix::from_fn(3, 5, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let ratio = consensus_error(&fastmix(&z, &g, 10).unwrap()) / consensus_error(&z);
        assert!(ratio <= 14.0 * bound, "ratio {ratio:e} above 14 x {bound:e}");
    }
}
