//! The height formulas for `L^k` against explicit trees.

use cppsfs::genealogy::{
    branch_spectrum, branch_spectrum_with, build_tree, sample_genealogy, spectrum_from_tree, Coordinate, Regime,
    SampleGenealogy,
};
use cppsfs::verify::permutations;
use cppsfs::{ModelParams, RandomStream};
use proptest::prelude::*;

fn genealogy(horizon: f64, times: Vec<f64>) -> SampleGenealogy {
    SampleGenealogy {
        regime: Regime::Exact,
        coordinate: Coordinate::H,
        horizon,
        r: 0.0,
        times,
        population_size: None,
        fraction: f64::NAN,
    }
}

fn assert_same(g: &SampleGenealogy) {
    let k_max = g.n() - 1;
    let a = branch_spectrum(g, k_max).unwrap();
    let b = spectrum_from_tree(&build_tree(g).unwrap(), k_max);
    for (k, (x, y)) in a.totals.iter().zip(&b.totals).enumerate() {
        assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "k = {}: {x} vs {y} for {:?}", k + 1, g.times);
    }
    assert!((a.stem - b.stem).abs() <= 1e-12);
}

fn identity_error(g: &SampleGenealogy) -> f64 {
    let s = branch_spectrum(g, g.n() - 1).unwrap();
    let lhs = s.totals.iter().sum::<f64>() + s.stem;
    let rhs = g.horizon + g.times.iter().sum::<f64>();
    (lhs - rhs).abs() / rhs
}

proptest! {
    #[test]
    fn formula_matches_tree(times in prop::collection::vec(0.0f64..1.0, 1..10)) {
        assert_same(&genealogy(1.0, times));
    }

    #[test]
    fn formula_matches_tree_with_ties(times in prop::collection::vec(0u8..4, 1..10)) {
        let times: Vec<f64> = times.into_iter().map(|x| 0.1 + 0.2 * x as f64).collect();
        assert_same(&genealogy(1.0, times));
    }

    #[test]
    fn length_identity(times in prop::collection::vec(0.0f64..5.0, 1..30)) {
        prop_assert!(identity_error(&genealogy(5.0, times)) <= 1e-12);
    }

    #[test]
    fn per_branch_pieces_non_negative_and_sum_to_totals(times in prop::collection::vec(0.0f64..1.0, 2..15)) {
        let g = genealogy(1.0, times);
        let k_max = g.n() - 1;
        let s = branch_spectrum_with(&g, k_max, true).unwrap();
        let mut sums = vec![0.0; k_max];
        for &(_, k, v) in s.per_branch.as_ref().unwrap() {
            prop_assert!(v >= 0.0);
            sums[k - 1] += v;
        }
        for (a, b) in sums.iter().zip(&s.totals) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn simulated_genealogies_satisfy_identity(seed in any::<u64>(), n in 2usize..60) {
        let p = ModelParams::critical(50.0, n).unwrap();
        let g = sample_genealogy(&p, Regime::Exact, &mut RandomStream::new(seed, 0).rng()).unwrap();
        prop_assert!(identity_error(&g) <= 1e-12);
        let q = ModelParams::new(2.0, 0.5, 6.0, n, 0.0).unwrap();
        let g = sample_genealogy(&q, Regime::Exact, &mut RandomStream::new(seed, 1).rng()).unwrap();
        prop_assert!(identity_error(&g) <= 1e-12);
    }
}

#[test]
fn exhaustive_orderings_up_to_seven_leaves() {
    for m in 1..=6 {
        let heights: Vec<f64> = (1..=m).map(|j| j as f64 / 10.0).collect();
        for p in permutations(&heights) {
            let g = genealogy(1.0, p);
            assert_same(&g);
            assert!(identity_error(&g) <= 1e-12);
        }
    }
}

#[test]
fn support_beyond_sample_is_empty() {
    let g = genealogy(1.0, vec![0.3, 0.6, 0.1]);
    let s = branch_spectrum(&g, 3).unwrap();
    assert_eq!(s.total(4), 0.0);
    assert!(branch_spectrum(&g, 4).is_err());
}
