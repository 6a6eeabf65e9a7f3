//! Cross-module properties on random maps and coefficient tuples.

mod common;

use padyn::decomposition::{decompose, DecompositionReport};
use padyn::dynamics::{build_level_system, build_level_system_with, check_minimal_at_level};
use padyn::p2criterion::{compute_terms, derivative_at_0_of_cube, second_derivative_at_0_of_cube_by_charts, StandardForm};
use padyn::search::{tuple_map, SearchMode, SearchReport, SearchSpec};
use padyn::{ExactRational, PrimeContext};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(p: u64, max: u32) -> PrimeContext {
    PrimeContext::new(p, max).unwrap()
}

fn mod4(x: &ExactRational) -> u64 {
    x.to_residue(2, &ctx(2, 3)).unwrap().value()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn minimal_at_a_level_is_minimal_above(seed in any::<u64>(), pi in 0usize..3, d in 2usize..=4) {
        let p = [2u64, 3, 5][pi];
        let c = ctx(p, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_transitive_map(&mut rng, p, d, &c)
            .unwrap_or_else(|| common::random_good_map(&mut rng, p, d, &c));
        for n in 2..=3 {
            if check_minimal_at_level(&m, n, &c).unwrap() {
                prop_assert!(check_minimal_at_level(&m, n - 1, &c).unwrap());
            }
        }
    }

    #[test]
    fn every_image_is_representative_independent(seed in any::<u64>(), pi in 0usize..3, d in 2usize..=4) {
        let p = [2u64, 3, 5][pi];
        let c = ctx(p, 3);
        let m = common::random_good_map(&mut ChaCha8Rng::seed_from_u64(seed), p, d, &c);
        let probed = build_level_system_with(&m, 3, &c, true).unwrap();
        prop_assert_eq!(probed, build_level_system(&m, 3, &c).unwrap());
    }

    #[test]
    fn report_json_round_trips(seed in any::<u64>(), pi in 0usize..2, d in 2usize..=3) {
        let p = [2u64, 3][pi];
        let c = ctx(p, 4);
        let m = common::random_good_map(&mut ChaCha8Rng::seed_from_u64(seed), p, d, &c);
        let r = decompose(&m, &c).unwrap();
        prop_assert_eq!(DecompositionReport::from_json(&r.to_json()).unwrap(), r);
    }

    /// With a₀ and B odd, (φ³)′(0) ≡ a₀·b₁·(a_{d−1} − b_{d−1})·(A′B − AB′) mod 4.
    #[test]
    fn cube_derivative_shortcut_mod_4(
        d in 2usize..=5,
        a in proptest::collection::vec(0i64..8, 5),
        b in proptest::collection::vec(0i64..8, 4),
    ) {
        let mut a = a[..d].to_vec();
        a[0] |= 1;
        let f = StandardForm::from_free_ints(&a, &b[..d - 1]).unwrap();
        let t = compute_terms(&f).unwrap();
        prop_assume!(mod4(&t.b_sum) % 2 == 1);
        let exact = derivative_at_0_of_cube(&t).unwrap();
        let (by_charts, _) = second_derivative_at_0_of_cube_by_charts(&f).unwrap();
        prop_assert_eq!(&exact, &by_charts);
        let top = &(&f.a[d - 1] - &f.b[d - 1]);
        let bracket = &(&t.a_prime * &t.b_sum) - &(&t.a_sum * &t.b_prime);
        let shortcut = &(&(&f.a[0] * &f.b[1]) * top) * &bracket;
        prop_assert_eq!(mod4(&exact), mod4(&shortcut));
    }
}

#[test]
fn search_is_deterministic() {
    let spec = SearchSpec::new(2, 4, 4, SearchMode::Both).unwrap();
    let a = SearchReport::run(&spec).unwrap();
    let b = SearchReport::run(&spec).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(SearchReport::from_json(&a.to_json()).unwrap(), a);
}

/// Good reduction depends on the coefficients mod 2 and level-3 minimality
/// on the coefficients mod 8, so shifting a tuple by multiples of 8 must
/// leave the verdicts alone.
#[test]
fn modulus_eight_decides_low_degree_searches() {
    let c = ctx(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(0x11f7);
    let mut checked = 0;
    while checked < 100 {
        let d = rng.gen_range(2..=3usize);
        let base: Vec<i64> = (0..2 * d - 1).map(|_| rng.gen_range(0..8)).collect();
        let lifted: Vec<i64> = base.iter().map(|&x| x + 8 * rng.gen_range(-4..=4)).collect();
        let verdict = |t: &[i64]| {
            let m = tuple_map(t, d).unwrap();
            let good = m.degree() == d && m.has_good_reduction(&c);
            (good, good && check_minimal_at_level(&m, 3, &c).unwrap())
        };
        let (v0, v1) = (verdict(&base), verdict(&lifted));
        assert_eq!(v0.0, v1.0, "{base:?} vs {lifted:?}");
        if v0.0 {
            assert_eq!(v0, v1, "{base:?} vs {lifted:?}");
        }
        checked += 1;
    }
}

#[test]
fn degree_four_hits_match_the_dynamic_search() {
    // every criterion hit is a 1-Lipschitz map whose level-3 system is one
    // cycle, without good reduction
    let c = ctx(2, 3);
    let spec = SearchSpec::new(2, 4, 4, SearchMode::Coefficient).unwrap();
    for hit in SearchReport::run(&spec).unwrap().hits {
        let m = tuple_map(&hit.tuple, 4).unwrap();
        assert!(hit.minimal && !hit.good_reduction, "{:?}", hit.tuple);
        assert_eq!(hit.orbit.len(), 12);
        assert!(check_minimal_at_level(&m, 3, &c).unwrap());
    }
}
