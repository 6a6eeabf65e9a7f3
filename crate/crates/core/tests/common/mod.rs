//! Random map generators shared by the integration tests.

#![allow(dead_code)]

use padyn::{PrimeContext, RationalMap};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random map of exact degree `d` with good reduction, integer coefficients
/// in `-p³..p³`.
pub fn random_good_map(rng: &mut ChaCha8Rng, p: u64, d: usize, ctx: &PrimeContext) -> RationalMap {
    let bound = (p * p * p) as i64;
    loop {
        let num: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
        let den: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
        if let Ok(m) = RationalMap::from_int_coeffs(&num, &den) {
            if m.degree() == d && m.has_good_reduction(ctx) {
                return m;
            }
        }
    }
}

/// Good-reduction map of degree `d` whose reduction is transitive on
/// P¹(F_p): the reduction is found by rejection sampling over F_p, then every
/// coefficient gets p·noise. `None` if no transitive reduction turns up.
pub fn random_transitive_map(rng: &mut ChaCha8Rng, p: u64, d: usize, ctx: &PrimeContext) -> Option<RationalMap> {
    let pi = p as i64;
    for _ in 0..40_000 {
        let num: Vec<i64> = (0..=d).map(|_| rng.gen_range(0..pi)).collect();
        let den: Vec<i64> = (0..=d).map(|_| rng.gen_range(0..pi)).collect();
        let Ok(m) = RationalMap::from_int_coeffs(&num, &den) else { continue };
        if m.degree() != d || !m.has_good_reduction(ctx) {
            continue;
        }
        if !padyn::dynamics::check_minimal_at_level(&m, 1, ctx).unwrap_or(false) {
            continue;
        }
        let lift = |v: &[i64], rng: &mut ChaCha8Rng| -> Vec<i64> { v.iter().map(|&x| x + pi * rng.gen_range(-pi * pi..=pi * pi)).collect() };
        let (n2, d2) = (lift(&num, rng), lift(&den, rng));
        let lifted = RationalMap::from_int_coeffs(&n2, &d2).ok()?;
        return (lifted.degree() == d && lifted.has_good_reduction(ctx)).then_some(lifted);
    }
    None
}
