//! Coefficient criterion for minimality over Q_2.
//!
//! Maps are taken in the standardized shape
//! `φ(z) = (a_0 + … + a_d z^d) / (b_1 z + … + b_d z^d)` with `a_d = b_d = 1`,
//! so `φ(0) = ∞` and `φ(∞) = 1`, and the orbit of the level-1 balls is
//! `0 → ∞ → 1 → 0`. Every congruence is assembled on exact rationals and
//! only reduced at the end.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{ExactRational, PrimeContext};
use crate::projective::ProjectivePoint;
use crate::ratmap::{Chart, Mobius, RationalMap};

/// Monic coefficients of a standardized map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardForm {
    /// `a_0..a_d` with `a_d = 1`.
    pub a: Vec<ExactRational>,
    /// `b_0..b_d` with `b_0 = 0` and `b_d = 1`.
    pub b: Vec<ExactRational>,
}

impl StandardForm {
    /// Builds the form from the free coefficients `a_0..a_{d-1}` and
    /// `b_1..b_{d-1}`.
    pub fn from_free(a_low: &[ExactRational], b_mid: &[ExactRational]) -> Result<Self> {
        let d = a_low.len();
        if d < 2 || b_mid.len() != d - 1 {
            return Err(Error::WrongForm(format!("need d ≥ 2 with d values a_i and d-1 values b_j, got {} and {}", d, b_mid.len())));
        }
        let mut a = a_low.to_vec();
        a.push(ExactRational::one());
        let mut b = vec![ExactRational::zero()];
        b.extend_from_slice(b_mid);
        b.push(ExactRational::one());
        Ok(StandardForm { a, b })
    }

    pub fn from_free_ints(a_low: &[i64], b_mid: &[i64]) -> Result<Self> {
        let conv = |v: &[i64]| v.iter().map(|&x| ExactRational::from_int(x)).collect::<Vec<_>>();
        StandardForm::from_free(&conv(a_low), &conv(b_mid))
    }

    /// Reads the form off a map with `φ(0) = ∞` and `φ(∞) = 1`.
    pub fn from_map(map: &RationalMap) -> Result<Self> {
        let d = map.degree();
        if d < 2 {
            return Err(Error::WrongForm(format!("degree {d} < 2")));
        }
        let (num, den) = (map.num(), map.den());
        if !den[0].is_zero() || num[0].is_zero() {
            return Err(Error::WrongForm("φ(0) ≠ ∞".into()));
        }
        if num[d] != den[d] || num[d].is_zero() {
            return Err(Error::WrongForm("φ(∞) ≠ 1".into()));
        }
        let lead = ExactRational::from(num[d].clone());
        let scale = |v: &[num_bigint::BigInt]| v.iter().map(|c| &ExactRational::from(c.clone()) / &lead).collect();
        Ok(StandardForm { a: scale(num), b: scale(den) })
    }

    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// The rational map, with any common factor cancelled.
    pub fn to_map(&self) -> Result<RationalMap> {
        RationalMap::from_coeffs(&self.a, &self.b)
    }

    /// The free coefficients `(a_0..a_{d-1}, b_1..b_{d-1})`.
    pub fn free_coefficients(&self) -> Vec<ExactRational> {
        let d = self.degree();
        self.a[..d].iter().chain(&self.b[1..d]).cloned().collect()
    }
}

fn ctx2() -> PrimeContext {
    PrimeContext::new(2, 3).expect("p = 2 context")
}

/// Residue of an exact value mod 2^k, `None` if it is not 2-integral.
fn residue_mod(x: &ExactRational, k: u32) -> Option<u64> {
    x.to_residue(k, &ctx2()).ok().map(|r| r.value())
}

fn sum<'a>(it: impl Iterator<Item = &'a ExactRational>) -> ExactRational {
    it.fold(ExactRational::zero(), |acc, x| &acc + x)
}

/// The coefficient sums and derivative terms of the criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionTerms {
    /// Σ a_i
    pub a_sum: ExactRational,
    /// Σ_{j≥1} b_j
    pub b_sum: ExactRational,
    /// Σ a_{2i+1}
    pub a_odd: ExactRational,
    /// Σ a_{4i+1}
    pub a_1mod4: ExactRational,
    /// Σ a_{4i+3}
    pub a_3mod4: ExactRational,
    /// Σ i·a_i
    pub a_prime: ExactRational,
    /// Σ i·b_i
    pub b_prime: ExactRational,
    /// Σ i(i−1)·a_i
    pub a_second: ExactRational,
    /// Σ i(i−1)·b_i
    pub b_second: ExactRational,
    /// Derivative of 1/φ at 0.
    pub eta1: ExactRational,
    /// Derivative of φ(1/w) at w = 0.
    pub eta2: ExactRational,
    /// φ′(1); `None` when B = 0.
    pub eta: Option<ExactRational>,
    /// Second derivative of 1/φ at 0.
    pub xi1: ExactRational,
    /// Second derivative of φ(1/w) at w = 0.
    pub xi2: ExactRational,
    /// φ″(1); `None` when B = 0.
    pub xi: Option<ExactRational>,
}

pub fn compute_terms(form: &StandardForm) -> Result<CriterionTerms> {
    let d = form.degree();
    let (a, b) = (&form.a, &form.b);
    if a[0].is_zero() {
        return Err(Error::WrongForm("a_0 = 0".into()));
    }
    let idx = |i: usize| ExactRational::from_int(i as i64);
    let a_sum = sum(a.iter());
    let b_sum = sum(b.iter().skip(1));
    let a_odd = sum(a.iter().skip(1).step_by(2));
    let a_1mod4 = sum(a.iter().skip(1).step_by(4));
    let a_3mod4 = sum(a.iter().skip(3).step_by(4));
    let weighted = |c: &[ExactRational], w: &dyn Fn(usize) -> ExactRational| -> ExactRational {
        c.iter().enumerate().fold(ExactRational::zero(), |acc, (i, x)| &acc + &(&w(i) * x))
    };
    let a_prime = weighted(a, &idx);
    let b_prime = weighted(b, &idx);
    let second = |i: usize| ExactRational::from_int((i * i.saturating_sub(1)) as i64);
    let a_second = weighted(a, &second);
    let b_second = weighted(b, &second);
    let two = ExactRational::from_int(2);
    let eta1 = &b[1] / &a[0];
    let eta2 = &a[d - 1] - &b[d - 1];
    let (eta, xi) = if b_sum.is_zero() {
        (None, None)
    } else {
        let eta = &(&(&a_prime * &b_sum) - &(&b_prime * &a_sum)) / &(&b_sum * &b_sum);
        let b2 = &b_sum * &b_sum;
        let top = &(&(&a_second * &b2) - &(&(&b_second * &a_sum) * &b_sum))
            + &(&two * &(&(&a_sum * &(&b_prime * &b_prime)) - &(&(&a_prime * &b_prime) * &b_sum)));
        (Some(eta), Some(&top / &(&b2 * &b_sum)))
    };
    let a0 = &a[0];
    let xi1 = &(&(&(&two * &b[2]) * &(a0 * a0)) - &(&(&two * &a[1]) * &(&b[1] * a0))) / &(a0 * &(a0 * a0));
    let xi2 = &(&two * &(&a[d - 2] - &b[d - 2])) + &(&two * &(&(&b[d - 1] * &b[d - 1]) - &(&a[d - 1] * &b[d - 1])));
    Ok(CriterionTerms {
        a_sum,
        b_sum,
        a_odd,
        a_1mod4,
        a_3mod4,
        a_prime,
        b_prime,
        a_second,
        b_second,
        eta1,
        eta2,
        eta,
        xi1,
        xi2,
        xi,
    })
}

/// The three congruences that make a standardized map 1-Lipschitz on
/// P¹(Q_2): integral coefficients, a₀ odd, A even, B odd.
pub fn is_one_lipschitz_form(form: &StandardForm) -> bool {
    let integral = form.a.iter().chain(&form.b).all(|c| c.is_p_integral(2));
    if !integral {
        return false;
    }
    let a_sum = sum(form.a.iter());
    let b_sum = sum(form.b.iter().skip(1));
    residue_mod(&form.a[0], 1) == Some(1) && residue_mod(&a_sum, 1) == Some(0) && residue_mod(&b_sum, 1) == Some(1)
}

/// As [`is_one_lipschitz_form`], for a map that must already be standardized.
pub fn is_one_lipschitz_standard_p2(map: &RationalMap) -> Result<bool> {
    Ok(is_one_lipschitz_form(&StandardForm::from_map(map)?))
}

/// One congruence of the criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    /// 2 or 4; 1 for the integrality condition.
    pub modulus: u64,
    pub expected: u64,
    /// The computed residue, `None` when the quantity is not 2-integral.
    pub residue: Option<u64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientVerdict {
    pub conditions: Vec<Condition>,
    /// A mod 2, shown next to the A ≡ 2 (mod 4) condition because the
    /// 1-Lipschitz property only needs A even.
    pub a_sum_mod_2: Option<u64>,
    pub satisfied: bool,
}

impl CoefficientVerdict {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// First failing condition.
    pub fn first_failure(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.holds)
    }
}

pub const CONDITION_NAMES: [&str; 8] = [
    "coefficients in Z_2",
    "a0 = 1 mod 2",
    "B = 1 mod 2",
    "A = 2 mod 4",
    "A_odd = 1 mod 2",
    "b1 = 1 mod 2",
    "a[d-1] - b[d-1] = 1 mod 2",
    "mixed term = 1 mod 4",
];

/// Evaluates the eight congruences on a standardized form.
pub fn check_coefficient_criterion(form: &StandardForm) -> Result<CoefficientVerdict> {
    let d = form.degree();
    let (a, b) = (&form.a, &form.b);
    if d < 2 {
        return Err(Error::WrongForm(format!("degree {d} < 2")));
    }
    let integral = a.iter().chain(b).all(|c| c.is_p_integral(2));
    let a_sum = sum(a.iter());
    let b_sum = sum(b.iter().skip(1));
    let a_odd = sum(a.iter().skip(1).step_by(2));
    let a2 = sum(a.iter().skip(1).step_by(4));
    let a3 = sum(a.iter().skip(3).step_by(4));
    let top_diff = &a[d - 1] - &b[d - 1];
    // a0 b1 (a_{d-1} - b_{d-1}) (A2 - A3) B + 2 (b2 - a1 + a_{d-2} - b_{d-2} + b_{d-1} + A3)
    let product = &(&(&(&a[0] * &b[1]) * &top_diff) * &(&a2 - &a3)) * &b_sum;
    let inner = &(&(&(&(&b[2] - &a[1]) + &a[d - 2]) - &b[d - 2]) + &b[d - 1]) + &a3;
    let mixed = &product + &(&ExactRational::from_int(2) * &inner);

    let cond = |name: &str, x: &ExactRational, k: u32, expected: u64| {
        let residue = residue_mod(x, k);
        Condition { name: name.into(), modulus: 1 << k, expected, residue, holds: residue == Some(expected) }
    };
    let conditions = vec![
        Condition { name: CONDITION_NAMES[0].into(), modulus: 1, expected: 0, residue: None, holds: integral },
        cond(CONDITION_NAMES[1], &a[0], 1, 1),
        cond(CONDITION_NAMES[2], &b_sum, 1, 1),
        cond(CONDITION_NAMES[3], &a_sum, 2, 2),
        cond(CONDITION_NAMES[4], &a_odd, 1, 1),
        cond(CONDITION_NAMES[5], &b[1], 1, 1),
        cond(CONDITION_NAMES[6], &top_diff, 1, 1),
        cond(CONDITION_NAMES[7], &mixed, 2, 1),
    ];
    let satisfied = conditions.iter().all(|c| c.holds);
    Ok(CoefficientVerdict { conditions, a_sum_mod_2: residue_mod(&a_sum, 1), satisfied })
}

/// Standardizes an arbitrary map first and reports the verdict for the
/// conjugate, together with the conjugating transformation.
pub fn check_coefficient_criterion_for(map: &RationalMap) -> Result<(StandardForm, Mobius, CoefficientVerdict)> {
    let (psi, g) = map.standardize()?;
    let form = StandardForm::from_map(&psi)?;
    let verdict = check_coefficient_criterion(&form)?;
    Ok((form, g, verdict))
}

/// (φ³)′(0) = η·η₂·η₁; `None` when B = 0.
pub fn derivative_at_0_of_cube(terms: &CriterionTerms) -> Option<ExactRational> {
    terms.eta.as_ref().map(|eta| &(eta * &terms.eta2) * &terms.eta1)
}

/// (φ³)″(0) = η·η₂·ξ₁ + η·η₁²·ξ₂ + ξ·η₁²·η₂²; `None` when B = 0.
pub fn cube_second_derivative_from_terms(t: &CriterionTerms) -> Option<ExactRational> {
    let (eta, xi) = (t.eta.as_ref()?, t.xi.as_ref()?);
    let e1sq = &t.eta1 * &t.eta1;
    let first = &(eta * &t.eta2) * &t.xi1;
    let second = &(eta * &e1sq) * &t.xi2;
    let third = &(xi * &e1sq) * &(&t.eta2 * &t.eta2);
    Some(&(&first + &second) + &third)
}

/// (φ³)″(0) from the term formulas.
pub fn second_derivative_at_0_of_cube(form: &StandardForm) -> Result<ExactRational> {
    cube_second_derivative_from_terms(&compute_terms(form)?).ok_or_else(|| Error::WrongForm("B = 0, φ(1) = ∞".into()))
}

/// Independent route: the second-order chain rule through the charts along
/// 0 → ∞ → 1 → φ(1).
pub fn second_derivative_at_0_of_cube_by_charts(form: &StandardForm) -> Result<(ExactRational, ExactRational)> {
    let map = form.to_map()?;
    if map.degree() != form.degree() {
        return Err(Error::WrongForm("numerator and denominator share a factor".into()));
    }
    let zero = ProjectivePoint::from_int(0);
    let inf = ProjectivePoint::infinity();
    let one = ProjectivePoint::from_int(1);
    let steps = [
        (&zero, Chart::Identity, Chart::Inversion),
        (&inf, Chart::Inversion, Chart::Identity),
        (&one, Chart::Identity, Chart::Identity),
    ];
    // (f∘g)′ = f′(g)·g′ and (f∘g)″ = f″(g)·g′² + f′(g)·g″
    let mut d1 = ExactRational::one();
    let mut d2 = ExactRational::zero();
    for (pt, cin, cout) in steps {
        let f1 = map.chart_derivative(pt, cin, cout)?;
        let f2 = map.chart_second_derivative(pt, cin, cout)?;
        d2 = &(&f2 * &(&d1 * &d1)) + &(&f1 * &d2);
        d1 = &f1 * &d1;
    }
    Ok((d1, d2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(a: [i64; 4], b: [i64; 3]) -> StandardForm {
        StandardForm::from_free_ints(&a, &b).unwrap()
    }

    fn q(n: i64) -> ExactRational {
        ExactRational::from_int(n)
    }

    #[test]
    fn table_row_terms() {
        let t = compute_terms(&row([1, 0, 1, 3], [3, 1, 0])).unwrap();
        assert_eq!(t.a_sum, q(6));
        assert_eq!(t.b_sum, q(5));
        assert_eq!(t.a_odd, q(3));
        assert_eq!(t.a_1mod4, q(0));
        assert_eq!(t.a_3mod4, q(3));
        assert_eq!(t.eta2, q(3));
        assert_eq!(t.eta1, q(3));
    }

    #[test]
    fn zero_free_coefficients_sum_to_one() {
        // only a_d = 1 survives; a_0 = 0 makes the form invalid for the terms
        let f = row([0, 0, 0, 0], [0, 0, 0]);
        assert_eq!(sum(f.a.iter()), q(1));
        assert!(matches!(compute_terms(&f), Err(Error::WrongForm(_))));
    }

    #[test]
    fn table_row_passes_every_condition() {
        let v = check_coefficient_criterion(&row([1, 0, 1, 3], [3, 1, 0])).unwrap();
        assert!(v.satisfied, "{v:?}");
        // mixed term: 1·3·3·(0−3)·5 + 2(1−0+1−1+0+3) = −135 + 8 = −127 ≡ 1 (mod 4)
        assert_eq!(v.condition(CONDITION_NAMES[7]).unwrap().residue, Some(1));
        assert_eq!(v.a_sum_mod_2, Some(0));
        assert!(check_coefficient_criterion(&row([1, 1, 1, 2], [3, 2, 3])).unwrap().satisfied);
    }

    #[test]
    fn even_a0_fails_second_condition() {
        let v = check_coefficient_criterion(&row([2, 0, 1, 3], [3, 1, 0])).unwrap();
        assert!(!v.satisfied);
        assert_eq!(v.first_failure().unwrap().name, CONDITION_NAMES[1]);
    }

    #[test]
    fn non_integral_fails_first_condition() {
        let f = StandardForm::from_free(&[q(1), ExactRational::new(1, 2).unwrap(), q(1), q(3)], &[q(3), q(1), q(0)]).unwrap();
        let v = check_coefficient_criterion(&f).unwrap();
        assert!(!v.conditions[0].holds);
        assert!(!is_one_lipschitz_form(&f));
    }

    #[test]
    fn lipschitz_form_examples() {
        assert!(is_one_lipschitz_form(&row([1, 0, 1, 3], [3, 1, 0])));
        assert!(is_one_lipschitz_form(&row([1, 1, 1, 2], [3, 2, 3])));
        assert!(!is_one_lipschitz_form(&row([0, 1, 1, 2], [3, 2, 3])));
        let m = RationalMap::parse("(1 + z^2 + 3z^3 + z^4)/(3z + z^2 + z^4)").unwrap();
        assert_eq!(is_one_lipschitz_standard_p2(&m), Ok(true));
        assert!(matches!(is_one_lipschitz_standard_p2(&RationalMap::parse("z^2+1").unwrap()), Err(Error::WrongForm(_))));
    }

    #[test]
    fn good_reduction_never_meets_the_criterion_in_low_degree() {
        let c2 = PrimeContext::new(2, 3).unwrap();
        for d in 2..=4usize {
            let free = 2 * d - 1;
            for code in 0..(1u32 << (2 * free)) {
                let digits: Vec<i64> = (0..free).map(|k| ((code >> (2 * k)) & 3) as i64).collect();
                let f = StandardForm::from_free_ints(&digits[..d], &digits[d..]).unwrap();
                let map = f.to_map().unwrap();
                if map.degree() == d && map.has_good_reduction(&c2) {
                    let v = check_coefficient_criterion(&f).unwrap();
                    assert!(!v.satisfied, "{digits:?}");
                    if d == 4 && v.conditions[..6].iter().all(|c| c.holds) {
                        // the parity of a3 - b3 is what rules these out
                        assert!(!v.conditions[6].holds, "{digits:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn cube_derivatives_match_chart_chain_rule() {
        let f = row([1, 0, 1, 3], [3, 1, 0]);
        let t = compute_terms(&f).unwrap();
        let (d1, d2) = second_derivative_at_0_of_cube_by_charts(&f).unwrap();
        assert_eq!(derivative_at_0_of_cube(&t).unwrap(), d1);
        assert_eq!(second_derivative_at_0_of_cube(&f).unwrap(), d2);
        // (φ³)′(0) + (φ³)″(0) ≡ 1 (mod 4)
        assert_eq!(residue_mod(&(&d1 + &d2), 2), Some(1));
    }

    #[test]
    fn vanishing_second_order_terms_give_zero() {
        let t = CriterionTerms {
            xi1: q(0),
            xi2: q(0),
            xi: Some(q(0)),
            ..compute_terms(&row([1, 0, 1, 3], [3, 1, 0])).unwrap()
        };
        assert_eq!(cube_second_derivative_from_terms(&t), Some(q(0)));
    }

    #[test]
    fn standardize_routes_arbitrary_maps() {
        let m = RationalMap::parse("(1 + z^2 + 3z^3 + z^4)/(3z + z^2 + z^4)").unwrap();
        let (form, g, v) = check_coefficient_criterion_for(&m).unwrap();
        assert_eq!(g, Mobius::identity());
        assert_eq!(form, row([1, 0, 1, 3], [3, 1, 0]));
        assert!(v.satisfied);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(50))]

            #[test]
            fn second_derivative_formula_matches_charts(
                d in 2usize..=5,
                a in proptest::collection::vec(-6i64..7, 5),
                b in proptest::collection::vec(-6i64..7, 4),
            ) {
                let mut a = a[..d].to_vec();
                a[0] = 2 * a[0] + 1;
                let f = StandardForm::from_free_ints(&a, &b[..d - 1]).unwrap();
                let t = compute_terms(&f).unwrap();
                prop_assume!(!t.b_sum.is_zero());
                prop_assume!(f.to_map().unwrap().degree() == d);
                let (d1, d2) = second_derivative_at_0_of_cube_by_charts(&f).unwrap();
                prop_assert_eq!(derivative_at_0_of_cube(&t).unwrap(), d1);
                prop_assert_eq!(second_derivative_at_0_of_cube(&f).unwrap(), d2);
            }
        }
    }
}
