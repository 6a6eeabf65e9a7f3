//! The p = 2 coefficient congruences, their terms and the cube derivatives.

use padyn::p2criterion::{
    check_coefficient_criterion_for, compute_terms, derivative_at_0_of_cube, second_derivative_at_0_of_cube,
};
use padyn::RationalMap;

fn main() -> padyn::Result<()> {
    let map = RationalMap::parse("(1 + z^2 + 3z^3 + z^4)/(3z + z^2 + z^4)")?;
    let (form, _, verdict) = check_coefficient_criterion_for(&map)?;
    for c in &verdict.conditions {
        println!("{:<28} {}", c.name, if c.holds { "pass" } else { "fail" });
    }
    println!("satisfied: {}", verdict.satisfied);

    let t = compute_terms(&form)?;
    println!("A = {}, B = {}, A' = {}, B' = {}", t.a_sum, t.b_sum, t.a_prime, t.b_prime);
    if let Some(d1) = derivative_at_0_of_cube(&t) {
        println!("(phi^3)'(0) = {d1}");
    }
    println!("(phi^3)''(0) = {}", second_derivative_at_0_of_cube(&form)?);

    // a map not in standard shape is conjugated first
    let (form, g, verdict) = check_coefficient_criterion_for(&RationalMap::parse("(z^2+z+1)/(z^2+1)")?)?;
    println!("conjugated by {g}: {:?}", form.free_coefficients());
    println!("first failing condition: {:?}", verdict.first_failure().map(|c| &c.name));
    Ok(())
}
