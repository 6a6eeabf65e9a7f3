//! Both minimality checkers, condition by condition.

use padyn::dynamics::{check_minimal_by_criterion, check_minimal_by_levels};
use padyn::{PrimeContext, RationalMap};

fn main() -> padyn::Result<()> {
    let ctx = PrimeContext::new(3, 3)?;
    for text in ["-(2z^2+2z+1)/(z^3-3z^2+z+1)", "(2z+3)/((z-1)(z-2))"] {
        let map = RationalMap::parse(text)?;
        let v = check_minimal_by_criterion(&map, &ctx)?;
        println!("{map}");
        println!("  transitive on P1(F_3): {}", v.transitive_level1);
        println!("  (phi^4)'(0) mod 3 = {}, v(phi^4(0)) = {:?}", v.derivative_residue, v.valuation);
        println!("  v(phi^12(0)) = {:?}", v.extra_valuation);
        println!("  minimal: criterion {}, levels {}", v.minimal, check_minimal_by_levels(&map, &ctx)?);
    }
    Ok(())
}
