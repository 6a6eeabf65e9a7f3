//! Reduction mod p and the good-reduction test.

use padyn::{PrimeContext, RationalMap};

fn main() -> padyn::Result<()> {
    let ctx = PrimeContext::new(3, 3)?;
    for text in ["(2z+3)/((z-1)(z-2))", "-(2z^2+2z+1)/(z^3-3z^2+z+1)", "z^3 + 3/z"] {
        let map = RationalMap::parse(text)?;
        let red = map.reduce_mod_p(&ctx);
        println!("{map}");
        println!("  mod 3: {red} (degree {} -> {})", map.degree(), red.degree());
        println!("  good reduction: {}, separated residues: {}", map.has_good_reduction(&ctx), map.separates_residues(&ctx));
    }
    Ok(())
}
