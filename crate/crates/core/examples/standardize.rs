//! Conjugating a map so that 0 -> ∞ -> 1 lies on an orbit.

use padyn::RationalMap;

fn main() -> padyn::Result<()> {
    let map = RationalMap::parse("(z^4 + 2z + 3)/(z^4 + z^3 + 1)")?;
    let (psi, g) = map.standardize()?;
    println!("phi = {map}");
    println!("g: {g}");
    println!("g phi g^-1 = {psi}");
    Ok(())
}
