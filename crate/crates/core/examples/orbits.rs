//! Residue orbits at a fixed precision, including iterates of φ^k.

use padyn::dynamics::{iterate_with_derivative, orbit_of_point};
use padyn::{PrimeContext, ProjectiveBall, ProjectivePoint, RationalMap};

fn main() -> padyn::Result<()> {
    let ctx = PrimeContext::new(3, 3)?;
    let map = RationalMap::parse("(2z+3)/((z-1)(z-2))")?;
    let orbit = orbit_of_point(&map, &ProjectivePoint::from_int(0), 3, 3, 1, &ctx)?;
    let labels: Vec<String> = orbit.iter().map(|b| b.label()).collect();
    println!("orbit of 0 mod 27: {}", labels.join(" -> "));

    let map = RationalMap::parse("-(2z^2+2z+1)/(z^3-3z^2+z+1)")?;
    let one = ProjectiveBall::finite(3, 1, &ctx)?;
    for k in [4, 8, 12] {
        let (ball, d) = iterate_with_derivative(&map, &one, k, &ctx)?;
        println!("phi^{k}(1) mod 27 = {ball}, derivative mod 3 = {d}");
    }
    Ok(())
}
