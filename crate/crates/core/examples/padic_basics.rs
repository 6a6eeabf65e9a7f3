//! Valuations, residues, balls and the spherical distance on P¹(Q_p).

use padyn::projective::{ball_of, enumerate_balls, spherical_distance};
use padyn::{ExactRational, PrimeContext, ProjectivePoint};

fn main() -> padyn::Result<()> {
    let ctx = PrimeContext::new(3, 3)?;
    let x: ExactRational = "45/4".parse()?;
    println!("v_3({x}) = {}", x.valuation(3));
    println!("{x} mod 27 = {}", x.to_residue(3, &ctx)?);

    let level1: Vec<String> = enumerate_balls(1, &ctx)?.iter().map(|b| b.label()).collect();
    println!("level-1 balls: {}", level1.join(" "));

    for s in ["0", "15", "1/3", "inf"] {
        let pt = ProjectivePoint::parse(s)?;
        println!("{s:>4} lies in the level-3 ball {}", ball_of(&pt, 3, &ctx)?);
    }
    let (a, b) = (ProjectivePoint::from_int(1), ProjectivePoint::from_int(10));
    println!("distance exponent between 1 and 10: {}", spherical_distance(&a, &b, 3));
    Ok(())
}
