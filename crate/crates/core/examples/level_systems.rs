//! The induced maps on level-n balls and their cycles.

use padyn::dynamics::{build_level_system, cycles_of};
use padyn::{PrimeContext, RationalMap};

fn main() -> padyn::Result<()> {
    let ctx = PrimeContext::new(3, 3)?;
    let map = RationalMap::parse("(2z+3)/((z-1)(z-2))")?;
    for level in 1..=3 {
        let sys = build_level_system(&map, level, &ctx)?;
        let cycles = cycles_of(&sys);
        println!("level {level}: {} balls, {} on tails", sys.len(), cycles.tail_count());
        for c in &cycles.cycles {
            let labels: Vec<String> = c.iter().map(|b| b.label()).collect();
            println!("  cycle of length {}: {}", c.len(), labels.join(" -> "));
        }
    }
    Ok(())
}
