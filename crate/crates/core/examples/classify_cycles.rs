//! α, β and the four lift behaviours, followed two levels down.

use padyn::dynamics::{analyze_cycle, build_level_system, cycles_of, lift_cycle};
use padyn::{PrimeContext, RationalMap};

fn main() -> padyn::Result<()> {
    let ctx = PrimeContext::new(3, 4)?;
    for text in ["(2z+3)/((z-1)(z-2))", "z^2", "2z + 3z^2 + z^3", "z + 3z^2 + z^3"] {
        let map = RationalMap::parse(text)?;
        println!("{map}");
        let mut frontier = cycles_of(&build_level_system(&map, 1, &ctx)?).cycles;
        for _ in 1..=2 {
            let mut next = Vec::new();
            for cycle in frontier.iter().take(4) {
                let node = analyze_cycle(&map, cycle, &ctx)?;
                let beta = node.beta.map_or("-".to_string(), |b| b.to_string());
                println!(
                    "  level {} ({}): alpha {}, beta {beta}: {}",
                    node.level,
                    node.labels().join(" "),
                    node.alpha,
                    node.classification
                );
                next.extend(lift_cycle(&map, &node, &ctx)?.cycles);
            }
            frontier = next;
        }
    }
    Ok(())
}
