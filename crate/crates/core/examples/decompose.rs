//! Minimal decomposition, as text and as a DOT lift tree.
//!
//! `cargo run --example decompose -- "z^2" 3 4` prints the report for any
//! map, prime and precision cap.

use padyn::decomposition::decompose;
use padyn::{PrimeContext, RationalMap};

fn main() -> padyn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = args.first().map_or("(2z+3)/((z-1)(z-2))", String::as_str);
    let p = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let max = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let ctx = PrimeContext::new(p, max)?;
    let map = RationalMap::parse(text)?;
    let report = decompose(&map, &ctx)?;
    print!("{}", report.to_text());
    for c in &report.components {
        println!("{}: observed cycle lengths {:?}", c.id, c.observed_lengths);
    }
    println!();
    print!("{}", report.to_dot());
    Ok(())
}
