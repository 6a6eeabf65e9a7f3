//! Exhaustive search of degree-4 standardized maps over Z/4.

use padyn::search::{SearchMode, SearchReport, SearchSpec};

fn main() -> padyn::Result<()> {
    let spec = SearchSpec::new(2, 4, 4, SearchMode::Coefficient)?;
    let report = SearchReport::run(&spec)?;
    print!("{}", report.to_text());
    let good = report.hits.iter().filter(|h| h.good_reduction).count();
    println!("\n{} hits, {good} with good reduction", report.hits.len());

    for d in [2, 3] {
        let spec = SearchSpec::new(2, d, 8, SearchMode::GoodReductionMinimal)?;
        println!("degree {d}: {} good-reduction minimal maps", SearchReport::run(&spec)?.hits.len());
    }
    Ok(())
}
