//! Exhaustive searches over standardized coefficient tuples.
//!
//! A tuple `(a_0..a_{d-1}, b_1..b_{d-1})` with entries in `0..M` stands for
//! the map `(a_0 + … + z^d) / (b_1 z + … + z^d)`. Every predicate used here
//! is a congruence mod at most 8, so for `M` a multiple of 8 (or 4 for the
//! coefficient criterion) the verdicts are those of the 2-adic family.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_level_system, check_minimal_at_level};
use crate::error::{Error, Result};
use crate::p2criterion::{check_coefficient_criterion, StandardForm};
use crate::padic::PrimeContext;
use crate::projective::ProjectiveBall;
use crate::ratmap::RationalMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// The eight p = 2 coefficient congruences.
    Coefficient,
    /// Good reduction, no degree drop, and a single cycle at the deciding level.
    GoodReductionMinimal,
    /// Either of the above; both flags are recorded.
    Both,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coefficient" => Ok(SearchMode::Coefficient),
            "good-reduction-minimal" => Ok(SearchMode::GoodReductionMinimal),
            "both" => Ok(SearchMode::Both),
            _ => Err(Error::Parse {
                position: 0,
                expected: vec!["coefficient".into(), "good-reduction-minimal".into(), "both".into()],
            }),
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Coefficient => "coefficient",
            SearchMode::GoodReductionMinimal => "good-reduction-minimal",
            SearchMode::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub p: u64,
    pub degree: usize,
    pub modulus: u64,
    pub mode: SearchMode,
}

impl SearchSpec {
    pub fn new(p: u64, degree: usize, modulus: u64, mode: SearchMode) -> Result<Self> {
        let spec = SearchSpec { p, degree, modulus, mode };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 2 {
            return Err(Error::DegreeTooSmall(self.degree));
        }
        if !crate::padic::is_prime(self.p) {
            return Err(Error::NotPrime(self.p));
        }
        if self.p != 2 && self.mode != SearchMode::GoodReductionMinimal {
            return Err(Error::WrongForm("the coefficient criterion is for p = 2 only".into()));
        }
        let mut m = self.modulus;
        while m > 1 && m % self.p == 0 {
            m /= self.p;
        }
        if m != 1 || self.modulus < self.p {
            return Err(Error::WrongForm(format!("modulus {} is not a power of {}", self.modulus, self.p)));
        }
        let count = (self.modulus as u128).checked_pow((2 * self.degree - 1) as u32);
        if count.is_none_or(|c| c > 1 << 32) {
            return Err(Error::WrongForm("search space too large".into()));
        }
        Ok(())
    }

    /// Number of tuples enumerated.
    pub fn size(&self) -> u64 {
        self.modulus.pow((2 * self.degree - 1) as u32)
    }

    /// The tuple with lexicographic rank `index`.
    pub fn tuple(&self, index: u64) -> Vec<i64> {
        let len = 2 * self.degree - 1;
        let mut out = vec![0; len];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = (rest % self.modulus) as i64;
            rest /= self.modulus;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    /// `(a_0..a_{d-1}, b_1..b_{d-1})`
    pub tuple: Vec<i64>,
    /// Orbit of the ball 0 at level 3, one full cycle; empty if the map has
    /// no 1-Lipschitz certificate.
    pub orbit: Vec<String>,
    pub criterion: bool,
    pub good_reduction: bool,
    /// Single cycle at level 3.
    pub minimal: bool,
}

/// The map of a tuple, after cancelling common factors.
pub fn tuple_map(tuple: &[i64], degree: usize) -> Result<RationalMap> {
    let form = StandardForm::from_free_ints(&tuple[..degree], &tuple[degree..])?;
    form.to_map()
}

fn level3_orbit(map: &RationalMap, ctx: &PrimeContext) -> Option<(Vec<String>, bool)> {
    let sys = build_level_system(map, 3, ctx).ok()?;
    let start = ProjectiveBall::finite(3, 0, ctx).ok()?;
    let mut orbit = vec![start.label()];
    let mut cur = sys.image(&start);
    while cur != start && orbit.len() <= sys.len() {
        orbit.push(cur.label());
        cur = sys.image(&cur);
    }
    Some((orbit, sys.is_single_cycle()))
}

fn evaluate(spec: &SearchSpec, tuple: Vec<i64>, ctx: &PrimeContext) -> Result<Option<SearchHit>> {
    let d = spec.degree;
    let criterion = match spec.mode {
        SearchMode::GoodReductionMinimal => false,
        _ => {
            let form = StandardForm::from_free_ints(&tuple[..d], &tuple[d..])?;
            check_coefficient_criterion(&form)?.satisfied
        }
    };
    if spec.mode == SearchMode::Coefficient && !criterion {
        return Ok(None);
    }
    let map = tuple_map(&tuple, d)?;
    // a cancelled common factor drops the degree; such a tuple is not a degree-d map
    let good_reduction = map.degree() == d && map.has_good_reduction(ctx);
    let good_minimal = good_reduction && check_minimal_at_level(&map, 3, ctx)?;
    let hit = match spec.mode {
        SearchMode::Coefficient => true,
        SearchMode::GoodReductionMinimal => good_minimal,
        SearchMode::Both => criterion || good_minimal,
    };
    if !hit {
        return Ok(None);
    }
    let (orbit, minimal) = level3_orbit(&map, ctx).unwrap_or_default();
    Ok(Some(SearchHit { tuple, orbit, criterion, good_reduction, minimal }))
}

/// Enumerates every tuple in lexicographic order and keeps the hits.
pub fn run_search(spec: &SearchSpec) -> Result<Vec<SearchHit>> {
    spec.validate()?;
    let ctx = PrimeContext::new(spec.p, 3)?;
    let found: Vec<Option<SearchHit>> = (0..spec.size())
        .into_par_iter()
        .map(|i| evaluate(spec, spec.tuple(i), &ctx))
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Hits grouped by orbit, groups in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitGroup {
    pub orbit: Vec<String>,
    pub tuples: Vec<Vec<i64>>,
}

pub fn classify_hits_by_orbit(hits: &[SearchHit]) -> Vec<OrbitGroup> {
    let mut groups: Vec<OrbitGroup> = Vec::new();
    for hit in hits {
        match groups.iter_mut().find(|g| g.orbit == hit.orbit) {
            Some(g) => g.tuples.push(hit.tuple.clone()),
            None => groups.push(OrbitGroup { orbit: hit.orbit.clone(), tuples: vec![hit.tuple.clone()] }),
        }
    }
    groups
}

/// The table layout: one block per orbit, orbit line first, then one tuple
/// per line. This is the format of the golden files.
pub fn render_table(spec: &SearchSpec, groups: &[OrbitGroup]) -> String {
    let d = spec.degree;
    let mut out = String::new();
    let names: Vec<String> = (0..d).map(|i| format!("a{i}")).chain((1..d).map(|j| format!("b{j}"))).collect();
    let _ = writeln!(out, "# p = {}, degree {}, coefficients mod {}, mode {}", spec.p, d, spec.modulus, spec.mode);
    let _ = writeln!(out, "# {}", names.join(" "));
    let hits: usize = groups.iter().map(|g| g.tuples.len()).sum();
    let _ = writeln!(out, "# {} hits in {} orbit classes", hits, groups.len());
    for g in groups {
        let _ = writeln!(out);
        let _ = writeln!(out, "orbit: {}", g.orbit.join(" -> "));
        for t in &g.tuples {
            let _ = writeln!(out, "{}", t.iter().map(i64::to_string).collect::<Vec<_>>().join(" "));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub spec: SearchSpec,
    pub hits: Vec<SearchHit>,
    pub groups: Vec<OrbitGroup>,
}

impl SearchReport {
    pub fn run(spec: &SearchSpec) -> Result<Self> {
        let hits = run_search(spec)?;
        let groups = classify_hits_by_orbit(&hits);
        Ok(SearchReport { spec: *spec, hits, groups })
    }

    pub fn to_text(&self) -> String {
        render_table(&self.spec, &self.groups)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: e.column().saturating_sub(1),
            expected: vec![format!("search report JSON ({e})")],
        })
    }
}

/// First differing line between an output and a golden text, 1-based.
pub fn compare_golden(actual: &str, golden: &str) -> Option<(usize, String, String)> {
    let (a, g): (Vec<&str>, Vec<&str>) = (actual.lines().collect(), golden.lines().collect());
    for i in 0..a.len().max(g.len()) {
        let (x, y) = (a.get(i).copied().unwrap_or(""), g.get(i).copied().unwrap_or(""));
        if x != y {
            return Some((i + 1, x.to_string(), y.to_string()));
        }
    }
    (actual != golden).then(|| (a.len() + 1, "<trailing bytes>".into(), String::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_order_is_lexicographic() {
        let spec = SearchSpec::new(2, 2, 4, SearchMode::Coefficient).unwrap();
        assert_eq!(spec.size(), 64);
        assert_eq!(spec.tuple(0), [0, 0, 0]);
        assert_eq!(spec.tuple(1), [0, 0, 1]);
        assert_eq!(spec.tuple(4), [0, 1, 0]);
        assert_eq!(spec.tuple(63), [3, 3, 3]);
    }

    #[test]
    fn spec_validation() {
        assert!(SearchSpec::new(2, 4, 6, SearchMode::Coefficient).is_err());
        assert!(SearchSpec::new(2, 1, 4, SearchMode::Coefficient).is_err());
        assert!(SearchSpec::new(3, 2, 9, SearchMode::Coefficient).is_err());
        assert!(SearchSpec::new(3, 2, 9, SearchMode::GoodReductionMinimal).is_ok());
        assert_eq!("both".parse::<SearchMode>().unwrap(), SearchMode::Both);
    }

    #[test]
    fn first_table_row_is_a_hit_with_its_orbit() {
        let spec = SearchSpec::new(2, 4, 4, SearchMode::Coefficient).unwrap();
        let ctx = PrimeContext::new(2, 3).unwrap();
        let hit = evaluate(&spec, vec![1, 0, 1, 3, 3, 1, 0], &ctx).unwrap().unwrap();
        assert_eq!(hit.orbit.join(" "), "0 ~0 1 6 ~6 3 4 ~4 5 2 ~2 7");
        assert!(hit.criterion && hit.minimal && !hit.good_reduction);
    }

    #[test]
    fn grouping_keeps_first_occurrence_order() {
        let hit = |t: i64, o: &str| SearchHit {
            tuple: vec![t],
            orbit: vec![o.into()],
            criterion: true,
            good_reduction: false,
            minimal: true,
        };
        let groups = classify_hits_by_orbit(&[hit(1, "b"), hit(2, "a"), hit(3, "b")]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].orbit, ["b"]);
        assert_eq!(groups[0].tuples, [vec![1], vec![3]]);
        assert!(classify_hits_by_orbit(&[]).is_empty());
    }

    #[test]
    fn golden_comparison_reports_first_difference() {
        assert_eq!(compare_golden("a\nb\n", "a\nb\n"), None);
        assert_eq!(compare_golden("a\nb\n", "a\nc\n"), Some((2, "b".into(), "c".into())));
        assert!(compare_golden("a\n", "a").is_some());
    }
}
