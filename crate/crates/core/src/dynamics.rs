//! Induced systems on level-n balls, cycle classification and minimality.
//!
//! All level-wise work runs on canonical ball representatives with residue
//! arithmetic mod p^m. For a 1-Lipschitz map the image ball does not depend
//! on the representative, so iterating representatives gives exact residues
//! mod p^m however many steps are taken.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{multiplicative_order, ExactRational, PrimeContext, Residue};
use crate::poly::mulmod;
use crate::projective::{ball_count, ball_of, ProjectiveBall, ProjectivePoint, Side};
use crate::ratmap::{Chart, RationalMap};

/// Why a map is known to act on level-n balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    GoodReduction,
    /// p = 2 standardized form with integral coefficients, a₀ odd, A even, B odd.
    StandardFormP2,
    /// The reductions of the homogeneous forms share no zero on P¹(F_p).
    SeparatedResidues,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Certificate::GoodReduction => "good reduction",
            Certificate::StandardFormP2 => "p = 2 standard form",
            Certificate::SeparatedResidues => "separated residues",
        })
    }
}

/// The strongest available 1-Lipschitz certificate.
pub fn certify(map: &RationalMap, ctx: &PrimeContext) -> Result<Certificate> {
    if map.has_good_reduction(ctx) {
        Ok(Certificate::GoodReduction)
    } else if ctx.p() == 2 && crate::p2criterion::is_one_lipschitz_standard_p2(map).unwrap_or(false) {
        Ok(Certificate::StandardFormP2)
    } else if map.separates_residues(ctx) {
        Ok(Certificate::SeparatedResidues)
    } else {
        Err(Error::NotCertifiedLipschitz)
    }
}

/// The map with coefficients reduced mod p^m, in both local coordinates.
#[derive(Debug, Clone)]
pub(crate) struct ModMap {
    p: u64,
    level: u32,
    modulus: u64,
    ctx: PrimeContext,
    // [finite side, infinity side]; the infinity side uses reversed coefficients
    num: [Vec<u64>; 2],
    den: [Vec<u64>; 2],
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Finite => 0,
        Side::Infinity => 1,
    }
}

fn eval_mod(c: &[u64], t: u64, m: u64) -> u64 {
    c.iter().rev().fold(0, |acc, &a| (mulmod(acc, t, m) + a) % m)
}

fn deriv_eval_mod(c: &[u64], t: u64, m: u64) -> u64 {
    let mut acc = 0;
    for (i, &a) in c.iter().enumerate().skip(1).rev() {
        acc = (mulmod(acc, t, m) + mulmod(a, i as u64 % m, m)) % m;
    }
    acc
}

impl ModMap {
    /// Requires `level ≤ max_level + 1` (the extra level is headroom for
    /// displacements at `max_level`).
    pub(crate) fn new(map: &RationalMap, level: u32, ctx: &PrimeContext) -> Self {
        let modulus = ctx.pow(level);
        let red = |c: &[num_bigint::BigInt]| -> Vec<u64> {
            c.iter().map(|a| crate::padic::reduce_int(a, modulus)).collect()
        };
        let (a, b) = (red(map.num()), red(map.den()));
        let rev = |v: &[u64]| v.iter().rev().copied().collect::<Vec<_>>();
        ModMap {
            p: ctx.p(),
            level,
            modulus,
            ctx: *ctx,
            num: [a.clone(), rev(&a)],
            den: [b.clone(), rev(&b)],
        }
    }

    fn unit_inverse(&self, a: u64) -> u64 {
        Residue::new(a, self.level, &self.ctx).inverse().expect("unit").value()
    }

    /// Image of a ball at this map's level.
    pub(crate) fn step(&self, ball: &ProjectiveBall) -> Result<ProjectiveBall> {
        debug_assert_eq!(ball.level(), self.level);
        let s = side_slot(ball.side());
        let m = self.modulus;
        let f = eval_mod(&self.num[s], ball.rep(), m);
        let g = eval_mod(&self.den[s], ball.rep(), m);
        let (side, rep) = if g % self.p != 0 {
            (Side::Finite, mulmod(f, self.unit_inverse(g), m))
        } else if f % self.p != 0 {
            (Side::Infinity, mulmod(g, self.unit_inverse(f), m))
        } else {
            return Err(Error::NotCertifiedLipschitz);
        };
        Ok(ProjectiveBall::new(self.level, side, rep, &self.ctx).expect("reduced representative"))
    }

    /// Chart derivative at the representative of `ball`, reduced mod p, with
    /// the output chart fixed by the side of the image.
    pub(crate) fn derivative_mod_p(&self, ball: &ProjectiveBall, image_side: Side) -> Result<u64> {
        let p = self.p;
        let s = side_slot(ball.side());
        let (n, d) = match image_side {
            Side::Finite => (&self.num[s], &self.den[s]),
            Side::Infinity => (&self.den[s], &self.num[s]),
        };
        let t = ball.rep() % p;
        let n0 = eval_mod(n, t, p);
        let d0 = eval_mod(d, t, p);
        if d0 == 0 {
            return Err(Error::PoleAtPoint(ball.label()));
        }
        let n1 = deriv_eval_mod(n, t, p);
        let d1 = deriv_eval_mod(d, t, p);
        let top = (mulmod(n1, d0, p) + p - mulmod(n0, d1, p)) % p;
        let dinv = Residue::new(d0 % p, 1, &self.ctx).inverse().expect("unit").value();
        Ok(mulmod(top, mulmod(dinv, dinv, p), p))
    }
}

/// The induced map on the level-n balls, indexed as in
/// [`ProjectiveBall::index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSystem {
    level: u32,
    ctx: PrimeContext,
    certificate: Certificate,
    transition: Vec<usize>,
}

impl LevelSystem {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn transition(&self) -> &[usize] {
        &self.transition
    }

    pub fn len(&self) -> usize {
        self.transition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transition.is_empty()
    }

    pub fn ball(&self, index: usize) -> ProjectiveBall {
        ProjectiveBall::from_index(index, self.level, &self.ctx)
    }

    pub fn image(&self, ball: &ProjectiveBall) -> ProjectiveBall {
        self.ball(self.transition[ball.index(&self.ctx)])
    }

    /// True iff the system is one cycle through every ball.
    pub fn is_single_cycle(&self) -> bool {
        let n = self.transition.len();
        let mut cur = 0;
        for step in 1..=n {
            cur = self.transition[cur];
            if cur == 0 {
                return step == n;
            }
        }
        false
    }
}

pub fn build_level_system(map: &RationalMap, level: u32, ctx: &PrimeContext) -> Result<LevelSystem> {
    build_level_system_with(map, level, ctx, false)
}

/// With `probe`, every image is recomputed exactly from a second
/// representative (rep + pⁿ) and compared.
pub fn build_level_system_with(map: &RationalMap, level: u32, ctx: &PrimeContext, probe: bool) -> Result<LevelSystem> {
    ctx.check_level(level)?;
    let certificate = certify(map, ctx)?;
    let mm = ModMap::new(map, level, ctx);
    let transition = (0..ball_count(level, ctx))
        .into_par_iter()
        .map(|i| {
            let ball = ProjectiveBall::from_index(i, level, ctx);
            let image = mm.step(&ball)?;
            if probe {
                let other = map.evaluate(&ball.shifted_center(1, ctx))?;
                if ball_of(&other, level, ctx)? != image {
                    return Err(Error::RepresentativeDisagreement { ball: ball.label() });
                }
            }
            Ok(image.index(ctx))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSystem { level, ctx: *ctx, certificate, transition })
}

/// Cycles of a functional graph on `0..next.len()`, each rotated to start at
/// its smallest node and sorted by that node, plus for every node the id of
/// the cycle it eventually enters.
pub fn functional_cycles(next: &[usize]) -> (Vec<Vec<usize>>, Vec<usize>) {
    const UNSEEN: usize = usize::MAX;
    let n = next.len();
    let mut cycle_id = vec![UNSEEN; n];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut visit_mark = vec![UNSEEN; n];
    for start in 0..n {
        if cycle_id[start] != UNSEEN {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        while cycle_id[cur] == UNSEEN && visit_mark[cur] != start {
            visit_mark[cur] = start;
            path.push(cur);
            cur = next[cur];
        }
        let target = if cycle_id[cur] != UNSEEN {
            cycle_id[cur]
        } else {
            // cur closes a new cycle on this path
            let pos = path.iter().position(|&x| x == cur).expect("on path");
            let mut cyc = path[pos..].to_vec();
            let min_pos = cyc.iter().enumerate().min_by_key(|(_, &x)| x).map(|(i, _)| i).unwrap();
            cyc.rotate_left(min_pos);
            cycles.push(cyc);
            cycles.len() - 1
        };
        for &x in &path {
            cycle_id[x] = target;
        }
    }
    // renumber so cycles are ordered by their smallest node
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.sort_by_key(|&i| cycles[i][0]);
    let mut rank = vec![0; cycles.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sorted = order.iter().map(|&i| cycles[i].clone()).collect();
    (sorted, cycle_id.into_iter().map(|c| rank[c]).collect())
}

/// Cycles of a level system together with the tail map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleStructure {
    pub cycles: Vec<Vec<ProjectiveBall>>,
    /// For each ball index, the cycle it eventually falls into.
    pub cycle_of: Vec<usize>,
}

impl CycleStructure {
    /// Balls not lying on any cycle.
    pub fn tail_count(&self) -> usize {
        self.cycle_of.len() - self.cycles.iter().map(Vec::len).sum::<usize>()
    }
}

pub fn cycles_of(system: &LevelSystem) -> CycleStructure {
    let (cycles, cycle_of) = functional_cycles(&system.transition);
    CycleStructure {
        cycles: cycles.into_iter().map(|c| c.into_iter().map(|i| system.ball(i)).collect()).collect(),
        cycle_of,
    }
}

/// The four lift behaviours of a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    Grows,
    Splits,
    GrowsTails,
    PartiallySplits { order: u64 },
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Grows => f.write_str("grows"),
            Classification::Splits => f.write_str("splits"),
            Classification::GrowsTails => f.write_str("grows tails"),
            Classification::PartiallySplits { order } => write!(f, "partially splits (order {order})"),
        }
    }
}

/// A classified cycle of the level-n system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleNode {
    pub level: u32,
    pub balls: Vec<ProjectiveBall>,
    /// Multiplier of φ^K along the cycle, mod p.
    pub alpha: u64,
    /// Displacement (φ^K(x) − x)/pⁿ mod p, only when α ≡ 1.
    pub beta: Option<u64>,
    pub classification: Classification,
}

impl CycleNode {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.balls.iter().map(ProjectiveBall::label).collect()
    }
}

/// Classifies a level-n cycle (needs level n+1 ≤ max level).
pub fn analyze_cycle(map: &RationalMap, cycle: &[ProjectiveBall], ctx: &PrimeContext) -> Result<CycleNode> {
    analyze_cycle_from(map, cycle, 0, ctx)
}

/// As [`analyze_cycle`], starting from the representative shifted by
/// `shift·pⁿ` inside the first ball.
pub fn analyze_cycle_from(map: &RationalMap, cycle: &[ProjectiveBall], shift: u64, ctx: &PrimeContext) -> Result<CycleNode> {
    let first = cycle.first().ok_or_else(|| Error::Invariant("empty cycle".into()))?;
    let n = first.level();
    ctx.check_level(n + 1)?;
    let p = ctx.p();
    let k = cycle.len();
    let mm = ModMap::new(map, n + 1, ctx);
    let pn = ctx.pow(n);
    let start = ProjectiveBall::new(n + 1, first.side(), first.rep() + (shift % p) * pn, ctx)?;
    let mut cur = start;
    let mut alpha = 1u64;
    for j in 0..k {
        let next = mm.step(&cur)?;
        alpha = mulmod(alpha, mm.derivative_mod_p(&cur, next.side())?, p);
        if next.parent(n, ctx) != cycle[(j + 1) % k] {
            return Err(Error::Invariant(format!("{} is not a cycle of the level-{n} system", labels(cycle))));
        }
        cur = next;
    }
    let m = ctx.pow(n + 1);
    let delta = (cur.rep() + m - start.rep()) % m;
    if delta % pn != 0 {
        let found = Residue::new(delta, n + 1, ctx).valuation();
        return Err(Error::InsufficientValuation { found, level: n });
    }
    let (beta, classification) = match alpha {
        0 => (None, Classification::GrowsTails),
        1 => {
            let beta = delta / pn;
            (Some(beta), if beta != 0 { Classification::Grows } else { Classification::Splits })
        }
        a => {
            let order = multiplicative_order(&Residue::new(a, 1, ctx)).expect("unit");
            (None, Classification::PartiallySplits { order })
        }
    };
    Ok(CycleNode { level: n, balls: cycle.to_vec(), alpha, beta, classification })
}

fn labels(balls: &[ProjectiveBall]) -> String {
    let v: Vec<String> = balls.iter().map(ProjectiveBall::label).collect();
    format!("({})", v.join(" "))
}

/// Cycles of the level-(n+1) system inside the balls of a level-n cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lifts {
    pub cycles: Vec<Vec<ProjectiveBall>>,
    /// Sub-balls that are not on a lift.
    pub tails: Vec<ProjectiveBall>,
    /// For every tail ball, the index into `cycles` it falls into.
    pub tail_targets: Vec<usize>,
}

/// Restricts the level-(n+1) system to the p·K sub-balls of a cycle and
/// extracts its cycles.
pub fn lift_cycles(map: &RationalMap, cycle: &[ProjectiveBall], ctx: &PrimeContext) -> Result<Lifts> {
    let n = cycle.first().ok_or_else(|| Error::Invariant("empty cycle".into()))?.level();
    ctx.check_level(n + 1)?;
    let mm = ModMap::new(map, n + 1, ctx);
    let subs: Vec<ProjectiveBall> = cycle.iter().map(|b| b.sub_balls(ctx)).collect::<Result<Vec<_>>>()?.concat();
    let pos: BTreeMap<(Side, u64), usize> = subs.iter().enumerate().map(|(i, b)| ((b.side(), b.rep()), i)).collect();
    let next = subs
        .iter()
        .map(|b| {
            let img = mm.step(b)?;
            pos.get(&(img.side(), img.rep()))
                .copied()
                .ok_or_else(|| Error::Invariant(format!("lift of {} leaves the cycle", labels(cycle))))
        })
        .collect::<Result<Vec<_>>>()?;
    // rank nodes by ball index so cycles come out in canonical order
    let mut order: Vec<usize> = (0..subs.len()).collect();
    order.sort_by_key(|&i| subs[i].index(ctx));
    let mut rank = vec![0; subs.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let ranked_next: Vec<usize> = order.iter().map(|&i| rank[next[i]]).collect();
    let (cycles, cycle_of) = functional_cycles(&ranked_next);
    let on_cycle: std::collections::HashSet<usize> = cycles.iter().flatten().copied().collect();
    let ball_at = |r: usize| subs[order[r]];
    let mut tails = Vec::new();
    let mut tail_targets = Vec::new();
    for (r, &target) in cycle_of.iter().enumerate() {
        if !on_cycle.contains(&r) {
            tails.push(ball_at(r));
            tail_targets.push(target);
        }
    }
    Ok(Lifts {
        cycles: cycles.into_iter().map(|c| c.into_iter().map(ball_at).collect()).collect(),
        tails,
        tail_targets,
    })
}

/// Lift lengths predicted by the classification: sorted cycle lengths and
/// whether tails occur.
pub fn predicted_lift_lengths(node: &CycleNode, p: u64) -> (Vec<usize>, bool) {
    let k = node.len();
    let p = p as usize;
    match node.classification {
        Classification::Grows => (vec![p * k], false),
        Classification::Splits => (vec![k; p], false),
        Classification::GrowsTails => (vec![k], true),
        Classification::PartiallySplits { order } => {
            let l = order as usize;
            let mut v = vec![k];
            v.extend(std::iter::repeat_n(k * l, (p - 1) / l));
            (v, false)
        }
    }
}

/// Lifts of a classified cycle, checked against the classification.
pub fn lift_cycle(map: &RationalMap, node: &CycleNode, ctx: &PrimeContext) -> Result<Lifts> {
    let lifts = lift_cycles(map, &node.balls, ctx)?;
    let mut observed: Vec<usize> = lifts.cycles.iter().map(Vec::len).collect();
    observed.sort_unstable();
    let (expected, tails) = predicted_lift_lengths(node, ctx.p());
    if observed != expected || tails != !lifts.tails.is_empty() {
        return Err(Error::ClassificationMismatch(format!(
            "{} at level {} ({}): expected lift lengths {:?}{}, found {:?} with {} tail balls",
            labels(&node.balls),
            node.level,
            node.classification,
            expected,
            if tails { " plus tails" } else { "" },
            observed,
            lifts.tails.len()
        )));
    }
    Ok(lifts)
}

/// True iff the level-n system is a single cycle.
pub fn check_minimal_at_level(map: &RationalMap, level: u32, ctx: &PrimeContext) -> Result<bool> {
    Ok(build_level_system(map, level, ctx)?.is_single_cycle())
}

/// Level at which a single cycle decides minimality: 3 for p ≤ 3, else 2.
pub fn deciding_level(p: u64) -> u32 {
    if p <= 3 {
        3
    } else {
        2
    }
}

/// Minimality read off the deciding level. Needs a map with integral local
/// expansions (see [`Certificate::SeparatedResidues`]) of degree ≥ 2.
pub fn check_minimal_by_levels(map: &RationalMap, ctx: &PrimeContext) -> Result<bool> {
    require_integral_charts(map, ctx)?;
    check_minimal_at_level(map, deciding_level(ctx.p()), ctx)
}

fn require_integral_charts(map: &RationalMap, ctx: &PrimeContext) -> Result<()> {
    if map.degree() < 2 {
        return Err(Error::DegreeTooSmall(map.degree()));
    }
    if !map.separates_residues(ctx) {
        return Err(Error::BadReduction);
    }
    Ok(())
}

/// Per-condition outcome of the derivative-and-valuation criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    /// The reduction permutes P¹(F_p) in one (p+1)-cycle.
    pub transitive_level1: bool,
    /// Derivative of φ^(p+1) at 0, mod p.
    pub derivative_residue: u64,
    pub derivative_condition: bool,
    /// v_p(φ^(p+1)(0)), capped at 3; `None` when the iterate is off the finite side.
    pub valuation: Option<u32>,
    pub valuation_condition: bool,
    /// v_p(φ^((p+1)p)(0)), for p ∈ {2, 3}.
    pub extra_valuation: Option<u32>,
    pub extra_condition: Option<bool>,
    pub minimal: bool,
}

/// Minimality via the level-1 transitivity, derivative and valuation
/// conditions along the orbit of 0.
pub fn check_minimal_by_criterion(map: &RationalMap, ctx: &PrimeContext) -> Result<CriterionVerdict> {
    require_integral_charts(map, ctx)?;
    let p = ctx.p();
    let transitive_level1 = check_minimal_at_level(map, 1, ctx)?;
    let zero = ProjectiveBall::finite(3, 0, ctx)?;
    let steps = (p + 1) as usize;
    let (end, derivative_residue) = iterate_with_derivative(map, &zero, steps, ctx)?;
    let finite_valuation = |b: &ProjectiveBall| -> Option<u32> {
        (b.side() == Side::Finite).then(|| Residue::new(b.rep(), 3, ctx).valuation())
    };
    let valuation = finite_valuation(&end);
    let derivative_condition = derivative_residue == 1;
    let valuation_condition = valuation == Some(1);
    let (extra_valuation, extra_condition) = if p <= 3 {
        let far = orbit_balls(map, &zero, steps * p as usize, steps * p as usize, ctx)?;
        let v = finite_valuation(far.last().unwrap());
        (v, Some(v == Some(2)))
    } else {
        (None, None)
    };
    let minimal = transitive_level1 && derivative_condition && valuation_condition && extra_condition.unwrap_or(true);
    Ok(CriterionVerdict {
        transitive_level1,
        derivative_residue,
        derivative_condition,
        valuation,
        valuation_condition,
        extra_valuation,
        extra_condition,
        minimal,
    })
}

/// Follows a ball for `steps` steps at its own level and accumulates the
/// chart derivative mod p.
pub fn iterate_with_derivative(
    map: &RationalMap,
    start: &ProjectiveBall,
    steps: usize,
    ctx: &PrimeContext,
) -> Result<(ProjectiveBall, u64)> {
    certify(map, ctx)?;
    let mm = ModMap::new(map, start.level(), ctx);
    let mut cur = *start;
    let mut deriv = 1u64;
    for _ in 0..steps {
        let next = mm.step(&cur)?;
        deriv = mulmod(deriv, mm.derivative_mod_p(&cur, next.side())?, ctx.p());
        cur = next;
    }
    Ok((cur, deriv))
}

/// Orbit of a ball under φ, recording every `stride`-th ball up to `steps`
/// steps (the start is always recorded).
pub fn orbit_balls(
    map: &RationalMap,
    start: &ProjectiveBall,
    steps: usize,
    stride: usize,
    ctx: &PrimeContext,
) -> Result<Vec<ProjectiveBall>> {
    certify(map, ctx)?;
    let stride = stride.max(1);
    let mm = ModMap::new(map, start.level(), ctx);
    let mut out = vec![*start];
    let mut cur = *start;
    for i in 1..=steps {
        cur = mm.step(&cur)?;
        if i % stride == 0 {
            out.push(cur);
        }
    }
    Ok(out)
}

/// Residue orbit of a point at level `level`.
pub fn orbit_of_point(
    map: &RationalMap,
    start: &ProjectivePoint,
    level: u32,
    steps: usize,
    stride: usize,
    ctx: &PrimeContext,
) -> Result<Vec<ProjectiveBall>> {
    let ball = ball_of(start, level, ctx)?;
    orbit_balls(map, &ball, steps, stride, ctx)
}

/// Exact derivative of φ^k at a point, by the chart chain rule along the
/// exact orbit. Heights grow like d^k, so this is meant for small k.
pub fn exact_iterate_derivative(map: &RationalMap, start: &ProjectivePoint, k: usize, ctx: &PrimeContext) -> Result<ExactRational> {
    let mut cur = start.clone();
    let mut acc = ExactRational::one();
    for _ in 0..k {
        let next = map.evaluate(&cur)?;
        let d = map.chart_derivative(&cur, Chart::for_point(&cur, ctx), Chart::for_point(&next, ctx))?;
        acc = &acc * &d;
        cur = next;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_ONE: &str = "-(2z^2+2z+1)/(z^3-3z^2+z+1)";
    const EXAMPLE_TWO: &str = "(2z+3)/((z-1)(z-2))";
    // a = (1,0,1,3,1), b = (0,3,1,0,1): first row of the degree-4 table
    const TABLE_ROW: &str = "(1 + z^2 + 3z^3 + z^4)/(3z + z^2 + z^4)";

    fn ctx(p: u64, max: u32) -> PrimeContext {
        PrimeContext::new(p, max).unwrap()
    }

    fn map(s: &str) -> RationalMap {
        RationalMap::parse(s).unwrap()
    }

    fn label_seq(balls: &[ProjectiveBall]) -> Vec<String> {
        balls.iter().map(ProjectiveBall::label).collect()
    }

    #[test]
    fn certificates() {
        let c3 = ctx(3, 4);
        assert_eq!(certify(&map(EXAMPLE_TWO), &c3), Ok(Certificate::GoodReduction));
        assert_eq!(certify(&map(EXAMPLE_ONE), &c3), Ok(Certificate::SeparatedResidues));
        assert_eq!(certify(&map(TABLE_ROW), &ctx(2, 4)), Ok(Certificate::StandardFormP2));
        assert_eq!(certify(&map("(z^2+2)/z"), &ctx(2, 4)), Err(Error::NotCertifiedLipschitz));
    }

    #[test]
    fn level_one_transitions() {
        let c3 = ctx(3, 4);
        let sys = build_level_system_with(&map(EXAMPLE_ONE), 1, &c3, true).unwrap();
        let img = |l: &str| sys.image(&ProjectiveBall::parse_label(l, 1, &c3).unwrap()).label();
        assert_eq!([img("1"), img("~0"), img("0"), img("2")], ["~0", "0", "2", "1"]);
        let sys = build_level_system_with(&map(EXAMPLE_TWO), 1, &c3, true).unwrap();
        let img = |l: &str| sys.image(&ProjectiveBall::parse_label(l, 1, &c3).unwrap()).label();
        assert_eq!([img("1"), img("2"), img("~0"), img("0")], ["~0", "~0", "0", "0"]);
        let id = build_level_system(&RationalMap::identity(), 3, &c3).unwrap();
        assert!(id.transition().iter().enumerate().all(|(i, &j)| i == j));
    }

    #[test]
    fn cycle_examples() {
        let c3 = ctx(3, 4);
        let cs = cycles_of(&build_level_system(&map(EXAMPLE_ONE), 1, &c3).unwrap());
        assert_eq!(cs.cycles.len(), 1);
        assert_eq!(label_seq(&cs.cycles[0]), ["0", "2", "1", "~0"]);
        let cs = cycles_of(&build_level_system(&map(EXAMPLE_TWO), 1, &c3).unwrap());
        assert_eq!(cs.cycles.len(), 1);
        assert_eq!(label_seq(&cs.cycles[0]), ["0"]);
        assert_eq!(cs.tail_count(), 3);
        let cs = cycles_of(&build_level_system(&RationalMap::identity(), 2, &c3).unwrap());
        assert_eq!(cs.cycles.len(), 12);
        assert_eq!(cs.tail_count(), 0);
    }

    #[test]
    fn functional_graph_oracle() {
        // 0→1→2→0, 3→3, 4→0, 5→4
        let (cycles, of) = functional_cycles(&[1, 2, 0, 3, 0, 4]);
        assert_eq!(cycles, vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(of, vec![0, 0, 0, 1, 0, 0]);
        let (cycles, _) = functional_cycles(&[2, 0, 1]);
        assert_eq!(cycles, vec![vec![0, 2, 1]]);
    }

    #[test]
    fn example_two_fixed_ball_grows() {
        let c3 = ctx(3, 4);
        let m = map(EXAMPLE_TWO);
        let zero = ProjectiveBall::finite(1, 0, &c3).unwrap();
        let node = analyze_cycle(&m, &[zero], &c3).unwrap();
        assert_eq!(node.alpha, 1);
        // φ(0) = 3/2, so Δ/3 = 1/2 ≡ 2 mod 3
        assert_eq!(node.beta, Some(2));
        assert_eq!(node.classification, Classification::Grows);
        let lifts = lift_cycle(&m, &node, &c3).unwrap();
        assert_eq!(lifts.cycles.len(), 1);
        assert_eq!(lifts.cycles[0].len(), 3);
    }

    #[test]
    fn example_two_orbit_residues() {
        let c3 = ctx(3, 4);
        let orbit = orbit_of_point(&map(EXAMPLE_TWO), &ProjectivePoint::from_int(0), 3, 3, 1, &c3).unwrap();
        assert_eq!(label_seq(&orbit), ["0", "15", "3", "18"]);
    }

    #[test]
    fn example_one_residues_and_derivative() {
        let c3 = ctx(3, 4);
        let m = map(EXAMPLE_ONE);
        let one = ProjectivePoint::from_int(1);
        // φ⁴ iterates of 1 mod 27; the exact orbit gives the same residues
        let orbit = orbit_of_point(&m, &one, 3, 12, 4, &c3).unwrap();
        assert_eq!(label_seq(&orbit), ["1", "7", "13", "19"]);
        let exact = m.iterate(&one, 12).unwrap();
        assert_eq!(ball_of(&exact, 3, &c3).unwrap().label(), "19");
        let start = ProjectiveBall::finite(3, 1, &c3).unwrap();
        let (_, d) = iterate_with_derivative(&m, &start, 4, &c3).unwrap();
        assert_eq!(d, 1);
        // exact chain rule through ∞ agrees mod 3
        let exact = exact_iterate_derivative(&m, &one, 4, &c3).unwrap();
        assert_eq!(exact.to_residue(1, &c3).unwrap().value(), 1);
        let exact0 = exact_iterate_derivative(&m, &ProjectivePoint::from_int(0), 4, &c3).unwrap();
        assert_eq!(exact0.to_residue(1, &c3).unwrap().value(), 1);
    }

    #[test]
    fn rounded_orbit_matches_exact_orbit() {
        let c3 = ctx(3, 4);
        let m = map(EXAMPLE_ONE);
        let mut exact = ProjectivePoint::from_int(1);
        let rounded = orbit_of_point(&m, &exact, 4, 6, 1, &c3).unwrap();
        for b in &rounded {
            assert_eq!(ball_of(&exact, 4, &c3).unwrap(), *b);
            exact = m.evaluate(&exact).unwrap();
        }
    }

    #[test]
    fn example_one_cycle_grows_twice() {
        let c3 = ctx(3, 4);
        let m = map(EXAMPLE_ONE);
        let cyc = cycles_of(&build_level_system(&m, 1, &c3).unwrap()).cycles.remove(0);
        // start from ball 1: rotate
        let pos = cyc.iter().position(|b| b.label() == "1").unwrap();
        let mut from_one = cyc.clone();
        from_one.rotate_left(pos);
        let node = analyze_cycle(&m, &from_one, &c3).unwrap();
        assert_eq!(node.alpha, 1);
        // φ⁴(1) ≡ 7 (mod 27): Δ ≡ 6 at level 2 precision, β = 2
        assert_eq!(node.beta, Some(2));
        assert_eq!(node.classification, Classification::Grows);
        let lift = lift_cycle(&m, &node, &c3).unwrap().cycles.remove(0);
        let pos = lift.iter().position(|b| b.label() == "1").unwrap();
        let mut lift = lift;
        lift.rotate_left(pos);
        let node2 = analyze_cycle(&m, &lift, &c3).unwrap();
        // φ¹²(1) ≡ 19 (mod 27): Δ = 18, β = 2
        assert_eq!(node2.beta, Some(2));
        assert_eq!(node2.classification, Classification::Grows);
    }

    #[test]
    fn minimality_examples() {
        let c3 = ctx(3, 4);
        let e1 = map(EXAMPLE_ONE);
        assert!(check_minimal_at_level(&e1, 1, &c3).unwrap());
        assert!(check_minimal_by_levels(&e1, &c3).unwrap());
        let v = check_minimal_by_criterion(&e1, &c3).unwrap();
        assert!(v.transitive_level1 && v.derivative_condition && v.valuation_condition);
        assert_eq!(v.extra_condition, Some(true));
        assert!(v.minimal);
        let e2 = map(EXAMPLE_TWO);
        assert!(!check_minimal_at_level(&e2, 1, &c3).unwrap());
        assert!(!check_minimal_by_levels(&e2, &c3).unwrap());
        let v = check_minimal_by_criterion(&e2, &c3).unwrap();
        assert!(!v.transitive_level1 && !v.minimal);
        assert!(matches!(check_minimal_by_levels(&RationalMap::identity(), &c3), Err(Error::DegreeTooSmall(1))));
        assert!(matches!(check_minimal_by_criterion(&map("(z^2+2)/z"), &ctx(2, 4)), Err(Error::BadReduction)));
    }

    #[test]
    fn level_three_single_cycle_for_example_one() {
        // direct enumeration oracle: follow exact points, not the level machinery
        let c3 = ctx(3, 4);
        let m = map(EXAMPLE_ONE);
        let mut seen = std::collections::HashSet::new();
        let mut ball = ProjectiveBall::finite(3, 0, &c3).unwrap();
        for _ in 0..36 {
            assert!(seen.insert(ball));
            let img = m.evaluate(&ball.center()).unwrap();
            ball = ball_of(&img, 3, &c3).unwrap();
        }
        assert_eq!(ball.label(), "0");
        assert!(check_minimal_at_level(&m, 3, &c3).unwrap());
    }

    #[test]
    fn table_row_level_three_cycle() {
        let c2 = ctx(2, 4);
        let sys = build_level_system_with(&map(TABLE_ROW), 3, &c2, true).unwrap();
        assert!(sys.is_single_cycle());
        let cs = cycles_of(&sys);
        assert_eq!(
            label_seq(&cs.cycles[0]),
            ["0", "~0", "1", "6", "~6", "3", "4", "~4", "5", "2", "~2", "7"]
        );
    }

    #[test]
    fn fixed_point_classifications() {
        // z ↦ z^2: 0 is superattracting, p = 3
        let c3 = ctx(3, 4);
        let sq = map("z^2");
        let zero = ProjectiveBall::finite(1, 0, &c3).unwrap();
        let node = analyze_cycle(&sq, &[zero], &c3).unwrap();
        assert_eq!(node.classification, Classification::GrowsTails);
        let lifts = lift_cycle(&sq, &node, &c3).unwrap();
        assert_eq!(lifts.cycles.len(), 1);
        assert_eq!(lifts.tails.len(), 2);
        // z ↦ 2z + z^2 at 0: multiplier 2 of order 2 mod 3
        let ps = map("2z + z^2");
        let node = analyze_cycle(&ps, &[zero], &c3).unwrap();
        assert_eq!(node.classification, Classification::PartiallySplits { order: 2 });
        let lifts = lift_cycle(&ps, &node, &c3).unwrap();
        let mut lens: Vec<usize> = lifts.cycles.iter().map(Vec::len).collect();
        lens.sort();
        assert_eq!(lens, [1, 2]);
        // z ↦ z + 3z^2 + z^3 fixes 0 exactly with α = 1, so 0 splits
        let sp = map("z + 3z^2 + z^3");
        let node = analyze_cycle(&sp, &[zero], &c3).unwrap();
        assert_eq!(node.classification, Classification::Splits);
        assert_eq!(lift_cycle(&sp, &node, &c3).unwrap().cycles.len(), 3);
    }

    #[test]
    fn analyze_requires_headroom() {
        let c3 = ctx(3, 3);
        let b = ProjectiveBall::finite(3, 0, &c3).unwrap();
        assert!(matches!(analyze_cycle(&map("z^2"), &[b], &c3), Err(Error::LevelOutOfRange { .. })));
    }
}
