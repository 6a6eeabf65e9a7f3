//! Minimal decomposition P ⊔ M ⊔ B of the projective line.
//!
//! Cycles are lifted level by level starting from level 1. A cycle that
//! grows forever becomes a minimal component, the persistent cycle of a
//! "grows tails" or "partially splits" node becomes a periodic orbit, and
//! everything else at the precision cap is assigned to the basin of whatever
//! it eventually falls into. Cycles still splitting at the cap are reported
//! as unresolved rather than guessed.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    analyze_cycle, build_level_system, certify, lift_cycle, Certificate, Classification, CycleNode, ModMap,
};
use crate::error::{Error, Result};
use crate::padic::PrimeContext;
use crate::projective::ProjectiveBall;
use crate::ratmap::RationalMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitKind {
    /// The surviving cycle of a "grows tails" node.
    Attracting,
    /// The same-length lift of a "partially splits" node.
    Indifferent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPoint {
    /// Ball label at the precision cap; the point is this residue mod `modulus`.
    pub label: String,
    pub modulus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub id: String,
    pub period: usize,
    pub kind: OrbitKind,
    pub points: Vec<OrbitPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalComponent {
    pub id: String,
    /// Level of the balls below which the cycle grows forever.
    pub level: u32,
    pub balls: Vec<String>,
    /// Length of the level-1 cycle above the component.
    pub k: u64,
    /// Product of the partial-split orders on the path from level 1.
    pub ell: u64,
    /// (k, kℓ, kℓp, kℓp²)
    pub structure_sequence_head: [u64; 4],
    /// Cycle length of the restricted system at levels 1..=max level; the
    /// levels above `level` report the ancestor cycle.
    pub observed_lengths: Vec<usize>,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedCycle {
    pub id: String,
    pub level: u32,
    pub balls: Vec<String>,
    pub reason: String,
    /// Classifications met on the way down from level 1.
    pub history: Vec<String>,
}

/// One node of the lift tree, for the DOT rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub level: u32,
    pub balls: Vec<String>,
    /// Classification, or `unresolved`.
    pub status: String,
    /// Id of the component, orbit or unresolved entry this node produced.
    pub outcome: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub p: u64,
    pub max_level: u32,
    pub certificate: Certificate,
    pub periodic_orbits: Vec<PeriodicOrbit>,
    pub components: Vec<MinimalComponent>,
    /// Every other ball at the precision cap, mapped to the id it falls into.
    pub basin: BTreeMap<String, String>,
    pub unresolved: Vec<UnresolvedCycle>,
    pub lift_tree: Vec<TreeNode>,
}

/// Work item of the breadth-first pass.
struct Pending {
    balls: Vec<ProjectiveBall>,
    k: u64,
    ell: u64,
    history: Vec<String>,
    tree_parent: Option<usize>,
}

struct Engine<'a> {
    map: &'a RationalMap,
    ctx: &'a PrimeContext,
    max: u32,
    queue: VecDeque<Pending>,
    orbits: Vec<PeriodicOrbit>,
    components: Vec<MinimalComponent>,
    unresolved: Vec<UnresolvedCycle>,
    tree: Vec<TreeNode>,
    /// Ball label at max level → owning id.
    owner: HashMap<ProjectiveBall, String>,
}

fn labels(balls: &[ProjectiveBall]) -> Vec<String> {
    balls.iter().map(ProjectiveBall::label).collect()
}

impl<'a> Engine<'a> {
    fn add_tree_node(&mut self, parent: Option<usize>, balls: &[ProjectiveBall], status: String) -> usize {
        let id = self.tree.len();
        self.tree.push(TreeNode {
            id,
            parent,
            level: balls[0].level(),
            balls: labels(balls),
            status,
            outcome: None,
        });
        id
    }

    fn claim(&mut self, balls: &[ProjectiveBall], id: &str) -> Result<()> {
        for b in balls {
            for d in b.descendants(self.max, self.ctx) {
                if let Some(prev) = self.owner.insert(d, id.to_string()) {
                    return Err(Error::Invariant(format!("ball {} claimed by both {prev} and {id}", d.label())));
                }
            }
        }
        Ok(())
    }

    fn mark_unresolved(&mut self, item: &Pending, tree_id: usize, reason: &str) -> Result<()> {
        let id = format!("U{}", self.unresolved.len());
        self.claim(&item.balls, &id)?;
        self.unresolved.push(UnresolvedCycle {
            id: id.clone(),
            level: item.balls[0].level(),
            balls: labels(&item.balls),
            reason: reason.into(),
            history: item.history.clone(),
        });
        self.tree[tree_id].outcome = Some(id);
        Ok(())
    }

    fn push_lifts(&mut self, item: &Pending, lifts: Vec<Vec<ProjectiveBall>>, ell: u64, tag: &str, tree_id: usize) {
        for balls in lifts {
            let mut history = item.history.clone();
            history.push(tag.to_string());
            self.queue.push_back(Pending { balls, k: item.k, ell, history, tree_parent: Some(tree_id) });
        }
    }

    fn run(&mut self) -> Result<()> {
        while let Some(item) = self.queue.pop_front() {
            let level = item.balls[0].level();
            if level >= self.max {
                let tree_id = self.add_tree_node(item.tree_parent, &item.balls, "unresolved".into());
                self.mark_unresolved(&item, tree_id, "cycle at the precision cap cannot be classified")?;
                continue;
            }
            let node = analyze_cycle(self.map, &item.balls, self.ctx)?;
            let tree_id = self.add_tree_node(item.tree_parent, &item.balls, node.classification.to_string());
            match node.classification {
                Classification::GrowsTails => self.follow_persistent(&item, node, OrbitKind::Attracting, tree_id)?,
                Classification::PartiallySplits { .. } => {
                    self.follow_persistent(&item, node, OrbitKind::Indifferent, tree_id)?
                }
                Classification::Splits => {
                    let lifts = lift_cycle(self.map, &node, self.ctx)?;
                    self.push_lifts(&item, lifts.cycles, item.ell, "splits", tree_id);
                }
                Classification::Grows => self.handle_growth(&item, node, tree_id)?,
            }
        }
        Ok(())
    }

    /// Follows the same-length lift down to the cap, queueing the other lifts.
    fn follow_persistent(&mut self, item: &Pending, node: CycleNode, kind: OrbitKind, tree_id: usize) -> Result<()> {
        let k_len = node.len();
        let mut node = node;
        loop {
            let lifts = lift_cycle(self.map, &node, self.ctx)?;
            let (same, others): (Vec<_>, Vec<_>) = lifts.cycles.into_iter().partition(|c| c.len() == k_len);
            let persistent = same.into_iter().next().ok_or_else(|| Error::Invariant("persistent lift missing".into()))?;
            if let Classification::PartiallySplits { order } = node.classification {
                let tag = format!("partially splits (order {order}) at level {}", node.level);
                self.push_lifts(item, others, item.ell * order, &tag, tree_id);
            }
            if persistent[0].level() >= self.max {
                let id = format!("P{}", self.orbits.len());
                self.claim(&persistent, &id)?;
                let modulus = self.ctx.pow(self.max);
                self.orbits.push(PeriodicOrbit {
                    id: id.clone(),
                    period: k_len,
                    kind,
                    points: persistent.iter().map(|b| OrbitPoint { label: b.label(), modulus }).collect(),
                });
                self.tree[tree_id].outcome = Some(id);
                return Ok(());
            }
            let next = analyze_cycle(self.map, &persistent, self.ctx)?;
            if next.classification != node.classification {
                return Err(Error::ClassificationMismatch(format!(
                    "persistent lift at level {} is {}, parent was {}",
                    next.level, next.classification, node.classification
                )));
            }
            node = next;
        }
    }

    fn emit_component(&mut self, item: &Pending, node: &CycleNode, rule: String, tree_id: usize) -> Result<()> {
        let id = format!("M{}", self.components.len());
        let p = self.ctx.p();
        let observed = verify_growth(self.map, &node.balls, self.max, self.ctx)?;
        self.claim(&node.balls, &id)?;
        let (k, ell) = (item.k, item.ell);
        self.components.push(MinimalComponent {
            id: id.clone(),
            level: node.level,
            balls: labels(&node.balls),
            k,
            ell,
            structure_sequence_head: [k, k * ell, k * ell * p, k * ell * p * p],
            observed_lengths: observed,
            rule,
        });
        self.tree[tree_id].outcome = Some(id);
        Ok(())
    }

    fn handle_growth(&mut self, item: &Pending, node: CycleNode, tree_id: usize) -> Result<()> {
        let p = self.ctx.p();
        let n = node.level;
        if p >= 5 {
            return self.emit_component(item, &node, format!("grows at level {n}; p ≥ 5 grows forever"), tree_id);
        }
        if p == 3 && n >= 2 {
            return self.emit_component(item, &node, format!("grows at level {n} ≥ 2; p = 3 grows forever"), tree_id);
        }
        // p = 2 at any level, p = 3 at level 1: the lift decides
        let lift = lift_cycle(self.map, &node, self.ctx)?.cycles.remove(0);
        if lift[0].level() >= self.max {
            let child = self.add_tree_node(Some(tree_id), &lift, "unresolved".into());
            let pending = Pending {
                balls: lift,
                k: item.k,
                ell: item.ell,
                history: [item.history.clone(), vec![format!("grows at level {n}")]].concat(),
                tree_parent: Some(tree_id),
            };
            return self.mark_unresolved(&pending, child, "growth needs the next level to be confirmed");
        }
        let lifted = analyze_cycle(self.map, &lift, self.ctx)?;
        match lifted.classification {
            Classification::Grows => {
                let child = self.add_tree_node(Some(tree_id), &lift, lifted.classification.to_string());
                self.tree[child].outcome = Some(format!("M{}", self.components.len()));
                self.emit_component(
                    item,
                    &node,
                    format!("grows at levels {n} and {}; p = {p} grows forever", n + 1),
                    tree_id,
                )
            }
            Classification::Splits => {
                self.push_lifts(item, vec![lift], item.ell, &format!("grows at level {n}"), tree_id);
                Ok(())
            }
            other => Err(Error::ClassificationMismatch(format!("lift of a growing cycle {other}"))),
        }
    }
}

/// Checks that the restricted system below a cycle is one cycle whose length
/// multiplies by p at every level up to the cap. Returns the lengths.
pub fn verify_growth(map: &RationalMap, balls: &[ProjectiveBall], max_level: u32, ctx: &PrimeContext) -> Result<Vec<usize>> {
    let n = balls[0].level();
    let mut out = Vec::new();
    for level in n..=max_level {
        let mm = ModMap::new(map, level, ctx);
        let start = balls[0].descendants(level, ctx)[0];
        let expected = balls.len() * ctx.pow(level - n) as usize;
        let mut cur = start;
        let mut len = 0;
        loop {
            cur = mm.step(&cur)?;
            len += 1;
            if !balls.iter().any(|b| b.contains(&cur, ctx)) {
                return Err(Error::Invariant(format!("component at level {n} is not invariant")));
            }
            if cur == start || len > expected {
                break;
            }
        }
        if len != expected {
            return Err(Error::Invariant(format!(
                "component {:?} has a cycle of length {len} at level {level}, expected {expected}",
                labels(balls)
            )));
        }
        out.push(len);
    }
    Ok(out)
}

/// Runs the decomposition up to the context's max level.
pub fn decompose(map: &RationalMap, ctx: &PrimeContext) -> Result<DecompositionReport> {
    if map.degree() < 2 {
        return Err(Error::DegreeTooSmall(map.degree()));
    }
    if !map.separates_residues(ctx) {
        return Err(Error::BadReduction);
    }
    let certificate = certify(map, ctx)?;
    let max = ctx.max_level();
    let level1 = build_level_system(map, 1, ctx)?;
    let cycles = crate::dynamics::cycles_of(&level1);
    let mut engine = Engine {
        map,
        ctx,
        max,
        queue: VecDeque::new(),
        orbits: Vec::new(),
        components: Vec::new(),
        unresolved: Vec::new(),
        tree: Vec::new(),
        owner: HashMap::new(),
    };
    for balls in cycles.cycles {
        let k = balls.len() as u64;
        engine.queue.push_back(Pending { balls, k, ell: 1, history: Vec::new(), tree_parent: None });
    }
    engine.run()?;
    // observed lengths above the defining level come from the ancestors
    for c in engine.components.iter_mut() {
        let lead: Vec<usize> = (1..c.level).map(|lvl| ancestor_cycle_length(map, &c.balls, c.level, lvl, ctx)).collect::<Result<_>>()?;
        let mut all = lead;
        all.append(&mut c.observed_lengths);
        c.observed_lengths = all;
    }
    let basin = assign_basin(map, &engine.owner, ctx)?;
    Ok(DecompositionReport {
        p: ctx.p(),
        max_level: max,
        certificate,
        periodic_orbits: engine.orbits,
        components: engine.components,
        basin,
        unresolved: engine.unresolved,
        lift_tree: engine.tree,
    })
}

/// Length of the level-`lvl` cycle containing the component's first ball.
fn ancestor_cycle_length(map: &RationalMap, balls: &[String], level: u32, lvl: u32, ctx: &PrimeContext) -> Result<usize> {
    let first = ProjectiveBall::parse_label(&balls[0], level, ctx)?.parent(lvl, ctx);
    let mm = ModMap::new(map, lvl, ctx);
    let mut cur = mm.step(&first)?;
    let mut len = 1;
    while cur != first {
        cur = mm.step(&cur)?;
        len += 1;
        if len > crate::projective::ball_count(lvl, ctx) {
            return Err(Error::Invariant("ancestor is not periodic".into()));
        }
    }
    Ok(len)
}

fn assign_basin(map: &RationalMap, owner: &HashMap<ProjectiveBall, String>, ctx: &PrimeContext) -> Result<BTreeMap<String, String>> {
    let max = ctx.max_level();
    let sys = build_level_system(map, max, ctx)?;
    let n = sys.len();
    let mut target: Vec<Option<String>> = (0..n).map(|i| owner.get(&sys.ball(i)).cloned()).collect();
    let covered: Vec<bool> = target.iter().map(Option::is_some).collect();
    let mut basin = BTreeMap::new();
    for start in 0..n {
        if target[start].is_some() {
            continue;
        }
        let mut path = vec![start];
        let mut cur = sys.transition()[start];
        while target[cur].is_none() {
            path.push(cur);
            cur = sys.transition()[cur];
            if path.len() > n {
                return Err(Error::Invariant(format!("ball {} never reaches a covered ball", sys.ball(start).label())));
            }
        }
        let t = target[cur].clone();
        for i in path {
            target[i] = t.clone();
        }
    }
    for i in 0..n {
        if !covered[i] {
            basin.insert(sys.ball(i).label(), target[i].clone().expect("assigned"));
        }
    }
    Ok(basin)
}

impl DecompositionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            position: e.column().saturating_sub(1),
            expected: vec![format!("decomposition report JSON ({e})")],
        })
    }

    /// The lift tree in Graphviz DOT, nodes colored by classification.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lifts {\n  rankdir=TB;\n  node [shape=box, style=filled, fontname=\"monospace\"];\n");
        for node in &self.lift_tree {
            let color = match node.status.as_str() {
                "grows" => "palegreen",
                "splits" => "lightblue",
                "grows tails" => "salmon",
                "unresolved" => "lightgray",
                _ => "khaki",
            };
            let balls = if node.balls.len() > 8 {
                format!("{} … ({} balls)", node.balls[..8].join(" "), node.balls.len())
            } else {
                node.balls.join(" ")
            };
            let outcome = node.outcome.as_deref().map(|o| format!("\\n→ {o}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "  n{} [label=\"level {}: ({})\\n{}{}\", fillcolor={}];",
                node.id, node.level, balls, node.status, outcome, color
            );
            if let Some(parent) = node.parent {
                let _ = writeln!(out, "  n{parent} -> n{};", node.id);
            }
        }
        out.push_str("}\n");
        out
    }

    /// Short human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p = {}, max level = {}, certificate: {}", self.p, self.max_level, self.certificate);
        for c in &self.components {
            let _ = writeln!(
                out,
                "component {}: level {} balls ({}); k = {}, l = {}, structure ({}, …); {}",
                c.id,
                c.level,
                c.balls.join(" "),
                c.k,
                c.ell,
                c.structure_sequence_head.iter().map(u64::to_string).collect::<Vec<_>>().join(", "),
                c.rule
            );
        }
        for o in &self.periodic_orbits {
            let pts: Vec<String> = o.points.iter().map(|pt| format!("{} mod {}", pt.label, pt.modulus)).collect();
            let kind = match o.kind {
                OrbitKind::Attracting => "attracting",
                OrbitKind::Indifferent => "indifferent",
            };
            let _ = writeln!(out, "periodic orbit {}: {kind}, period {}: {}", o.id, o.period, pts.join(", "));
        }
        for u in &self.unresolved {
            let _ = writeln!(out, "unresolved {}: level {} ({}): {}", u.id, u.level, u.balls.join(" "), u.reason);
        }
        let mut per_target: BTreeMap<&str, usize> = BTreeMap::new();
        for t in self.basin.values() {
            *per_target.entry(t).or_default() += 1;
        }
        let summary: Vec<String> = per_target.iter().map(|(t, n)| format!("{n} → {t}")).collect();
        let _ = writeln!(
            out,
            "basin: {} balls at level {}{}",
            self.basin.len(),
            self.max_level,
            if summary.is_empty() { String::new() } else { format!(" ({})", summary.join(", ")) }
        );
        out
    }

    /// Id of the orbit, component or unresolved entry containing a ball at
    /// the cap; `None` for basin balls.
    pub fn owner_of(&self, ball: &ProjectiveBall, ctx: &PrimeContext) -> Result<Option<String>> {
        let label = ball.label();
        if let Some(o) = self.periodic_orbits.iter().find(|o| o.points.iter().any(|pt| pt.label == label)) {
            return Ok(Some(o.id.clone()));
        }
        let inside = |balls: &[String], level: u32| -> Result<bool> {
            for l in balls {
                if ProjectiveBall::parse_label(l, level, ctx)?.contains(ball, ctx) {
                    return Ok(true);
                }
            }
            Ok(false)
        };
        for c in &self.components {
            if inside(&c.balls, c.level)? {
                return Ok(Some(c.id.clone()));
            }
        }
        for u in &self.unresolved {
            if inside(&u.balls, u.level)? {
                return Ok(Some(u.id.clone()));
            }
        }
        Ok(None)
    }

    /// Balls at the cap owned by each id (components expanded).
    pub fn coverage_counts(&self, ctx: &PrimeContext) -> Result<(usize, usize, usize, usize)> {
        let expand = |balls: &[String], level: u32| -> Result<usize> {
            balls.iter().try_fold(0usize, |acc, l| {
                let b = ProjectiveBall::parse_label(l, level, ctx)?;
                Ok(acc + b.descendants(self.max_level, ctx).len())
            })
        };
        let orbit_balls = self.periodic_orbits.iter().map(|o| o.points.len()).sum();
        let comp = self.components.iter().map(|c| expand(&c.balls, c.level)).sum::<Result<usize>>()?;
        let unres = self.unresolved.iter().map(|u| expand(&u.balls, u.level)).sum::<Result<usize>>()?;
        Ok((orbit_balls, comp, self.basin.len(), unres))
    }
}

/// Every period has one of the forms k or kℓ (1 ≤ k ≤ p+1, ℓ | p−1), or
/// additionally kp when p ∈ {2, 3}.
pub fn periodic_length_check(report: &DecompositionReport, p: u64) -> bool {
    report.periodic_orbits.iter().all(|o| period_allowed(o.period as u64, p))
}

pub fn period_allowed(period: u64, p: u64) -> bool {
    (1..=p + 1).any(|k| {
        (1..p).filter(|l| (p - 1) % l == 0).any(|l| period == k || period == k * l) || (p <= 3 && period == k * p)
    })
}
