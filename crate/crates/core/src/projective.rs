//! Points and balls of the projective line over Q_p.
//!
//! A level-n ball is a ball of spherical radius p^(-n). Balls on the finite
//! side are labelled by a residue `i` mod p^n (the ball `B_n(i)`); balls on the
//! side of infinity are labelled `~i` with `p | i` and stand for `B_n(1/i)`,
//! where `1/0 = ∞`. At every level there are `(p+1)·p^(n-1)` balls.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{int_valuation, reduce_int, ExactRational, PrimeContext, Residue, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Finite,
    Infinity,
}

/// A ball of radius p^(-level), identified by its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectiveBall {
    level: u32,
    side: Side,
    rep: u64,
}

impl ProjectiveBall {
    pub fn new(level: u32, side: Side, rep: u64, ctx: &PrimeContext) -> Result<Self> {
        ctx.check_level(level)?;
        let m = ctx.pow(level);
        if rep >= m {
            return Err(Error::Invariant(format!("ball representative {rep} not reduced mod {m}")));
        }
        if side == Side::Infinity && rep % ctx.p() != 0 {
            return Err(Error::Invariant(format!("infinity-side label ~{rep} is not divisible by p")));
        }
        Ok(ProjectiveBall { level, side, rep })
    }

    pub fn finite(level: u32, rep: u64, ctx: &PrimeContext) -> Result<Self> {
        ProjectiveBall::new(level, Side::Finite, rep, ctx)
    }

    pub fn infinity_side(level: u32, rep: u64, ctx: &PrimeContext) -> Result<Self> {
        ProjectiveBall::new(level, Side::Infinity, rep, ctx)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn rep(&self) -> u64 {
        self.rep
    }

    pub fn residue(&self, ctx: &PrimeContext) -> Residue {
        Residue::new(self.rep, self.level, ctx)
    }

    /// `i` or `~i`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Parses a label such as `5` or `~0` as a ball at `level`.
    pub fn parse_label(label: &str, level: u32, ctx: &PrimeContext) -> Result<Self> {
        let label = label.trim();
        let (side, digits) = match label.strip_prefix('~') {
            Some(rest) => (Side::Infinity, rest),
            None => (Side::Finite, label),
        };
        let rep: u64 = digits
            .parse()
            .map_err(|_| Error::Parse { position: 0, expected: vec!["ball label".into()] })?;
        ProjectiveBall::new(level, side, rep, ctx)
    }

    /// Position in [`enumerate_balls`] order.
    pub fn index(&self, ctx: &PrimeContext) -> usize {
        match self.side {
            Side::Finite => self.rep as usize,
            Side::Infinity => (ctx.pow(self.level) + self.rep / ctx.p()) as usize,
        }
    }

    pub fn from_index(index: usize, level: u32, ctx: &PrimeContext) -> Self {
        let m = ctx.pow(level) as usize;
        if index < m {
            ProjectiveBall { level, side: Side::Finite, rep: index as u64 }
        } else {
            let j = (index - m) as u64;
            assert!(j < ctx.pow(level - 1), "ball index {index} out of range");
            ProjectiveBall { level, side: Side::Infinity, rep: j * ctx.p() }
        }
    }

    /// The label read as a point: `i`, or `1/i` with `1/0 = ∞`.
    pub fn center(&self) -> ProjectivePoint {
        match self.side {
            Side::Finite => ProjectivePoint::from_integers(BigInt::from(self.rep), BigInt::one()),
            Side::Infinity => ProjectivePoint::from_integers(BigInt::one(), BigInt::from(self.rep)),
        }
    }

    /// Another point of the same ball: the representative shifted by `t·p^n`.
    pub fn shifted_center(&self, t: u64, ctx: &PrimeContext) -> ProjectivePoint {
        let r = BigInt::from(self.rep) + BigInt::from(t) * BigInt::from(ctx.pow(self.level));
        match self.side {
            Side::Finite => ProjectivePoint::from_integers(r, BigInt::one()),
            Side::Infinity => ProjectivePoint::from_integers(BigInt::one(), r),
        }
    }

    /// The enclosing ball at a coarser level.
    pub fn parent(&self, level: u32, ctx: &PrimeContext) -> ProjectiveBall {
        assert!(level >= 1 && level <= self.level);
        ProjectiveBall { level, side: self.side, rep: self.rep % ctx.pow(level) }
    }

    pub fn contains(&self, other: &ProjectiveBall, ctx: &PrimeContext) -> bool {
        other.level >= self.level && other.parent(self.level, ctx) == *self
    }

    /// The `p` balls of the next level inside this one.
    pub fn sub_balls(&self, ctx: &PrimeContext) -> Result<Vec<ProjectiveBall>> {
        ctx.check_level(self.level + 1)?;
        let step = ctx.pow(self.level);
        Ok((0..ctx.p())
            .map(|t| ProjectiveBall { level: self.level + 1, side: self.side, rep: self.rep + t * step })
            .collect())
    }

    /// All balls at `level` inside this one, in index order.
    pub fn descendants(&self, level: u32, ctx: &PrimeContext) -> Vec<ProjectiveBall> {
        assert!(level >= self.level);
        let step = ctx.pow(self.level);
        let count = ctx.pow(level - self.level);
        let mut out: Vec<ProjectiveBall> = (0..count)
            .map(|t| ProjectiveBall { level, side: self.side, rep: self.rep + t * step })
            .collect();
        out.sort_by_key(|b| b.rep);
        out
    }
}

impl fmt::Display for ProjectiveBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Finite => write!(f, "{}", self.rep),
            Side::Infinity => write!(f, "~{}", self.rep),
        }
    }
}

/// Number of balls at `level`.
pub fn ball_count(level: u32, ctx: &PrimeContext) -> usize {
    ((ctx.p() + 1) * ctx.pow(level - 1)) as usize
}

/// Every level-n ball: finite labels `0..p^n` ascending, then `~0, ~p, ~2p, …`.
pub fn enumerate_balls(level: u32, ctx: &PrimeContext) -> Result<Vec<ProjectiveBall>> {
    ctx.check_level(level)?;
    Ok((0..ball_count(level, ctx)).map(|i| ProjectiveBall::from_index(i, level, ctx)).collect())
}

/// A point `[x : y]` of P¹(Q_p), stored as a primitive integer pair.
///
/// Clearing denominators and dividing by the content gives `gcd(x, y) = 1`,
/// so `min(v_p(x), v_p(y)) = 0` holds for every prime at once. The sign is
/// fixed by making the first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjectivePoint {
    x: BigInt,
    y: BigInt,
}

impl ProjectivePoint {
    /// Canonicalizes an integer pair; panics on `[0 : 0]`.
    pub fn from_integers(x: BigInt, y: BigInt) -> Self {
        assert!(!(x.is_zero() && y.is_zero()), "[0:0] is not a point");
        let g = x.gcd(&y);
        let (mut x, mut y) = (x / &g, y / &g);
        if x.is_negative() || (x.is_zero() && y.is_negative()) {
            x = -x;
            y = -y;
        }
        ProjectivePoint { x, y }
    }

    pub fn try_from_integers(x: BigInt, y: BigInt) -> Option<Self> {
        if x.is_zero() && y.is_zero() {
            None
        } else {
            Some(ProjectivePoint::from_integers(x, y))
        }
    }

    pub fn from_pair(x: &ExactRational, y: &ExactRational) -> Result<Self> {
        if x.is_zero() && y.is_zero() {
            return Err(Error::IndeterminatePoint("[0:0]".into()));
        }
        let l = x.denom().lcm(y.denom());
        let xi = x.numer() * (&l / x.denom());
        let yi = y.numer() * (&l / y.denom());
        Ok(ProjectivePoint::from_integers(xi, yi))
    }

    /// The affine point `z = [z : 1]`.
    pub fn finite(z: &ExactRational) -> Self {
        ProjectivePoint::from_integers(z.numer().clone(), z.denom().clone())
    }

    pub fn infinity() -> Self {
        ProjectivePoint { x: BigInt::one(), y: BigInt::zero() }
    }

    pub fn from_int(z: i64) -> Self {
        ProjectivePoint::from_integers(BigInt::from(z), BigInt::one())
    }

    pub fn x(&self) -> &BigInt {
        &self.x
    }

    pub fn y(&self) -> &BigInt {
        &self.y
    }

    pub fn is_infinity(&self) -> bool {
        self.y.is_zero()
    }

    /// Affine coordinate `x/y`, `None` at infinity.
    pub fn affine(&self) -> Option<ExactRational> {
        if self.y.is_zero() {
            None
        } else {
            Some(ExactRational::new(self.x.clone(), self.y.clone()).expect("nonzero y"))
        }
    }

    /// Parses `inf`, `∞`, `~i` (the point `1/i`), or a rational `n` / `n/d`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" || s == "∞" || s == "infinity" {
            return Ok(ProjectivePoint::infinity());
        }
        if let Some(rest) = s.strip_prefix('~') {
            let i: ExactRational = rest.parse()?;
            return ProjectivePoint::from_pair(&ExactRational::one(), &i);
        }
        let z: ExactRational = s.parse()?;
        Ok(ProjectivePoint::finite(&z))
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.affine() {
            None => f.write_str("inf"),
            Some(z) => write!(f, "{z}"),
        }
    }
}

/// `k` with `ρ(P, Q) = p^(-k)`; `+∞` when the points coincide.
pub fn spherical_distance(a: &ProjectivePoint, b: &ProjectivePoint, p: u64) -> Valuation {
    // both pairs are primitive, so the max-norms in the denominator are 1
    let cross = &a.x * &b.y - &b.x * &a.y;
    match int_valuation(&cross, p) {
        None => Valuation::Infinity,
        Some(v) => Valuation::Finite(v as i64),
    }
}

/// The level-n ball containing `point`.
pub fn ball_of(point: &ProjectivePoint, level: u32, ctx: &PrimeContext) -> Result<ProjectiveBall> {
    ctx.check_level(level)?;
    Ok(ball_of_unchecked(point, level, ctx))
}

pub(crate) fn ball_of_unchecked(point: &ProjectivePoint, level: u32, ctx: &PrimeContext) -> ProjectiveBall {
    let p = BigInt::from(ctx.p());
    let m = ctx.pow(level);
    let unit_y = !(&point.y % &p).is_zero();
    if unit_y {
        let x = Residue::new(reduce_int(&point.x, m), level, ctx);
        let y = Residue::new(reduce_int(&point.y, m), level, ctx);
        let z = x.mul(&y.inverse().expect("unit"));
        ProjectiveBall { level, side: Side::Finite, rep: z.value() }
    } else {
        // primitive pair with p | y forces x to be a unit
        let x = Residue::new(reduce_int(&point.x, m), level, ctx);
        let y = Residue::new(reduce_int(&point.y, m), level, ctx);
        let w = y.mul(&x.inverse().expect("unit"));
        ProjectiveBall { level, side: Side::Infinity, rep: w.value() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p, 5).unwrap()
    }

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d).unwrap()
    }

    #[test]
    fn distance_examples() {
        let zero = ProjectivePoint::from_int(0);
        let one = ProjectivePoint::from_int(1);
        assert_eq!(spherical_distance(&zero, &one, 5), Valuation::Finite(0));
        let three = ProjectivePoint::from_int(3);
        assert_eq!(spherical_distance(&three, &ProjectivePoint::infinity(), 3), Valuation::Finite(0));
        let twelve = ProjectivePoint::from_int(12);
        assert_eq!(spherical_distance(&three, &twelve, 3), Valuation::Finite(2));
        assert_eq!(spherical_distance(&three, &three, 3), Valuation::Infinity);
        // |1/9 - ∞| = 1/|1/9|_3 = 1/9
        let ninth = ProjectivePoint::finite(&q(1, 9));
        assert_eq!(spherical_distance(&ninth, &ProjectivePoint::infinity(), 3), Valuation::Finite(2));
    }

    #[test]
    fn ball_of_examples() {
        let c3 = ctx(3);
        let b = ball_of(&ProjectivePoint::from_int(15), 3, &c3).unwrap();
        assert_eq!((b.side(), b.rep()), (Side::Finite, 15));
        let c2 = ctx(2);
        let b = ball_of(&ProjectivePoint::infinity(), 3, &c2).unwrap();
        assert_eq!(b.label(), "~0");
        let b = ball_of(&ProjectivePoint::finite(&q(1, 2)), 3, &c2).unwrap();
        assert_eq!(b.label(), "~2");
        let b = ball_of(&ProjectivePoint::finite(&q(3, 2)), 3, &c3).unwrap();
        assert_eq!(b.label(), "15");
    }

    #[test]
    fn enumeration_examples() {
        let labels: Vec<String> =
            enumerate_balls(1, &ctx(3)).unwrap().iter().map(|b| b.label()).collect();
        assert_eq!(labels, ["0", "1", "2", "~0"]);
        let labels: Vec<String> =
            enumerate_balls(3, &ctx(2)).unwrap().iter().map(|b| b.label()).collect();
        assert_eq!(labels, ["0", "1", "2", "3", "4", "5", "6", "7", "~0", "~2", "~4", "~6"]);
        assert_eq!(enumerate_balls(2, &ctx(5)).unwrap().len(), 30);
    }

    #[test]
    fn sub_ball_examples() {
        let c3 = ctx(3);
        let inf = ProjectiveBall::infinity_side(1, 0, &c3).unwrap();
        let mut subs: Vec<String> = inf.sub_balls(&c3).unwrap().iter().map(|b| b.label()).collect();
        subs.sort();
        assert_eq!(subs, ["~0", "~3", "~6"]);
        let c2 = ctx(2);
        let zero = ProjectiveBall::finite(1, 0, &c2).unwrap();
        let subs: Vec<String> = zero.sub_balls(&c2).unwrap().iter().map(|b| b.label()).collect();
        assert_eq!(subs, ["0", "2"]);
    }

    #[test]
    fn sub_balls_partition_next_level() {
        for p in [2, 3, 5] {
            let c = ctx(p);
            for n in 1..c.max_level() {
                let mut all: Vec<usize> = enumerate_balls(n, &c)
                    .unwrap()
                    .iter()
                    .flat_map(|b| b.sub_balls(&c).unwrap())
                    .map(|b| b.index(&c))
                    .collect();
                all.sort();
                let expected: Vec<usize> = (0..ball_count(n + 1, &c)).collect();
                assert_eq!(all, expected);
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let c = ctx(3);
        for n in 1..=4 {
            for (i, b) in enumerate_balls(n, &c).unwrap().iter().enumerate() {
                assert_eq!(b.index(&c), i);
                assert_eq!(ProjectiveBall::parse_label(&b.label(), n, &c).unwrap(), *b);
                assert_eq!(ball_of(&b.center(), n, &c).unwrap(), *b);
            }
        }
    }

    #[test]
    fn invalid_labels_rejected() {
        let c = ctx(3);
        assert!(ProjectiveBall::infinity_side(2, 4, &c).is_err());
        assert!(ProjectiveBall::finite(1, 3, &c).is_err());
        assert!(ProjectiveBall::parse_label("~x", 1, &c).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = ProjectivePoint> {
            prop_oneof![
                9 => (-5000i64..5000, 1i64..400).prop_map(|(n, d)| ProjectivePoint::finite(&q(n, d))),
                1 => Just(ProjectivePoint::infinity()),
            ]
        }

        proptest! {
            #[test]
            fn ultrametric(a in point(), b in point(), c in point(), pi in 0usize..3) {
                let p = [2u64, 3, 5][pi];
                let ab = spherical_distance(&a, &b, p);
                let bc = spherical_distance(&b, &c, p);
                let ac = spherical_distance(&a, &c, p);
                // larger exponent means closer
                prop_assert!(ac >= ab.min(bc));
                prop_assert_eq!(ab, spherical_distance(&b, &a, p));
            }

            #[test]
            fn ball_of_matches_metric(a in point(), b in point(), pi in 0usize..3, n in 1u32..=5) {
                let p = [2u64, 3, 5][pi];
                let c = ctx(p);
                let same = ball_of(&a, n, &c).unwrap() == ball_of(&b, n, &c).unwrap();
                let close = spherical_distance(&a, &b, p) >= Valuation::Finite(n as i64);
                prop_assert_eq!(same, close);
            }
        }
    }
}
