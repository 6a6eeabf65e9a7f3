//! Exact rationals with p-adic valuations, and residues modulo p^n.
//!
//! Everything above this module works with exact values. Residues are only
//! produced from rationals whose denominator is a p-adic unit, and are kept
//! fully reduced into `[0, p^n)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus we allow for residues; products are formed in `u128`.
const MAX_MODULUS: u64 = 1 << 62;

/// The prime together with the precision cap for level-indexed work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeContext {
    p: u64,
    max_level: u32,
}

impl PrimeContext {
    pub fn new(p: u64, max_level: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if max_level < 3 {
            return Err(Error::MaxLevelTooSmall(max_level));
        }
        // one extra level of headroom for the displacement of a cycle at max_level
        let mut m: u64 = 1;
        for _ in 0..=max_level {
            m = m
                .checked_mul(p)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or(Error::PrecisionOverflow { p, level: max_level + 1 })?;
        }
        Ok(PrimeContext { p, max_level })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// `p^n`. Panics if `n > max_level + 1`, which construction rules out for
    /// every level the library asks for.
    pub fn pow(&self, n: u32) -> u64 {
        assert!(n <= self.max_level + 1, "level {n} beyond precision cap");
        self.p.pow(n)
    }

    pub fn check_level(&self, n: u32) -> Result<()> {
        if n == 0 || n > self.max_level {
            Err(Error::LevelOutOfRange { level: n, max: self.max_level })
        } else {
            Ok(())
        }
    }
}

/// Deterministic trial division; primes here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// v_p extended by `+∞` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinity)
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinity,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

/// Exponent of `p` in a nonzero integer; `None` for zero.
pub fn int_valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// `n mod m` into `[0, m)` for a big integer.
pub fn reduce_int(n: &BigInt, m: u64) -> u64 {
    n.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("reduced value fits in u64")
}

/// An arbitrary-precision fraction, always in lowest terms with positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(ExactRational(BigRational::new(num.into(), den)))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big_rational(self) -> BigRational {
        self.0
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(ExactRational(self.0.recip()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = ExactRational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// v_p(num) − v_p(den), or `+∞` for zero.
    pub fn valuation(&self, p: u64) -> Valuation {
        match int_valuation(self.numer(), p) {
            None => Valuation::Infinity,
            Some(vn) => {
                let vd = int_valuation(self.denom(), p).expect("denominator is nonzero");
                Valuation::Finite(vn as i64 - vd as i64)
            }
        }
    }

    /// `true` when the value lies in Z_p.
    pub fn is_p_integral(&self, p: u64) -> bool {
        self.denom() % BigInt::from(p) != BigInt::zero()
    }

    /// Reduction modulo `p^n`, computed as `num · den⁻¹`.
    pub fn to_residue(&self, n: u32, ctx: &PrimeContext) -> Result<Residue> {
        if !self.is_p_integral(ctx.p()) {
            return Err(Error::NonUnitDenominator(self.to_string()));
        }
        let m = ctx.pow(n);
        let num = Residue::from_int(self.numer(), n, ctx);
        let den = Residue::from_int(self.denom(), n, ctx);
        debug_assert_eq!(num.modulus(), m);
        Ok(num.mul(&den.inverse()?))
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        ExactRational(r)
    }
}

impl From<BigInt> for ExactRational {
    fn from(n: BigInt) -> Self {
        ExactRational::from_int(n)
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        ExactRational::from_int(n)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"n"` or `"n/d"` with optional sign on the numerator.
impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |position: usize| Error::Parse {
            position,
            expected: vec!["integer".into(), "integer/integer".into()],
        };
        match s.split_once('/') {
            None => BigInt::from_str(s).map(ExactRational::from_int).map_err(|_| bad(0)),
            Some((n, d)) => {
                let n = BigInt::from_str(n.trim()).map_err(|_| bad(0))?;
                let d = BigInt::from_str(d.trim()).map_err(|_| bad(s.find('/').unwrap() + 1))?;
                ExactRational::new(n, d)
            }
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // "n/d" strings, or plain JSON integers
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(ExactRational::from_int(n)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for ExactRational {
    type Output = ExactRational;
    /// Panics on division by zero; use [`ExactRational::recip`] when the divisor
    /// can be zero.
    fn div(self, rhs: ExactRational) -> ExactRational {
        assert!(!rhs.is_zero(), "division by zero");
        ExactRational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a ExactRational> for &'a ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: &'a ExactRational) -> ExactRational {
        assert!(!rhs.is_zero(), "division by zero");
        ExactRational(&self.0 / &rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Zero for ExactRational {
    fn zero() -> Self {
        ExactRational::zero()
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for ExactRational {
    fn one() -> Self {
        ExactRational::one()
    }
}

/// An element of Z/p^nZ, stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Residue {
    value: u64,
    level: u32,
    p: u64,
}

impl Residue {
    pub fn new(value: u64, level: u32, ctx: &PrimeContext) -> Self {
        let m = ctx.pow(level);
        Residue { value: value % m, level, p: ctx.p() }
    }

    pub fn from_int(n: &BigInt, level: u32, ctx: &PrimeContext) -> Self {
        Residue { value: reduce_int(n, ctx.pow(level)), level, p: ctx.p() }
    }

    pub fn from_i64(n: i64, level: u32, ctx: &PrimeContext) -> Self {
        Residue::from_int(&BigInt::from(n), level, ctx)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.level)
    }

    pub fn is_unit(&self) -> bool {
        self.value % self.p != 0
    }

    /// Valuation of the representative in `[0, p^n)`, capped at `n` for zero.
    pub fn valuation(&self) -> u32 {
        if self.value == 0 {
            return self.level;
        }
        let mut v = 0;
        let mut x = self.value;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    fn check_compatible(&self, other: &Residue) {
        assert!(
            self.p == other.p && self.level == other.level,
            "residues from different rings"
        );
    }

    pub fn add(&self, other: &Residue) -> Residue {
        self.check_compatible(other);
        let m = self.modulus() as u128;
        let v = (self.value as u128 + other.value as u128) % m;
        Residue { value: v as u64, ..*self }
    }

    pub fn sub(&self, other: &Residue) -> Residue {
        self.check_compatible(other);
        let m = self.modulus() as u128;
        let v = (self.value as u128 + m - other.value as u128) % m;
        Residue { value: v as u64, ..*self }
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        self.check_compatible(other);
        let m = self.modulus() as u128;
        let v = (self.value as u128 * other.value as u128) % m;
        Residue { value: v as u64, ..*self }
    }

    pub fn neg(&self) -> Residue {
        let m = self.modulus();
        Residue { value: (m - self.value) % m, ..*self }
    }

    pub fn pow(&self, mut e: u64) -> Residue {
        let mut base = *self;
        let mut acc = Residue { value: 1 % self.modulus(), ..*self };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Drop to a lower level (reduction Z/p^n → Z/p^k).
    pub fn truncate(&self, level: u32) -> Residue {
        assert!(level <= self.level);
        Residue { value: self.value % self.p.pow(level), level, p: self.p }
    }

    /// Inverse modulo p^n by the extended Euclidean algorithm.
    pub fn inverse(&self) -> Result<Residue> {
        let m = self.modulus();
        if !self.is_unit() {
            return Err(Error::NotInvertible { value: self.value, modulus: m });
        }
        let (mut old_r, mut r) = (self.value as i128, m as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        let v = old_s.rem_euclid(m as i128) as u64;
        Ok(Residue { value: v, ..*self })
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.p, self.level)
    }
}

/// Multiplicative order of a unit residue mod p.
pub fn multiplicative_order(r: &Residue) -> Option<u64> {
    if !r.is_unit() {
        return None;
    }
    let one = Residue { value: 1, ..*r };
    let mut acc = *r;
    let mut k = 1;
    while acc != one {
        acc = acc.mul(r);
        k += 1;
    }
    Some(k)
}
