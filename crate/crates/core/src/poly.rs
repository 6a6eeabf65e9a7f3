//! Dense univariate polynomials over Q and over F_p.
//!
//! Coefficients are stored lowest degree first, with no trailing zeros.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn z() -> Self {
        QPoly(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn from_ints(coeffs: &[BigInt]) -> Self {
        QPoly::new(coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new(
            (0..n)
                .map(|i| {
                    let a = self.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    let b = other.0.get(i).cloned().unwrap_or_else(BigRational::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn neg(&self) -> QPoly {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> QPoly {
        let mut acc = QPoly::constant(BigRational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.lead().unwrap().clone();
        let mut rem = self.0.clone();
        let mut quot = vec![BigRational::zero(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem.last().unwrap() / &lead;
            for (i, b) in divisor.0.iter().enumerate() {
                rem[shift + i] -= &c * b;
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (QPoly::new(quot), QPoly::new(rem))
    }

    /// Monic gcd; the gcd of two zero polynomials is zero.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.lead().cloned() {
            None => a,
            Some(l) => a.scale(&l.recip()),
        }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Scales two polynomials by a common rational so that all coefficients are
/// integers with overall content 1. Returns `None` when both are zero.
pub fn primitive_pair(a: &QPoly, b: &QPoly) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    let all = a.coeffs().iter().chain(b.coeffs());
    let mut den = BigInt::one();
    for c in all.clone() {
        den = den.lcm(c.denom());
    }
    let to_int = |p: &QPoly| -> Vec<BigInt> {
        p.coeffs().iter().map(|c| c.numer() * (&den / c.denom())).collect()
    };
    let (ai, bi) = (to_int(a), to_int(b));
    let mut g = BigInt::zero();
    for c in ai.iter().chain(&bi) {
        g = g.gcd(c);
    }
    if g.is_zero() {
        return None;
    }
    let g = g.abs();
    Some((ai.into_iter().map(|c| c / &g).collect(), bi.into_iter().map(|c| c / &g).collect()))
}

/// Polynomial over F_p, coefficients in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn from_ints(p: u64, coeffs: &[BigInt]) -> Self {
        FpPoly::new(p, coeffs.iter().map(|c| crate::padic::reduce_int(c, p)).collect())
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn inv(&self, a: u64) -> u64 {
        // Fermat; p is prime and a != 0
        let mut base = a % self.p;
        let mut e = self.p - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, base, self.p);
            }
            base = mulmod(base, base, self.p);
            e >>= 1;
        }
        acc
    }

    pub fn div_rem(&self, divisor: &FpPoly) -> (FpPoly, FpPoly) {
        let p = self.p;
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = self.inv(*divisor.coeffs.last().unwrap());
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = mulmod(*rem.last().unwrap(), lead_inv, p);
            for (i, b) in divisor.coeffs.iter().enumerate() {
                let t = mulmod(c, *b, p);
                rem[shift + i] = (rem[shift + i] + p - t) % p;
            }
            quot[shift] = c;
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        (FpPoly::new(p, quot), FpPoly::new(p, rem))
    }

    pub fn monic(&self) -> FpPoly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&l) => {
                let li = self.inv(l);
                FpPoly::new(self.p, self.coeffs.iter().map(|&c| mulmod(c, li, self.p)).collect())
            }
        }
    }

    pub fn scale(&self, c: u64) -> FpPoly {
        FpPoly::new(self.p, self.coeffs.iter().map(|&a| mulmod(a, c, self.p)).collect())
    }

    pub fn lead(&self) -> Option<u64> {
        self.coeffs.last().copied()
    }

    pub fn lead_inverse(&self) -> Option<u64> {
        self.lead().map(|l| self.inv(l))
    }

    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (mulmod(acc, x, self.p) + c) % self.p;
        }
        acc
    }

    /// Renders like `z^2+z+2`; zero renders as `0`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let term = match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "z".into(),
                (1, c) => format!("{c}z"),
                (i, 1) => format!("z^{i}"),
                (i, c) => format!("{c}z^{i}"),
            };
            parts.push(term);
        }
        parts.join("+")
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }
}

pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}
