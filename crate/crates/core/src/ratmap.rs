//! Rational maps on P¹(Q_p).
//!
//! A [`RationalMap`] is kept as a pair of coprime integer polynomials with
//! overall content 1, which makes it normalized for every prime at once:
//! all coefficients are p-integral and at least one is a p-adic unit.
//! Evaluation is homogeneous, so poles and the point at infinity need no
//! special casing.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{ExactRational, PrimeContext};
use crate::parse;
use crate::poly::{primitive_pair, FpPoly, QPoly};
use crate::projective::{ball_of_unchecked, ProjectivePoint, Side};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMap {
    degree: usize,
    num: Vec<BigInt>,
    den: Vec<BigInt>,
}

impl RationalMap {
    /// Builds a map from numerator and denominator over Q, cancelling their
    /// gcd and scaling to a primitive integer pair.
    pub fn from_polys(num: &QPoly, den: &QPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (num, den) = if num.is_zero() {
            (num.clone(), QPoly::constant(BigRational::one()))
        } else {
            let g = num.gcd(den);
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let degree = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        let (mut a, mut b) = primitive_pair(&num, &den).ok_or(Error::NotNormalizable)?;
        if b.last().is_some_and(|c| c.is_negative()) {
            a.iter_mut().for_each(|c| *c = -&*c);
            b.iter_mut().for_each(|c| *c = -&*c);
        }
        a.resize(degree + 1, BigInt::zero());
        b.resize(degree + 1, BigInt::zero());
        Ok(RationalMap { degree, num: a, den: b })
    }

    pub fn from_coeffs(num: &[ExactRational], den: &[ExactRational]) -> Result<Self> {
        let to_poly = |v: &[ExactRational]| QPoly::new(v.iter().map(|c| c.as_big_rational().clone()).collect());
        RationalMap::from_polys(&to_poly(num), &to_poly(den))
    }

    pub fn from_int_coeffs(num: &[i64], den: &[i64]) -> Result<Self> {
        let to_poly = |v: &[i64]| QPoly::new(v.iter().map(|&c| BigRational::from_integer(c.into())).collect());
        RationalMap::from_polys(&to_poly(num), &to_poly(den))
    }

    /// Parses either the textual grammar or the coefficient JSON form.
    pub fn parse(text: &str) -> Result<Self> {
        let (num, den) = if text.trim_start().starts_with('{') {
            parse::parse_coefficient_json(text)?
        } else {
            parse::parse_expression(text)?
        };
        RationalMap::from_polys(&num, &den)
    }

    pub fn identity() -> Self {
        RationalMap::from_int_coeffs(&[0, 1], &[1]).expect("identity map")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Numerator coefficients `a_0..a_d`.
    pub fn num(&self) -> &[BigInt] {
        &self.num
    }

    /// Denominator coefficients `b_0..b_d`.
    pub fn den(&self) -> &[BigInt] {
        &self.den
    }

    pub fn num_poly(&self) -> QPoly {
        QPoly::from_ints(&self.num)
    }

    pub fn den_poly(&self) -> QPoly {
        QPoly::from_ints(&self.den)
    }

    /// Homogeneous forms `(F(x, y), G(x, y))` of degree `d`.
    pub fn eval_homogeneous(&self, x: &BigInt, y: &BigInt) -> (BigInt, BigInt) {
        let d = self.degree;
        // powers of x and y up to d
        let mut xp = Vec::with_capacity(d + 1);
        let mut yp = Vec::with_capacity(d + 1);
        xp.push(BigInt::one());
        yp.push(BigInt::one());
        for i in 1..=d {
            xp.push(&xp[i - 1] * x);
            yp.push(&yp[i - 1] * y);
        }
        let form = |c: &[BigInt]| -> BigInt {
            c.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| a * &xp[i] * &yp[d - i]).sum()
        };
        (form(&self.num), form(&self.den))
    }

    /// Exact image of a point.
    pub fn evaluate(&self, point: &ProjectivePoint) -> Result<ProjectivePoint> {
        let (f, g) = self.eval_homogeneous(point.x(), point.y());
        ProjectivePoint::try_from_integers(f, g).ok_or_else(|| Error::IndeterminatePoint(point.to_string()))
    }

    /// Evaluates at an affine rational point.
    pub fn evaluate_at(&self, z: &ExactRational) -> Result<ProjectivePoint> {
        self.evaluate(&ProjectivePoint::finite(z))
    }

    /// Applies the map `k` times exactly. Heights grow like `d^k`; use the
    /// level-wise iteration in `dynamics` for long orbits.
    pub fn iterate(&self, point: &ProjectivePoint, k: usize) -> Result<ProjectivePoint> {
        let mut cur = point.clone();
        for _ in 0..k {
            cur = self.evaluate(&cur)?;
        }
        Ok(cur)
    }

    /// Coefficient-wise reduction mod p followed by cancellation in F_p[z].
    pub fn reduce_mod_p(&self, ctx: &PrimeContext) -> ReducedMap {
        let p = ctx.p();
        let f = FpPoly::from_ints(p, &self.num);
        let g = FpPoly::from_ints(p, &self.den);
        // content 1 means f and g are not both zero mod p
        let (f, g) = if f.is_zero() {
            (f, FpPoly::new(p, vec![1]))
        } else if g.is_zero() {
            (FpPoly::new(p, vec![1]), g)
        } else {
            let h = f.gcd(&g);
            (f.div_rem(&h).0, g.div_rem(&h).0)
        };
        // scale so the denominator is monic (or the numerator, when the denominator vanishes)
        let s = g.lead_inverse().or_else(|| f.lead_inverse()).unwrap_or(1);
        let (num, den) = (f.scale(s), g.scale(s));
        let degree = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        ReducedMap { num, den, degree }
    }

    pub fn has_good_reduction(&self, ctx: &PrimeContext) -> bool {
        self.reduce_mod_p(ctx).degree() == self.degree
    }

    /// True when the coefficient-wise reductions of the homogeneous forms have
    /// no common zero on P¹(F_p). Every chart composite is then a quotient of
    /// p-integral polynomials with unit denominator on each level-1 ball, so
    /// the map is 1-Lipschitz on P¹(Q_p) with integral local expansions.
    /// Good reduction is the special case with no common zero over the
    /// algebraic closure.
    pub fn separates_residues(&self, ctx: &PrimeContext) -> bool {
        let p = ctx.p();
        let f = FpPoly::from_ints(p, &self.num);
        let g = FpPoly::from_ints(p, &self.den);
        let at_infinity = |c: &[BigInt]| crate::padic::reduce_int(&c[self.degree], p) == 0;
        if at_infinity(&self.num) && at_infinity(&self.den) {
            return false;
        }
        (0..p).all(|x| f.eval(x) != 0 || g.eval(x) != 0)
    }

    /// Numerator and denominator of `out ∘ φ ∘ in⁻¹` as polynomials in the
    /// local coordinate `t` of `in_chart`.
    fn chart_composite(&self, in_chart: Chart, out_chart: Chart) -> (QPoly, QPoly) {
        let d = self.degree;
        let local = |c: &[BigInt]| -> QPoly {
            match in_chart {
                // z = t  →  F(t, 1)
                Chart::Identity => QPoly::from_ints(c),
                // z = 1/t  →  F(1, t) = Σ a_i t^(d-i)
                Chart::Inversion => {
                    let rev: Vec<BigInt> = (0..=d).map(|i| c[d - i].clone()).collect();
                    QPoly::from_ints(&rev)
                }
            }
        };
        let (f, g) = (local(&self.num), local(&self.den));
        match out_chart {
            Chart::Identity => (f, g),
            Chart::Inversion => (g, f),
        }
    }

    /// First derivative of `out ∘ φ ∘ in⁻¹` at the local coordinate of `point`.
    pub fn chart_derivative(&self, point: &ProjectivePoint, in_chart: Chart, out_chart: Chart) -> Result<ExactRational> {
        let t = in_chart.local_coordinate(point)?;
        let (n, d) = self.chart_composite(in_chart, out_chart);
        let (n0, n1, _) = derivatives(&n, &t);
        let (d0, d1, _) = derivatives(&d, &t);
        if d0.is_zero() {
            return Err(Error::PoleAtPoint(point.to_string()));
        }
        Ok(((n1 * &d0 - n0 * d1) / (&d0 * &d0)).into())
    }

    /// Second derivative of `out ∘ φ ∘ in⁻¹` at the local coordinate of `point`.
    pub fn chart_second_derivative(
        &self,
        point: &ProjectivePoint,
        in_chart: Chart,
        out_chart: Chart,
    ) -> Result<ExactRational> {
        let t = in_chart.local_coordinate(point)?;
        let (n, d) = self.chart_composite(in_chart, out_chart);
        let (n0, n1, n2) = derivatives(&n, &t);
        let (d0, d1, d2) = derivatives(&d, &t);
        if d0.is_zero() {
            return Err(Error::PoleAtPoint(point.to_string()));
        }
        // (N/D)'' = (N''D − ND'')/D² − 2D'(N'D − ND')/D³
        let first_num = &n1 * &d0 - &n0 * &d1;
        let d_sq = &d0 * &d0;
        let value = (n2 * &d0 - n0 * d2) / &d_sq - BigRational::from_integer(2.into()) * d1 * first_num / (d_sq * d0);
        Ok(value.into())
    }

    /// Derivative in the charts picked by [`Chart::for_point`] at the point
    /// and at its image.
    pub fn local_derivative(&self, point: &ProjectivePoint, ctx: &PrimeContext) -> Result<ExactRational> {
        let image = self.evaluate(point)?;
        self.chart_derivative(point, Chart::for_point(point, ctx), Chart::for_point(&image, ctx))
    }

    /// Conjugates by a Möbius transformation: returns `g ∘ φ ∘ g⁻¹`.
    pub fn conjugate(&self, g: &Mobius) -> Result<RationalMap> {
        let ginv = g.inverse()?;
        // g⁻¹ acting on homogeneous (z, 1): X = a' z + b', Y = c' z + d'
        let x = QPoly::new(vec![ginv.b.clone(), ginv.a.clone()]);
        let y = QPoly::new(vec![ginv.d.clone(), ginv.c.clone()]);
        let d = self.degree as u32;
        let form = |c: &[BigInt]| -> QPoly {
            let mut acc = QPoly::zero();
            for (i, a) in c.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let term = x.pow(i as u32).mul(&y.pow(d - i as u32)).scale(&BigRational::from_integer(a.clone()));
                acc = acc.add(&term);
            }
            acc
        };
        let (f, gg) = (form(&self.num), form(&self.den));
        let num = f.scale(&g.a).add(&gg.scale(&g.b));
        let den = f.scale(&g.c).add(&gg.scale(&g.d));
        RationalMap::from_polys(&num, &den)
    }

    /// Returns a conjugate `ψ` with `ψ(0) = ∞` and `ψ(∞) = 1`, together
    /// with the conjugating transformation `g` (`ψ = g ∘ φ ∘ g⁻¹`).
    pub fn standardize(&self) -> Result<(RationalMap, Mobius)> {
        if self.degree < 2 {
            return Err(Error::DegreeTooSmall(self.degree));
        }
        if self.evaluate(&ProjectivePoint::from_int(0))?.is_infinity()
            && self.evaluate(&ProjectivePoint::infinity())? == ProjectivePoint::from_int(1)
        {
            return Ok((self.clone(), Mobius::identity()));
        }
        let base = self.find_base_point()?;
        let z1 = self.evaluate(&base)?;
        let z2 = self.evaluate(&z1)?;
        let g = Mobius::sending_to_zero_inf_one(&base, &z1, &z2)?;
        let psi = self.conjugate(&g)?;
        Ok((psi, g))
    }

    /// First `z₀` in the scan order `0, 1, 2, …, ∞` with `z₀, φ(z₀), φ²(z₀)`
    /// pairwise distinct.
    fn find_base_point(&self) -> Result<ProjectivePoint> {
        let d = self.degree as i64;
        // fixed points, period-2 points and preimages of fixed points bound the bad set
        let bound = 2 * d * d + 2 * d + 4;
        let candidates = (0..=bound).map(ProjectivePoint::from_int).chain(std::iter::once(ProjectivePoint::infinity()));
        for z0 in candidates {
            let z1 = self.evaluate(&z0)?;
            let z2 = self.evaluate(&z1)?;
            if z0 != z1 && z1 != z2 && z0 != z2 {
                return Ok(z0);
            }
        }
        Err(Error::NoValidBasePoint)
    }
}

/// `(f(t), f'(t), f''(t))` for a polynomial over Q.
fn derivatives(f: &QPoly, t: &BigRational) -> (BigRational, BigRational, BigRational) {
    let (mut v0, mut v1, mut v2) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    for c in f.coeffs().iter().rev() {
        // Horner for f, f', f''/2 simultaneously
        v2 = &v2 * t + &v1;
        v1 = &v1 * t + &v0;
        v0 = &v0 * t + c;
    }
    (v0, v1, v2 * BigRational::from_integer(2.into()))
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", render_int_poly(&self.num), render_int_poly(&self.den))
    }
}

fn render_int_poly(c: &[BigInt]) -> String {
    let mut out = String::new();
    for (i, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        let mag = a.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push(if neg { '-' } else { '+' });
        }
        let coef = if mag.is_one() && i > 0 { String::new() } else { mag.to_string() };
        match i {
            0 => out.push_str(&mag.to_string()),
            1 => out.push_str(&format!("{coef}z")),
            _ => out.push_str(&format!("{coef}z^{i}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Reduction of a map modulo p, with common factors cancelled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMap {
    num: FpPoly,
    den: FpPoly,
    degree: usize,
}

impl ReducedMap {
    pub fn num(&self) -> &FpPoly {
        &self.num
    }

    pub fn den(&self) -> &FpPoly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Image of a point of P¹(F_p), with `None` standing for `∞`.
    pub fn apply(&self, x: Option<u64>) -> Option<u64> {
        let p = self.num.p();
        let (f, g) = match x {
            Some(x) => (self.num.eval(x), self.den.eval(x)),
            None => {
                // leading coefficients of the degree-`degree` homogeneous forms
                let top = |q: &FpPoly| q.coeffs().get(self.degree).copied().unwrap_or(0);
                (top(&self.num), top(&self.den))
            }
        };
        if g == 0 {
            None
        } else {
            Some(crate::poly::mulmod(f, FpPoly::new(p, vec![g]).lead_inverse().unwrap(), p))
        }
    }
}

impl fmt::Display for ReducedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |q: &FpPoly| {
            if q.term_count() > 1 {
                format!("({})", q.render())
            } else {
                q.render()
            }
        };
        write!(f, "{} / {}", wrap(&self.num), wrap(&self.den))
    }
}

/// Local coordinate around a point: `t = z` or `t = 1/z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    Identity,
    Inversion,
}

impl Chart {
    /// Identity on the finite side (|z|_p ≤ 1), inversion on B₁(∞).
    pub fn for_point(point: &ProjectivePoint, ctx: &PrimeContext) -> Chart {
        match ball_of_unchecked(point, 1, ctx).side() {
            Side::Finite => Chart::Identity,
            Side::Infinity => Chart::Inversion,
        }
    }

    pub fn for_side(side: Side) -> Chart {
        match side {
            Side::Finite => Chart::Identity,
            Side::Infinity => Chart::Inversion,
        }
    }

    pub fn local_coordinate(&self, point: &ProjectivePoint) -> Result<BigRational> {
        let (num, den) = match self {
            Chart::Identity => (point.x(), point.y()),
            Chart::Inversion => (point.y(), point.x()),
        };
        if den.is_zero() {
            return Err(Error::ChartDomain(point.to_string()));
        }
        Ok(BigRational::new(num.clone(), den.clone()))
    }
}

impl fmt::Display for Mobius {
    /// `z -> (a z + b) / (c z + d)`, dropping zero terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn linear(k: &BigRational, c: &BigRational) -> String {
            let lin = match k {
                k if k.is_zero() => String::new(),
                k if k.is_one() => "z".into(),
                k if (-k).is_one() => "-z".into(),
                k => format!("{k}z"),
            };
            match (lin.is_empty(), c) {
                (true, c) => c.to_string(),
                (false, c) if c.is_zero() => lin,
                (false, c) if c.is_negative() => format!("{lin} - {}", -c),
                (false, c) => format!("{lin} + {c}"),
            }
        }
        write!(f, "z -> ({}) / ({})", linear(&self.a, &self.b), linear(&self.c, &self.d))
    }
}

/// `z ↦ (a z + b) / (c z + d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mobius {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius { a: BigRational::one(), b: BigRational::zero(), c: BigRational::zero(), d: BigRational::one() }
    }

    pub fn determinant(&self) -> BigRational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Result<Mobius> {
        if self.determinant().is_zero() {
            return Err(Error::Invariant("singular Möbius transformation".into()));
        }
        Ok(Mobius { a: self.d.clone(), b: -self.b.clone(), c: -self.c.clone(), d: self.a.clone() })
    }

    pub fn apply(&self, point: &ProjectivePoint) -> ProjectivePoint {
        let x = BigRational::from_integer(point.x().clone());
        let y = BigRational::from_integer(point.y().clone());
        let nx = &self.a * &x + &self.b * &y;
        let ny = &self.c * &x + &self.d * &y;
        ProjectivePoint::from_pair(&nx.into(), &ny.into()).expect("nonsingular transformation")
    }

    /// The transformation sending `z0 ↦ 0`, `z1 ↦ ∞`, `z2 ↦ 1`.
    pub fn sending_to_zero_inf_one(z0: &ProjectivePoint, z1: &ProjectivePoint, z2: &ProjectivePoint) -> Result<Mobius> {
        // homogeneous cross-ratio: g(P) = [ (P×z0)(z2×z1) : (P×z1)(z2×z0) ], with P×Q = x_P y_Q − x_Q y_P
        let cross = |p: &ProjectivePoint, q: &ProjectivePoint| -> BigRational {
            BigRational::from_integer(p.x() * q.y() - q.x() * p.y())
        };
        let k0 = cross(z2, z1);
        let k1 = cross(z2, z0);
        if k0.is_zero() || k1.is_zero() || cross(z0, z1).is_zero() {
            return Err(Error::NoValidBasePoint);
        }
        let r = |q: &ProjectivePoint| (BigRational::from_integer(q.x().clone()), BigRational::from_integer(q.y().clone()));
        let (x0, y0) = r(z0);
        let (x1, y1) = r(z1);
        // P×z0 = x y0 − x0 y ; P×z1 = x y1 − x1 y
        Ok(Mobius { a: &y0 * &k0, b: -(&x0 * &k0), c: &y1 * &k1, d: -(&x1 * &k1) })
    }
}
