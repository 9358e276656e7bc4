//! Exact rationals, points and non-vertical lines.
//!
//! A [`Line`] `y = cx + d` doubles as the affine map `x -> cx + d`; lines with
//! nonzero slope form a group under composition with identity `(1, 0)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, input, Error, Result};

/// Arbitrary-precision fraction, always stored in lowest terms with a positive
/// denominator. Equality and hashing are those of the reduced pair.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return input("zero denominator");
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return domain("reciprocal of zero");
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return domain("division by zero");
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `(numerator, denominator)` when both fit in an `i64`.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.numer().to_i64()?, self.denom().to_i64()?))
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Panics on a zero divisor, like the primitive types; use `checked_div` on untrusted input.
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            let t = t.trim();
            let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return input(format!("not a rational: {s:?}"));
            }
            t.strip_prefix('+')
                .unwrap_or(t)
                .parse::<BigInt>()
                .map_err(|_| Error::Input(format!("not a rational: {s:?}")))
        };
        match s.split_once('/') {
            None => Ok(Rational::from_integer(parse_int(s)?)),
            Some((p, q)) => {
                let q = q.trim();
                if q.starts_with(['+', '-']) {
                    return input(format!("denominator must be unsigned: {s:?}"));
                }
                Rational::new(parse_int(p)?, parse_int(q)?)
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for `Rational::new(num, den).unwrap()` with small literals.
///
/// Panics when `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num, den).expect("nonzero denominator")
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Point::new(x.into(), y.into())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The non-vertical line `y = c*x + d`. Ordered lexicographically by `(c, d)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub c: Rational,
    pub d: Rational,
}

/// How two lines meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intersection {
    Point(Point),
    Parallel,
    Identical,
}

impl Line {
    pub fn new(c: Rational, d: Rational) -> Self {
        Line { c, d }
    }

    pub fn int(c: i64, d: i64) -> Self {
        Line::new(c.into(), d.into())
    }

    pub fn identity() -> Self {
        Line::int(1, 0)
    }

    pub fn slope(&self) -> &Rational {
        &self.c
    }

    pub fn intercept(&self) -> &Rational {
        &self.d
    }

    fn require_group_element(&self) -> Result<()> {
        if self.c.is_zero() {
            return domain(format!("horizontal line {self:?} is not an affine group element"));
        }
        Ok(())
    }

    /// `self ∘ other`, i.e. `x -> c(c'x + d') + d`.
    pub fn compose(&self, other: &Line) -> Result<Line> {
        self.require_group_element()?;
        other.require_group_element()?;
        Ok(Line::new(&self.c * &other.c, &(&self.c * &other.d) + &self.d))
    }

    pub fn inverse(&self) -> Result<Line> {
        self.require_group_element()?;
        let c_inv = self.c.recip()?;
        let d = -(&self.d * &c_inv);
        Ok(Line::new(c_inv, d))
    }

    /// `self⁻¹ ∘ other = (c'/c, (d' - d)/c)`.
    pub fn quotient(&self, other: &Line) -> Result<Line> {
        self.require_group_element()?;
        other.require_group_element()?;
        let c = other.c.checked_div(&self.c)?;
        let d = (&other.d - &self.d).checked_div(&self.c)?;
        Ok(Line::new(c, d))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &(&self.c * x) + &self.d
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.eval(&p.x) == p.y
    }

    pub fn intersection(&self, other: &Line) -> Intersection {
        if self.c == other.c {
            return if self.d == other.d {
                Intersection::Identical
            } else {
                Intersection::Parallel
            };
        }
        let x = (&other.d - &self.d) / (&self.c - &other.c);
        let y = self.eval(&x);
        Intersection::Point(Point::new(x, y))
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.c, self.d)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y = {}x + {}", self.c, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};

    fn l(c: (i64, i64), d: (i64, i64)) -> Line {
        Line::new(rat(c.0, c.1), rat(d.0, d.1))
    }

    fn hash_of<T: Hash>(t: &T) -> u64 {
        let mut h = DefaultHasher::new();
        t.hash(&mut h);
        h.finish()
    }

    #[test]
    fn make_rational_canonicalizes() {
        let r = Rational::new(6, 4).unwrap();
        assert_eq!((r.numer().clone(), r.denom().clone()), (3.into(), 2.into()));
        assert_eq!(Rational::new(3, -6).unwrap(), rat(-1, 2));
        assert_eq!(Rational::new(3, -6).unwrap().to_string(), "-1/2");
        let z = Rational::new(0, 7).unwrap();
        assert_eq!(z.to_i64_pair(), Some((0, 1)));
        assert!(matches!(Rational::new(1, 0), Err(Error::Input(_))));
    }

    #[test]
    fn text_form() {
        assert_eq!(rat(3, 1).to_string(), "3");
        assert_eq!("-1/2".parse::<Rational>().unwrap(), rat(-1, 2));
        assert_eq!("+4/6".parse::<Rational>().unwrap(), rat(2, 3));
        assert_eq!(" 12 ".parse::<Rational>().unwrap(), rat(12, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
        assert!("1.5".parse::<Rational>().is_err());
        assert!("--1".parse::<Rational>().is_err());
    }

    #[test]
    fn composition_example_is_noncommutative() {
        let g = Line::int(2, 3);
        let h = Line::int(2, 4);
        assert_eq!(g.compose(&h).unwrap(), Line::int(4, 11));
        assert_eq!(h.compose(&g).unwrap(), Line::int(4, 10));
        let any = l((-7, 3), (5, 2));
        assert_eq!(Line::identity().compose(&any).unwrap(), any);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Line::identity().inverse().unwrap(), Line::identity());
        assert_eq!(Line::int(2, 3).inverse().unwrap(), l((1, 2), (-3, 2)));
        let inv = Line::int(-1, 5);
        assert_eq!(inv.inverse().unwrap(), inv);
        assert_eq!(inv.compose(&inv).unwrap(), Line::identity());
    }

    #[test]
    fn quotient_examples() {
        assert_eq!(Line::int(2, 3).quotient(&Line::int(4, 11)).unwrap(), Line::int(2, 4));
        assert_eq!(Line::int(5, 7).quotient(&Line::int(5, 7)).unwrap(), Line::identity());
        assert_eq!(Line::identity().quotient(&Line::int(3, 2)).unwrap(), Line::int(3, 2));
    }

    #[test]
    fn horizontal_lines_rejected_by_group_ops() {
        let flat = Line::int(0, 1);
        let g = Line::int(2, 3);
        assert!(matches!(flat.compose(&g), Err(Error::Domain(_))));
        assert!(matches!(g.compose(&flat), Err(Error::Domain(_))));
        assert!(matches!(flat.inverse(), Err(Error::Domain(_))));
        assert!(matches!(g.quotient(&flat), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Line::int(2, 3).eval(&4.into()), 11.into());
        assert_eq!(l((1, 2), (0, 1)).eval(&3.into()), rat(3, 2));
        assert_eq!(Line::int(-1, 1).eval(&1.into()), Rational::zero());
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(
            Line::int(1, 0).intersection(&Line::int(-1, 2)),
            Intersection::Point(Point::int(1, 1))
        );
        assert_eq!(Line::int(1, 0).intersection(&Line::int(1, 1)), Intersection::Parallel);
        assert_eq!(Line::int(2, 1).intersection(&Line::int(2, 1)), Intersection::Identical);
    }

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=9).prop_map(|(p, q)| rat(p, q))
    }

    fn group_line() -> impl Strategy<Value = Line> {
        (small_rat(), small_rat())
            .prop_filter("nonzero slope", |(c, _)| !c.is_zero())
            .prop_map(|(c, d)| Line::new(c, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn group_axioms(g in group_line(), h in group_line(), k in group_line()) {
            let gh_k = g.compose(&h).unwrap().compose(&k).unwrap();
            let g_hk = g.compose(&h.compose(&k).unwrap()).unwrap();
            prop_assert_eq!(gh_k, g_hk);
            let e = Line::identity();
            prop_assert_eq!(&e.compose(&g).unwrap(), &g);
            prop_assert_eq!(&g.compose(&e).unwrap(), &g);
            let inv = g.inverse().unwrap();
            prop_assert_eq!(g.compose(&inv).unwrap(), e.clone());
            prop_assert_eq!(inv.compose(&g).unwrap(), e);
            prop_assert_eq!(g.quotient(&h).unwrap(), inv.compose(&h).unwrap());
        }

        #[test]
        fn canonical_form_idempotent(p in -1000i64..1000, q in 1i64..1000, k in 1i64..50) {
            let r = rat(p, q);
            let again = Rational::new(r.numer().clone(), r.denom().clone()).unwrap();
            prop_assert_eq!(&again, &r);
            let scaled = rat(p * k, q * k);
            prop_assert_eq!(&scaled, &r);
            prop_assert_eq!(hash_of(&scaled), hash_of(&r));
            prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
        }
    }
}
