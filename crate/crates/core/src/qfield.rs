//! Exact arithmetic in the real quadratic field `Q(sqrt(n))`.
//!
//! A [`QuadNum`] is `a + b*sqrt(n)` with arbitrary-precision rational
//! coordinates. All values living inside one algebra share a single radicand;
//! the only canonicalization is folding `sqrt(n)` into `a` when `n` is a
//! perfect square.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::QfieldError;

pub type Rational = BigRational;

/// Sign of a real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of_rational(x: &Rational) -> Sign {
        if x.is_zero() {
            Sign::Zero
        } else if x.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// Integer square root if `n` is a perfect square.
pub fn exact_sqrt_u64(n: u64) -> Option<u64> {
    let r = n.sqrt();
    (r * r == n).then_some(r)
}

/// Square root of a nonnegative rational if it is rational.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer();
    let den = x.denom();
    let rn = num.sqrt();
    let rd = den.sqrt();
    (&rn * &rn == *num && &rd * &rd == *den).then(|| Rational::new(rn, rd))
}

/// Parses `"p/q"` or `"p"` into a rational in lowest terms.
pub fn parse_rational(s: &str) -> Result<Rational, QfieldError> {
    let s = s.trim();
    let bad = || QfieldError::Parse(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(QfieldError::DivisionByZero);
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // ratio too large for a direct conversion; scale through strings
        let n: f64 = x.numer().to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = x.denom().to_string().parse().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Element `a + b*sqrt(n)` of `Q(sqrt(n))`.
#[derive(Clone, Debug)]
pub struct QuadNum {
    a: Rational,
    b: Rational,
    n: u64,
}

impl QuadNum {
    pub fn new(a: Rational, b: Rational, n: u64) -> QuadNum {
        let mut x = QuadNum { a, b, n };
        x.canonicalize();
        x
    }

    pub fn rational(a: Rational, n: u64) -> QuadNum {
        QuadNum {
            a,
            b: Rational::zero(),
            n,
        }
    }

    pub fn from_int(v: i64, n: u64) -> QuadNum {
        QuadNum::rational(int(v), n)
    }

    pub fn zero(n: u64) -> QuadNum {
        QuadNum::from_int(0, n)
    }

    pub fn one(n: u64) -> QuadNum {
        QuadNum::from_int(1, n)
    }

    /// `sqrt(n)` itself.
    pub fn sqrt_radicand(n: u64) -> QuadNum {
        QuadNum::new(Rational::zero(), Rational::one(), n)
    }

    /// Square root of a positive rational `x`, expressed over the radicand
    /// `num(x) * den(x)`: `sqrt(p/q) = sqrt(p*q) / q`.
    pub fn sqrt_of_rational(x: &Rational) -> Result<QuadNum, QfieldError> {
        if x.is_negative() {
            return Err(QfieldError::NegativeRadicand(x.to_string()));
        }
        let n = radicand_of(x)?;
        Ok(QuadNum::new(
            Rational::zero(),
            Rational::new(BigInt::one(), x.denom().clone()),
            n,
        ))
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.n
    }

    /// Re-tags a rational value with another radicand. Irrational values keep
    /// their radicand, so a different `n` is an error for them.
    pub fn with_radicand(&self, n: u64) -> Result<QuadNum, QfieldError> {
        if self.b.is_zero() {
            Ok(QuadNum::rational(self.a.clone(), n))
        } else if self.n == n {
            Ok(self.clone())
        } else {
            Err(QfieldError::RadicandMismatch(self.n, n))
        }
    }

    pub fn canonicalize(&mut self) {
        if self.b.is_zero() {
            return;
        }
        if let Some(r) = exact_sqrt_u64(self.n) {
            let fold = &self.b * Rational::from_integer(BigInt::from(r));
            self.a = &self.a + fold;
            self.b = Rational::zero();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.b.is_zero().then_some(&self.a)
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    pub fn is_nonneg_integer(&self) -> bool {
        self.is_integer() && !self.a.is_negative()
    }

    fn common_radicand(&self, other: &QuadNum) -> Result<u64, QfieldError> {
        if self.n == other.n || other.b.is_zero() {
            Ok(self.n)
        } else if self.b.is_zero() {
            Ok(other.n)
        } else {
            Err(QfieldError::RadicandMismatch(self.n, other.n))
        }
    }

    pub fn checked_add(&self, other: &QuadNum) -> Result<QuadNum, QfieldError> {
        let n = self.common_radicand(other)?;
        Ok(QuadNum::new(&self.a + &other.a, &self.b + &other.b, n))
    }

    pub fn checked_sub(&self, other: &QuadNum) -> Result<QuadNum, QfieldError> {
        let n = self.common_radicand(other)?;
        Ok(QuadNum::new(&self.a - &other.a, &self.b - &other.b, n))
    }

    pub fn checked_mul(&self, other: &QuadNum) -> Result<QuadNum, QfieldError> {
        let n = self.common_radicand(other)?;
        let nn = Rational::from_integer(BigInt::from(n));
        let a = &self.a * &other.a + &self.b * &other.b * nn;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(QuadNum::new(a, b, n))
    }

    /// Algebraic conjugate `a - b*sqrt(n)`.
    pub fn conjugate(&self) -> QuadNum {
        QuadNum {
            a: self.a.clone(),
            b: -&self.b,
            n: self.n,
        }
    }

    /// Field norm `a^2 - n b^2`.
    pub fn norm(&self) -> Rational {
        let nn = Rational::from_integer(BigInt::from(self.n));
        &self.a * &self.a - &self.b * &self.b * nn
    }

    pub fn inv(&self) -> Result<QuadNum, QfieldError> {
        if self.is_zero() {
            return Err(QfieldError::DivisionByZero);
        }
        let norm = self.norm();
        Ok(QuadNum::new(&self.a / &norm, -&self.b / &norm, self.n))
    }

    pub fn checked_div(&self, other: &QuadNum) -> Result<QuadNum, QfieldError> {
        self.checked_mul(&other.inv()?)
    }

    pub fn scale(&self, k: &Rational) -> QuadNum {
        QuadNum::new(&self.a * k, &self.b * k, self.n)
    }

    /// Exact sign of the real number `a + b*sqrt(n)`.
    pub fn sign(&self) -> Sign {
        let sa = Sign::of_rational(&self.a);
        let sb = if self.n == 0 {
            Sign::Zero
        } else {
            Sign::of_rational(&self.b)
        };
        match (sa, sb) {
            (s, Sign::Zero) => s,
            (Sign::Zero, s) => s,
            (x, y) if x == y => x,
            (x, y) => {
                let nn = Rational::from_integer(BigInt::from(self.n));
                let a2 = &self.a * &self.a;
                let nb2 = &self.b * &self.b * nn;
                match a2.cmp(&nb2) {
                    Ordering::Greater => x,
                    Ordering::Less => y,
                    Ordering::Equal => Sign::Zero,
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Sign::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative
    }

    /// Exact comparison of the real values; radicands must be compatible.
    pub fn cmp_value(&self, other: &QuadNum) -> Result<Ordering, QfieldError> {
        Ok(match self.checked_sub(other)?.sign() {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        })
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (self.n as f64).sqrt()
    }
}

/// Integer radicand representing `sqrt(x)` for a nonnegative rational `x`:
/// `num(x) * den(x)`.
pub fn radicand_of(x: &Rational) -> Result<u64, QfieldError> {
    let prod = x.numer() * x.denom();
    prod.to_u64()
        .ok_or_else(|| QfieldError::RadicandOverflow(x.to_string()))
}

impl PartialEq for QuadNum {
    fn eq(&self, other: &QuadNum) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.n == other.n)
    }
}

impl Eq for QuadNum {}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if !self.a.is_zero() {
            write!(f, "{}", self.a)?;
            if self.b.is_positive() {
                write!(f, "+")?;
            }
        }
        write!(f, "{}*sqrt({})", self.b, self.n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a> $trait<&'a QuadNum> for &'a QuadNum {
            type Output = QuadNum;
            /// Panics on incompatible radicands; use the `checked_*` form
            /// when operands may come from different fields.
            fn $method(self, rhs: &'a QuadNum) -> QuadNum {
                self.$checked(rhs).expect("quadratic field operation")
            }
        }
        impl $trait<QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $method(self, rhs: QuadNum) -> QuadNum {
                (&self).$checked(&rhs).expect("quadratic field operation")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum {
            a: -self.a,
            b: -self.b,
            n: self.n,
        }
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        -(self.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct QuadNumRepr {
    a: String,
    b: String,
    n: u64,
}

impl Serialize for QuadNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QuadNumRepr {
            a: format_rational(&self.a),
            b: format_rational(&self.b),
            n: self.n,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<QuadNum, D::Error> {
        let r = QuadNumRepr::deserialize(d)?;
        let a = parse_rational(&r.a).map_err(D::Error::custom)?;
        let b = parse_rational(&r.b).map_err(D::Error::custom)?;
        Ok(QuadNum::new(a, b, r.n))
    }
}

/// Serde adapter for a rational written as a `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}
