//! Probability arithmetic that stays exact as long as the data allows it.
//!
//! A [`Num`] is either an exact rational or an `f64`. Mixing the two in an
//! operation yields a float, so a verdict computed from purely rational
//! inputs is exact end to end and every result carries the regime that
//! produced it.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How probabilities and parameters read from input are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    /// Exact when every number is an integer ratio or a decimal with at
    /// most [`AUTO_MAX_DECIMALS`] places; float otherwise.
    #[default]
    Auto,
    Rational,
    Float,
}

impl FromStr for Arithmetic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Arithmetic::Auto),
            "rational" => Ok(Arithmetic::Rational),
            "float" => Ok(Arithmetic::Float),
            other => Err(format!("unknown arithmetic mode `{other}`")),
        }
    }
}

/// The regime a computed value or verdict came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Rational,
    Float,
}

pub const AUTO_MAX_DECIMALS: u32 = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumError {
    #[error("cannot parse `{0}` as a number")]
    Syntax(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` is not finite")]
    NotFinite(String),
}

#[derive(Clone, Debug)]
pub enum Num {
    Exact(BigRational),
    Float(f64),
}

impl Default for Num {
    fn default() -> Self {
        Num::zero()
    }
}

impl Num {
    pub fn zero() -> Self {
        Num::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Num::Exact(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Num::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact `numer / denom`. Panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Num::Exact(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn float(x: f64) -> Self {
        Num::Float(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn regime(&self) -> Regime {
        if self.is_exact() {
            Regime::Rational
        } else {
            Regime::Float
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => ratio_to_f64(r),
            Num::Float(x) => *x,
        }
    }

    pub fn to_float(&self) -> Num {
        Num::Float(self.to_f64())
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Num::Exact(r) => Some(r),
            Num::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_zero(),
            Num::Float(x) => *x == 0.0,
        }
    }

    pub fn abs(&self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(r.abs()),
            Num::Float(x) => Num::Float(x.abs()),
        }
    }

    pub fn max(self, other: Num) -> Num {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Num) -> Num {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Sign of `self` where floats within `eps` of zero count as zero.
    /// Exact values ignore `eps`.
    pub fn sign(&self, eps: f64) -> Ordering {
        match self {
            Num::Exact(r) => r.cmp(&BigRational::zero()),
            Num::Float(x) => {
                if x.abs() <= eps {
                    Ordering::Equal
                } else if *x < 0.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn is_negative_tol(&self, eps: f64) -> bool {
        self.sign(eps) == Ordering::Less
    }

    pub fn is_positive_tol(&self, eps: f64) -> bool {
        self.sign(eps) == Ordering::Greater
    }

    /// `self^exp`. Integer exponents of exact values stay exact.
    pub fn powi(&self, exp: u32) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(num_traits::pow(r.clone(), exp as usize)),
            Num::Float(x) => Num::Float(x.powi(exp as i32)),
        }
    }

    /// `self^exp` for a real exponent; exact only for `exp == 1`.
    pub fn powf(&self, exp: f64) -> Num {
        if exp == 1.0 {
            return self.clone();
        }
        if self.is_zero() && exp > 0.0 {
            return if self.is_exact() { Num::zero() } else { Num::Float(0.0) };
        }
        Num::Float(self.to_f64().powf(exp))
    }

    /// Parses an integer, a ratio `a/b`, or a decimal (with optional
    /// exponent) into an exact rational.
    pub fn parse_exact(text: &str) -> Result<BigRational, NumError> {
        let s = text.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_decimal(n.trim()).ok_or_else(|| NumError::Syntax(text.into()))?;
            let d = parse_decimal(d.trim()).ok_or_else(|| NumError::Syntax(text.into()))?;
            if d.0.is_zero() {
                return Err(NumError::ZeroDenominator(text.into()));
            }
            return Ok(n.0 / d.0);
        }
        parse_decimal(s)
            .map(|(r, _)| r)
            .ok_or_else(|| NumError::Syntax(text.into()))
    }

    /// Number of decimal places needed to write `text` without exponent,
    /// or `None` for ratios and non-decimal syntax.
    pub fn decimal_places(text: &str) -> Option<u32> {
        let s = text.trim();
        if s.contains('/') {
            return None;
        }
        parse_decimal(s).map(|(_, places)| places)
    }

    /// Parses `text` under the given arithmetic mode. In `Auto` mode the
    /// caller decides exactness for a whole input; this helper treats
    /// `Auto` like `Rational` for ratios and short decimals.
    pub fn parse(text: &str, mode: Arithmetic) -> Result<Num, NumError> {
        match mode {
            Arithmetic::Float => {
                let exact = Num::parse_exact(text);
                match exact {
                    Ok(r) => Ok(Num::Float(ratio_to_f64(&r))),
                    Err(e) => {
                        let x: f64 = text.trim().parse().map_err(|_| e)?;
                        if x.is_finite() {
                            Ok(Num::Float(x))
                        } else {
                            Err(NumError::NotFinite(text.into()))
                        }
                    }
                }
            }
            Arithmetic::Rational => Num::parse_exact(text).map(Num::Exact),
            Arithmetic::Auto => {
                if auto_exact(text) {
                    Num::parse_exact(text).map(Num::Exact)
                } else {
                    Num::parse(text, Arithmetic::Float)
                }
            }
        }
    }
}

/// Whether `text` qualifies for exact representation under `Auto`.
pub fn auto_exact(text: &str) -> bool {
    if text.contains('/') {
        return Num::parse_exact(text).is_ok();
    }
    matches!(Num::decimal_places(text), Some(p) if p <= AUTO_MAX_DECIMALS)
}

fn parse_decimal(s: &str) -> Option<(BigRational, u32)> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if negative {
        numer = -numer;
    }
    let scale = frac_part.len() as i64 - exponent as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::new(numer, num_traits::pow(ten, scale as usize))
    } else {
        BigRational::from_integer(numer * num_traits::pow(ten, (-scale) as usize))
    };
    let places = if value.is_integer() {
        0
    } else {
        // Trailing zeros in the fraction do not count.
        let trimmed = frac_part.trim_end_matches('0').len() as i64 - exponent as i64;
        trimmed.max(0) as u32
    };
    Some((value, places))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl From<BigRational> for Num {
    fn from(r: BigRational) -> Self {
        Num::Exact(r)
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::Float(x)
    }
}

impl From<i64> for Num {
    fn from(n: i64) -> Self {
        Num::int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Num> for &'a Num {
            type Output = Num;
            fn $method(self, rhs: &'a Num) -> Num {
                match (self, rhs) {
                    (Num::Exact(a), Num::Exact(b)) => Num::Exact(a $op b),
                    (a, b) => Num::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl $trait<Num> for Num {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                match (self, rhs) {
                    (Num::Exact(a), Num::Exact(b)) => Num::Exact(a $op b),
                    (a, b) => Num::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl<'a> $trait<&'a Num> for Num {
            type Output = Num;
            fn $method(self, rhs: &'a Num) -> Num {
                &self $op rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(-r),
            Num::Float(x) => Num::Float(-x),
        }
    }
}

impl Neg for &Num {
    type Output = Num;
    fn neg(self) -> Num {
        -(self.clone())
    }
}

impl Sum for Num {
    fn sum<I: Iterator<Item = Num>>(iter: I) -> Num {
        iter.fold(Num::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Num> for Num {
    fn sum<I: Iterator<Item = &'a Num>>(iter: I) -> Num {
        iter.fold(Num::zero(), |acc, x| acc + x)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Num) -> bool {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a == b,
            (a, b) => a.to_f64() == b.to_f64(),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Num) -> Option<Ordering> {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => Some(a.cmp(b)),
            (a, b) => a.to_f64().partial_cmp(&b.to_f64()),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Num::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Serializes as a JSON number (the `f64` approximation for rationals).
impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

/// A number as written in JSON input: a JSON number or a string such as
/// `"1/3"`. The original text is kept so the arithmetic mode can be
/// applied later.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawNum(pub String);

impl RawNum {
    pub fn to_num(&self, mode: Arithmetic) -> Result<Num, NumError> {
        Num::parse(&self.0, mode)
    }

    pub fn is_auto_exact(&self) -> bool {
        auto_exact(&self.0)
    }
}

impl<'de> Deserialize<'de> for RawNum {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(serde_json::Number),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(n) => Ok(RawNum(n.to_string())),
            Repr::Text(s) => Ok(RawNum(s)),
        }
    }
}

impl Serialize for RawNum {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ratios_and_decimals_exactly() {
        assert_eq!(Num::parse("1/4", Arithmetic::Rational).unwrap(), Num::ratio(1, 4));
        assert_eq!(Num::parse("0.125", Arithmetic::Auto).unwrap(), Num::ratio(1, 8));
        assert_eq!(Num::parse("2.5e-1", Arithmetic::Rational).unwrap(), Num::ratio(1, 4));
        assert_eq!(Num::parse("3", Arithmetic::Auto).unwrap(), Num::int(3));
        assert!(Num::parse("0.1", Arithmetic::Auto).unwrap().is_exact());
    }

    #[test]
    fn auto_falls_back_to_float_for_long_decimals() {
        let n = Num::parse("0.1234567891", Arithmetic::Auto).unwrap();
        assert!(!n.is_exact());
        assert!(auto_exact("0.123456789"));
        assert!(auto_exact("1e-9"));
        assert!(!auto_exact("1e-10"));
        assert!(auto_exact("0.5000000000000"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Num::parse("abc", Arithmetic::Auto).is_err());
        assert!(matches!(
            Num::parse("1/0", Arithmetic::Rational),
            Err(NumError::ZeroDenominator(_))
        ));
        assert!(Num::parse(".", Arithmetic::Rational).is_err());
    }

    #[test]
    fn mixing_regimes_degrades_to_float() {
        let a = Num::ratio(1, 2);
        let b = Num::float(0.25);
        let c = &a + &b;
        assert!(!c.is_exact());
        assert_eq!(c.to_f64(), 0.75);
        assert!((&a + &a).is_exact());
    }

    #[test]
    fn sign_respects_tolerance_only_for_floats() {
        assert_eq!(Num::float(-1e-12).sign(1e-9), Ordering::Equal);
        assert_eq!(Num::ratio(-1, 1_000_000_000_000).sign(1e-9), Ordering::Less);
    }

    #[test]
    fn display_is_compact() {
        assert_eq!(Num::ratio(2, 4).to_string(), "1/2");
        assert_eq!(Num::int(-3).to_string(), "-3");
    }
}
