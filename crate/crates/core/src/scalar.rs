//! Numeric backends.
//!
//! Every model type is generic over [`Scalar`]. Two backends exist: `f64`
//! (fast, compared with small tolerances) and [`Exact`] (arbitrary precision
//! rationals, compared exactly).

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Exact = BigRational;

/// Numeric mode selector used by the file formats and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    #[default]
    Exact,
    Float,
}

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn ratio(num: i64, den: i64) -> Self;

    /// Converts from a float. The exact backend reads the shortest decimal
    /// representation, so `0.1` becomes exactly `1/10`.
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;

    /// Parses `"3/4"`, `"-2"`, `"0.125"` or `"1e-9"`.
    fn parse(text: &str) -> Option<Self>;

    /// Canonical text form that [`Scalar::parse`] reads back identically.
    fn render(&self) -> String;

    /// Absolute slack for non-strict mass and profit comparisons.
    fn slack() -> Self;

    /// Minimum excess for a wage to count as strictly higher.
    fn strict_margin() -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_finite(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            return Some(n / d).filter(|x| x.is_finite());
        }
        text.parse::<f64>().ok().filter(|x| x.is_finite())
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
    fn slack() -> Self {
        1e-12
    }
    fn strict_margin() -> Self {
        1e-9
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }
    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        // `Display` for f64 prints the shortest round-tripping decimal with
        // no exponent.
        parse_exact(&format!("{x}"))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse(text: &str) -> Option<Self> {
        parse_exact(text)
    }
    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
    fn slack() -> Self {
        Zero::zero()
    }
    fn strict_margin() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

fn parse_exact(text: &str) -> Option<Exact> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_exact(n)?;
        let d = parse_exact(d)?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().ok()?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

pub fn max<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub fn min<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub fn abs<S: Scalar>(a: S) -> S {
    if a < S::zero() {
        -a
    } else {
        a
    }
}

pub fn half<S: Scalar>(a: S) -> S {
    a / S::ratio(2, 1)
}

/// `a <= b` up to the backend slack.
pub fn approx_le<S: Scalar>(a: &S, b: &S) -> bool {
    a.clone() <= b.clone() + S::slack()
}

/// `a > b` with the backend strictness margin (`a >= b + 1e-9` for floats).
pub fn strictly_above<S: Scalar>(a: &S, b: &S) -> bool {
    if S::EXACT {
        a > b
    } else {
        a.clone() >= b.clone() + S::strict_margin()
    }
}

/// `a > b` beyond the backend slack.
pub fn exceeds<S: Scalar>(a: &S, b: &S) -> bool {
    a.clone() > b.clone() + S::slack()
}

/// Converts between backends by way of the canonical text form for exact
/// targets and `f64` for float targets.
pub fn convert<S: Scalar, T: Scalar>(x: &S) -> T {
    if T::EXACT && S::EXACT {
        T::parse(&x.render()).expect("canonical form parses")
    } else {
        T::from_f64(x.to_f64()).expect("finite scalar")
    }
}
