//! Numeric values used for distances, ratios and constants.
//!
//! Every quantity in the crate is generic over [`Scalar`]. Two backends exist:
//! [`Rational`] (exact, arbitrary precision) and [`Float`] (`f64` compared
//! with a tolerance carried by the owning space).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseValueError {
    #[error("empty numeric literal")]
    Empty,
    #[error("malformed numeric literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("non-finite value `{0}`")]
    NonFinite(String),
}

pub trait Scalar: Clone + fmt::Debug + fmt::Display + Ord + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// `None` when `rhs` is zero.
    fn checked_div(&self, rhs: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    /// Zero test under a tolerance; exact backends ignore `tolerance`.
    fn is_negligible(&self, tolerance: f64) -> bool;
    fn from_rational(value: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// `None` for non-finite input.
    fn from_f64(value: f64) -> Option<Self>;
    fn parse_literal(text: &str) -> Result<Self, ParseValueError>;

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    fn from_u64(value: u64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(value)))
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if Zero::is_zero(rhs) {
            None
        } else {
            Some(self / rhs)
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_negligible(&self, _tolerance: f64) -> bool {
        Zero::is_zero(self)
    }
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(value: f64) -> Option<Self> {
        Rational::from_float(value)
    }
    fn parse_literal(text: &str) -> Result<Self, ParseValueError> {
        parse_rational(text)
    }
}

/// Parses `p/q`, integers, and decimal literals with an optional exponent
/// (`-1.25e-3`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseValueError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ParseValueError::Empty);
    }
    let malformed = || ParseValueError::Malformed(text.to_owned());
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| malformed())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(ParseValueError::ZeroDenominator(text.to_owned()));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(at) => {
            let exp: i32 = text[at + 1..].parse().map_err(|_| malformed())?;
            (&text[..at], exp)
        }
        None => (text, 0),
    };
    // Bounds the size of the power of ten built below.
    if exponent.unsigned_abs() > 4096 {
        return Err(malformed());
    }
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| malformed())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    Ok(value)
}

/// Finite `f64` with a total order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(f64);

impl Float {
    pub fn new(value: f64) -> Option<Self> {
        value.is_finite().then_some(Float(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Eq for Float {}

impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Float {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Scalar for Float {
    fn zero() -> Self {
        Float(0.0)
    }
    fn one() -> Self {
        Float(1.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        Float(self.0 + rhs.0)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Float(self.0 - rhs.0)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Float(self.0 * rhs.0)
    }
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.0 == 0.0 {
            None
        } else {
            Float::new(self.0 / rhs.0)
        }
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn is_negligible(&self, tolerance: f64) -> bool {
        self.0.abs() < tolerance
    }
    fn from_rational(value: &Rational) -> Self {
        Float(ToPrimitive::to_f64(value).unwrap_or(f64::NAN))
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn from_f64(value: f64) -> Option<Self> {
        Float::new(value)
    }
    fn parse_literal(text: &str) -> Result<Self, ParseValueError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(ParseValueError::Empty);
        }
        let value = if trimmed.contains('/') {
            ToPrimitive::to_f64(&parse_rational(trimmed)?).unwrap_or(f64::NAN)
        } else {
            trimmed.parse::<f64>().map_err(|_| ParseValueError::Malformed(trimmed.to_owned()))?
        };
        Float::new(value).ok_or_else(|| ParseValueError::NonFinite(trimmed.to_owned()))
    }
}

/// A value or the `+inf` sentinel, ordered with infinity above every finite value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extended<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Extended<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// True iff the value is finite and strictly below one.
    pub fn is_below_one(&self) -> bool {
        matches!(self, Extended::Finite(v) if *v < S::one())
    }

    /// Ratio `numer / denom` with `0/0 = 0` and `x/0 = +inf` for `x > 0`.
    pub fn ratio(numer: &S, denom: &S) -> Self {
        match numer.checked_div(denom) {
            Some(v) => Extended::Finite(v),
            None if numer.is_zero() => Extended::Finite(S::zero()),
            None => Extended::Infinite,
        }
    }
}

impl<S: Scalar> PartialOrd for Extended<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for Extended<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Ordering::Less,
            (Extended::Infinite, Extended::Finite(_)) => Ordering::Greater,
            (Extended::Infinite, Extended::Infinite) => Ordering::Equal,
        }
    }
}

impl<S: Scalar> fmt::Display for Extended<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => fmt::Display::fmt(v, f),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}
