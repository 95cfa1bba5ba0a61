//! Arithmetic regimes.
//!
//! Every quantitative routine in this crate is generic over [`Scalar`]. Two
//! implementations are provided: [`Rational`] (arbitrary precision, all
//! comparisons exact) and `f64` (comparisons against an absolute [`Tol`]).

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used by the exact regime.
pub type Rational = BigRational;

/// Absolute tolerance of the floating regime. Ignored by exact scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol(pub f64);

impl Tol {
    pub const DEFAULT: Tol = Tol(1e-9);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tol {
    fn default() -> Self {
        Tol::DEFAULT
    }
}

/// Which regime a scalar type belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Converts a finite float. Exact scalars convert without rounding.
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Parses a decimal (`0.25`, `-3`, `1e-2`) or a `p/q` rational.
    fn parse(text: &str) -> Result<Self, String>;

    /// Report representation: `p/q` for rationals, 17 significant digits
    /// for floats.
    fn to_report_string(&self) -> String;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a.total_cmp(b) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if b.total_cmp(a) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }

    /// `self > tol` (exact: `self > 0`).
    fn is_pos(&self, tol: Tol) -> bool {
        if Self::is_exact() {
            *self > Self::zero()
        } else {
            self.to_f64() > tol.0
        }
    }

    /// `|self| <= tol` (exact: `self == 0`).
    fn is_zero_tol(&self, tol: Tol) -> bool {
        if Self::is_exact() {
            self.is_zero_exact()
        } else {
            self.to_f64().abs() <= tol.0
        }
    }

    fn is_zero_exact(&self) -> bool {
        *self == Self::zero()
    }

    /// `self <= other + tol` (exact: `self <= other`).
    fn le_tol(&self, other: &Self, tol: Tol) -> bool {
        if Self::is_exact() {
            self <= other
        } else {
            self.to_f64() <= other.to_f64() + tol.0
        }
    }

    /// `|self - other| <= tol` (exact: equality).
    fn eq_tol(&self, other: &Self, tol: Tol) -> bool {
        if Self::is_exact() {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol.0
        }
    }

    /// `self < other - tol` (exact: `self < other`).
    fn lt_tol(&self, other: &Self, tol: Tol) -> bool {
        !other.le_tol(self, tol)
    }
}

pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(iter: I) -> S {
    iter.into_iter().fold(S::zero(), |acc, v| acc + v)
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn parse(text: &str) -> Result<Self, String> {
        parse_rational(text)
    }

    fn to_report_string(&self) -> String {
        self.to_string()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_zero_exact(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n = f64::from_str(n.trim()).map_err(|e| format!("bad numerator {n:?}: {e}"))?;
            let d = f64::from_str(d.trim()).map_err(|e| format!("bad denominator {d:?}: {e}"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in {text:?}"));
            }
            let v = n / d;
            return v.is_finite().then_some(v).ok_or_else(|| format!("non-finite value {text:?}"));
        }
        let v = f64::from_str(text).map_err(|e| format!("bad number {text:?}: {e}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value {text:?}"))
        }
    }

    fn to_report_string(&self) -> String {
        format!("{:.16e}", self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Parses `p/q`, integers and decimal/scientific literals into an exact
/// rational. Anything else (`nan`, `inf`, ...) is rejected.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_decimal(n.trim())?;
        let d = parse_decimal(d.trim())?;
        if Zero::is_zero(&d) {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(n / d);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Result<Rational, String> {
    let bad = || format!("not a rational literal: {text:?}");
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    if scale.unsigned_abs() > 4096 {
        return Err(format!("exponent out of range in {text:?}"));
    }
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn parses_rational_literals() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational(" -3 ").unwrap(), q(-3, 1));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("1e-2").unwrap(), q(1, 100));
        assert_eq!(parse_rational("2.5E1").unwrap(), q(25, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.5/2").unwrap(), q(1, 4));
    }

    #[test]
    fn rejects_non_rational_literals() {
        for bad in ["nan", "inf", "", "1/0", "abc", "1.2.3", "-"] {
            assert!(parse_rational(bad).is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn report_strings() {
        assert_eq!(q(1, 3).to_report_string(), "1/3");
        assert_eq!(q(4, 2).to_report_string(), "2");
        assert_eq!(0.1f64.to_report_string(), "1.0000000000000001e-1");
        let back: f64 = <f64 as Scalar>::parse(&0.1f64.to_report_string()).unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn tolerant_comparisons() {
        let tol = Tol(1e-9);
        assert!(1.0f64.le_tol(&(1.0 - 1e-12), tol));
        assert!(!q(1, 1).le_tol(&(q(1, 1) - q(1, 1_000_000_000_000)), tol));
        assert!(1e-12f64.is_zero_tol(tol));
        assert!(!q(1, 1_000_000_000_000).is_zero_tol(tol));
    }
}
