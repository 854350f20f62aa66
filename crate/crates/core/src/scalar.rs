//! Numeric backends.
//!
//! Every operator is generic over [`Scalar`], implemented for `f64` and for
//! [`Exact`] (arbitrary-precision rationals). Floating sums run through a
//! double-double accumulator so that prefix-sum differences stay accurate to
//! a few ulps of the interval sum, not of the running total.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational arithmetic.
pub type Exact = BigRational;

/// Relative tolerance applied to inequality verdicts in floating mode.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Running-sum state used by prefix tables.
    type Acc: Clone + Debug + Send + Sync;

    /// True for backends whose comparisons are exact.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    /// Converts a float; rationals take its exact binary value.
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn magnitude(&self) -> Self;

    fn is_finite_value(&self) -> bool;

    /// `self^p`, or `None` when the backend cannot represent it exactly.
    fn pow_real(&self, p: f64) -> Option<Self>;

    fn ceil_to_i64(&self) -> Option<i64>;

    /// Reads a decimal, integer or fraction `p/q`.
    fn parse_text(text: &str) -> Result<Self>;

    /// `self <= other`, with the relative tolerance in floating mode.
    fn leq_tol(&self, other: &Self) -> bool;

    /// Equality for identities: exact for rationals, relative 1e-12 for floats.
    fn identity_eq(&self, other: &Self) -> bool;

    fn acc_zero() -> Self::Acc;
    fn acc_add(acc: &Self::Acc, x: &Self) -> Self::Acc;
    /// `upper - lower` of two accumulator states.
    fn acc_span(upper: &Self::Acc, lower: &Self::Acc) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_int(v as i64)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

/// Double-double running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Compensated {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

impl Compensated {
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

impl Scalar for f64 {
    type Acc = Compensated;
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn parse_text(text: &str) -> Result<Self> {
        let read = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid number {text:?}")))
        };
        let v = match text.split_once('/') {
            Some((num, den)) => read(num)? / read(den)?,
            None => read(text)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(format!("{text:?} is not a finite real")))
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn pow_real(&self, p: f64) -> Option<Self> {
        if p == 1.0 {
            Some(*self)
        } else if p.fract() == 0.0 && p.abs() <= 64.0 {
            Some(self.powi(p as i32))
        } else {
            Some(self.powf(p))
        }
    }

    fn ceil_to_i64(&self) -> Option<i64> {
        let c = self.ceil();
        (c.is_finite() && c.abs() < 9.0e18).then_some(c as i64)
    }

    fn leq_tol(&self, other: &Self) -> bool {
        *self <= *other + RELATIVE_TOLERANCE * self.abs().max(other.abs())
    }

    fn identity_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * self.abs().max(other.abs())
    }

    fn acc_zero() -> Compensated {
        Compensated::default()
    }

    fn acc_add(acc: &Compensated, x: &f64) -> Compensated {
        let (s, e) = two_sum(acc.hi, *x);
        let lo = acc.lo + e;
        let hi = s + lo;
        Compensated {
            hi,
            lo: lo - (hi - s),
        }
    }

    fn acc_span(upper: &Compensated, lower: &Compensated) -> f64 {
        let (d, e) = two_sum(upper.hi, -lower.hi);
        d + (e + (upper.lo - lower.lo))
    }
}

impl Scalar for Exact {
    type Acc = Exact;
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn parse_text(text: &str) -> Result<Self> {
        parse_exact(text)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn magnitude(&self) -> Self {
        Signed::abs(self)
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn pow_real(&self, p: f64) -> Option<Self> {
        if p.fract() != 0.0 || p.abs() > 64.0 {
            return None;
        }
        if p < 0.0 && self.is_zero() {
            return None;
        }
        Some(Pow::pow(self, p as i32))
    }

    fn ceil_to_i64(&self) -> Option<i64> {
        self.ceil().to_integer().to_i64()
    }

    fn leq_tol(&self, other: &Self) -> bool {
        self <= other
    }

    fn identity_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn acc_zero() -> Exact {
        Exact::zero()
    }

    fn acc_add(acc: &Exact, x: &Exact) -> Exact {
        acc + x
    }

    fn acc_span(upper: &Exact, lower: &Exact) -> Exact {
        upper - lower
    }
}

/// Parses a decimal (`-1.25e-3`), an integer, or a fraction (`7/12`) into an
/// exact rational. Decimal text is read digit by digit, so `0.1` is exactly
/// one tenth rather than its binary approximation.
pub fn parse_exact(text: &str) -> Result<Exact> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((num, den)) = text.split_once('/') {
        if den.contains('/') {
            return Err(Error::Parse(format!("nested fraction {text:?}")));
        }
        let num = parse_exact(num)?;
        let den = parse_exact(den)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(num / den);
    }

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = text[pos + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {text:?}")))?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    if exponent.abs() > 400 {
        return Err(Error::Parse(format!("exponent out of range in {text:?}")));
    }

    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("no digits in {text:?}")));
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(Error::Parse(format!("invalid number {text:?}")));
    }
    if int_part.len() + frac_part.len() > 400 {
        return Err(Error::Parse(format!("too many digits in {text:?}")));
    }

    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number {text:?}")))?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(numer, Pow::pow(&ten, (-scale) as u32))
    };
    Ok(value)
}

/// Formats a scalar for text output: fractions stay exact, floats use the
/// shortest round-trip form.
pub fn format_scalar<T: Scalar>(v: &T) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_exact("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_exact("-2.50").unwrap(), q(-5, 2));
        assert_eq!(parse_exact("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_exact("7/12").unwrap(), q(7, 12));
        assert_eq!(parse_exact("3").unwrap(), q(3, 1));
        assert_eq!(parse_exact(".5").unwrap(), q(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "", "-", "1/0", "abc", "1e99999", "1.2.3", "e5", "--1", "1/2/3",
        ] {
            assert!(parse_exact(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn compensated_span_survives_cancellation() {
        let values = [1e16, 1.0, -1e16, 3.0, 2.0];
        let mut table = vec![f64::acc_zero()];
        for v in &values {
            let next = f64::acc_add(table.last().unwrap(), v);
            table.push(next);
        }
        assert_eq!(f64::acc_span(&table[5], &table[3]), 5.0);
        assert_eq!(f64::acc_span(&table[2], &table[0]), 1e16 + 1.0);
        assert_eq!(f64::acc_span(&table[4], &table[1]), -1e16 + 4.0);
    }

    #[test]
    fn exact_powers() {
        assert_eq!(q(2, 3).pow_real(-1.0).unwrap(), q(3, 2));
        assert_eq!(q(2, 3).pow_real(2.0).unwrap(), q(4, 9));
        assert!(q(2, 1).pow_real(0.5).is_none());
        assert!(Exact::zero().pow_real(-1.0).is_none());
    }

    #[test]
    fn tolerance_is_relative() {
        assert!(1.0f64.leq_tol(&(1.0 - 1e-12)));
        assert!(!1.0f64.leq_tol(&(1.0 - 1e-6)));
        assert!(!q(1, 1).leq_tol(&q(999_999_999_999, 1_000_000_000_000)));
    }
}
