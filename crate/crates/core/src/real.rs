//! Scalar abstraction shared by the double and arbitrary-precision paths.
//!
//! Every kernel in this crate (block assembly, Sturm bisection, inverse
//! iteration) is generic over [`Real`], so the same code runs in `f64` and in
//! [`BigFloat`] without casting double-built entries up to high precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_base::{Abs, SquareRoot};
use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};

use crate::error::{Error, Result};

pub trait Real:
    Clone
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Exact conversion of a small integer at the given working precision.
    fn from_i64(v: i64, bits: usize) -> Self;
    fn from_f64(v: f64, bits: usize) -> Self;
    /// Parses a decimal literal directly at `bits` of mantissa.
    fn parse_decimal(s: &str, bits: usize) -> Result<Self>;
    /// `2^exp` at the given precision.
    fn pow2(exp: i64, bits: usize) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// Mantissa bits carried by this value (53 for `f64`).
    fn mantissa_bits(&self) -> usize;
    /// Decimal rendering that keeps every significant digit of the value.
    fn to_decimal_string(&self) -> String;

    fn zero(bits: usize) -> Self {
        Self::from_i64(0, bits)
    }

    fn one(bits: usize) -> Self {
        Self::from_i64(1, bits)
    }

    fn is_zero(&self) -> bool {
        self.partial_cmp(&Self::zero(self.mantissa_bits())) == Some(Ordering::Equal)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_i64(v: i64, _bits: usize) -> Self {
        v as f64
    }

    fn from_f64(v: f64, _bits: usize) -> Self {
        v
    }

    fn parse_decimal(s: &str, _bits: usize) -> Result<Self> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("not a decimal number: {s:?}")))
    }

    fn pow2(exp: i64, _bits: usize) -> Self {
        2f64.powi(exp as i32)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn mantissa_bits(&self) -> usize {
        f64::MANTISSA_DIGITS as usize
    }

    fn to_decimal_string(&self) -> String {
        format!("{:.16e}", self)
    }
}

type Inner = FBig<HalfEven, 2>;

/// Binary floating-point number with a caller-chosen mantissa width.
#[derive(Clone)]
pub struct BigFloat(Inner);

impl BigFloat {
    pub fn inner(&self) -> &FBig<HalfEven, 2> {
        &self.0
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({}b, {})", self.0.precision(), self.to_decimal_string())
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! bigfloat_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                BigFloat(&self.0 $op &rhs.0)
            }
        }

        impl<'a> $trait<&'a BigFloat> for &'a BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &'a BigFloat) -> BigFloat {
                BigFloat(&self.0 $op &rhs.0)
            }
        }
    };
}

bigfloat_binop!(Add, add, +);
bigfloat_binop!(Sub, sub, -);
bigfloat_binop!(Mul, mul, *);
bigfloat_binop!(Div, div, /);

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat(-self.0)
    }
}

fn with_bits(x: Inner, bits: usize) -> Inner {
    x.with_precision(bits).value()
}

impl Real for BigFloat {
    fn from_i64(v: i64, bits: usize) -> Self {
        BigFloat(with_bits(Inner::from(v), bits))
    }

    fn from_f64(v: f64, bits: usize) -> Self {
        let x = Inner::try_from(v).unwrap_or_else(|_| panic!("non-finite f64 {v}"));
        BigFloat(with_bits(x, bits))
    }

    fn parse_decimal(s: &str, bits: usize) -> Result<Self> {
        let d: DBig = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("not a decimal number: {s:?}")))?;
        let x = d
            .with_rounding::<HalfEven>()
            .with_base_and_precision::<2>(bits)
            .value();
        Ok(BigFloat(with_bits(x, bits)))
    }

    fn pow2(exp: i64, bits: usize) -> Self {
        BigFloat(with_bits(Inner::from_parts(1.into(), exp as isize), bits))
    }

    fn sqrt(&self) -> Self {
        BigFloat(self.0.sqrt())
    }

    fn abs(&self) -> Self {
        BigFloat(self.0.clone().abs())
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn is_finite(&self) -> bool {
        self.0.repr().is_finite()
    }

    fn mantissa_bits(&self) -> usize {
        self.0.precision()
    }

    fn to_decimal_string(&self) -> String {
        if self.0.repr().is_zero() {
            return "0".to_string();
        }
        // ceil(bits * log10(2)) + 1 digits always round-trips the binary value.
        let digits = (self.0.precision() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        let dec = self.0.clone().with_base_and_precision::<10>(digits).value();
        format!("{:e}", dec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_keeps_precision() {
        let x = BigFloat::parse_decimal("0.6", 256).unwrap();
        let three = BigFloat::from_i64(3, 256);
        let five = BigFloat::from_i64(5, 256);
        let err = (x - three / five).abs();
        assert!(err < BigFloat::pow2(-250, 256));
    }

    #[test]
    fn sqrt_two_squared() {
        let two = BigFloat::from_i64(2, 512);
        let r = two.sqrt();
        let err = (r.clone() * r - BigFloat::from_i64(2, 512)).abs();
        assert!(err < BigFloat::pow2(-500, 512));
        assert_eq!(BigFloat::from_i64(2, 512).mantissa_bits(), 512);
    }

    #[test]
    fn pow2_and_f64_roundtrip() {
        assert_eq!(BigFloat::pow2(-3, 128).to_f64(), 0.125);
        assert_eq!(<f64 as Real>::pow2(-3, 0), 0.125);
        assert_eq!(BigFloat::from_f64(-1.5, 64).to_f64(), -1.5);
    }

    #[test]
    fn decimal_string_has_full_digits() {
        let third = BigFloat::from_i64(1, 256) / BigFloat::from_i64(3, 256);
        let s = third.to_decimal_string();
        assert!(s.starts_with("3.333333333333333333333333333333333333"), "{s}");
        let back = BigFloat::parse_decimal(&s, 256).unwrap();
        assert!((back - third).abs() < BigFloat::pow2(-250, 256));
        assert_eq!(BigFloat::zero(64).to_decimal_string(), "0");
    }

    #[test]
    fn f64_decimal_is_scientific_17_digits() {
        assert_eq!(Real::to_decimal_string(&0.5f64), "5.0000000000000000e-1");
    }
}
