//! Configurable-precision real and complex scalars.
//!
//! Every real quantity in the crate is a [`Scalar`], a thin wrapper around an
//! MPFR float. A computation context fixes one [`Precision`]; binary operations
//! return a value at the larger of the two operand precisions, so mixing never
//! silently loses bits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::{Constant, Special};
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Working precision in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;
    pub const DEFAULT_BITS: u32 = 256;
    pub const MAX_BITS: u32 = 4096;

    pub fn new(bits: u32) -> Result<Self> {
        if !(Self::MIN_BITS..=Self::MAX_BITS).contains(&bits) {
            return Err(Error::InvalidInput(format!(
                "precision must lie in {}..={} bits, got {bits}",
                Self::MIN_BITS,
                Self::MAX_BITS
            )));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Next precision in the escalation ladder, or `None` at the ceiling.
    pub fn doubled(self) -> Option<Precision> {
        let next = self.0.checked_mul(2)?;
        (next <= Self::MAX_BITS).then_some(Precision(next))
    }

    /// `2^(-bits * num / den)` at this precision.
    pub fn tolerance(self, num: u32, den: u32) -> Scalar {
        let exp = -((self.0 as i64 * num as i64) / den as i64);
        Scalar::one(self).mul_pow2(exp as i32)
    }

    /// `2^(-P/2)`, the "numerically zero" threshold.
    pub fn half_eps(self) -> Scalar {
        self.tolerance(1, 2)
    }

    /// Decimal digits used when serializing at this precision (`ceil(0.3 P)`).
    pub fn decimal_digits(self) -> usize {
        (self.0 as usize * 3).div_ceil(10)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(Self::DEFAULT_BITS)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Scalar(Float);

impl Scalar {
    pub fn zero(prec: Precision) -> Self {
        Scalar(Float::new(prec.bits()))
    }

    pub fn one(prec: Precision) -> Self {
        Scalar(Float::with_val(prec.bits(), 1))
    }

    pub fn from_i64(v: i64, prec: Precision) -> Self {
        Scalar(Float::with_val(prec.bits(), v))
    }

    pub fn from_f64(v: f64, prec: Precision) -> Self {
        Scalar(Float::with_val(prec.bits(), v))
    }

    pub fn infinity(prec: Precision) -> Self {
        Scalar(Float::with_val(prec.bits(), Special::Infinity))
    }

    pub fn pi(prec: Precision) -> Self {
        Scalar(Float::with_val(prec.bits(), Constant::Pi))
    }

    /// Parses a decimal (or `0x`-prefixed hexadecimal) literal at the given precision.
    pub fn parse(text: &str, prec: Precision) -> Result<Self> {
        let trimmed = text.trim();
        let (radix, body) = match trimmed
            .strip_prefix("0x")
            .or_else(|| trimmed.strip_prefix("0X"))
        {
            Some(rest) => (16, rest.to_string()),
            None => match trimmed.strip_prefix("-0x") {
                Some(rest) => (16, format!("-{rest}")),
                None => (10, trimmed.to_string()),
            },
        };
        let parsed = Float::parse_radix(&body, radix)
            .map_err(|e| Error::InvalidInput(format!("cannot parse number {text:?}: {e}")))?;
        let value = Float::with_val(prec.bits(), parsed);
        if value.is_nan() {
            return Err(Error::InvalidInput(format!("{text:?} is not a number")));
        }
        Ok(Scalar(value))
    }

    pub fn precision(&self) -> Precision {
        Precision(self.0.prec())
    }

    /// Same value rounded to another precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        Scalar(Float::with_val(prec.bits(), &self.0))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        Scalar(self.0.clone().sqrt())
    }

    pub fn ln(&self) -> Self {
        Scalar(self.0.clone().ln())
    }

    pub fn exp(&self) -> Self {
        Scalar(self.0.clone().exp())
    }

    pub fn cos(&self) -> Self {
        Scalar(self.0.clone().cos())
    }

    pub fn sin(&self) -> Self {
        Scalar(self.0.clone().sin())
    }

    pub fn gamma(&self) -> Self {
        Scalar(self.0.clone().gamma())
    }

    pub fn recip(&self) -> Self {
        Scalar(self.0.clone().recip())
    }

    pub fn square(&self) -> Self {
        Scalar(self.0.clone().square())
    }

    pub fn powi(&self, exp: i32) -> Self {
        Scalar(Float::with_val(self.0.prec(), (&self.0).pow(exp)))
    }

    pub fn pow(&self, exp: &Scalar) -> Self {
        let prec = self.0.prec().max(exp.0.prec());
        Scalar(Float::with_val(prec, (&self.0).pow(&exp.0)))
    }

    /// Multiplies by `2^exp` exactly.
    pub fn mul_pow2(&self, exp: i32) -> Self {
        let mut v = self.0.clone();
        v <<= exp;
        Scalar(v)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    /// Scientific notation with `digits` significant decimal digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".into();
        }
        if !self.0.is_finite() {
            return if self.0.is_nan() {
                "nan".into()
            } else if self.0.is_sign_negative() {
                "-inf".into()
            } else {
                "inf".into()
            };
        }
        sci_from_float(&self.0, digits)
    }

    /// Exact, round-trippable hexadecimal representation.
    pub fn to_hex_string(&self) -> String {
        let s = self.0.to_string_radix(16, None);
        match s.strip_prefix('-') {
            Some(rest) => format!("-0x{rest}"),
            None => format!("0x{s}"),
        }
    }
}

fn sci_from_float(v: &Float, digits: usize) -> String {
    let (neg, mantissa, exp) = v.to_sign_string_exp(10, Some(digits.max(1)));
    let exp = exp.unwrap_or(0) - 1;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    let mut chars = mantissa.chars();
    if let Some(first) = chars.next() {
        out.push(first);
    }
    let rest: String = chars.collect();
    if !rest.is_empty() {
        out.push('.');
        out.push_str(&rest);
    }
    out.push_str(&format!("e{exp}"));
    out
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .unwrap_or_else(|| self.precision().decimal_digits());
        f.write_str(&self.to_sci_string(digits))
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let prec = self.0.prec().max(rhs.0.prec());
                Scalar(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
        impl $assign_trait<&Scalar> for Scalar {
            fn $assign(&mut self, rhs: &Scalar) {
                *self = &*self $op rhs;
            }
        }
        impl $assign_trait<Scalar> for Scalar {
            fn $assign(&mut self, rhs: Scalar) {
                *self = &*self $op &rhs;
            }
        }
    };
}

scalar_binop!(Add, add, AddAssign, add_assign, +);
scalar_binop!(Sub, sub, SubAssign, sub_assign, -);
scalar_binop!(Mul, mul, MulAssign, mul_assign, *);
scalar_binop!(Div, div, DivAssign, div_assign, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0.clone())
    }
}

/// A complex number built from two [`Scalar`]s.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Scalar,
    pub im: Scalar,
}

impl Complex {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        Complex { re, im }
    }

    pub fn real(re: Scalar) -> Self {
        let im = Scalar::zero(re.precision());
        Complex { re, im }
    }

    pub fn zero(prec: Precision) -> Self {
        Complex::real(Scalar::zero(prec))
    }

    pub fn one(prec: Precision) -> Self {
        Complex::real(Scalar::one(prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: Precision) -> Self {
        Complex::new(Scalar::from_f64(re, prec), Scalar::from_f64(im, prec))
    }

    /// `r * exp(i theta)`.
    pub fn from_polar(r: &Scalar, theta: &Scalar) -> Self {
        Complex::new(r * theta.cos(), r * theta.sin())
    }

    pub fn precision(&self) -> Precision {
        self.re.precision().max(self.im.precision())
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Scalar {
        self.re.square() + self.im.square()
    }

    pub fn abs(&self) -> Scalar {
        Scalar(Float::with_val(
            self.precision().bits(),
            self.re.0.hypot_ref(&self.im.0),
        ))
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Complex::new(&self.re / &d, -(&self.im / &d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Complex::new(&self.re * s, &self.im * s)
    }

    pub fn add_real(&self, s: &Scalar) -> Self {
        Complex::new(&self.re + s, self.im.clone())
    }

    pub fn sub_real(&self, s: &Scalar) -> Self {
        Complex::new(&self.re - s, self.im.clone())
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} {:+?}i)", self.re, self.im)
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        Complex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&Complex> for &Complex {
    type Output = Complex;
    fn div(self, rhs: &Complex) -> Complex {
        let d = rhs.norm_sqr();
        Complex::new(
            (&self.re * &rhs.re + &self.im * &rhs.im) / &d,
            (&self.im * &rhs.re - &self.re * &rhs.im) / &d,
        )
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

macro_rules! complex_owned_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                &self $op &rhs
            }
        }
        impl $trait<&Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &Complex) -> Complex {
                &self $op rhs
            }
        }
        impl $trait<Complex> for &Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                self $op &rhs
            }
        }
    };
}

complex_owned_binop!(Add, add, +);
complex_owned_binop!(Sub, sub, -);
complex_owned_binop!(Mul, mul, *);
complex_owned_binop!(Div, div, /);

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}
