use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Precision, Scalar};

/// Dense real polynomial, coefficients in ascending degree.
///
/// Exact trailing zeros are always trimmed, so the zero polynomial has no
/// coefficients and degree `-1`.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        Polynomial::new(vec![c])
    }

    /// `a z + b`.
    pub fn linear(a: Scalar, b: Scalar) -> Self {
        Polynomial::new(vec![b, a])
    }

    pub fn from_f64(coeffs: &[f64], prec: Precision) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Scalar::from_f64(c, prec)).collect())
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    /// Coefficient of `z^k`, `None` beyond the degree.
    pub fn coeff(&self, k: usize) -> Option<&Scalar> {
        self.coeffs.get(k)
    }

    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn precision(&self) -> Option<Precision> {
        self.coeffs.iter().map(Scalar::precision).max()
    }

    pub fn max_abs_coeff(&self) -> Option<Scalar> {
        self.coeffs.iter().map(Scalar::abs).reduce(Scalar::max)
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self, prec: Precision) -> Scalar {
        self.coeffs
            .iter()
            .fold(Scalar::zero(prec), |acc, c| acc + c.abs())
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero(x.precision());
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let mut acc = Complex::zero(z.precision());
        for c in self.coeffs.iter().rev() {
            acc = (&acc * z).add_real(c);
        }
        acc
    }

    /// Value and first derivative at `z` in one Horner pass.
    pub fn eval_with_derivative(&self, z: &Complex) -> (Complex, Complex) {
        let prec = z.precision();
        let mut p = Complex::zero(prec);
        let mut dp = Complex::zero(prec);
        for c in self.coeffs.iter().rev() {
            dp = &(&dp * z) + &p;
            p = (&p * z).add_real(c);
        }
        (p, dp)
    }

    /// `sum |c_k| |z|^k`, the natural scale of a rounding error in `p(z)`.
    pub fn magnitude_bound(&self, r: &Scalar) -> Scalar {
        let mut acc = Scalar::zero(r.precision());
        for c in self.coeffs.iter().rev() {
            acc = acc * r + c.abs();
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Scalar::from_i64(k as i64, c.precision()))
                .collect(),
        )
    }

    pub fn scale(&self, s: &Scalar) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Divides through by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            None => Polynomial::zero(),
            Some(lead) => {
                let inv = lead.recip();
                let mut out: Vec<Scalar> = self.coeffs.iter().map(|c| c * &inv).collect();
                let last = out.len() - 1;
                out[last] = Scalar::one(lead.precision());
                Polynomial::new(out)
            }
        }
    }

    /// Drops trailing coefficients with `|c| <= rel_tol * max|c|`.
    pub fn trim_relative(&self, rel_tol: &Scalar) -> Polynomial {
        let Some(max) = self.max_abs_coeff() else {
            return Polynomial::zero();
        };
        if max.is_zero() {
            return Polynomial::zero();
        }
        let cut = rel_tol * &max;
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.abs() <= cut) {
            coeffs.pop();
        }
        Polynomial::new(coeffs)
    }

    /// Long division. Errors on a zero divisor.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        let Some(lead) = divisor.leading() else {
            return Err(Error::InvalidInput(
                "division by the zero polynomial".into(),
            ));
        };
        if self.degree() < divisor.degree() {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        let qlen = rem.len() - dd;
        let mut quot = vec![Scalar::zero(lead.precision()); qlen];
        for k in (0..qlen).rev() {
            let q = &rem[k + dd] / lead;
            for (i, d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &q * d;
            }
            // exact cancellation of the eliminated term
            rem[k + dd] = Scalar::zero(lead.precision());
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    /// Monic polynomial with the given roots. Imaginary parts are assumed to
    /// come in conjugate pairs and are discarded from the product.
    pub fn from_roots(roots: &[Complex], prec: Precision) -> Polynomial {
        let mut re = vec![Scalar::one(prec)];
        let mut im = vec![Scalar::zero(prec)];
        for r in roots {
            let mut nre = vec![Scalar::zero(prec); re.len() + 1];
            let mut nim = vec![Scalar::zero(prec); im.len() + 1];
            for k in 0..re.len() {
                // (c_k) * (z - r): shift plus -r * c_k
                nre[k + 1] += &re[k];
                nim[k + 1] += &im[k];
                nre[k] -= &re[k] * &r.re - &im[k] * &r.im;
                nim[k] -= &re[k] * &r.im + &im[k] * &r.re;
            }
            re = nre;
            im = nim;
        }
        Polynomial::new(re)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = long.coeffs.clone();
        for (o, c) in out.iter_mut().zip(&short.coeffs) {
            *o += c;
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let prec = self
            .precision()
            .unwrap_or_default()
            .max(rhs.precision().unwrap_or_default());
        let mut out = vec![Scalar::zero(prec); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

macro_rules! poly_owned_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                &self $op &rhs
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                &self $op rhs
            }
        }
    };
}

poly_owned_binop!(Add, add, +);
poly_owned_binop!(Sub, sub, -);
poly_owned_binop!(Mul, mul, *);
