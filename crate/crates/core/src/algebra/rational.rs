use crate::error::{Error, Result};
use crate::scalar::{Complex, Precision, Scalar};

use super::polynomial::Polynomial;

/// Coefficients of a function's expansion at infinity: entry `k` is the
/// coefficient of `z^(-k-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentTail {
    coeffs: Vec<Scalar>,
}

impl LaurentTail {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        LaurentTail { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Option<&Scalar> {
        self.coeffs.get(k)
    }

    pub fn truncated(&self, len: usize) -> LaurentTail {
        LaurentTail::new(self.coeffs.iter().take(len).cloned().collect())
    }

    /// Termwise sum over the common length.
    pub fn sum(&self, other: &LaurentTail) -> LaurentTail {
        LaurentTail::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for LaurentTail {
    type Output = Scalar;
    fn index(&self, k: usize) -> &Scalar {
        &self.coeffs[k]
    }
}

/// Proper rational function `num / den` with a monic denominator and
/// coprime numerator and denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFn {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let Some(lead) = den.leading().cloned() else {
            return Err(Error::InvalidInput("zero denominator".into()));
        };
        if num.degree() >= den.degree() {
            return Err(Error::InvalidInput(format!(
                "rational function must be proper: deg num = {} >= deg den = {}",
                num.degree(),
                den.degree()
            )));
        }
        if !num.is_zero() {
            let g = poly_gcd(&num, &den)?;
            if g.degree() > 0 {
                return Err(Error::InvalidInput(format!(
                    "rational function is reducible: common factor of degree {}",
                    g.degree()
                )));
            }
        }
        let inv = lead.recip();
        Ok(RationalFn {
            num: num.scale(&inv),
            den: den.monic(),
        })
    }

    /// The zero function `0 / 1`.
    pub fn zero(prec: Precision) -> Self {
        RationalFn {
            num: Polynomial::zero(),
            den: Polynomial::constant(Scalar::one(prec)),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, z: &Complex) -> Complex {
        if self.num.is_zero() {
            return Complex::zero(z.precision());
        }
        &self.num.eval_complex(z) / &self.den.eval_complex(z)
    }
}

/// First `k` coefficients of `r` at infinity.
///
/// With `den = sum t_i z^i` monic of degree `d`, matching powers in
/// `num = den * tail` gives `c_k = v_{d-1-k} - sum_{i<d} t_i c_{k-d+i}`.
pub fn laurent_expand_rational(r: &RationalFn, k: usize) -> LaurentTail {
    let d = r.den.degree() as usize;
    let prec = r.den.precision().unwrap_or_default();
    let t = r.den.coeffs();
    let mut c: Vec<Scalar> = Vec::with_capacity(k);
    for idx in 0..k {
        let mut val = if idx < d {
            r.num
                .coeff(d - 1 - idx)
                .cloned()
                .unwrap_or_else(|| Scalar::zero(prec))
        } else {
            Scalar::zero(prec)
        };
        for (i, ti) in t.iter().enumerate().take(d) {
            if idx + i >= d {
                val -= ti * &c[idx + i - d];
            }
        }
        c.push(val);
    }
    LaurentTail::new(c)
}

/// Monic greatest common divisor by a monic-normalized Euclidean remainder
/// sequence. A remainder counts as zero when its coefficients fall below
/// `2^(-P/2)` relative to the dividend.
pub fn poly_gcd(p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
    match (p.is_zero(), q.is_zero()) {
        (true, true) => return Err(Error::GcdOfZeros),
        (true, false) => return Ok(q.monic()),
        (false, true) => return Ok(p.monic()),
        _ => {}
    }
    let prec = p
        .precision()
        .unwrap_or_default()
        .max(q.precision().unwrap_or_default());
    let tol = prec.half_eps();
    let (mut a, mut b) = if p.degree() >= q.degree() {
        (p.monic(), q.monic())
    } else {
        (q.monic(), p.monic())
    };
    loop {
        if b.degree() == 0 {
            return Ok(b);
        }
        let (_, r) = a.div_rem(&b)?;
        let scale = a
            .max_abs_coeff()
            .unwrap_or_else(|| Scalar::one(prec))
            .max(b.max_abs_coeff().unwrap_or_else(|| Scalar::one(prec)));
        let r_max = r.max_abs_coeff();
        let negligible = match &r_max {
            None => true,
            Some(m) => *m <= &tol * &scale,
        };
        if negligible {
            return Ok(b);
        }
        let r = r.trim_relative(&tol);
        a = b;
        b = r.monic();
    }
}
