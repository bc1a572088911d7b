//! Atomic surrogates of constant-sign measures on bounded intervals.
//!
//! A continuous density is discretized once, at realization time, by a Gauss
//! rule; afterwards the measure is a finite sum of point masses and every
//! integral in the crate is an exact finite sum.

mod quadrature;
mod spec;

pub use quadrature::gauss_jacobi;
pub use spec::{realize, Literal, MeasureKind, MeasureSpec};

use std::fmt;

use crate::algebra::{LaurentTail, Polynomial};
use crate::error::{Error, Result};
use crate::scalar::{Complex, Precision, Scalar};

/// Closed bounded interval `[a, b]` with `a < b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    a: Scalar,
    b: Scalar,
}

impl Interval {
    pub fn new(a: Scalar, b: Scalar) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(
                "unbounded intervals are not supported".into(),
            ));
        }
        if a >= b {
            return Err(Error::InvalidInput(format!(
                "interval endpoints must satisfy a < b, got [{a:?}, {b:?}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn from_f64(a: f64, b: f64, prec: Precision) -> Result<Self> {
        Interval::new(Scalar::from_f64(a, prec), Scalar::from_f64(b, prec))
    }

    pub fn start(&self) -> &Scalar {
        &self.a
    }

    pub fn end(&self) -> &Scalar {
        &self.b
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        *x >= self.a && *x <= self.b
    }

    /// Euclidean distance from a complex point to the segment.
    pub fn distance(&self, z: &Complex) -> Scalar {
        let dx = if z.re < self.a {
            &self.a - &z.re
        } else if z.re > self.b {
            &z.re - &self.b
        } else {
            Scalar::zero(z.precision())
        };
        (dx.square() + z.im.square()).sqrt()
    }
}

/// Sign of a constant-sign measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(x: &Scalar) -> Option<Sign> {
        if x.is_positive() {
            Some(Sign::Positive)
        } else if x.is_negative() {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn apply(self, x: Scalar) -> Scalar {
        match self {
            Sign::Positive => x,
            Sign::Negative => -x,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+1",
            Sign::Negative => "-1",
        })
    }
}

/// Finite sum of positive point masses times a common sign.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    nodes: Vec<Scalar>,
    weights: Vec<Scalar>,
    sign: Sign,
    support: Interval,
}

impl AtomicMeasure {
    pub fn new(
        nodes: Vec<Scalar>,
        weights: Vec<Scalar>,
        sign: Sign,
        support: Interval,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput(
                "a measure needs at least one node".into(),
            ));
        }
        if nodes.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "nodes must be strictly increasing".into(),
            ));
        }
        if let Some(x) = nodes.iter().find(|x| !support.contains(x)) {
            return Err(Error::InvalidInput(format!(
                "node {x:?} lies outside the support interval"
            )));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidInput(
                "weights must be strictly positive".into(),
            ));
        }
        Ok(AtomicMeasure {
            nodes,
            weights,
            sign,
            support,
        })
    }

    pub fn nodes(&self) -> &[Scalar] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn support(&self) -> &Interval {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn precision(&self) -> Precision {
        self.nodes[0].precision()
    }

    /// Signed weights `sign * w_i`.
    pub fn signed_weights(&self) -> impl Iterator<Item = Scalar> + '_ {
        self.weights.iter().map(|w| self.sign.apply(w.clone()))
    }

    /// Total variation `sum w_i`.
    pub fn total_variation(&self) -> Scalar {
        self.weights
            .iter()
            .fold(Scalar::zero(self.precision()), |acc, w| acc + w)
    }

    /// Signed total mass `c_0`.
    pub fn mass(&self) -> Scalar {
        self.sign.apply(self.total_variation())
    }

    /// Same nodes, weights multiplied by a positive factor.
    pub fn scaled(&self, factor: &Scalar) -> Result<AtomicMeasure> {
        AtomicMeasure::new(
            self.nodes.clone(),
            self.weights.iter().map(|w| w * factor).collect(),
            self.sign,
            self.support.clone(),
        )
    }

    /// `c_k = sign * sum w_i x_i^k` for `k = 0..=k_max`; these are also the
    /// coefficients of the Cauchy transform at infinity.
    pub fn moments(&self, k_max: usize) -> LaurentTail {
        let prec = self.precision();
        let mut powers: Vec<Scalar> = self.weights.clone();
        let mut out = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            if k > 0 {
                for (p, x) in powers.iter_mut().zip(&self.nodes) {
                    *p *= x;
                }
            }
            let sum = powers.iter().fold(Scalar::zero(prec), |acc, p| acc + p);
            out.push(self.sign.apply(sum));
        }
        LaurentTail::new(out)
    }

    fn check_off_support(&self, z: &Complex) -> Result<()> {
        let tol = z.precision().min(self.precision()).half_eps();
        for x in &self.nodes {
            let d = z.sub_real(x).abs();
            if d <= tol {
                return Err(Error::EvaluationOnSupport {
                    node: x.to_sci_string(20),
                    distance: d.to_sci_string(6),
                });
            }
        }
        Ok(())
    }

    /// Cauchy transform `sign * sum w_i / (z - x_i)`.
    pub fn cauchy(&self, z: &Complex) -> Result<Complex> {
        self.check_off_support(z)?;
        let prec = z.precision();
        let mut acc = Complex::zero(prec);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += &z.sub_real(x).recip().scale(w);
        }
        Ok(match self.sign {
            Sign::Positive => acc,
            Sign::Negative => -acc,
        })
    }

    /// Cauchy transform at a real point off the nodes.
    pub fn cauchy_real(&self, x: &Scalar) -> Result<Scalar> {
        self.check_off_support(&Complex::real(x.clone()))?;
        let acc = self
            .nodes
            .iter()
            .zip(&self.weights)
            .fold(Scalar::zero(x.precision()), |acc, (xi, w)| {
                acc + w / (x - xi)
            });
        Ok(self.sign.apply(acc))
    }
}

/// Cauchy transform of `mu` at `z`.
pub fn cauchy_eval(mu: &AtomicMeasure, z: &Complex) -> Result<Complex> {
    mu.cauchy(z)
}

/// `1 / mu_hat(z) = ell(z) + tau_hat(z)` with `ell` linear.
#[derive(Clone, Debug)]
pub struct InverseMeasure {
    pub ell: Polynomial,
    /// `None` is the zero measure (single-atom `mu`).
    pub tau: Option<AtomicMeasure>,
}

impl InverseMeasure {
    pub fn eval(&self, z: &Complex) -> Result<Complex> {
        let lin = self.ell.eval_complex(z);
        match &self.tau {
            None => Ok(lin),
            Some(t) => Ok(&lin + &t.cauchy(z)?),
        }
    }
}

/// Decomposes `1 / mu_hat` into its linear part and the Cauchy transform of
/// the inverse measure.
///
/// The zeros of `mu_hat` are real and strictly interlace the nodes, one per
/// gap. Each is found by safeguarded Newton on the partial-fraction form; the
/// residue of `1 / mu_hat` there is `1 / mu_hat'`.
pub fn inverse_measure(mu: &AtomicMeasure) -> Result<InverseMeasure> {
    let prec = mu.precision();
    let moments = mu.moments(1);
    let c0 = moments[0].clone();
    let c1 = moments[1].clone();
    if c0.is_zero() {
        return Err(Error::InvalidInput("measure has zero total mass".into()));
    }
    let a = c0.recip();
    let b = -(&c1 / c0.square());
    let ell = Polynomial::linear(a, b);
    if mu.len() == 1 {
        return Ok(InverseMeasure { ell, tau: None });
    }

    let nodes = mu.nodes();
    let weights = mu.weights();
    let mut roots = Vec::with_capacity(nodes.len() - 1);
    let mut tau_weights = Vec::with_capacity(nodes.len() - 1);
    for gap in nodes.windows(2) {
        let y = gap_zero(&gap[0], &gap[1], nodes, weights, prec)?;
        // sum w_i / (y - x_i)^2 = |mu_hat'(y)|
        let slope = nodes
            .iter()
            .zip(weights)
            .fold(Scalar::zero(prec), |acc, (x, w)| {
                acc + w / (&y - x).square()
            });
        tau_weights.push(slope.recip());
        roots.push(y);
    }
    for (k, y) in roots.iter().enumerate() {
        if *y <= nodes[k] || *y >= nodes[k + 1] {
            return Err(Error::InverseMeasureFailed);
        }
    }
    if roots.windows(2).any(|w| w[0] >= w[1]) || tau_weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::InverseMeasureFailed);
    }
    // mu_hat decreases through each zero when mu > 0, so residues carry -sign.
    let tau = AtomicMeasure::new(roots, tau_weights, mu.sign().flip(), mu.support().clone())
        .map_err(|_| Error::InverseMeasureFailed)?;
    Ok(InverseMeasure {
        ell,
        tau: Some(tau),
    })
}

/// Zero of `f(y) = sum w_i / (y - x_i)` in `(lo, hi)`, where `f` falls
/// monotonically from `+inf` to `-inf`.
fn gap_zero(
    lo: &Scalar,
    hi: &Scalar,
    nodes: &[Scalar],
    weights: &[Scalar],
    prec: Precision,
) -> Result<Scalar> {
    let eval = |y: &Scalar| -> (Scalar, Scalar) {
        let mut f = Scalar::zero(prec);
        let mut df = Scalar::zero(prec);
        for (x, w) in nodes.iter().zip(weights) {
            let inv = (y - x).recip();
            f += w * &inv;
            df -= w * inv.square();
        }
        (f, df)
    };
    let mut left = lo.clone();
    let mut right = hi.clone();
    let mut y = (&left + &right).mul_pow2(-1);
    let stop = prec.tolerance(1, 1).mul_pow2(6);
    for _ in 0..(4 * prec.bits() as usize + 100) {
        let (f, df) = eval(&y);
        if f.is_zero() {
            return Ok(y);
        }
        if f.is_positive() {
            left = y.clone();
        } else {
            right = y.clone();
        }
        let newton = &y - &f / &df;
        let next = if newton > left && newton < right {
            newton
        } else {
            (&left + &right).mul_pow2(-1)
        };
        let step = (&next - &y).abs();
        y = next;
        let scale = y.abs().max(hi - lo);
        if step <= &stop * &scale || &right - &left <= &stop * &scale {
            return Ok(y);
        }
    }
    Err(Error::InverseMeasureFailed)
}

/// Partial sum `sum_{n=1}^{N} |c_n|^(-1/(2n))` of the Carleman series for the
/// image of `mu` in the positive half line. Returns `+inf` when some moment
/// vanishes.
pub fn carleman_partial_sum(mu: &AtomicMeasure, terms: usize) -> Scalar {
    let prec = mu.precision();
    let start = mu.support().start();
    let shift = if start.is_negative() {
        start.clone()
    } else {
        Scalar::zero(prec)
    };
    let shifted: Vec<Scalar> = mu.nodes().iter().map(|x| x - &shift).collect();
    let mut powers: Vec<Scalar> = mu.weights().to_vec();
    let mut total = Scalar::zero(prec);
    for n in 1..=terms {
        for (p, x) in powers.iter_mut().zip(&shifted) {
            *p *= x;
        }
        let c = powers.iter().fold(Scalar::zero(prec), |acc, p| acc + p);
        if c.is_zero() {
            return Scalar::infinity(prec);
        }
        let exponent = Scalar::from_i64(-(2 * n as i64), prec).recip();
        total += (c.abs().ln() * exponent).exp();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::default()
    }

    fn measure(atoms: &[(f64, f64)], sign: Sign, support: (f64, f64)) -> AtomicMeasure {
        let p = prec();
        AtomicMeasure::new(
            atoms.iter().map(|a| Scalar::from_f64(a.0, p)).collect(),
            atoms.iter().map(|a| Scalar::from_f64(a.1, p)).collect(),
            sign,
            Interval::from_f64(support.0, support.1, p).unwrap(),
        )
        .unwrap()
    }

    fn two_atoms() -> AtomicMeasure {
        measure(&[(-1.0, 0.5), (1.0, 0.5)], Sign::Positive, (-1.0, 1.0))
    }

    fn f64s(t: &LaurentTail) -> Vec<f64> {
        t.coeffs().iter().map(Scalar::to_f64).collect()
    }

    fn close(a: &Complex, b: &Complex) -> bool {
        (a - b).abs() < prec().tolerance(9, 10)
    }

    #[test]
    fn invariants_are_enforced() {
        let p = prec();
        let iv = Interval::from_f64(0.0, 1.0, p).unwrap();
        let s = |x: f64| Scalar::from_f64(x, p);
        assert!(AtomicMeasure::new(vec![], vec![], Sign::Positive, iv.clone()).is_err());
        assert!(AtomicMeasure::new(
            vec![s(0.5), s(0.2)],
            vec![s(1.0), s(1.0)],
            Sign::Positive,
            iv.clone()
        )
        .is_err());
        assert!(
            AtomicMeasure::new(vec![s(0.5)], vec![s(0.0)], Sign::Positive, iv.clone()).is_err()
        );
        assert!(AtomicMeasure::new(vec![s(1.5)], vec![s(1.0)], Sign::Positive, iv).is_err());
        assert!(Interval::from_f64(1.0, 1.0, p).is_err());
        assert!(Interval::new(Scalar::infinity(p), s(2.0)).is_err());
    }

    #[test]
    fn moment_examples() {
        assert_eq!(f64s(&two_atoms().moments(4)), vec![1.0, 0.0, 1.0, 0.0, 1.0]);
        let unit = measure(&[(0.0, 1.0)], Sign::Positive, (-1.0, 1.0));
        assert_eq!(f64s(&unit.moments(3)), vec![1.0, 0.0, 0.0, 0.0]);
        let neg = measure(&[(1.0, 1.0), (2.0, 1.0)], Sign::Negative, (0.0, 3.0));
        assert_eq!(f64s(&neg.moments(2)), vec![-2.0, -3.0, -5.0]);
        assert_eq!(neg.moments(0)[0], neg.mass());
    }

    #[test]
    fn cauchy_examples() {
        let p = prec();
        let unit = measure(&[(0.0, 1.0)], Sign::Positive, (-1.0, 1.0));
        let half = Complex::from_f64(0.5, 0.0, p);
        assert!(close(
            &cauchy_eval(&unit, &Complex::from_f64(2.0, 0.0, p)).unwrap(),
            &half
        ));
        let two_thirds = Complex::real(Scalar::from_i64(2, p) / Scalar::from_i64(3, p));
        assert!(close(
            &two_atoms().cauchy(&Complex::from_f64(2.0, 0.0, p)).unwrap(),
            &two_thirds
        ));
        // closed form z / (z^2 - 1) at z = i is -i/2
        let at_i = two_atoms().cauchy(&Complex::from_f64(0.0, 1.0, p)).unwrap();
        assert!(close(&at_i, &Complex::from_f64(0.0, -0.5, p)));
    }

    #[test]
    fn evaluation_on_support_is_rejected() {
        let p = prec();
        let err = two_atoms().cauchy(&Complex::from_f64(1.0, 0.0, p));
        assert!(matches!(err, Err(Error::EvaluationOnSupport { .. })));
    }

    #[test]
    fn truncated_tail_bound() {
        let p = prec();
        let mu = measure(
            &[(-0.7, 0.3), (0.1, 1.2), (0.9, 0.4)],
            Sign::Negative,
            (-1.0, 1.0),
        );
        let k = 10;
        let c = mu.moments(k);
        let z = Complex::from_f64(1.3, 0.8, p);
        let mut series = Complex::zero(p);
        let mut zpow = z.recip();
        for ck in c.coeffs() {
            series += &zpow.scale(ck);
            zpow = &zpow * &z.recip();
        }
        let err = (&mu.cauchy(&z).unwrap() - &series).abs();
        let r = Scalar::from_f64(0.9, p);
        let zabs = z.abs();
        let bound = (&r / &zabs).powi(k as i32 + 1) * c[0].abs() / (&zabs - &r);
        assert!(err <= bound);
    }

    #[test]
    fn inverse_of_unit_mass() {
        let p = prec();
        let unit = measure(&[(0.0, 1.0)], Sign::Positive, (-1.0, 1.0));
        let inv = inverse_measure(&unit).unwrap();
        assert!(inv.tau.is_none());
        assert_eq!(inv.ell, Polynomial::from_f64(&[0.0, 1.0], p));
    }

    #[test]
    fn inverse_of_two_atoms() {
        // (z^2 - 1) / z = z - 1/z
        let p = prec();
        let inv = inverse_measure(&two_atoms()).unwrap();
        assert_eq!(inv.ell, Polynomial::from_f64(&[0.0, 1.0], p));
        let tau = inv.tau.unwrap();
        assert_eq!(tau.len(), 1);
        assert!(tau.nodes()[0].abs() < p.tolerance(9, 10));
        assert!((&tau.weights()[0] - Scalar::one(p)).abs() < p.tolerance(9, 10));
        assert_eq!(tau.sign(), Sign::Negative);
    }

    #[test]
    fn inverse_of_doubled_measure() {
        // oracle: 1 / (2z / (z^2 - 1)) = z/2 - (1/2)/z
        let p = prec();
        let mu = measure(&[(-1.0, 1.0), (1.0, 1.0)], Sign::Positive, (-1.0, 1.0));
        let inv = inverse_measure(&mu).unwrap();
        assert_eq!(inv.ell, Polynomial::from_f64(&[0.0, 0.5], p));
        let tau = inv.tau.unwrap();
        assert!((&tau.weights()[0] - Scalar::from_f64(0.5, p)).abs() < p.tolerance(9, 10));
        assert_eq!(tau.sign(), Sign::Negative);
    }

    #[test]
    fn inverse_round_trip_and_interlacing() {
        let p = prec();
        let mu = measure(
            &[
                (-0.9, 0.2),
                (-0.5, 0.7),
                (-0.45, 0.1),
                (0.3, 1.1),
                (0.8, 0.05),
            ],
            Sign::Negative,
            (-1.0, 1.0),
        );
        let inv = inverse_measure(&mu).unwrap();
        let tau = inv.tau.as_ref().unwrap();
        assert_eq!(tau.len(), mu.len() - 1);
        for (k, y) in tau.nodes().iter().enumerate() {
            assert!(*y > mu.nodes()[k] && *y < mu.nodes()[k + 1]);
        }
        for k in 0..32 {
            let theta = 0.3 + k as f64 * 0.19;
            let r = 0.2 + k as f64 * 0.15;
            let z = Complex::from_f64(r * theta.cos(), r * theta.sin() + 0.05, p);
            let lhs = mu.cauchy(&z).unwrap().recip();
            let rhs = inv.eval(&z).unwrap();
            let bound = p.half_eps() * (Scalar::one(p) + z.abs());
            assert!((&lhs - &rhs).abs() <= bound);
        }
    }

    #[test]
    fn carleman_examples() {
        let p = prec();
        let at_one = measure(&[(1.0, 1.0)], Sign::Positive, (0.0, 2.0));
        assert!(
            (carleman_partial_sum(&at_one, 3) - Scalar::from_i64(3, p)).abs() < p.tolerance(9, 10)
        );
        let at_four = measure(&[(4.0, 1.0)], Sign::Positive, (0.0, 5.0));
        assert!((carleman_partial_sum(&at_four, 2) - Scalar::one(p)).abs() < p.tolerance(9, 10));
        let at_zero = measure(&[(0.0, 1.0)], Sign::Positive, (0.0, 1.0));
        assert!(!carleman_partial_sum(&at_zero, 1).is_finite());
        // negative supports are shifted onto the half line first
        let shifted = measure(&[(-1.0, 1.0)], Sign::Positive, (-2.0, 0.0));
        assert!(
            (carleman_partial_sum(&shifted, 3) - Scalar::from_i64(3, p)).abs() < p.tolerance(9, 10)
        );
    }
}
