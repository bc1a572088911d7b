use crate::error::{Error, Result};
use crate::scalar::{Precision, Scalar};

use super::{gauss_jacobi, AtomicMeasure, Interval, Sign};

/// A number kept in its textual form so it can be realized at any precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal(String);

impl Literal {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        Scalar::parse(&text, Precision::new(64)?)?;
        Ok(Literal(text.trim().to_string()))
    }

    pub fn from_i64(v: i64) -> Self {
        Literal(v.to_string())
    }

    /// Exact hexadecimal form of a value.
    pub fn from_scalar(v: &Scalar) -> Self {
        Literal(v.to_hex_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn at(&self, prec: Precision) -> Scalar {
        Scalar::parse(&self.0, prec).expect("validated at construction")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureKind {
    /// Explicit point masses, copied verbatim.
    Atoms {
        nodes: Vec<Literal>,
        weights: Vec<Literal>,
        sign: Sign,
    },
    /// Gauss–Legendre discretization of `scale * dx`.
    LegendreDensity {
        node_count: usize,
        density_scale: Literal,
    },
    /// Gauss–Jacobi discretization of `scale * (b - x)^alpha (x - a)^beta dx`.
    JacobiDensity {
        alpha: Literal,
        beta: Literal,
        node_count: usize,
        density_scale: Literal,
    },
}

/// Ingestion form of one generating measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub interval: (Literal, Literal),
}

impl MeasureSpec {
    pub fn atoms(interval: (Literal, Literal), atoms: &[(Literal, Literal)], sign: Sign) -> Self {
        MeasureSpec {
            kind: MeasureKind::Atoms {
                nodes: atoms.iter().map(|a| a.0.clone()).collect(),
                weights: atoms.iter().map(|a| a.1.clone()).collect(),
                sign,
            },
            interval,
        }
    }

    pub fn legendre(interval: (Literal, Literal), node_count: usize) -> Self {
        MeasureSpec {
            kind: MeasureKind::LegendreDensity {
                node_count,
                density_scale: Literal::from_i64(1),
            },
            interval,
        }
    }

    pub fn interval_at(&self, prec: Precision) -> Result<Interval> {
        Interval::new(self.interval.0.at(prec), self.interval.1.at(prec))
    }

    pub fn validate(&self) -> Result<()> {
        realize(self, Precision::new(64)?).map(|_| ())
    }
}

fn density_sign(scale: &Scalar) -> Result<Sign> {
    Sign::of(scale).ok_or_else(|| Error::InvalidInput("density_scale must be nonzero".into()))
}

/// Builds the atomic measure described by `spec` at precision `prec`.
pub fn realize(spec: &MeasureSpec, prec: Precision) -> Result<AtomicMeasure> {
    let interval = spec.interval_at(prec)?;
    match &spec.kind {
        MeasureKind::Atoms {
            nodes,
            weights,
            sign,
        } => AtomicMeasure::new(
            nodes.iter().map(|x| x.at(prec)).collect(),
            weights.iter().map(|w| w.at(prec)).collect(),
            *sign,
            interval,
        ),
        MeasureKind::LegendreDensity {
            node_count,
            density_scale,
        } => {
            let zero = Scalar::zero(prec);
            discretize(
                &interval,
                *node_count,
                &zero,
                &zero,
                &density_scale.at(prec),
                prec,
            )
        }
        MeasureKind::JacobiDensity {
            alpha,
            beta,
            node_count,
            density_scale,
        } => discretize(
            &interval,
            *node_count,
            &alpha.at(prec),
            &beta.at(prec),
            &density_scale.at(prec),
            prec,
        ),
    }
}

fn discretize(
    interval: &Interval,
    node_count: usize,
    alpha: &Scalar,
    beta: &Scalar,
    scale: &Scalar,
    prec: Precision,
) -> Result<AtomicMeasure> {
    let sign = density_sign(scale)?;
    let (t, w) = gauss_jacobi(node_count, alpha, beta, prec)?;
    let (a, b) = (interval.start(), interval.end());
    let half = (b - a).mul_pow2(-1);
    let mid = (a + b).mul_pow2(-1);
    let jac = half.pow(&(alpha + beta + Scalar::one(prec))) * scale.abs();
    // t is a root of the (alpha, beta) family on [-1, 1], where alpha sits at +1
    let nodes = t.iter().map(|ti| &mid + &half * ti).collect();
    let weights = w.iter().map(|wi| wi * &jac).collect();
    AtomicMeasure::new(nodes, weights, sign, interval.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> Literal {
        Literal::new(s).unwrap()
    }

    #[test]
    fn atoms_are_copied() {
        let p = Precision::default();
        let spec = MeasureSpec::atoms(
            (lit("-1"), lit("1")),
            &[(lit("-1"), lit("0.5")), (lit("1"), lit("0.5"))],
            Sign::Positive,
        );
        let mu = realize(&spec, p).unwrap();
        assert_eq!(mu.nodes(), &[Scalar::from_i64(-1, p), Scalar::one(p)]);
        assert_eq!(
            mu.weights(),
            &[Scalar::from_f64(0.5, p), Scalar::from_f64(0.5, p)]
        );
    }

    #[test]
    fn one_point_legendre_density() {
        let p = Precision::default();
        let mu = realize(&MeasureSpec::legendre((lit("-1"), lit("1")), 1), p).unwrap();
        assert_eq!(mu.len(), 1);
        assert!(mu.nodes()[0].abs() < p.tolerance(9, 10));
        assert!((&mu.weights()[0] - Scalar::from_i64(2, p)).abs() < p.tolerance(9, 10));
    }

    #[test]
    fn chebyshev_density() {
        let p = Precision::default();
        let spec = MeasureSpec {
            kind: MeasureKind::JacobiDensity {
                alpha: lit("-0.5"),
                beta: lit("-0.5"),
                node_count: 2,
                density_scale: lit("1"),
            },
            interval: (lit("-1"), lit("1")),
        };
        let mu = realize(&spec, p).unwrap();
        let c = (Scalar::pi(p) / Scalar::from_i64(4, p)).cos();
        let tol = p.tolerance(9, 10);
        assert!((&mu.nodes()[0] + &c).abs() < tol);
        assert!((&mu.nodes()[1] - &c).abs() < tol);
        assert!((&mu.weights()[0] - &mu.weights()[1]).abs() < tol);
        assert!((mu.total_variation() - Scalar::pi(p)).abs() < tol);
    }

    #[test]
    fn shifted_density_mass_and_sign() {
        // int_1^3 (3-x)^2 (x-1) dx = 2^4 B(3, 2) = 4/3, scaled by -3
        let p = Precision::default();
        let spec = MeasureSpec {
            kind: MeasureKind::JacobiDensity {
                alpha: lit("2"),
                beta: lit("1"),
                node_count: 5,
                density_scale: lit("-3"),
            },
            interval: (lit("1"), lit("3")),
        };
        let mu = realize(&spec, p).unwrap();
        assert_eq!(mu.sign(), Sign::Negative);
        assert!((mu.mass() + Scalar::from_i64(4, p)).abs() < p.tolerance(7, 8));
        // first moment: int x (3-x)^2 (x-1) dx = 16/15 + 4/3 = 12/5, times -3
        let c1 = &mu.moments(1)[1];
        let expected = Scalar::from_i64(-36, p) / Scalar::from_i64(5, p);
        assert!((c1 - expected).abs() < p.tolerance(7, 8));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let p = Precision::default();
        let outside = MeasureSpec::atoms(
            (lit("0"), lit("1")),
            &[(lit("2"), lit("1"))],
            Sign::Positive,
        );
        assert!(realize(&outside, p).is_err());
        let zero_weight = MeasureSpec::atoms(
            (lit("0"), lit("1")),
            &[(lit("0.5"), lit("0"))],
            Sign::Positive,
        );
        assert!(realize(&zero_weight, p).is_err());
        let unsorted = MeasureSpec::atoms(
            (lit("0"), lit("1")),
            &[(lit("0.5"), lit("1")), (lit("0.25"), lit("1"))],
            Sign::Positive,
        );
        assert!(realize(&unsorted, p).is_err());
        assert!(realize(&MeasureSpec::legendre((lit("0"), lit("1")), 0), p).is_err());
        assert!(realize(&MeasureSpec::legendre((lit("1"), lit("0")), 3), p).is_err());
        assert!(Literal::new("abc").is_err());
    }
}
