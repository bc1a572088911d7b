//! Type I and type II Hermite–Padé approximants of (perturbed) Nikishin
//! systems, computed as nullspaces of moment matrices.

mod type1;
mod type2;

pub use type1::{
    assemble_type1_system, check_orthogonality, perturbed_reduce, remainder_eval, solve_type1,
    solve_type1_perturbed, solve_type1_with, ReduceReport, TypeIVector,
};
pub use type2::{solve_type2, solve_type2_with, type2_remainder_tail, TypeIIVector};

use crate::algebra::{
    laurent_expand_rational, poly_gcd, poly_roots, LaurentTail, Polynomial, RationalFn,
};
use crate::error::{Error, Result};
use crate::linalg::{right_singular, Matrix};
use crate::nikishin::NikishinSystem;
use crate::scalar::{Complex, Precision, Scalar};

/// Degree budget `(n_1, ..., n_m)`, not all zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.iter().all(|&k| k == 0) {
            return Err(Error::InvalidInput(
                "multi-index must have a positive entry".into(),
            ));
        }
        Ok(MultiIndex(n))
    }

    /// `(k, ..., k)` with `m` entries.
    pub fn diagonal(m: usize, k: usize) -> Result<Self> {
        MultiIndex::new(vec![k; m])
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// `|n|`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `max n_j - min n_j`.
    pub fn spread(&self) -> usize {
        self.max() - self.0.iter().copied().min().unwrap_or(0)
    }

    /// Tail length that leaves room for polynomial parts and the order check.
    pub fn tail_len(&self) -> usize {
        self.total() + self.max() + 4
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A zero of `T` and its multiplicity.
#[derive(Clone, Debug)]
pub struct Pole {
    pub location: Complex,
    pub multiplicity: usize,
}

/// Rational functions `r_j = v_j / t_j` added to the forward transforms, with
/// `T = prod t_j`.
#[derive(Clone, Debug)]
pub struct RationalPerturbation {
    r: Vec<RationalFn>,
    t: Polynomial,
    poles: Vec<Pole>,
}

impl RationalPerturbation {
    /// All `r_j = 0`, `T = 1`.
    pub fn none(m: usize, prec: Precision) -> Self {
        RationalPerturbation {
            r: vec![RationalFn::zero(prec); m],
            t: Polynomial::constant(Scalar::one(prec)),
            poles: Vec::new(),
        }
    }

    /// Validates `r` against the system: one function per generator, poles
    /// off the first and last supports, distinct pole sets.
    pub fn new(r: Vec<RationalFn>, sys: &NikishinSystem) -> Result<Self> {
        let m = sys.m();
        let prec = sys.precision();
        if r.len() != m {
            return Err(Error::InvalidInput(format!(
                "{} perturbations for a system of {m} generators",
                r.len()
            )));
        }
        let mut t = Polynomial::constant(Scalar::one(prec));
        for (j, rj) in r.iter().enumerate() {
            if rj.is_zero() {
                continue;
            }
            for (k, rk) in r.iter().enumerate().skip(j + 1) {
                if !rk.is_zero() && poly_gcd(rj.den(), rk.den())?.degree() > 0 {
                    return Err(Error::InvalidInput(format!(
                        "r_{} and r_{} share a pole",
                        j + 1,
                        k + 1
                    )));
                }
            }
            t = &t * rj.den();
        }
        let poles = if t.degree() > 0 {
            cluster_poles(&poly_roots(&t)?, prec)
        } else {
            Vec::new()
        };
        let guard = prec.tolerance(1, 4);
        let first = sys.generator(1).support();
        let last = sys.generator(m).support();
        for p in &poles {
            if first.distance(&p.location) <= guard || last.distance(&p.location) <= guard {
                return Err(Error::InvalidInput(format!(
                    "pole {:?} lies on the first or last support",
                    p.location
                )));
            }
        }
        Ok(RationalPerturbation { r, t, poles })
    }

    pub fn functions(&self) -> &[RationalFn] {
        &self.r
    }

    /// `T`.
    pub fn denominator(&self) -> &Polynomial {
        &self.t
    }

    /// `D = deg T`.
    pub fn degree(&self) -> usize {
        self.t.degree().max(0) as usize
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().all(RationalFn::is_zero)
    }

    /// Expansions of every `r_j` at infinity.
    pub fn tails(&self, len: usize) -> Vec<LaurentTail> {
        self.r
            .iter()
            .map(|rj| laurent_expand_rational(rj, len))
            .collect()
    }
}

/// Groups numerically coincident roots into poles with multiplicities.
fn cluster_poles(roots: &[Complex], prec: Precision) -> Vec<Pole> {
    let tol = prec.tolerance(1, 4);
    let mut groups: Vec<Vec<Complex>> = Vec::new();
    for r in roots {
        let scale = r.abs().max(Scalar::one(prec));
        match groups
            .iter_mut()
            .find(|g| (&g[0] - r).abs() <= &tol * &scale)
        {
            Some(g) => g.push(r.clone()),
            None => groups.push(vec![r.clone()]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let k = Scalar::from_i64(g.len() as i64, prec);
            let sum = g.iter().fold(Complex::zero(prec), |acc, z| &acc + z);
            Pole {
                location: Complex::new(&sum.re / &k, &sum.im / &k),
                multiplicity: g.len(),
            }
        })
        .collect()
}

/// Expansions at infinity of the forward transforms `s_{1,1}, ..., s_{1,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardMoments {
    tails: Vec<LaurentTail>,
}

impl ForwardMoments {
    /// First `len` moments of every forward measure.
    pub fn compute(sys: &NikishinSystem, len: usize) -> Self {
        let tails = (1..=sys.m())
            .map(|k| {
                let mu = sys.measure(1, k).expect("index in range");
                if len == 0 {
                    LaurentTail::new(Vec::new())
                } else {
                    mu.moments(len - 1)
                }
            })
            .collect();
        ForwardMoments { tails }
    }

    pub fn from_tails(tails: Vec<LaurentTail>) -> Self {
        ForwardMoments { tails }
    }

    pub fn tails(&self) -> &[LaurentTail] {
        &self.tails
    }

    pub fn len(&self) -> usize {
        self.tails.iter().map(LaurentTail::len).min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tails of `s_{1,j} + r_j`.
    pub fn perturbed(&self, pert: &RationalPerturbation) -> ForwardMoments {
        let extra = pert.tails(self.len());
        ForwardMoments {
            tails: self
                .tails
                .iter()
                .zip(&extra)
                .map(|(a, b)| a.sum(b))
                .collect(),
        }
    }
}

/// Singular-value diagnostics of a nullspace extraction.
#[derive(Clone, Debug)]
pub struct NullDiagnostics {
    /// Largest singular value inside the accepted nullspace.
    pub sigma_null: Scalar,
    /// Smallest singular value outside it (`None` when the matrix is
    /// structurally rank deficient beyond the accepted dimension).
    pub sigma_next: Option<Scalar>,
    pub sigma_max: Scalar,
    /// Nullity numerically larger than expected.
    pub nullity_flag: bool,
}

impl NullDiagnostics {
    /// The gap above the accepted nullspace is at least `2^(-P/4) sigma_max`,
    /// so the computed vector keeps about three quarters of the working bits.
    pub fn well_conditioned(&self, prec: Precision) -> bool {
        match &self.sigma_next {
            None => true,
            Some(next) => {
                self.sigma_max.is_zero() || *next >= prec.tolerance(1, 4) * &self.sigma_max
            }
        }
    }
}

const NULLITY_GAP_BITS: i32 = 10;

/// `a` with every row divided by its largest entry.
pub(crate) fn row_scaled(a: &Matrix, prec: Precision) -> Matrix {
    let mut scaled = a.clone();
    for i in 0..a.rows() {
        let m = a
            .row(i)
            .iter()
            .map(Scalar::abs)
            .fold(Scalar::zero(prec), Scalar::max);
        if !m.is_zero() {
            let inv = m.recip();
            for j in 0..a.cols() {
                let v = a.get(i, j) * &inv;
                scaled.set(i, j, v);
            }
        }
    }
    scaled
}

/// Orthonormal basis of the `dim` smallest right singular directions of `a`
/// after scaling each row to unit max-norm.
pub(crate) fn null_basis(
    a: &Matrix,
    dim: usize,
    prec: Precision,
) -> (Vec<Vec<Scalar>>, NullDiagnostics) {
    let scaled = row_scaled(a, prec);
    let svd = right_singular(&scaled, prec);
    let dim = dim.min(a.cols()).max(1);
    let sigma_null = svd.values[dim - 1].clone();
    let sigma_next = svd.values.get(dim).cloned();
    let sigma_max = svd
        .values
        .last()
        .cloned()
        .unwrap_or_else(|| Scalar::zero(prec));
    let nullity_flag = match &sigma_next {
        None => a.cols() > 1 && a.rows() == 0,
        Some(next) => *next <= sigma_null.mul_pow2(NULLITY_GAP_BITS),
    };
    let basis = svd.vectors.into_iter().take(dim).collect();
    (
        basis,
        NullDiagnostics {
            sigma_null,
            sigma_next,
            sigma_max,
            nullity_flag,
        },
    )
}

/// Polynomial part of `sum_j a_j f_j`, where `f_j` has tail `tails[j]`.
pub(crate) fn polynomial_part(
    a: &[Polynomial],
    tails: &[LaurentTail],
    prec: Precision,
) -> Polynomial {
    let top = a.iter().map(|p| p.degree()).max().unwrap_or(-1);
    if top < 1 {
        return Polynomial::zero();
    }
    let mut out = vec![Scalar::zero(prec); top as usize];
    for (p, tail) in a.iter().zip(tails) {
        for (l, al) in p.coeffs().iter().enumerate() {
            // a_l z^l * c_k z^(-k-1) lands on z^(l-k-1)
            for (e, slot) in out.iter_mut().enumerate().take(l) {
                *slot += al * &tail[l - e - 1];
            }
        }
    }
    Polynomial::new(out)
}

/// Coefficients of `z^(-s-1)`, `s = 0..len`, of `sum_j a_j f_j`, with the
/// matching sums of absolute values.
pub(crate) fn negative_part(
    a: &[Polynomial],
    tails: &[LaurentTail],
    len: usize,
    prec: Precision,
) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    let mut coeffs = vec![Scalar::zero(prec); len];
    let mut scales = vec![Scalar::zero(prec); len];
    for (p, tail) in a.iter().zip(tails) {
        if p.is_zero() || len == 0 {
            continue;
        }
        let needed = p.degree() as usize + len;
        if tail.len() < needed {
            return Err(Error::TailsTooShort {
                needed,
                available: tail.len(),
            });
        }
        for (l, al) in p.coeffs().iter().enumerate() {
            for s in 0..len {
                let term = al * &tail[l + s];
                scales[s] += term.abs();
                coeffs[s] += term;
            }
        }
    }
    Ok((coeffs, scales))
}

/// Runs `attempt` at `start`, doubling the precision until `accept` holds or
/// the precision ceiling is reached.
pub fn with_escalation<T>(
    start: Precision,
    mut attempt: impl FnMut(Precision) -> Result<T>,
    accept: impl Fn(&T) -> bool,
    describe: impl Fn(&T) -> (usize, usize),
) -> Result<(T, Precision)> {
    let mut prec = start;
    loop {
        let out = attempt(prec)?;
        if accept(&out) {
            return Ok((out, prec));
        }
        match prec.doubled() {
            Some(next) => {
                log::debug!(
                    "escalating precision from {} to {} bits",
                    prec.bits(),
                    next.bits()
                );
                prec = next;
            }
            None => {
                let (achieved, required) = describe(&out);
                return Err(Error::PrecisionExhausted {
                    achieved,
                    required,
                    bits: prec.bits(),
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{AtomicMeasure, Interval, Sign};

    fn prec() -> Precision {
        Precision::default()
    }

    #[test]
    fn multi_index_basics() {
        let n = MultiIndex::new(vec![3, 1, 2]).unwrap();
        assert_eq!(n.total(), 6);
        assert_eq!(n.max(), 3);
        assert_eq!(n.spread(), 2);
        assert_eq!(n.tail_len(), 13);
        assert_eq!(n.to_string(), "(3,1,2)");
        assert!(MultiIndex::new(vec![0, 0]).is_err());
        assert!(MultiIndex::new(vec![]).is_err());
    }

    fn two_generators() -> NikishinSystem {
        let p = prec();
        let g1 = AtomicMeasure::new(
            vec![Scalar::from_f64(-0.5, p)],
            vec![Scalar::one(p)],
            Sign::Positive,
            Interval::from_f64(-1.0, 0.0, p).unwrap(),
        )
        .unwrap();
        let g2 = AtomicMeasure::new(
            vec![Scalar::from_f64(2.0, p)],
            vec![Scalar::one(p)],
            Sign::Positive,
            Interval::from_f64(1.0, 3.0, p).unwrap(),
        )
        .unwrap();
        NikishinSystem::from_generators(vec![g1, g2]).unwrap()
    }

    fn rf(num: &[f64], den: &[f64]) -> RationalFn {
        RationalFn::new(
            Polynomial::from_f64(num, prec()),
            Polynomial::from_f64(den, prec()),
        )
        .unwrap()
    }

    #[test]
    fn perturbation_collects_poles() {
        let sys = two_generators();
        let pert = RationalPerturbation::new(
            vec![rf(&[1.0], &[-5.0, 1.0]), rf(&[1.0], &[5.0, 1.0])],
            &sys,
        )
        .unwrap();
        assert_eq!(pert.degree(), 2);
        assert_eq!(pert.poles().len(), 2);
        assert!(pert.poles().iter().all(|p| p.multiplicity == 1));

        let double = RationalPerturbation::new(
            vec![rf(&[1.0], &[25.0, -10.0, 1.0]), RationalFn::zero(prec())],
            &sys,
        )
        .unwrap();
        assert_eq!(double.poles().len(), 1);
        assert_eq!(double.poles()[0].multiplicity, 2);
        assert!((double.poles()[0].location.re.to_f64() - 5.0).abs() < 1e-30);
    }

    #[test]
    fn perturbation_rejects_bad_poles() {
        let sys = two_generators();
        let on_support = vec![rf(&[1.0], &[-2.0, 1.0]), RationalFn::zero(prec())];
        assert!(RationalPerturbation::new(on_support, &sys).is_err());
        let shared = vec![rf(&[1.0], &[-5.0, 1.0]), rf(&[2.0], &[-5.0, 1.0])];
        assert!(RationalPerturbation::new(shared, &sys).is_err());
        assert!(RationalPerturbation::new(vec![RationalFn::zero(prec())], &sys).is_err());
    }

    #[test]
    fn perturbed_tails_add_expansions() {
        let p = prec();
        let sys = two_generators();
        let pert =
            RationalPerturbation::new(vec![rf(&[1.0], &[-4.0, 1.0]), RationalFn::zero(p)], &sys)
                .unwrap();
        let fm = ForwardMoments::compute(&sys, 3).perturbed(&pert);
        // unit mass at -0.5 plus 1/(z-4): 1 + 1, -0.5 + 4, 0.25 + 16
        let got: Vec<f64> = fm.tails()[0].coeffs().iter().map(Scalar::to_f64).collect();
        assert_eq!(got, vec![2.0, 3.5, 16.25]);
    }

    #[test]
    fn polynomial_and_negative_parts() {
        // z^2 * (1/z + 2/z^2 + 3/z^3 + 4/z^4) = z + 2 + 3/z + 4/z^2
        let p = prec();
        let tail = LaurentTail::new(
            [1.0, 2.0, 3.0, 4.0]
                .iter()
                .map(|&x| Scalar::from_f64(x, p))
                .collect(),
        );
        let a = [Polynomial::from_f64(&[0.0, 0.0, 1.0], p)];
        let poly = polynomial_part(&a, std::slice::from_ref(&tail), p);
        assert_eq!(poly, Polynomial::from_f64(&[2.0, 1.0], p));
        let (neg, _) = negative_part(&a, std::slice::from_ref(&tail), 2, p).unwrap();
        assert_eq!(
            neg.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
            vec![3.0, 4.0]
        );
        assert!(negative_part(&a, std::slice::from_ref(&tail), 3, p).is_err());
    }

    #[test]
    fn escalation_doubles_until_accepted() {
        let (bits, prec) = with_escalation(
            Precision::default(),
            |p| Ok(p.bits()),
            |b| *b >= 1024,
            |_| (0, 0),
        )
        .unwrap();
        assert_eq!(bits, 1024);
        assert_eq!(prec.bits(), 1024);
        let err = with_escalation(
            Precision::default(),
            |p| Ok(p.bits()),
            |_| false,
            |_| (3, 5),
        );
        assert!(matches!(
            err,
            Err(Error::PrecisionExhausted {
                achieved: 3,
                required: 5,
                bits: 4096
            })
        ));
    }
}
