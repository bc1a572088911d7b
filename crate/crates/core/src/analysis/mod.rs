//! Ratio-limit errors, convergence-rate estimates, sign changes and pole
//! attraction for solved type I vectors.

mod experiment;

pub use experiment::{Experiment, GridSpec, Instance, MomentSource, PerturbationSpec, RowOutcome};

use crate::algebra::{poly_roots, Polynomial};
use crate::error::{Error, Result};
use crate::hermite_pade::{Pole, RationalPerturbation, TypeIVector};
use crate::measures::Interval;
use crate::nikishin::NikishinSystem;
use crate::scalar::{Complex, Precision, Scalar};

/// Points of a compact set away from the last support and the poles.
#[derive(Clone, Debug)]
pub struct EvalGrid {
    pub points: Vec<Complex>,
    pub description: String,
}

impl EvalGrid {
    /// Checks every point against the last support and the poles of `pert`.
    pub fn new(
        points: Vec<Complex>,
        description: impl Into<String>,
        sys: &NikishinSystem,
        pert: &RationalPerturbation,
        pole_margin: &Scalar,
    ) -> Result<Self> {
        let last = sys.generator(sys.m()).support();
        let tol = sys.precision().tolerance(1, 4);
        for z in &points {
            if last.distance(z) <= tol {
                return Err(Error::InvalidInput(format!(
                    "grid point {z:?} lies on the last support"
                )));
            }
            if pert
                .poles()
                .iter()
                .any(|p| (&p.location - z).abs() < *pole_margin)
            {
                return Err(Error::InvalidInput(format!(
                    "grid point {z:?} is too close to a pole"
                )));
            }
        }
        Ok(EvalGrid {
            points,
            description: description.into(),
        })
    }

    /// Circle of radius `radius_factor` times the outer radius of all supports
    /// and poles, plus a segment across the gap between the first and last
    /// supports lifted by `0.1 i`. Segment points near a pole are dropped.
    pub fn standard(
        sys: &NikishinSystem,
        pert: &RationalPerturbation,
        radius_factor: f64,
        circle_points: usize,
        segment_points: usize,
        pole_margin: &Scalar,
    ) -> Result<Self> {
        let prec = sys.precision();
        let mut outer = Scalar::zero(prec);
        for iv in sys.intervals() {
            outer = outer.max(iv.start().abs()).max(iv.end().abs());
        }
        for p in pert.poles() {
            outer = outer.max(p.location.abs());
        }
        let radius = outer * Scalar::from_f64(radius_factor, prec);
        let two_pi = Scalar::pi(prec).mul_pow2(1);
        let mut points = Vec::with_capacity(circle_points + segment_points);
        for k in 0..circle_points {
            let theta = &two_pi * Scalar::from_f64(k as f64 + 0.5, prec)
                / Scalar::from_i64(circle_points as i64, prec);
            points.push(Complex::from_polar(&radius, &theta));
        }
        let mut segments = 0;
        if sys.m() > 1 {
            if let Some((lo, hi)) =
                gap(sys.generator(1).support(), sys.generator(sys.m()).support())
            {
                let lift = Scalar::from_f64(0.1, prec);
                for k in 0..segment_points {
                    let frac = Scalar::from_f64(k as f64 + 0.5, prec)
                        / Scalar::from_i64(segment_points as i64, prec);
                    let z = Complex::new(&lo + (&hi - &lo) * frac, lift.clone());
                    if pert
                        .poles()
                        .iter()
                        .all(|p| (&p.location - &z).abs() >= *pole_margin)
                    {
                        points.push(z);
                        segments += 1;
                    }
                }
            }
        }
        let description = format!(
            "{circle_points} points on |z| = {} and {segments} points across the support gap at height 0.1",
            radius.to_sci_string(6)
        );
        EvalGrid::new(points, description, sys, pert, pole_margin)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Open gap between two disjoint intervals, if any.
fn gap(a: &Interval, b: &Interval) -> Option<(Scalar, Scalar)> {
    if a.end() < b.start() {
        Some((a.end().clone(), b.start().clone()))
    } else if b.end() < a.start() {
        Some((b.end().clone(), a.start().clone()))
    } else {
        None
    }
}

/// Supremum of `|approximant - target|` over a grid.
#[derive(Clone, Debug)]
pub struct SupError {
    pub absolute: Scalar,
    /// Supremum of `|target|` over the points that were used.
    pub target_sup: Scalar,
    /// Points skipped because `a_m` nearly vanishes there.
    pub skipped: usize,
}

impl SupError {
    /// `absolute / target_sup`.
    pub fn relative(&self) -> Scalar {
        if self.target_sup.is_zero() {
            self.absolute.clone()
        } else {
            &self.absolute / &self.target_sup
        }
    }
}

fn last_component(v: &TypeIVector) -> Result<&Polynomial> {
    let am = &v.a[v.m()];
    if am.is_zero() {
        return Err(Error::DegenerateLastComponent);
    }
    Ok(am)
}

fn sup_error(
    v: &TypeIVector,
    numerator: &Polynomial,
    grid: &EvalGrid,
    target: impl Fn(&Complex) -> Result<Complex>,
) -> Result<SupError> {
    let am = last_component(v)?;
    let prec = v.precision();
    let tol = prec.half_eps();
    let mut out = SupError {
        absolute: Scalar::zero(prec),
        target_sup: Scalar::zero(prec),
        skipped: 0,
    };
    for z in &grid.points {
        let den = am.eval_complex(z);
        if den.abs() < &tol * am.magnitude_bound(&z.abs()) {
            out.skipped += 1;
            continue;
        }
        let t = target(z)?;
        let err = (&(&numerator.eval_complex(z) / &den) - &t).abs();
        out.absolute = out.absolute.max(err);
        out.target_sup = out.target_sup.max(t.abs());
    }
    Ok(out)
}

fn parity(c: Complex, odd: bool) -> Complex {
    if odd {
        -c
    } else {
        c
    }
}

/// `sup |a_j / a_m - (-1)^(m-j) s_{m,j+1}|` over the grid, `1 <= j < m`.
pub fn ratio_error(
    sys: &NikishinSystem,
    v: &TypeIVector,
    j: usize,
    grid: &EvalGrid,
) -> Result<SupError> {
    let m = sys.m();
    if j == 0 || j >= m {
        return Err(Error::IndexOutOfRange(format!("j = {j} with m = {m}")));
    }
    sup_error(v, &v.a[j], grid, |z| {
        Ok(parity(sys.measure(m, j + 1)?.cauchy(z)?, (m - j) % 2 == 1))
    })
}

/// Limit of `a_0 / a_m`:
/// `(-1)^m s_{m,1} - sum_{j<m} (-1)^(m-j) r_j s_{m,j+1} - r_m`.
pub fn a0_target(
    sys: &NikishinSystem,
    pert: &RationalPerturbation,
    z: &Complex,
) -> Result<Complex> {
    let m = sys.m();
    let mut t = parity(sys.measure(m, 1)?.cauchy(z)?, m % 2 == 1);
    let r = pert.functions();
    for j in 1..m {
        if r[j - 1].is_zero() {
            continue;
        }
        let term = &r[j - 1].eval(z) * &sys.measure(m, j + 1)?.cauchy(z)?;
        t -= &parity(term, (m - j) % 2 == 1);
    }
    if !r[m - 1].is_zero() {
        t -= &r[m - 1].eval(z);
    }
    Ok(t)
}

/// `sup |a_0 / a_m - limit|` over the grid, with the limit from [`a0_target`].
pub fn ratio_error_a0(
    sys: &NikishinSystem,
    pert: &RationalPerturbation,
    v: &TypeIVector,
    grid: &EvalGrid,
) -> Result<SupError> {
    sup_error(v, &v.a[0], grid, |z| a0_target(sys, pert, z))
}

/// Errors of one solved multi-index, relative to the size of their targets.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub n: crate::hermite_pade::MultiIndex,
    /// `err_1, ..., err_{m-1}`.
    pub errors: Vec<Scalar>,
    pub err_0: Scalar,
    pub skipped: usize,
    pub nullity_flag: bool,
    pub precision_used: Precision,
    pub residual_order: usize,
}

/// Fills a [`ConvergenceRow`] for a solved vector.
pub fn convergence_row(
    sys: &NikishinSystem,
    pert: &RationalPerturbation,
    v: &TypeIVector,
    grid: &EvalGrid,
) -> Result<ConvergenceRow> {
    let mut skipped = 0;
    let mut errors = Vec::with_capacity(sys.m().saturating_sub(1));
    for j in 1..sys.m() {
        let e = ratio_error(sys, v, j, grid)?;
        skipped = skipped.max(e.skipped);
        errors.push(e.relative());
    }
    let e0 = ratio_error_a0(sys, pert, v, grid)?;
    skipped = skipped.max(e0.skipped);
    Ok(ConvergenceRow {
        n: v.n.clone(),
        errors,
        err_0: e0.relative(),
        skipped,
        nullity_flag: v.nullity_flag(),
        precision_used: v.precision(),
        residual_order: v.residual_order,
    })
}

/// Geometric rate fitted to an error sequence.
#[derive(Clone, Debug)]
pub struct RateEstimate {
    /// `exp(slope)` of the least-squares line through `(|n|, ln err)`.
    pub delta: f64,
    pub used: usize,
    /// Rows dropped because their error is exactly zero.
    pub excluded: usize,
}

/// Least-squares rate for `(|n|, error)` pairs with strictly increasing `|n|`.
pub fn estimate_rate(samples: &[(usize, Scalar)]) -> Result<RateEstimate> {
    if samples.len() < 3 || samples.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::TooFewRows {
            needed: 3,
            got: samples.len(),
        });
    }
    let used: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, e)| !e.is_zero())
        .map(|(n, e)| (*n as f64, e.ln().to_f64()))
        .collect();
    let excluded = samples.len() - used.len();
    if used.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: used.len(),
        });
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(RateEstimate {
        delta: (sxy / sxx).exp(),
        used: used.len(),
        excluded,
    })
}

/// Number of strict sign alternations, ignoring entries below
/// `2^(-P/2) max |value|`.
pub fn sign_changes(values: &[Scalar]) -> Result<usize> {
    let Some(first) = values.first() else {
        return Err(Error::VanishesOnGrid);
    };
    let prec = first.precision();
    let max = values
        .iter()
        .map(Scalar::abs)
        .fold(Scalar::zero(prec), Scalar::max);
    if max.is_zero() {
        return Err(Error::VanishesOnGrid);
    }
    let cut = prec.half_eps() * max;
    let mut count = 0;
    let mut last: Option<bool> = None;
    for v in values.iter().filter(|v| v.abs() > cut) {
        let neg = v.is_negative();
        if last.is_some_and(|l| l != neg) {
            count += 1;
        }
        last = Some(neg);
    }
    Ok(count)
}

/// Ordered evaluation points on the first support: the atoms of `sigma_1` and
/// the midpoints between them, or quarter points when `refined`.
pub fn first_support_grid(sys: &NikishinSystem, refined: bool) -> Vec<Scalar> {
    let nodes = sys.generator(1).nodes();
    let steps = if refined { 4 } else { 2 };
    let mut out = Vec::with_capacity(nodes.len() * steps);
    for (k, x) in nodes.iter().enumerate() {
        out.push(x.clone());
        if let Some(next) = nodes.get(k + 1) {
            for s in 1..steps {
                let frac = Scalar::from_i64(s as i64, x.precision())
                    / Scalar::from_i64(steps as i64, x.precision());
                out.push(x + (next - x) * frac);
            }
        }
    }
    out
}

/// Sign changes of `A_1` on the first support, refining the grid once when
/// the coarse count falls below `expected`.
pub fn first_level_sign_changes(
    sys: &NikishinSystem,
    a: &[Polynomial],
    expected: usize,
) -> Result<usize> {
    let eval = |pts: &[Scalar]| -> Result<Vec<Scalar>> {
        pts.iter()
            .map(|x| {
                let mut acc = a[1].eval(x);
                for (k, ak) in a.iter().enumerate().skip(2) {
                    if !ak.is_zero() {
                        acc += ak.eval(x) * sys.measure(2, k)?.cauchy_real(x)?;
                    }
                }
                Ok(acc)
            })
            .collect()
    };
    let coarse = sign_changes(&eval(&first_support_grid(sys, false))?)?;
    if coarse >= expected {
        return Ok(coarse);
    }
    sign_changes(&eval(&first_support_grid(sys, true))?)
}

/// Zeros of `a_j` near each pole of the perturbation, the zeros that have
/// left every bounded region of interest, and the rest that are neither near
/// a pole nor near the last support.
#[derive(Clone, Debug)]
pub struct PoleAttraction {
    pub counts: Vec<(Pole, usize)>,
    /// Zeros beyond `outer / eps`, where `outer` bounds all supports and poles.
    pub escaping: Vec<Complex>,
    pub stray: Vec<Complex>,
}

impl PoleAttraction {
    /// Every pole holds exactly its multiplicity in zeros and nothing strays.
    pub fn exact(&self) -> bool {
        self.stray.is_empty() && self.counts.iter().all(|(p, c)| *c == p.multiplicity)
    }
}

/// Counts the zeros of `a_j` (1-based) within `eps` of every pole of `pert`.
pub fn pole_attraction(
    sys: &NikishinSystem,
    pert: &RationalPerturbation,
    v: &TypeIVector,
    j: usize,
    eps: &Scalar,
) -> Result<PoleAttraction> {
    if j == 0 || j > v.m() {
        return Err(Error::IndexOutOfRange(format!(
            "component {j} with m = {}",
            v.m()
        )));
    }
    let last_support = sys.generator(sys.m()).support();
    let poles = pert.poles();
    for (i, p) in poles.iter().enumerate() {
        if last_support.distance(&p.location) <= *eps {
            return Err(Error::InvalidInput(format!(
                "radius {} reaches the last support from pole {:?}",
                eps.to_sci_string(6),
                p.location
            )));
        }
        for q in &poles[i + 1..] {
            if (&p.location - &q.location).abs() <= eps.mul_pow2(1) {
                return Err(Error::InvalidInput(format!(
                    "radius {} exceeds half the pole separation",
                    eps.to_sci_string(6)
                )));
            }
        }
    }
    let prec = v.precision();
    let mut outer = Scalar::zero(prec);
    for iv in sys.intervals() {
        outer = outer.max(iv.start().abs()).max(iv.end().abs());
    }
    for p in poles {
        outer = outer.max(p.location.abs());
    }
    let far = outer / eps;
    let aj = v.a[j].trim_relative(&prec.half_eps());
    if aj.is_zero() {
        return Err(Error::DegenerateComponent(j));
    }
    let roots = if aj.degree() > 0 {
        poly_roots(&aj)?
    } else {
        Vec::new()
    };
    let counts = poles
        .iter()
        .map(|p| {
            let c = roots
                .iter()
                .filter(|r| (&p.location - *r).abs() < *eps)
                .count();
            (p.clone(), c)
        })
        .collect();
    let (escaping, stray) = roots
        .into_iter()
        .filter(|r| {
            poles.iter().all(|p| (&p.location - r).abs() >= *eps)
                && last_support.distance(r) >= *eps
        })
        .partition(|r| r.abs() > far);
    Ok(PoleAttraction {
        counts,
        escaping,
        stray,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_pade::{solve_type1, MultiIndex};
    use crate::measures::{AtomicMeasure, Sign};

    fn prec() -> Precision {
        Precision::default()
    }

    fn s(x: f64) -> Scalar {
        Scalar::from_f64(x, prec())
    }

    #[test]
    fn rate_of_exact_geometric_sequence() {
        let samples = [(4, s(1e-2)), (8, s(1e-4)), (12, s(1e-6))];
        let r = estimate_rate(&samples).unwrap();
        assert!((r.delta - 10f64.powf(-0.5)).abs() < 1e-12);
        let flat = [(4, s(0.5)), (8, s(0.5)), (12, s(0.5))];
        assert!((estimate_rate(&flat).unwrap().delta - 1.0).abs() < 1e-12);
        assert!(estimate_rate(&[(4, s(0.1))]).is_err());
        assert!(estimate_rate(&[(4, s(0.1)), (4, s(0.1)), (8, s(0.1))]).is_err());
        let with_zero = [(4, s(1e-2)), (8, Scalar::zero(prec())), (12, s(1e-6))];
        assert_eq!(estimate_rate(&with_zero).unwrap().excluded, 1);
    }

    #[test]
    fn sign_change_examples() {
        assert_eq!(sign_changes(&[s(1.0), s(-1.0), s(1.0)]).unwrap(), 2);
        let tiny = prec().tolerance(3, 4);
        assert_eq!(sign_changes(&[s(1.0), -tiny, s(1.0)]).unwrap(), 0);
        assert!(matches!(
            sign_changes(&[s(0.0), s(0.0)]),
            Err(Error::VanishesOnGrid)
        ));
    }

    fn f1() -> NikishinSystem {
        let mu = AtomicMeasure::new(
            vec![s(-1.0), s(1.0)],
            vec![s(0.5), s(0.5)],
            Sign::Positive,
            Interval::from_f64(-1.5, 1.5, prec()).unwrap(),
        )
        .unwrap();
        NikishinSystem::from_generators(vec![mu]).unwrap()
    }

    #[test]
    fn single_generator_a0_limit() {
        let sys = f1();
        let v = solve_type1(&sys, &MultiIndex::new(vec![2]).unwrap(), 0).unwrap();
        let pert = RationalPerturbation::none(1, prec());
        let grid = EvalGrid::standard(&sys, &pert, 4.0, 16, 0, &s(0.1)).unwrap();
        // a_0 / a_1 = -1/z against -s(z) = -z/(z^2-1)
        let e = ratio_error_a0(&sys, &pert, &v, &grid).unwrap();
        let z = Complex::from_f64(6.0, 0.0, prec());
        let expected = (&z.recip() - &(&z / &(&(&z * &z) - &Complex::one(prec())))).abs();
        assert!(e.absolute > expected.mul_pow2(-1));
        assert!(ratio_error(&sys, &v, 1, &grid).is_err());
        // A_1 = z on the atoms and midpoint changes sign once
        assert_eq!(first_level_sign_changes(&sys, &v.a, 1).unwrap(), 1);
    }

    #[test]
    fn grids_avoid_poles_and_support() {
        let sys = f1();
        let pert = RationalPerturbation::none(1, prec());
        let bad = vec![Complex::from_f64(0.5, 0.0, prec())];
        assert!(EvalGrid::new(bad, "on support", &sys, &pert, &s(0.1)).is_err());
        let g = EvalGrid::standard(&sys, &pert, 4.0, 64, 16, &s(0.1)).unwrap();
        assert_eq!(g.len(), 64);
        for z in &g.points {
            assert!((z.abs() - s(6.0)).abs() < prec().tolerance(3, 4));
        }
    }

    #[test]
    fn no_poles_no_counts() {
        let sys = f1();
        let v = solve_type1(&sys, &MultiIndex::new(vec![3]).unwrap(), 0).unwrap();
        let pert = RationalPerturbation::none(1, prec());
        let pa = pole_attraction(&sys, &pert, &v, 1, &s(0.25)).unwrap();
        assert!(pa.counts.is_empty());
    }
}
