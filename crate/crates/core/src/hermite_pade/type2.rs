use crate::algebra::{LaurentTail, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::{right_singular, Matrix};
use crate::nikishin::NikishinSystem;
use crate::scalar::{Precision, Scalar};

use super::{negative_part, polynomial_part, row_scaled, ForwardMoments, MultiIndex};

/// Common denominator `Q` and numerators `P_j` of a type II approximant.
#[derive(Clone, Debug)]
pub struct TypeIIVector {
    pub q: Polynomial,
    pub p: Vec<Polynomial>,
    pub n: MultiIndex,
    /// Numerical dimension of the solution space (1 when unique).
    pub nullity: usize,
}

impl TypeIIVector {
    pub fn nullity_flag(&self) -> bool {
        self.nullity > 1
    }
}

/// Reduces a basis to the member of least degree by eliminating the highest
/// coefficients first.
fn minimal_degree(mut basis: Vec<Vec<Scalar>>, prec: Precision) -> Vec<Scalar> {
    let tol = prec.half_eps();
    while basis.len() > 1 {
        let width = basis[0].len();
        // highest column where some vector is still significant
        let Some((col, pivot)) = (0..width).rev().find_map(|c| {
            let (idx, mag) = basis
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v[c].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
            (mag > tol).then_some((c, idx))
        }) else {
            break;
        };
        let p = basis.swap_remove(pivot);
        for v in basis.iter_mut() {
            let f = &v[col] / &p[col];
            for (x, y) in v.iter_mut().zip(&p) {
                *x -= &f * y;
            }
            v[col] = Scalar::zero(prec);
        }
    }
    basis.swap_remove(0)
}

/// Type II approximant for functions with the given expansions: `Q` of
/// degree at most `|n|` with `Q f_j - P_j = O(z^(-n_j-1))`.
pub fn solve_type2_with(moments: &ForwardMoments, n: &MultiIndex) -> Result<TypeIIVector> {
    let tails = moments.tails();
    if tails.len() != n.m() {
        return Err(Error::InvalidInput(format!(
            "{} tails for a multi-index of length {}",
            tails.len(),
            n.m()
        )));
    }
    let prec = tails[0][0].precision();
    let total = n.total();
    let mut rows = Vec::with_capacity(total);
    for (tail, &nj) in tails.iter().zip(n.components()) {
        if nj > 0 && tail.len() < total + nj {
            return Err(Error::TailsTooShort {
                needed: total + nj,
                available: tail.len(),
            });
        }
        for t in 0..nj {
            rows.push((0..=total).map(|i| tail[i + t].clone()).collect());
        }
    }
    let matrix = row_scaled(&Matrix::from_rows(rows, total + 1), prec);
    let svd = right_singular(&matrix, prec);
    let sigma_max = svd
        .values
        .last()
        .cloned()
        .unwrap_or_else(|| Scalar::zero(prec));
    let cut = prec.half_eps() * &sigma_max;
    let nullity = svd.values.iter().filter(|s| **s <= cut).count().max(1);
    let basis: Vec<Vec<Scalar>> = svd.vectors.into_iter().take(nullity).collect();
    let q = Polynomial::new(minimal_degree(basis, prec))
        .trim_relative(&prec.half_eps())
        .monic();
    let p = tails
        .iter()
        .map(|tail| polynomial_part(std::slice::from_ref(&q), std::slice::from_ref(tail), prec))
        .collect();
    Ok(TypeIIVector {
        q,
        p,
        n: n.clone(),
        nullity,
    })
}

/// Type II approximant of the forward transforms.
pub fn solve_type2(sys: &NikishinSystem, n: &MultiIndex) -> Result<TypeIIVector> {
    if n.m() != sys.m() {
        return Err(Error::InvalidInput(format!(
            "multi-index {n} does not match a system of {} generators",
            sys.m()
        )));
    }
    solve_type2_with(&ForwardMoments::compute(sys, n.tail_len()), n)
}

/// First `len` coefficients (of `z^-1, z^-2, ...`) of `Q f_j - P_j`, with
/// `j` 1-based.
pub fn type2_remainder_tail(
    moments: &ForwardMoments,
    v: &TypeIIVector,
    j: usize,
    len: usize,
) -> Result<Vec<Scalar>> {
    let tail: &LaurentTail = moments
        .tails()
        .get(j.wrapping_sub(1))
        .ok_or_else(|| Error::IndexOutOfRange(format!("component {j}")))?;
    let prec = tail[0].precision();
    let (coeffs, _) = negative_part(
        std::slice::from_ref(&v.q),
        std::slice::from_ref(tail),
        len,
        prec,
    )?;
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{AtomicMeasure, Interval, Sign};

    fn prec() -> Precision {
        Precision::default()
    }

    fn measure(atoms: &[(f64, f64)], support: (f64, f64)) -> AtomicMeasure {
        let p = prec();
        AtomicMeasure::new(
            atoms.iter().map(|a| Scalar::from_f64(a.0, p)).collect(),
            atoms.iter().map(|a| Scalar::from_f64(a.1, p)).collect(),
            Sign::Positive,
            Interval::from_f64(support.0, support.1, p).unwrap(),
        )
        .unwrap()
    }

    fn poly_close(a: &Polynomial, b: &[f64]) -> bool {
        a.degree() == b.len() as isize - 1
            && a.coeffs()
                .iter()
                .zip(b)
                .all(|(x, &y)| (x - Scalar::from_f64(y, prec())).abs() < prec().tolerance(3, 4))
    }

    #[test]
    fn two_atoms_recovered_exactly() {
        let sys =
            NikishinSystem::from_generators(vec![measure(&[(-1.0, 0.5), (1.0, 0.5)], (-1.0, 1.0))])
                .unwrap();
        let n = MultiIndex::new(vec![2]).unwrap();
        let v = solve_type2(&sys, &n).unwrap();
        assert!(poly_close(&v.q, &[-1.0, 0.0, 1.0]));
        assert!(poly_close(&v.p[0], &[0.0, 1.0]));
        let fm = ForwardMoments::compute(&sys, n.tail_len());
        let rest = type2_remainder_tail(&fm, &v, 1, 6).unwrap();
        assert!(rest.iter().all(|c| c.abs() < prec().tolerance(3, 4)));
        assert!(!v.nullity_flag());
    }

    #[test]
    fn unit_mass_at_origin() {
        let sys =
            NikishinSystem::from_generators(vec![measure(&[(0.0, 1.0)], (-1.0, 1.0))]).unwrap();
        let v = solve_type2(&sys, &MultiIndex::new(vec![1]).unwrap()).unwrap();
        assert!(poly_close(&v.q, &[0.0, 1.0]));
        assert!(poly_close(&v.p[0], &[1.0]));
    }

    #[test]
    fn excess_degree_picks_minimal_denominator() {
        let sys =
            NikishinSystem::from_generators(vec![measure(&[(-1.0, 0.5), (1.0, 0.5)], (-1.0, 1.0))])
                .unwrap();
        let v = solve_type2(&sys, &MultiIndex::new(vec![3]).unwrap()).unwrap();
        assert!(v.nullity_flag());
        assert!(poly_close(&v.q, &[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn two_generators_orthogonal_to_constants() {
        let p = prec();
        let sys = NikishinSystem::from_generators(vec![
            measure(&[(-0.9, 0.4), (-0.5, 1.0), (-0.1, 0.3)], (-1.0, 0.0)),
            measure(&[(1.5, 1.0), (2.5, 2.0)], (1.0, 3.0)),
        ])
        .unwrap();
        let v = solve_type2(&sys, &MultiIndex::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(v.q.degree(), 2);
        for k in 1..=2 {
            let mu = sys.measure(1, k).unwrap();
            let integral = mu
                .nodes()
                .iter()
                .zip(mu.signed_weights())
                .fold(Scalar::zero(p), |acc, (x, w)| acc + v.q.eval(x) * w);
            assert!(integral.abs() < p.tolerance(3, 4));
        }
    }
}
