use crate::algebra::{LaurentTail, Polynomial};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nikishin::{IdentityResidual, NikishinSystem};
use crate::scalar::{Complex, Precision, Scalar};

use super::{
    negative_part, null_basis, polynomial_part, ForwardMoments, MultiIndex, NullDiagnostics,
    RationalPerturbation,
};

/// Polynomials `(a_0, a_1, ..., a_m)` solving a type I problem.
#[derive(Clone, Debug)]
pub struct TypeIVector {
    /// `a[0]` is the polynomial part, `a[j]` multiplies the `j`-th function.
    pub a: Vec<Polynomial>,
    pub n: MultiIndex,
    /// How many order conditions were dropped (0 for the complete problem).
    pub incompleteness: usize,
    /// `k` such that the remainder is `O(z^(-k))`, capped at `|n| + 4`.
    pub residual_order: usize,
    pub diagnostics: NullDiagnostics,
}

impl TypeIVector {
    pub fn m(&self) -> usize {
        self.a.len() - 1
    }

    pub fn required_order(&self) -> usize {
        self.n.total() - self.incompleteness.min(self.n.total())
    }

    pub fn order_ok(&self) -> bool {
        self.residual_order >= self.required_order()
    }

    pub fn nullity_flag(&self) -> bool {
        self.diagnostics.nullity_flag
    }

    pub fn precision(&self) -> Precision {
        self.diagnostics.sigma_max.precision()
    }
}

fn tail_precision(tails: &[LaurentTail]) -> Precision {
    tails
        .iter()
        .find_map(|t| t.get(0).map(Scalar::precision))
        .unwrap_or_default()
}

/// Matrix of the type I order conditions: rows `t = 0..|n|-2-M`, columns
/// `(j, l)` for `l < n_j`, entries `tail_j[l + t]`.
pub fn assemble_type1_system(
    tails: &[LaurentTail],
    n: &MultiIndex,
    incompleteness: usize,
) -> Result<Matrix> {
    if tails.len() != n.m() {
        return Err(Error::InvalidInput(format!(
            "{} tails for a multi-index of length {}",
            tails.len(),
            n.m()
        )));
    }
    let prec = tail_precision(tails);
    let rows = (n.total() - 1).saturating_sub(incompleteness);
    let cols = n.total();
    let mut a = Matrix::zeros(rows, cols, prec);
    let mut col = 0;
    for (tail, &nj) in tails.iter().zip(n.components()) {
        if nj > 0 && rows > 0 && tail.len() < nj + rows - 1 {
            return Err(Error::TailsTooShort {
                needed: nj + rows - 1,
                available: tail.len(),
            });
        }
        for l in 0..nj {
            for t in 0..rows {
                a.set(t, col, tail[l + t].clone());
            }
            col += 1;
        }
    }
    Ok(a)
}

/// Scales a coefficient vector to unit max-norm with the leading coefficient
/// of the last nonzero block positive.
fn normalize(mut x: Vec<Scalar>, n: &MultiIndex, prec: Precision) -> Vec<Scalar> {
    let max = x
        .iter()
        .map(Scalar::abs)
        .fold(Scalar::zero(prec), Scalar::max);
    if max.is_zero() {
        return x;
    }
    let cut = prec.half_eps();
    let inv = max.recip();
    for v in x.iter_mut() {
        *v *= &inv;
    }
    let mut end = x.len();
    let mut lead_sign = None;
    for &nj in n.components().iter().rev() {
        let start = end - nj;
        if let Some(c) = x[start..end].iter().rev().find(|c| c.abs() > cut) {
            lead_sign = Some(c.is_negative());
            break;
        }
        end = start;
    }
    if lead_sign == Some(true) {
        for v in x.iter_mut() {
            *v = -&*v;
        }
    }
    x
}

fn split_blocks(x: &[Scalar], n: &MultiIndex) -> Vec<Polynomial> {
    let mut out = Vec::with_capacity(n.m());
    let mut start = 0;
    for &nj in n.components() {
        out.push(Polynomial::new(x[start..start + nj].to_vec()));
        start += nj;
    }
    out
}

/// Index `k` with the remainder `O(z^(-k))`, judged coefficientwise against
/// the size of the summed terms.
fn achieved_order(coeffs: &[Scalar], scales: &[Scalar], prec: Precision) -> usize {
    let tol = prec.half_eps();
    coeffs
        .iter()
        .zip(scales)
        .position(|(c, s)| c.abs() > &tol * s)
        .map(|s| s + 1)
        .unwrap_or(coeffs.len() + 1)
}

/// Solves the type I problem for functions with the given expansions,
/// dropping the last `incompleteness` order conditions.
///
/// When the problem leaves more than one free direction, the returned vector
/// is the member of the nullspace closest to the unit vector on the leading
/// coefficient of the last nonzero block.
pub fn solve_type1_with(
    moments: &ForwardMoments,
    n: &MultiIndex,
    incompleteness: usize,
) -> Result<TypeIVector> {
    let tails = moments.tails();
    let prec = tail_precision(tails);
    let matrix = assemble_type1_system(tails, n, incompleteness)?;
    let dim = (incompleteness + 1).min(n.total());
    let (basis, diagnostics) = null_basis(&matrix, dim, prec);
    let x = if basis.len() == 1 {
        basis.into_iter().next().expect("one vector")
    } else {
        let (pos, &last) = n
            .components()
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &k)| k > 0)
            .expect("multi-index is nonzero");
        let idx = n.components()[..pos].iter().sum::<usize>() + last - 1;
        let mut x = vec![Scalar::zero(prec); n.total()];
        for b in &basis {
            let c = &b[idx];
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += c * bi;
            }
        }
        if x.iter().all(Scalar::is_zero) {
            basis[0].clone()
        } else {
            x
        }
    };
    let x = normalize(x, n, prec);
    let blocks = split_blocks(&x, n);
    let a0 = -&polynomial_part(&blocks, tails, prec);
    let (coeffs, scales) = negative_part(&blocks, tails, n.total() + 3, prec)?;
    let residual_order = achieved_order(&coeffs, &scales, prec);
    let mut a = Vec::with_capacity(n.m() + 1);
    a.push(a0);
    a.extend(blocks);
    Ok(TypeIVector {
        a,
        n: n.clone(),
        incompleteness,
        residual_order,
        diagnostics,
    })
}

fn check_shape(sys: &NikishinSystem, n: &MultiIndex) -> Result<()> {
    if n.m() != sys.m() {
        return Err(Error::InvalidInput(format!(
            "multi-index {n} does not match a system of {} generators",
            sys.m()
        )));
    }
    Ok(())
}

/// Type I approximant of the forward transforms `s_{1,1}, ..., s_{1,m}`.
pub fn solve_type1(
    sys: &NikishinSystem,
    n: &MultiIndex,
    incompleteness: usize,
) -> Result<TypeIVector> {
    check_shape(sys, n)?;
    solve_type1_with(
        &ForwardMoments::compute(sys, n.tail_len()),
        n,
        incompleteness,
    )
}

/// Type I approximant of `s_{1,j} + r_j`.
pub fn solve_type1_perturbed(
    sys: &NikishinSystem,
    pert: &RationalPerturbation,
    n: &MultiIndex,
) -> Result<TypeIVector> {
    check_shape(sys, n)?;
    let moments = ForwardMoments::compute(sys, n.tail_len()).perturbed(pert);
    solve_type1_with(&moments, n, 0)
}

/// Outcome of clearing the perturbation's denominators.
#[derive(Clone, Debug)]
pub struct ReduceReport {
    /// `(p_0, T a_1, ..., T a_m)`.
    pub polys: Vec<Polynomial>,
    /// Largest violated coefficient of the unperturbed incomplete conditions,
    /// each relative to the size of the terms summed into it.
    pub residual: Scalar,
    /// Number of vanishing coefficients checked below the polynomial part.
    pub checked: usize,
}

impl ReduceReport {
    pub fn p0(&self) -> &Polynomial {
        &self.polys[0]
    }
}

/// Multiplies a perturbed solution by `T` and checks that the result solves
/// the unperturbed problem with `deg T` further conditions dropped.
///
/// `unperturbed` holds the expansions of the forward transforms alone.
pub fn perturbed_reduce(
    pert: &RationalPerturbation,
    v: &TypeIVector,
    unperturbed: &ForwardMoments,
) -> Result<ReduceReport> {
    let prec = v.precision();
    let t = pert.denominator();
    let tol = prec.half_eps();
    let mut p0 = t * &v.a[0];
    for (j, rj) in pert.functions().iter().enumerate() {
        if rj.is_zero() || v.a[j + 1].is_zero() {
            continue;
        }
        let (q, rem) = t.div_rem(rj.den())?;
        let t_scale = t.max_abs_coeff().unwrap_or_else(|| Scalar::one(prec));
        if rem.max_abs_coeff().is_some_and(|r| r > &tol * &t_scale) {
            return Err(Error::PoleCancellation(j + 1));
        }
        p0 = &p0 + &(&(&q * rj.num()) * &v.a[j + 1]);
    }
    let scaled: Vec<Polynomial> = v.a[1..].iter().map(|aj| t * aj).collect();

    let tails = unperturbed.tails();
    let pp = polynomial_part(&scaled, tails, prec);
    let diff = &pp + &p0;
    let poly_scale = pp
        .max_abs_coeff()
        .unwrap_or_else(|| Scalar::zero(prec))
        .max(p0.max_abs_coeff().unwrap_or_else(|| Scalar::zero(prec)));
    let mut residual = match diff.max_abs_coeff() {
        Some(d) if !poly_scale.is_zero() => d / &poly_scale,
        Some(d) => d,
        None => Scalar::zero(prec),
    };
    let checked = (v.n.total() - 1).saturating_sub(pert.degree() + v.incompleteness);
    let (coeffs, scales) = negative_part(&scaled, tails, checked, prec)?;
    for (c, s) in coeffs.iter().zip(&scales) {
        let r = if s.is_zero() { c.abs() } else { c.abs() / s };
        residual = residual.max(r);
    }
    let mut polys = Vec::with_capacity(scaled.len() + 1);
    polys.push(p0);
    polys.extend(scaled);
    Ok(ReduceReport {
        polys,
        residual,
        checked,
    })
}

/// `A_j(z) = a_j(z) + sum_{k>j} a_k(z) s_{j+1,k}(z)`, plus `sum_k a_k r_k`
/// at level 0 when a perturbation is given.
pub fn remainder_eval(
    sys: &NikishinSystem,
    pert: Option<&RationalPerturbation>,
    a: &[Polynomial],
    j: usize,
    z: &Complex,
) -> Result<Complex> {
    let m = a.len() - 1;
    if j > m || m != sys.m() {
        return Err(Error::IndexOutOfRange(format!(
            "level {j} with m = {}",
            sys.m()
        )));
    }
    let mut acc = a[j].eval_complex(z);
    for (k, ak) in a.iter().enumerate().skip(j + 1) {
        if ak.is_zero() {
            continue;
        }
        let s = sys.measure(j + 1, k)?.cauchy(z)?;
        acc += &(&ak.eval_complex(z) * &s);
    }
    if j == 0 {
        if let Some(p) = pert {
            for (k, rk) in p.functions().iter().enumerate() {
                if !rk.is_zero() {
                    acc += &(&a[k + 1].eval_complex(z) * &rk.eval(z));
                }
            }
        }
    }
    Ok(acc)
}

/// `A_1` at the nodes of `sigma_1` (real arithmetic).
pub(crate) fn first_level_on_nodes(sys: &NikishinSystem, a: &[Polynomial]) -> Result<Vec<Scalar>> {
    let sigma1 = sys.generator(1);
    sigma1
        .nodes()
        .iter()
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
}

/// `max_{nu <= order-2} |sum_i x_i^nu A_1(x_i) w_i|` over the atoms of
/// `sigma_1`, with `a = (a_0, ..., a_m)` a solution of order `order`.
pub fn check_orthogonality(
    sys: &NikishinSystem,
    a: &[Polynomial],
    order: usize,
) -> Result<IdentityResidual> {
    let sigma1 = sys.generator(1);
    let prec = sigma1.precision();
    let mut out = IdentityResidual {
        residual: Scalar::zero(prec),
        scale: Scalar::zero(prec),
    };
    if order < 2 {
        return Ok(out);
    }
    let values = first_level_on_nodes(sys, a)?;
    let mut terms: Vec<Scalar> = values
        .iter()
        .zip(sigma1.signed_weights())
        .map(|(v, w)| v * w)
        .collect();
    for nu in 0..=order - 2 {
        if nu > 0 {
            for (t, x) in terms.iter_mut().zip(sigma1.nodes()) {
                *t *= x;
            }
        }
        let sum = terms.iter().fold(Scalar::zero(prec), |acc, t| acc + t);
        let mag = terms
            .iter()
            .fold(Scalar::zero(prec), |acc, t| acc + t.abs());
        out.residual = out.residual.max(sum.abs());
        out.scale = out.scale.max(mag);
    }
    Ok(out)
}
