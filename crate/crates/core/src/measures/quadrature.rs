//! Gauss–Jacobi rules at working precision.
//!
//! Nodes are the zeros of `P_n^(alpha, beta)`, found by a real Aberth iteration
//! driven by the three-term recurrence; weights come from the closed form in
//! terms of `P_n'` at the nodes.

use crate::error::{Error, Result};
use crate::scalar::{Precision, Scalar};

/// `(P_n(x), P_{n-1}(x))` for the Jacobi family.
fn jacobi_pair(n: usize, alpha: &Scalar, beta: &Scalar, x: &Scalar) -> (Scalar, Scalar) {
    let prec = x.precision();
    let one = Scalar::one(prec);
    let two = Scalar::from_i64(2, prec);
    let ab = alpha + beta;
    let mut prev = one.clone();
    if n == 0 {
        return (prev, Scalar::zero(prec));
    }
    let mut cur = (alpha + &one) + (&ab + &two) * (x - &one) / &two;
    for k in 2..=n {
        let k_s = Scalar::from_i64(k as i64, prec);
        let two_k_ab = &k_s * &two + &ab;
        let a1 = &two * &k_s * (&k_s + &ab) * (&two_k_ab - &two);
        let a2 = (&two_k_ab - &one) * (alpha.square() - beta.square());
        let a3 = (&two_k_ab - &one) * &two_k_ab * (&two_k_ab - &two);
        let a4 = &two * (&k_s + alpha - &one) * (&k_s + beta - &one) * &two_k_ab;
        let next = ((&a2 + &a3 * x) * &cur - &a4 * &prev) / &a1;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `(P_n(x), P_n'(x))` for interior `x`.
fn jacobi_with_derivative(n: usize, alpha: &Scalar, beta: &Scalar, x: &Scalar) -> (Scalar, Scalar) {
    let prec = x.precision();
    let (p, pm1) = jacobi_pair(n, alpha, beta, x);
    let n_s = Scalar::from_i64(n as i64, prec);
    let two_n_ab = n_s.mul_pow2(1) + alpha + beta;
    let one = Scalar::one(prec);
    let num = &n_s * ((alpha - beta) - &two_n_ab * x) * &p
        + (&n_s + alpha) * (&n_s + beta) * &pm1 * Scalar::from_i64(2, prec);
    let den = &two_n_ab * (one - x.square());
    (p, num / den)
}

/// Nodes (ascending) and weights of the `n`-point rule for
/// `(1 - x)^alpha (1 + x)^beta` on `[-1, 1]`.
pub fn gauss_jacobi(
    n: usize,
    alpha: &Scalar,
    beta: &Scalar,
    prec: Precision,
) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    let minus_one = -Scalar::one(prec);
    if n == 0 {
        return Err(Error::InvalidInput("node_count must be at least 1".into()));
    }
    if *alpha <= minus_one || *beta <= minus_one {
        return Err(Error::InvalidInput(
            "jacobi parameters must exceed -1".into(),
        ));
    }
    let pi = Scalar::pi(prec);
    // Chebyshev points as starting guesses, ascending.
    let mut x: Vec<Scalar> = (0..n)
        .map(|k| {
            let theta = &pi * Scalar::from_i64(2 * k as i64 + 1, prec)
                / Scalar::from_i64(2 * n as i64, prec);
            -theta.cos()
        })
        .collect();

    let stop = prec.tolerance(1, 1).mul_pow2(8);
    let mut converged = false;
    for _ in 0..(200 + prec.bits() as usize) {
        let mut max_step = Scalar::zero(prec);
        for k in 0..n {
            let (p, dp) = jacobi_with_derivative(n, alpha, beta, &x[k]);
            if p.is_zero() {
                continue;
            }
            let ratio = &dp / &p;
            let mut repulsion = Scalar::zero(prec);
            for (j, xj) in x.iter().enumerate() {
                if j != k {
                    repulsion += (&x[k] - xj).recip();
                }
            }
            let step = (ratio - repulsion).recip();
            x[k] -= &step;
            max_step = max_step.max(step.abs());
        }
        if max_step <= stop {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InvalidInput(format!(
            "gauss-jacobi iteration failed to converge for n = {n}"
        )));
    }
    x.sort_by(|a, b| a.total_cmp(b));

    let one = Scalar::one(prec);
    let n_s = Scalar::from_i64(n as i64, prec);
    let n_factorial = (&n_s + &one).gamma();
    let constant = (&n_s + alpha + &one).gamma() * (&n_s + beta + &one).gamma()
        / ((&n_s + alpha + beta + &one).gamma() * n_factorial)
        * Scalar::from_i64(2, prec).pow(&(alpha + beta + &one));
    let weights = x
        .iter()
        .map(|xi| {
            let (_, dp) = jacobi_with_derivative(n, alpha, beta, xi);
            &constant / ((&one - xi.square()) * dp.square())
        })
        .collect();
    Ok((x, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> Precision {
        Precision::default()
    }

    #[test]
    fn one_point_legendre() {
        let p = prec();
        let (x, w) = gauss_jacobi(1, &Scalar::zero(p), &Scalar::zero(p), p).unwrap();
        assert!(x[0].is_zero() || x[0].abs() < p.tolerance(9, 10));
        assert!((&w[0] - Scalar::from_i64(2, p)).abs() < p.tolerance(9, 10));
    }

    #[test]
    fn two_point_chebyshev() {
        // oracle: Chebyshev-Gauss nodes cos((2k-1) pi / 4), weights pi / 2
        let p = prec();
        let half = Scalar::from_f64(-0.5, p);
        let (x, w) = gauss_jacobi(2, &half, &half, p).unwrap();
        let c = (Scalar::pi(p) / Scalar::from_i64(4, p)).cos();
        let tol = p.tolerance(9, 10);
        assert!((&x[0] + &c).abs() < tol);
        assert!((&x[1] - &c).abs() < tol);
        let pi_half = Scalar::pi(p).mul_pow2(-1);
        for wi in &w {
            assert!((wi - &pi_half).abs() < tol);
        }
    }

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let p = prec();
        let n = 16;
        let (x, w) = gauss_jacobi(n, &Scalar::zero(p), &Scalar::zero(p), p).unwrap();
        for deg in 0..(2 * n) {
            let q: Scalar = x.iter().zip(&w).fold(Scalar::zero(p), |acc, (xi, wi)| {
                acc + wi * xi.powi(deg as i32)
            });
            let exact = if deg % 2 == 1 {
                Scalar::zero(p)
            } else {
                Scalar::from_i64(2, p) / Scalar::from_i64(deg as i64 + 1, p)
            };
            assert!((q - exact).abs() < p.tolerance(7, 8), "degree {deg}");
        }
    }

    #[test]
    fn jacobi_rule_matches_beta_integral() {
        // int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^(a+b+1) B(a+1, b+1)
        let p = prec();
        let a = Scalar::from_f64(0.5, p);
        let b = Scalar::from_f64(-0.25, p);
        let (_, w) = gauss_jacobi(9, &a, &b, p).unwrap();
        let total = w.iter().fold(Scalar::zero(p), |acc, wi| acc + wi);
        let one = Scalar::one(p);
        let exact = Scalar::from_i64(2, p).pow(&(&a + &b + &one))
            * (&a + &one).gamma()
            * (&b + &one).gamma()
            / (&a + &b + Scalar::from_i64(2, p)).gamma();
        assert!((total - exact).abs() < p.tolerance(7, 8));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = prec();
        let bad = Scalar::from_f64(-1.0, p);
        assert!(gauss_jacobi(3, &bad, &Scalar::zero(p), p).is_err());
        assert!(gauss_jacobi(0, &Scalar::zero(p), &Scalar::zero(p), p).is_err());
    }
}
