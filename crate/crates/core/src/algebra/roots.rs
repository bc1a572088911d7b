//! Simultaneous root finding (Aberth–Ehrlich) at working precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Complex, Precision, Scalar};

use super::polynomial::Polynomial;

const MAX_SWEEPS: usize = 4000;
const MAX_RESTARTS: usize = 6;

/// All `deg p` complex roots of a real polynomial, with multiplicity.
///
/// Non-real roots are returned as exact conjugate pairs. The result is sorted
/// by real part, then imaginary part.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex>> {
    if p.degree() <= 0 {
        return Err(Error::ConstantPolynomial);
    }
    let prec = p.precision().unwrap_or_default();
    let degree = p.degree() as usize;

    // Zeros at the origin are split off exactly.
    let shift = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = Polynomial::new(p.coeffs()[shift..].to_vec()).monic();
    let mut roots: Vec<Complex> = (0..shift).map(|_| Complex::zero(prec)).collect();

    if reduced.degree() > 0 {
        let found = match reduced.degree() {
            1 => vec![Complex::real(-&reduced.coeffs()[0])],
            _ => aberth(&reduced, prec)?,
        };
        roots.extend(symmetrize(found, prec));
    }

    let check = prec.half_eps();
    let norm = p.max_abs_coeff().unwrap_or_else(|| Scalar::one(prec));
    for r in &roots {
        let radius = r.abs().max(Scalar::one(prec));
        let bound = &check * &norm * radius.powi(degree as i32);
        if p.eval_complex(r).abs() > bound {
            return Err(Error::RootsNotConverged { degree });
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn aberth(p: &Polynomial, prec: Precision) -> Result<Vec<Complex>> {
    let n = p.degree() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0fa_b3e7);
    let mut z = initial_guesses(p, prec);
    // convergence is judged against the backward error of the evaluation
    let eps = prec.tolerance(1, 1).mul_pow2(8) * Scalar::from_i64(n as i64, prec);

    for _attempt in 0..=MAX_RESTARTS {
        let mut done = vec![false; n];
        for _sweep in 0..MAX_SWEEPS {
            for k in 0..n {
                if done[k] {
                    continue;
                }
                let (val, der) = p.eval_with_derivative(&z[k]);
                let scale = p.magnitude_bound(&z[k].abs());
                if val.abs() <= &eps * &scale {
                    done[k] = true;
                    continue;
                }
                if der.is_zero() {
                    z[k] = jitter(&z[k], &mut rng, prec);
                    continue;
                }
                let newton = &val / &der;
                let mut repulsion = Complex::zero(prec);
                for (j, zj) in z.iter().enumerate() {
                    if j != k {
                        let diff = &z[k] - zj;
                        if !diff.is_zero() {
                            repulsion += &diff.recip();
                        }
                    }
                }
                let denom = Complex::one(prec) - &newton * &repulsion;
                let step = if denom.is_zero() {
                    newton
                } else {
                    &newton / &denom
                };
                let next = &z[k] - &step;
                let tiny = step.abs() <= z[k].abs() * prec.tolerance(1, 1).mul_pow2(4);
                z[k] = next;
                if tiny {
                    done[k] = true;
                }
            }
            if done.iter().all(|&d| d) {
                return Ok(z);
            }
        }
        // stagnation: perturb the current approximations and try again
        z = z.iter().map(|zk| jitter(zk, &mut rng, prec)).collect();
    }
    Err(Error::RootsNotConverged { degree: n })
}

/// Points on a circle whose radius is the geometric mean of the root moduli,
/// clamped by the Fujiwara bound, with an irrational angular offset.
fn initial_guesses(p: &Polynomial, prec: Precision) -> Vec<Complex> {
    let n = p.degree() as usize;
    let c = p.coeffs();
    let lead = &c[n];
    let mut bound = Scalar::zero(prec);
    for (k, ck) in c.iter().enumerate().take(n) {
        if ck.is_zero() {
            continue;
        }
        let ratio = (ck / lead).abs();
        let e = Scalar::one(prec) / Scalar::from_i64((n - k) as i64, prec);
        let mut r = ratio.pow(&e);
        if k == 0 {
            r = r.mul_pow2(-1);
        }
        bound = bound.max(r);
    }
    let fujiwara = bound.mul_pow2(1);
    let mean = (&c[0] / lead)
        .abs()
        .pow(&(Scalar::one(prec) / Scalar::from_i64(n as i64, prec)));
    let radius = if mean.is_zero() || mean > fujiwara {
        fujiwara.mul_pow2(-1)
    } else {
        mean
    };
    let two_pi = Scalar::pi(prec).mul_pow2(1);
    (0..n)
        .map(|k| {
            let theta = &two_pi * Scalar::from_i64(k as i64, prec)
                / Scalar::from_i64(n as i64, prec)
                + Scalar::from_f64(0.4, prec);
            Complex::from_polar(&radius, &theta)
        })
        .collect()
}

fn jitter(z: &Complex, rng: &mut ChaCha8Rng, prec: Precision) -> Complex {
    let scale = z.abs().max(Scalar::one(prec)) * Scalar::from_f64(1e-3, prec);
    let dr: f64 = rng.gen_range(-1.0..1.0);
    let di: f64 = rng.gen_range(-1.0..1.0);
    Complex::new(
        &z.re + &scale * Scalar::from_f64(dr, prec),
        &z.im + &scale * Scalar::from_f64(di, prec),
    )
}

/// Snaps nearly-real roots onto the real axis and pairs the rest with their
/// closest conjugate partner, averaging each pair.
fn symmetrize(roots: Vec<Complex>, prec: Precision) -> Vec<Complex> {
    let real_tol = prec.tolerance(1, 4);
    let mut out = Vec::with_capacity(roots.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for r in roots {
        let scale = r.abs().max(Scalar::one(prec));
        if r.im.abs() <= &real_tol * &scale {
            out.push(Complex::real(r.re));
        } else if r.im.is_positive() {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    if upper.len() != lower.len() {
        // unbalanced: leave as computed rather than invent partners
        out.extend(upper);
        out.extend(lower);
        return out;
    }
    for u in upper {
        let target = u.conj();
        let (idx, _) = lower
            .iter()
            .enumerate()
            .map(|(i, l)| (i, (l - &target).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("balanced halves");
        let l = lower.swap_remove(idx);
        let re = (&u.re + &l.re).mul_pow2(-1);
        let im = (&u.im - &l.im).mul_pow2(-1);
        out.push(Complex::new(re.clone(), im.clone()));
        out.push(Complex::new(re, -im));
    }
    out
}
