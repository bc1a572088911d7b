//! Nikishin systems generated by atomic measures on consecutive intervals.

use crate::error::{Error, Result};
use crate::measures::{inverse_measure, realize, AtomicMeasure, Interval, MeasureSpec, Sign};
use crate::scalar::{Complex, Precision, Scalar};

/// Generators of a system, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub generators: Vec<MeasureSpec>,
}

/// `<alpha, beta>`: the nodes of `alpha` reweighted by the Cauchy transform
/// of `beta`.
pub fn product_measure(alpha: &AtomicMeasure, beta: &AtomicMeasure) -> Result<AtomicMeasure> {
    let prec = alpha.precision().max(beta.precision());
    let tol = prec.half_eps();
    for x in alpha.nodes() {
        for y in beta.nodes() {
            if (x - y).abs() <= tol {
                return Err(Error::SupportsOverlap(format!(
                    "node {} appears in both measures",
                    x.to_sci_string(20)
                )));
            }
        }
    }
    let mut sign = None;
    let mut weights = Vec::with_capacity(alpha.len());
    for (x, w) in alpha.nodes().iter().zip(alpha.weights()) {
        let v = beta.cauchy_real(x)?;
        let s = Sign::of(&v).ok_or_else(|| {
            Error::SupportsOverlap(format!(
                "transform vanishes at node {}",
                x.to_sci_string(20)
            ))
        })?;
        match sign {
            None => sign = Some(s),
            Some(prev) if prev != s => {
                return Err(Error::SupportsOverlap(
                    "transform changes sign on the first support".into(),
                ))
            }
            _ => {}
        }
        weights.push(w * v.abs());
    }
    let sign = alpha.sign().times(sign.expect("at least one node"));
    AtomicMeasure::new(
        alpha.nodes().to_vec(),
        weights,
        sign,
        alpha.support().clone(),
    )
}

/// Forward chains `s_{j,k} = <sigma_j, ..., sigma_k>` and reversed chains
/// `s_{k,j} = <sigma_k, ..., sigma_j>` for all `j <= k`.
#[derive(Clone, Debug)]
pub struct NikishinSystem {
    generators: Vec<AtomicMeasure>,
    // forward[j][d] = s_{j+1, j+1+d}
    forward: Vec<Vec<AtomicMeasure>>,
    // reversed[k][d] = s_{k+1, k+1-d}
    reversed: Vec<Vec<AtomicMeasure>>,
}

/// Realizes every generator at `prec` and builds the system.
pub fn build_system(spec: &SystemSpec, prec: Precision) -> Result<NikishinSystem> {
    let generators = spec
        .generators
        .iter()
        .map(|g| realize(g, prec))
        .collect::<Result<Vec<_>>>()?;
    NikishinSystem::from_generators(generators)
}

fn check_adjacent(j: usize, left: &AtomicMeasure, right: &AtomicMeasure) -> Result<()> {
    let adjacency = |msg: String| Error::Adjacency(j + 1, j + 2, msg);
    let (a, b) = (left.support(), right.support());
    let junction = if a.end() <= b.start() {
        (a.end() == b.start()).then(|| a.end().clone())
    } else if b.end() <= a.start() {
        (b.end() == a.start()).then(|| b.end().clone())
    } else {
        return Err(adjacency("intervals overlap".into()));
    };
    if let Some(x) = junction {
        let prec = left.precision();
        let gap_tol = prec.tolerance(1, 4);
        if left.nodes().iter().chain(right.nodes()).any(|y| *y == x) {
            return Err(adjacency("the shared endpoint carries mass".into()));
        }
        let near = |m: &AtomicMeasure| {
            m.nodes()
                .iter()
                .map(|y| (y - &x).abs())
                .fold(Scalar::infinity(prec), Scalar::min)
        };
        if near(left) + near(right) <= gap_tol {
            return Err(adjacency(
                "nodes too close across the shared endpoint".into(),
            ));
        }
    }
    Ok(())
}

impl NikishinSystem {
    pub fn from_generators(generators: Vec<AtomicMeasure>) -> Result<Self> {
        let m = generators.len();
        if m == 0 {
            return Err(Error::InvalidInput(
                "a system needs at least one generator".into(),
            ));
        }
        for j in 0..m - 1 {
            check_adjacent(j, &generators[j], &generators[j + 1])?;
        }
        let mut forward: Vec<Vec<AtomicMeasure>> = vec![Vec::new(); m];
        for j in (0..m).rev() {
            let mut row = vec![generators[j].clone()];
            for d in 1..m - j {
                row.push(product_measure(&generators[j], &forward[j + 1][d - 1])?);
            }
            forward[j] = row;
        }
        let mut reversed: Vec<Vec<AtomicMeasure>> = vec![Vec::new(); m];
        for k in 0..m {
            let mut row = vec![generators[k].clone()];
            for d in 1..=k {
                row.push(product_measure(&generators[k], &reversed[k - 1][d - 1])?);
            }
            reversed[k] = row;
        }
        Ok(NikishinSystem {
            generators,
            forward,
            reversed,
        })
    }

    /// Number of generators.
    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn precision(&self) -> Precision {
        self.generators[0].precision()
    }

    pub fn generators(&self) -> &[AtomicMeasure] {
        &self.generators
    }

    /// 1-based generator access.
    pub fn generator(&self, j: usize) -> &AtomicMeasure {
        &self.generators[j - 1]
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.generators
            .iter()
            .map(|g| g.support().clone())
            .collect()
    }

    /// `s_{j,k}` with 1-based indices: forward chain if `j <= k`, reversed
    /// chain otherwise.
    pub fn measure(&self, j: usize, k: usize) -> Result<&AtomicMeasure> {
        let m = self.m();
        if j == 0 || k == 0 || j > m || k > m {
            return Err(Error::IndexOutOfRange(format!("({j}, {k}) with m = {m}")));
        }
        Ok(if j <= k {
            &self.forward[j - 1][k - j]
        } else {
            &self.reversed[j - 1][j - k]
        })
    }

    /// Same system with every generator's weights multiplied by `factor`.
    pub fn scaled(&self, factor: &Scalar) -> Result<NikishinSystem> {
        NikishinSystem::from_generators(
            self.generators
                .iter()
                .map(|g| g.scaled(factor))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// Cauchy transform of `s_{j,k}` (1-based, either orientation).
pub fn s_hat_eval(sys: &NikishinSystem, j: usize, k: usize, z: &Complex) -> Result<Complex> {
    sys.measure(j, k)?.cauchy(z)
}

/// Absolute residual of an identity together with the magnitude of its
/// largest term.
#[derive(Clone, Debug)]
pub struct IdentityResidual {
    pub residual: Scalar,
    pub scale: Scalar,
}

impl IdentityResidual {
    /// Residual relative to the term scale (the residual itself when all
    /// terms vanish).
    pub fn relative(&self) -> Scalar {
        if self.scale.is_zero() {
            self.residual.clone()
        } else {
            &self.residual / &self.scale
        }
    }
}

fn signed(c: Complex, odd: bool) -> Complex {
    if odd {
        -c
    } else {
        c
    }
}

/// Residual of
/// `(-1)^(m-j) s_{m,j+1} + sum_{k=j+1}^{m-1} (-1)^(m-k) s_{m,k+1} s_{j+1,k} + s_{j+1,m}`
/// (all transforms at `z`) for `j` in `0..m`.
pub fn check_chile(sys: &NikishinSystem, j: usize, z: &Complex) -> Result<IdentityResidual> {
    let m = sys.m();
    if j >= m {
        return Err(Error::IndexOutOfRange(format!("j = {j} with m = {m}")));
    }
    let prec = z.precision();
    let mut terms = Vec::with_capacity(m - j + 1);
    terms.push(signed(s_hat_eval(sys, m, j + 1, z)?, (m - j) % 2 == 1));
    for k in j + 1..m {
        let prod = &s_hat_eval(sys, m, k + 1, z)? * &s_hat_eval(sys, j + 1, k, z)?;
        terms.push(signed(prod, (m - k) % 2 == 1));
    }
    terms.push(s_hat_eval(sys, j + 1, m, z)?);
    let scale = terms
        .iter()
        .map(Complex::abs)
        .fold(Scalar::zero(prec), Scalar::max);
    let sum = terms.iter().fold(Complex::zero(prec), |acc, t| &acc + t);
    Ok(IdentityResidual {
        residual: sum.abs(),
        scale,
    })
}

/// Residual of
/// `s_{1,k}/s_{1,1} - |s_{1,k}|/|s_{1,1}| + <tau, <s_{2,k}, sigma_1>>`
/// at `z`, where `tau` is the inverse measure of `sigma_1` and `|.|` is the
/// signed total mass.
pub fn check_ratio_formula(
    sys: &NikishinSystem,
    k: usize,
    z: &Complex,
) -> Result<IdentityResidual> {
    let m = sys.m();
    if m < 2 || k < 2 || k > m {
        return Err(Error::IndexOutOfRange(format!("k = {k} with m = {m}")));
    }
    let prec = z.precision();
    let s11 = sys.measure(1, 1)?;
    let s1k = sys.measure(1, k)?;
    let ratio = &s1k.cauchy(z)? / &s11.cauchy(z)?;
    let masses = Complex::real(s1k.mass() / s11.mass());
    let bracket = match inverse_measure(s11)?.tau {
        None => Complex::zero(prec),
        Some(tau) => {
            let inner = product_measure(sys.measure(2, k)?, s11)?;
            product_measure(&tau, &inner)?.cauchy(z)?
        }
    };
    let scale = ratio.abs().max(masses.abs()).max(bracket.abs());
    let residual = (&(&ratio - &masses) + &bracket).abs();
    Ok(IdentityResidual { residual, scale })
}
