//! Dense singular value decomposition by one-sided Jacobi rotations.

use crate::scalar::{Precision, Scalar};

const MAX_SWEEPS: usize = 80;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, prec: Precision) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Scalar::zero(prec); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>, cols: usize) -> Self {
        let r = rows.len();
        let data: Vec<Scalar> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * cols, "ragged rows");
        Matrix {
            rows: r,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x` for a column vector `x`.
    pub fn apply(&self, x: &[Scalar], prec: Precision) -> Vec<Scalar> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Scalar::zero(prec), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }
}

/// Singular values in ascending order with their right singular vectors.
#[derive(Clone, Debug)]
pub struct RightSingular {
    pub values: Vec<Scalar>,
    pub vectors: Vec<Vec<Scalar>>,
}

fn dot(a: &[Scalar], b: &[Scalar], prec: Precision) -> Scalar {
    a.iter()
        .zip(b)
        .fold(Scalar::zero(prec), |acc, (x, y)| acc + x * y)
}

fn rotate(a: &mut [Scalar], b: &mut [Scalar], c: &Scalar, s: &Scalar) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let nx = &*x * c - &*y * s;
        let ny = &*x * s + &*y * c;
        *x = nx;
        *y = ny;
    }
}

/// Right singular pairs of `a` (`cols` of them; missing rows count as zero
/// singular values).
pub fn right_singular(a: &Matrix, prec: Precision) -> RightSingular {
    let n = a.cols();
    // work on columns of A and of V
    let mut w: Vec<Vec<Scalar>> = (0..n)
        .map(|j| {
            (0..a.rows())
                .map(|i| a.get(i, j).with_precision(prec))
                .collect()
        })
        .collect();
    let mut v: Vec<Vec<Scalar>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    if i == j {
                        Scalar::one(prec)
                    } else {
                        Scalar::zero(prec)
                    }
                })
                .collect()
        })
        .collect();
    let eps = prec.tolerance(1, 1) * Scalar::from_i64(n.max(1) as i64, prec);
    let one = Scalar::one(prec);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p], prec);
                let beta = dot(&w[q], &w[q], prec);
                if alpha.is_zero() || beta.is_zero() {
                    continue;
                }
                let gamma = dot(&w[p], &w[q], prec);
                if gamma.abs() <= &eps * (&alpha * &beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (&beta - &alpha) / gamma.mul_pow2(1);
                let t = {
                    let mag = (zeta.abs() + (&one + zeta.square()).sqrt()).recip();
                    if zeta.is_negative() {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = (&one + t.square()).sqrt().recip();
                let s = &c * &t;
                let (lo, hi) = w.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], &c, &s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], &c, &s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut pairs: Vec<(Scalar, Vec<Scalar>)> = w
        .iter()
        .map(|col| dot(col, col, prec).sqrt())
        .zip(v)
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors) = pairs.into_iter().unzip();
    RightSingular { values, vectors }
}
