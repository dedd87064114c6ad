//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use spreadcs::operators::DenseMatrix;
use spreadcs::{Complex64, LinearOperator};

pub type C = Complex64;

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C> {
    (0..n)
        .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[C]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Relative mismatch of `<A x, y>` and `<x, A* y>`.
pub fn dot_test(op: &LinearOperator, rng: &mut impl Rng) -> f64 {
    let x = random_vec(rng, op.in_dim());
    let y = random_vec(rng, op.out_dim());
    let lhs = inner(&op.apply(&x), &y);
    let rhs = inner(&x, &op.apply_adjoint(&y));
    (lhs - rhs).norm() / (norm(&op.apply(&x)) * norm(&y)).max(1e-300)
}

/// Column `j` of the unitary inverse DFT, `exp(2 pi i j k / n) / sqrt(n)`.
pub fn fourier_dense(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |k, j| {
        C::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * (j * k % n) as f64 / n as f64)
    })
}

/// Sylvester Hadamard matrix divided by `sqrt(n)`.
pub fn hadamard_dense(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        C::new(sign / (n as f64).sqrt(), 0.0)
    })
}

/// Haar synthesis: column 0 is the constant, then wavelets from coarse to fine.
pub fn haar_dense(n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, 0)] = C::new(1.0 / (n as f64).sqrt(), 0.0);
    }
    let mut col = 1;
    let mut blocks = 1;
    while blocks < n {
        let width = n / blocks;
        let amp = 1.0 / (width as f64).sqrt();
        for b in 0..blocks {
            for i in 0..width {
                let sign = if i < width / 2 { 1.0 } else { -1.0 };
                m[(b * width + i, col)] = C::new(sign * amp, 0.0);
            }
            col += 1;
        }
        blocks *= 2;
    }
    m
}

/// Solves the square system `m z = b` by Gaussian elimination with partial
/// pivoting; `None` when numerically singular.
pub fn solve_square(mut m: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &c| m[a][col].norm().total_cmp(&m[c][col].norm()))?;
        if m[pivot][col].norm() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                let v = m[col][c];
                m[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut z = vec![C::new(0.0, 0.0); k];
    for row in (0..k).rev() {
        let mut acc = b[row];
        for c in row + 1..k {
            acc -= m[row][c] * z[c];
        }
        z[row] = acc / m[row][row];
    }
    Some(z)
}

/// Least-squares fit of `y` on the columns `support` of `a`.
pub fn least_squares(a: &DenseMatrix, support: &[usize], y: &[C]) -> Option<Vec<C>> {
    let cols: Vec<Vec<C>> = support.iter().map(|&j| a.column(j)).collect();
    let gram: Vec<Vec<C>> = cols
        .iter()
        .map(|ci| cols.iter().map(|cj| inner(cj, ci)).collect())
        .collect();
    let rhs: Vec<C> = cols.iter().map(|ci| inner(y, ci)).collect();
    solve_square(gram, rhs)
}

fn subsets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max_size {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < n - size + p) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

pub struct OracleSolution {
    pub alpha: Vec<C>,
    /// True when no other candidate support ties and the dual certificate
    /// `max_{j not in S} |a_j* A_S (A_S* A_S)^{-1} sgn(alpha_S)| < 1` holds,
    /// which makes `alpha` the unique l1 minimizer.
    pub unique: bool,
}

/// Minimum-l1 exact solution of `a alpha = y` among supports of size
/// `<= max_support`, by enumeration.
pub fn exhaustive_bp(a: &DenseMatrix, y: &[C], max_support: usize) -> Option<OracleSolution> {
    let n = a.cols();
    let scale = norm(y).max(1e-300);
    let mut feasible: Vec<(f64, Vec<usize>, Vec<C>)> = Vec::new();
    for support in subsets(n, max_support) {
        if support.is_empty() {
            if norm(y) < 1e-12 {
                feasible.push((0.0, support, Vec::new()));
            }
            continue;
        }
        let Some(z) = least_squares(a, &support, y) else {
            continue;
        };
        let mut fit = vec![C::new(0.0, 0.0); a.rows()];
        for (&j, zj) in support.iter().zip(&z) {
            for (f, aij) in fit.iter_mut().zip(a.column(j)) {
                *f += aij * zj;
            }
        }
        if dist(&fit, y) <= 1e-9 * scale && z.iter().all(|v| v.norm() > 1e-9) {
            let l1 = z.iter().map(|v| v.norm()).sum();
            feasible.push((l1, support, z));
        }
    }
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best_l1, support, z) = feasible.first()?.clone();
    let tie = feasible
        .get(1)
        .is_some_and(|other| other.0 <= best_l1 * (1.0 + 1e-9));

    let mut alpha = vec![C::new(0.0, 0.0); n];
    for (&j, zj) in support.iter().zip(&z) {
        alpha[j] = *zj;
    }
    let certificate = if support.is_empty() {
        true
    } else {
        let signs: Vec<C> = z.iter().map(|v| v / v.norm()).collect();
        let cols: Vec<Vec<C>> = support.iter().map(|&j| a.column(j)).collect();
        let gram: Vec<Vec<C>> = cols
            .iter()
            .map(|ci| cols.iter().map(|cj| inner(cj, ci)).collect())
            .collect();
        match solve_square(gram, signs) {
            None => false,
            Some(coef) => {
                let mut v = vec![C::new(0.0, 0.0); a.rows()];
                for (c, col) in coef.iter().zip(&cols) {
                    for (vi, ci) in v.iter_mut().zip(col) {
                        *vi += c * ci;
                    }
                }
                (0..n)
                    .filter(|j| !support.contains(j))
                    .all(|j| inner(&v, &a.column(j)).norm() < 1.0 - 1e-6)
            }
        }
    };
    Some(OracleSolution {
        alpha,
        unique: !tie && certificate,
    })
}

/// Largest entry magnitude of `a^* b` between two dense bases.
pub fn dense_coherence(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let g = a.adjoint().matmul(b);
    let mut best: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            best = best.max(g[(i, j)].norm());
        }
    }
    best
}
