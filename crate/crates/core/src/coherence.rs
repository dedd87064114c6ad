//! Coherence measures between sensing and sparsity bases.
//!
//! * mutual coherence `mu = max_ij |<phi_i, psi_j>|`, computed matrix-free one
//!   sparsity column at a time;
//! * modulus-coherence `beta = max_ij sqrt(sum_k |phi_ki|^2 |psi_kj|^2)`, which
//!   needs individual entries and therefore goes through dense matrices;
//! * the analog coherence `mu_w` of the chirp chain `F* C U Psi` and the
//!   product `N_w mu_w^2` that drives the measurement bound;
//! * a Monte Carlo check of the tail bound
//!   `mu <= beta sqrt(2 log(2 N^2 / eps))` for randomly modulated pairs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulation::{
    make_chirp_modulation, make_random_modulation, make_upsampler, modulation_operator,
    ModulationKind,
};
use crate::operators::{compose, compose_all, make_transform, LinearOperator, TransformKind};
use crate::seed::derive_seed;

/// Largest `N` accepted by the dense modulus-coherence path.
pub const DENSE_LIMIT: usize = 4096;

/// Largest entry of a matrix-free operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxEntry {
    pub value: f64,
    /// `(row, column)`; ties resolve to the smallest row, then column.
    pub position: (usize, usize),
}

/// Scans every column of `op` for the entry of largest modulus.
pub fn max_abs_entry(op: &LinearOperator) -> MaxEntry {
    let n = op.in_dim();
    let per_column: Vec<(f64, usize)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            let col = op.apply(&e);
            col.iter()
                .enumerate()
                .fold((f64::NEG_INFINITY, 0), |(best, bi), (i, v)| {
                    let a = v.norm();
                    if a > best {
                        (a, i)
                    } else {
                        (best, bi)
                    }
                })
        })
        .collect();
    let mut best = MaxEntry {
        value: f64::NEG_INFINITY,
        position: (0, 0),
    };
    for (j, (value, i)) in per_column.into_iter().enumerate() {
        if value > best.value || (value == best.value && (i, j) < best.position) {
            best = MaxEntry {
                value,
                position: (i, j),
            };
        }
    }
    best
}

fn check_square_pair(sensing: &LinearOperator, sparsity: &LinearOperator) -> Result<usize> {
    let n = sensing.in_dim();
    if sensing.out_dim() != n || sparsity.in_dim() != n || sparsity.out_dim() != n {
        return Err(Error::invalid(format!(
            "coherence needs square operators of equal size, got {}x{} and {}x{}",
            sensing.out_dim(),
            sensing.in_dim(),
            sparsity.out_dim(),
            sparsity.in_dim()
        )));
    }
    Ok(n)
}

/// `max_ij |<phi_i, psi_j>|`, with its attaining pair.
pub fn mutual_coherence_entry(
    sensing: &LinearOperator,
    sparsity: &LinearOperator,
) -> Result<MaxEntry> {
    check_square_pair(sensing, sparsity)?;
    Ok(max_abs_entry(&compose(&sensing.adjoint(), sparsity)?))
}

/// Mutual coherence `mu` of two orthonormal bases.
pub fn mutual_coherence(sensing: &LinearOperator, sparsity: &LinearOperator) -> Result<f64> {
    Ok(mutual_coherence_entry(sensing, sparsity)?.value)
}

/// Modulus-coherence `beta` of two orthonormal bases (dense, `N <= 4096`).
pub fn modulus_coherence(sensing: &LinearOperator, sparsity: &LinearOperator) -> Result<f64> {
    let n = check_square_pair(sensing, sparsity)?;
    if n > DENSE_LIMIT {
        return Err(Error::UnsupportedSize {
            what: "modulus coherence",
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let squared_moduli = |op: &LinearOperator| -> Vec<f64> {
        // row-major |entry|^2, rows indexed by k
        let dense = op.to_dense();
        (0..n)
            .flat_map(|k| (0..n).map(move |c| (k, c)))
            .map(|(k, c)| dense[(k, c)].norm_sqr())
            .collect()
    };
    let phi = squared_moduli(sensing);
    let psi = squared_moduli(sparsity);
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; n];
            for k in 0..n {
                let p = phi[k * n + i];
                if p == 0.0 {
                    continue;
                }
                for (a, q) in acc.iter_mut().zip(&psi[k * n..(k + 1) * n]) {
                    *a += p * q;
                }
            }
            acc.into_iter().fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.sqrt())
}

/// Coherence summary of a sensing chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub mu: f64,
    /// Modulus-coherence, when defined for the pair (square bases only).
    pub beta: Option<f64>,
    pub n_signal: usize,
    pub n_upsampled: usize,
    /// `N_w mu^2`.
    pub product_nw_mu2: f64,
    pub argmax_pair: (usize, usize),
}

/// Builds the analog chain `F*_{N_w} C U Psi` for a chirp of rate `w_bar`.
pub fn analog_chain(sparsity_kind: TransformKind, n: usize, w_bar: f64) -> Result<LinearOperator> {
    let chirp = make_chirp_modulation(w_bar, n)?;
    let nw = chirp.n_upsampled;
    compose_all(&[
        make_transform(TransformKind::Fourier, nw)?.adjoint(),
        modulation_operator(&chirp)?,
        make_upsampler(n, nw)?,
        make_transform(sparsity_kind, n)?,
    ])
}

/// `mu_w` over all `N_w` frequency rows and `N` sparsity columns.
pub fn analog_coherence(
    sparsity_kind: TransformKind,
    n: usize,
    w_bar: f64,
) -> Result<CoherenceReport> {
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::invalid(format!(
            "analog coherence needs an even power of two, got {n}"
        )));
    }
    let chain = analog_chain(sparsity_kind, n, w_bar)?;
    let nw = chain.out_dim();
    let best = max_abs_entry(&chain);
    Ok(CoherenceReport {
        mu: best.value,
        beta: None,
        n_signal: n,
        n_upsampled: nw,
        product_nw_mu2: nw as f64 * best.value * best.value,
        argmax_pair: best.position,
    })
}

/// Coherence report for a square pair without modulation.
pub fn coherence_report(
    sensing: &LinearOperator,
    sparsity: &LinearOperator,
) -> Result<CoherenceReport> {
    let best = mutual_coherence_entry(sensing, sparsity)?;
    let n = sensing.in_dim();
    let beta = if n <= DENSE_LIMIT {
        Some(modulus_coherence(sensing, sparsity)?)
    } else {
        None
    };
    Ok(CoherenceReport {
        mu: best.value,
        beta,
        n_signal: n,
        n_upsampled: n,
        product_nw_mu2: n as f64 * best.value * best.value,
        argmax_pair: best.position,
    })
}

/// The right-hand side `beta sqrt(2 log(2 N^2 / eps))` of the tail bound.
pub fn lemma1_bound(beta: f64, n: usize, epsilon: f64) -> f64 {
    let n = n as f64;
    beta * (2.0 * (2.0 * n * n / epsilon).ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub n: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub bound: f64,
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    /// Largest modulated coherence seen across trials.
    pub max_observed: f64,
    pub seed: u64,
}

/// Draws `trials` random modulations and reports how often the modulated
/// coherence exceeds the tail bound.
pub fn lemma1_monte_carlo(
    sensing: &LinearOperator,
    sparsity: &LinearOperator,
    kind: ModulationKind,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<Lemma1Report> {
    let n = check_square_pair(sensing, sparsity)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !kind.is_random() {
        return Err(Error::invalid(format!(
            "tail bound check needs a random modulation, got {kind}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let beta = modulus_coherence(sensing, sparsity)?;
    let bound = lemma1_bound(beta, n, epsilon);
    let analysis = sensing.adjoint();
    let observed = (0..trials)
        .into_par_iter()
        .map(|t| {
            let spec = make_random_modulation(kind, n, derive_seed(seed, &[t as u64]))?;
            let chain = compose_all(&[analysis.clone(), modulation_operator(&spec)?, sparsity.clone()])?;
            Ok(max_abs_entry(&chain).value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let violations = observed.iter().filter(|&&mu| mu > bound).count();
    Ok(Lemma1Report {
        n,
        epsilon,
        beta,
        bound,
        trials,
        violations,
        violation_rate: violations as f64 / trials as f64,
        max_observed: observed.iter().copied().fold(0.0, f64::max),
        seed,
    })
}
