//! l1 recovery: basis pursuit and basis pursuit denoising over complex data.
//!
//! Solves
//!
//! ```text
//! minimize ||alpha||_1  subject to  ||y - A alpha||_2 <= eta
//! ```
//!
//! (basis pursuit when `eta = 0`) with Douglas-Rachford splitting on a lifted
//! problem. A measurement variable `w = L alpha` is introduced and the
//! objective is split into
//!
//! * `f(alpha, w) = ||alpha||_1 + indicator(w satisfies the data constraint)`,
//!   whose prox is a complex soft threshold plus a projection, and
//! * `g(alpha, w) = indicator(w = L alpha)`, a projection onto a graph.
//!
//! Two liftings are used:
//!
//! * **Restricted isometry chain** (`A = R B`, `R` a row selection with
//!   possible repeats, `B* B = I`): `L = B` lives on the full measurement grid.
//!   The graph projection is `alpha = (a + B* w) / 2` and the data constraint
//!   separates per distinct row, so both projections are closed form. This
//!   covers every acquisition chain built by the experiments, including the
//!   upsampled chirp chain where `A A* != I`.
//! * **General operator**: `L = A` and the graph projection solves
//!   `(I + A* A) alpha = a + A* w` by warm-started conjugate gradients
//!   (closed form when `A A* = I`).
//!
//! For basis pursuit the iteration also checks, every few steps, whether the
//! support of the thresholded iterate has settled. If so it fits `y` exactly
//! on that support and returns the fit when a dual certificate shows it is an
//! l1 minimizer. This ends easy instances long before the iterate change drops
//! below tolerance; the plain iteration remains the fallback.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when the relative change of the splitting iterate drops below this.
    pub convergence_tol: f64,
    /// Slack on `||y - A alpha|| <= eta` for reporting convergence.
    pub feasibility_tol: f64,
    /// Soft-threshold level relative to `||A* y||_inf`.
    pub step_parameter: f64,
    /// `None` starts from zero; `Some(seed)` from a seeded random iterate.
    pub seed: Option<u64>,
    /// For `eta = 0`, periodically fit the current support exactly and stop
    /// once a dual certificate proves that fit optimal.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 5000,
            convergence_tol: 1e-8,
            feasibility_tol: 1e-6,
            step_parameter: 0.2,
            seed: None,
            polish: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        for (name, v) in [
            ("convergence_tol", self.convergence_tol),
            ("feasibility_tol", self.feasibility_tol),
            ("step_parameter", self.step_parameter),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverResult {
    /// Recovered coefficients.
    pub alpha: Vec<Complex64>,
    pub iterations: usize,
    /// `||y - A alpha||_2`.
    pub residual_norm: f64,
    /// `||alpha||_1` (sum of complex magnitudes).
    pub objective: f64,
    /// Iterate change fell below tolerance and the constraint holds.
    pub converged: bool,
}

/// Iterations between attempts to certify the current support.
const POLISH_INTERVAL: usize = 10;

/// Proximal map of `t |.|` on the complex plane.
pub fn complex_soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let mag = z.norm();
    if mag <= t {
        Complex64::new(0.0, 0.0)
    } else {
        z * (1.0 - t / mag)
    }
}

pub(crate) fn l1_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Data constraint `||R w - y|| <= eta` grouped by distinct row of `R`.
///
/// With `k_r` copies of row `r` and mean target `ybar_r`,
/// `||R w - y||^2 = sum_r k_r |w_r - ybar_r|^2 + spread`, where `spread` is the
/// scatter of repeated measurements around their means.
struct GroupedBall {
    rows: Vec<usize>,
    counts: Vec<f64>,
    means: Vec<Complex64>,
    /// Effective squared radius `eta^2 - spread`; non-positive pins `w_r = ybar_r`.
    radius_sq: f64,
    uniform_count: Option<f64>,
}

impl GroupedBall {
    fn new(selection: &[usize], y: &[Complex64], eta: f64) -> Self {
        let mut order: Vec<usize> = (0..selection.len()).collect();
        order.sort_by_key(|&t| (selection[t], t));
        let mut rows = Vec::new();
        let mut counts = Vec::new();
        let mut sums: Vec<Complex64> = Vec::new();
        for &t in &order {
            if rows.last() != Some(&selection[t]) {
                rows.push(selection[t]);
                counts.push(0.0);
                sums.push(Complex64::new(0.0, 0.0));
            }
            *counts.last_mut().unwrap() += 1.0;
            *sums.last_mut().unwrap() += y[t];
        }
        let means: Vec<Complex64> = sums.iter().zip(&counts).map(|(s, k)| s / k).collect();
        let mut spread = 0.0;
        let mut g = 0;
        for &t in &order {
            while rows[g] != selection[t] {
                g += 1;
            }
            spread += (y[t] - means[g]).norm_sqr();
        }
        let first = counts[0];
        let uniform_count = counts.iter().all(|&k| k == first).then_some(first);
        GroupedBall {
            rows,
            counts,
            means,
            radius_sq: eta * eta - spread,
            uniform_count,
        }
    }

    fn project(&self, w: &mut [Complex64]) {
        if self.radius_sq <= 0.0 {
            for (&r, &mean) in self.rows.iter().zip(&self.means) {
                w[r] = mean;
            }
            return;
        }
        let deviation: Vec<Complex64> = self
            .rows
            .iter()
            .zip(&self.means)
            .map(|(&r, &mean)| w[r] - mean)
            .collect();
        let phi0: f64 = deviation
            .iter()
            .zip(&self.counts)
            .map(|(d, k)| k * d.norm_sqr())
            .sum();
        if phi0 <= self.radius_sq {
            return;
        }
        let lambda = self.multiplier(&deviation, phi0);
        for ((&r, &mean), (d, k)) in self
            .rows
            .iter()
            .zip(&self.means)
            .zip(deviation.iter().zip(&self.counts))
        {
            w[r] = mean + d / (1.0 + lambda * k);
        }
    }

    /// Solves `sum_r k_r |d_r|^2 / (1 + lambda k_r)^2 = radius^2` for `lambda > 0`.
    fn multiplier(&self, deviation: &[Complex64], phi0: f64) -> f64 {
        let ratio = (phi0 / self.radius_sq).sqrt() - 1.0;
        if let Some(k) = self.uniform_count {
            return ratio / k;
        }
        let k_max = self.counts.iter().copied().fold(0.0, f64::max);
        // phi is convex and decreasing; Newton from the left bracket end
        // increases monotonically towards the root.
        let mut lambda = ratio / k_max;
        for _ in 0..100 {
            let (mut phi, mut dphi) = (0.0, 0.0);
            for (d, &k) in deviation.iter().zip(&self.counts) {
                let denom = 1.0 + lambda * k;
                let term = k * d.norm_sqr() / (denom * denom);
                phi += term;
                dphi -= 2.0 * k * term / denom;
            }
            let step = (phi - self.radius_sq) / dphi;
            lambda -= step;
            if step.abs() <= 1e-15 * lambda.abs() {
                break;
            }
        }
        lambda
    }
}

/// The two liftings described in the module docs.
enum Lifting {
    Restricted {
        basis: LinearOperator,
        ball: GroupedBall,
    },
    General {
        op: LinearOperator,
        y: Vec<Complex64>,
        eta: f64,
    },
}

impl Lifting {
    fn measurement_dim(&self) -> usize {
        match self {
            Lifting::Restricted { basis, .. } => basis.out_dim(),
            Lifting::General { op, .. } => op.out_dim(),
        }
    }

    /// Projection onto `{(alpha, w) : w = L alpha}`; `warm` seeds the CG solve.
    fn project_graph(
        &self,
        a: &[Complex64],
        w: &[Complex64],
        warm: &[Complex64],
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let (op, alpha) = match self {
            Lifting::Restricted { basis, .. } => {
                let back = basis.apply_adjoint(w);
                let alpha: Vec<_> = a.iter().zip(&back).map(|(p, q)| (p + q) * 0.5).collect();
                (basis, alpha)
            }
            Lifting::General { op, .. } => {
                let back = op.apply_adjoint(w);
                let rhs: Vec<_> = a.iter().zip(&back).map(|(p, q)| p + q).collect();
                let alpha = if op.is_co_isometry() {
                    // A*A is a projection P and (I + P)^{-1} = I - P/2
                    let p = op.apply_adjoint(&op.apply(&rhs));
                    rhs.iter().zip(&p).map(|(r, q)| r - q * 0.5).collect()
                } else {
                    solve_shifted_normal(op, &rhs, warm)
                };
                (op, alpha)
            }
        };
        let w = op.apply(&alpha);
        (alpha, w)
    }

    fn project_data(&self, w: &mut [Complex64]) {
        match self {
            Lifting::Restricted { ball, .. } => ball.project(w),
            Lifting::General { y, eta, .. } => {
                let dist: f64 = w
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if dist <= *eta {
                    return;
                }
                let shrink = if dist > 0.0 { eta / dist } else { 0.0 };
                for (wi, yi) in w.iter_mut().zip(y) {
                    *wi = yi + (*wi - yi) * shrink;
                }
            }
        }
    }
}

/// Conjugate gradients for a Hermitian positive definite `apply`, starting at
/// `x`. Returns whether the residual dropped below `rel_tol ||b||`.
fn conjugate_gradient(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    x: &mut [Complex64],
    rel_tol: f64,
    max_iter: usize,
) -> bool {
    let ax = apply(x);
    let mut r: Vec<_> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let target = (rel_tol * l2_norm(b)).powi(2);
    for _ in 0..max_iter {
        if rr <= target {
            return true;
        }
        let ap = apply(&p);
        let curvature = dot(&p, &ap).re;
        if curvature <= 0.0 {
            return false;
        }
        let alpha = rr / curvature;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += pi * alpha;
            *ri -= api * alpha;
        }
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + *pi * beta;
        }
        rr = rr_new;
    }
    rr <= target
}

/// Solves `(I + A* A) x = b`; eigenvalues lie in `[1, 1 + ||A||^2]`.
fn solve_shifted_normal(op: &LinearOperator, b: &[Complex64], warm: &[Complex64]) -> Vec<Complex64> {
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        let g = op.apply_adjoint(&op.apply(v));
        v.iter().zip(&g).map(|(p, q)| p + q).collect()
    };
    let mut x = warm.to_vec();
    conjugate_gradient(apply, b, &mut x, 1e-13, 200);
    x
}

/// Basis pursuit candidate supported on `support`: the least-squares fit of
/// `y`, kept only if it is feasible and a dual vector certifies it,
///
/// ```text
/// v = A_S (A_S* A_S)^{-1} sgn(z),   |(A* v)_j| <= 1 off the support.
/// ```
///
/// Such a point minimizes `||alpha||_1` subject to `A alpha = y`.
fn certified_support_solution(
    a: &LinearOperator,
    y: &[Complex64],
    support: &[usize],
) -> Option<Vec<Complex64>> {
    let n = a.in_dim();
    let embed = |z: &[Complex64]| {
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        for (&j, v) in support.iter().zip(z) {
            full[j] = *v;
        }
        full
    };
    let gather = |full: &[Complex64]| -> Vec<Complex64> { support.iter().map(|&j| full[j]).collect() };
    let gram = |z: &[Complex64]| gather(&a.apply_adjoint(&a.apply(&embed(z))));
    let max_iter = 2 * support.len() + 20;

    let rhs = gather(&a.apply_adjoint(y));
    let mut z = vec![Complex64::new(0.0, 0.0); support.len()];
    if !conjugate_gradient(gram, &rhs, &mut z, 1e-13, max_iter) {
        return None;
    }
    let fit = a.apply(&embed(&z));
    let misfit: Vec<Complex64> = y.iter().zip(&fit).map(|(p, q)| p - q).collect();
    if l2_norm(&misfit) > 1e-9 * l2_norm(y) || z.iter().any(|v| v.norm() == 0.0) {
        return None;
    }

    let signs: Vec<Complex64> = z.iter().map(|v| v / v.norm()).collect();
    let mut q = vec![Complex64::new(0.0, 0.0); support.len()];
    if !conjugate_gradient(gram, &signs, &mut q, 1e-12, max_iter) {
        return None;
    }
    let correlation = a.apply_adjoint(&a.apply(&embed(&q)));
    let mut on_support = vec![false; n];
    for &j in support {
        on_support[j] = true;
    }
    let certified = correlation
        .iter()
        .zip(&on_support)
        .all(|(c, &inside)| inside || c.norm() <= 1.0 + 1e-9);
    certified.then(|| embed(&z))
}

/// Basis pursuit denoising; `eta = 0` gives basis pursuit.
///
/// Non-convergence is reported through [`SolverResult::converged`], not as an
/// error.
pub fn solve_bpdn(
    a: &LinearOperator,
    y: &[Complex64],
    eta: f64,
    opts: &SolverOptions,
) -> Result<SolverResult> {
    opts.validate()?;
    if y.len() != a.out_dim() {
        return Err(Error::invalid(format!(
            "measurement vector has {} entries, operator has {} rows",
            y.len(),
            a.out_dim()
        )));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be finite and >= 0, got {eta}")));
    }
    let n = a.in_dim();

    let back = a.apply_adjoint(y);
    let scale = back.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 || l2_norm(y) <= eta {
        // zero is feasible, hence optimal
        let alpha = vec![Complex64::new(0.0, 0.0); n];
        return Ok(SolverResult {
            residual_norm: l2_norm(y),
            objective: 0.0,
            alpha,
            iterations: 0,
            converged: true,
        });
    }
    let threshold = opts.step_parameter * scale;

    let lifting = match a.as_restricted_isometry() {
        Some((basis, rows)) => Lifting::Restricted {
            ball: GroupedBall::new(rows, y, eta),
            basis,
        },
        None => Lifting::General {
            op: a.clone(),
            y: y.to_vec(),
            eta,
        },
    };
    let dim_w = lifting.measurement_dim();

    let (mut za, mut zw) = match opts.seed {
        None => (
            vec![Complex64::new(0.0, 0.0); n],
            vec![Complex64::new(0.0, 0.0); dim_w],
        ),
        Some(seed) => {
            let mut rng = rng_from_seed(seed);
            let mut draw = |len: usize| -> Vec<Complex64> {
                (0..len)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                            * scale
                    })
                    .collect()
            };
            let za = draw(n);
            let zw = draw(dim_w);
            (za, zw)
        }
    };

    let mut xa = vec![Complex64::new(0.0, 0.0); n];
    let mut iterations = 0;
    let mut settled = false;
    let mut certified = false;
    let polish = opts.polish && eta == 0.0;
    let max_support = a.out_dim() / 2;
    let mut support = Vec::new();
    let mut last_seen = Vec::new();
    let mut last_tried = Vec::new();
    while iterations < opts.max_iterations {
        iterations += 1;
        let (pa, pw) = lifting.project_graph(&za, &zw, &xa);
        xa = pa;

        let mut change_sq = 0.0;
        support.clear();
        for (j, (z, x)) in za.iter_mut().zip(&xa).enumerate() {
            let u = complex_soft_threshold(x * 2.0 - *z, threshold);
            if u.norm_sqr() > 0.0 {
                support.push(j);
            }
            let delta = u - x;
            change_sq += delta.norm_sqr();
            *z += delta;
        }
        let mut reflected: Vec<Complex64> = pw.iter().zip(&zw).map(|(x, z)| x * 2.0 - z).collect();
        lifting.project_data(&mut reflected);
        for ((z, x), u) in zw.iter_mut().zip(&pw).zip(&reflected) {
            let delta = u - x;
            change_sq += delta.norm_sqr();
            *z += delta;
        }

        let size_sq: f64 = za.iter().chain(zw.iter()).map(|v| v.norm_sqr()).sum();
        if change_sq <= opts.convergence_tol * opts.convergence_tol * size_sq.max(f64::MIN_POSITIVE)
        {
            settled = true;
            break;
        }

        // try the exact solution on a support that held across two checks
        if polish && iterations % POLISH_INTERVAL == 0 {
            let stable = support == last_seen;
            last_seen.clone_from(&support);
            if stable && support != last_tried && !support.is_empty() && support.len() <= max_support {
                last_tried.clone_from(&support);
                if let Some(exact) = certified_support_solution(a, y, &support) {
                    xa = exact;
                    certified = true;
                    break;
                }
            }
        }
    }
    if polish && !certified && !support.is_empty() && support.len() <= max_support && support != last_tried {
        if let Some(exact) = certified_support_solution(a, y, &support) {
            xa = exact;
            certified = true;
        }
    }

    let residual: Vec<Complex64> = a.apply(&xa).iter().zip(y).map(|(p, q)| q - p).collect();
    let residual_norm = l2_norm(&residual);
    Ok(SolverResult {
        objective: l1_norm(&xa),
        converged: (settled || certified) && residual_norm <= eta + opts.feasibility_tol,
        residual_norm,
        alpha: xa,
        iterations,
    })
}
