//! Seeded recovery experiments.
//!
//! A trial draws a complex `s`-sparse coefficient vector, builds one of the
//! acquisition chains
//!
//! * `Phi*_Omega Psi` (no modulation),
//! * `Phi*_Omega C Psi` (Rademacher or Steinhaus modulation),
//! * `F*_Omega C U Psi` (chirp modulation on the upsampled grid),
//!
//! measures, optionally adds noise, solves the l1 problem and checks whether
//! `||x - x*|| <= 1e-3 ||x||` in the signal domain.
//!
//! All randomness derives from a per-trial seed; the harness derives trial
//! seeds from `(seed, s, m, trial)`, so reports do not depend on scheduling.

mod harness;
mod report;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::{
    make_chirp_modulation, make_random_modulation, make_upsampler, modulation_operator,
    upsampled_size, ModulationKind, ModulationSpec,
};
use crate::operators::{
    compose_all, make_transform, restrict_rows, IndexLaw, IndexSet, LinearOperator, TransformKind,
};
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::solver::{l2_norm, solve_bpdn, SolverOptions};

pub use harness::{
    default_m_grid, phase_transition, recovery_curve, with_threads, MRule, PhaseTransitionConfig,
    RecoveryCurveConfig,
};
pub use report::{Axes, Cell, ExperimentReport};

/// Relative l2 error below which a reconstruction counts as exact.
pub const RECOVERY_THRESHOLD: f64 = 1e-3;

/// Modulation family plus chirp rate (ignored for non-chirp kinds).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationChoice {
    pub kind: ModulationKind,
    #[serde(default)]
    pub w_bar: f64,
}

impl ModulationChoice {
    pub fn none() -> Self {
        ModulationChoice::default()
    }

    pub fn random(kind: ModulationKind) -> Self {
        ModulationChoice { kind, w_bar: 0.0 }
    }

    pub fn chirp(w_bar: f64) -> Self {
        ModulationChoice {
            kind: ModulationKind::Chirp,
            w_bar,
        }
    }

    /// Length of the grid measurements are drawn from.
    pub fn grid_size(&self, n: usize) -> usize {
        match self.kind {
            ModulationKind::Chirp => upsampled_size(self.w_bar, n),
            _ => n,
        }
    }

    /// Realizes the sequence; `seed` only matters for random kinds.
    pub fn realize(&self, n: usize, seed: u64) -> Result<ModulationSpec> {
        match self.kind {
            ModulationKind::None => ModulationSpec::none(n),
            ModulationKind::Rademacher | ModulationKind::Steinhaus => {
                make_random_modulation(self.kind, n, seed)
            }
            ModulationKind::Chirp => make_chirp_modulation(self.w_bar, n),
        }
    }
}

fn default_threshold() -> f64 {
    RECOVERY_THRESHOLD
}

/// One acquisition setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingConfig {
    pub sensing: TransformKind,
    pub sparsity: TransformKind,
    #[serde(default)]
    pub modulation: ModulationChoice,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    #[serde(default)]
    pub index_law: IndexLaw,
    /// Input SNR in dB; `None` means noiseless.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_threshold")]
    pub recovery_threshold: f64,
}

impl SensingConfig {
    pub fn new(
        sensing: TransformKind,
        sparsity: TransformKind,
        modulation: ModulationChoice,
        n: usize,
        m: usize,
        s: usize,
    ) -> Self {
        SensingConfig {
            sensing,
            sparsity,
            modulation,
            n,
            m,
            s,
            index_law: IndexLaw::default(),
            snr_db: None,
            seed: 0,
            solver: SolverOptions::default(),
            recovery_threshold: RECOVERY_THRESHOLD,
        }
    }

    pub fn n_upsampled(&self) -> usize {
        self.modulation.grid_size(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::invalid(format!(
                "sparsity s = {} must lie in [1, {}]",
                self.s, self.n
            )));
        }
        for kind in [self.sensing, self.sparsity] {
            if kind.requires_power_of_two() && !self.n.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "{kind} basis needs a power-of-two n, got {}",
                    self.n
                )));
            }
        }
        if self.modulation.kind == ModulationKind::Chirp {
            if self.sensing != TransformKind::Fourier {
                return Err(Error::invalid(
                    "chirp modulation is defined for Fourier sensing only",
                ));
            }
            if self.n % 2 != 0 {
                return Err(Error::invalid("chirp modulation needs an even n"));
            }
            if !(self.modulation.w_bar >= 0.0 && self.modulation.w_bar.is_finite()) {
                return Err(Error::invalid("chirp rate must be finite and non-negative"));
            }
        }
        let grid = self.n_upsampled();
        if self.m == 0 || self.m > grid {
            return Err(Error::invalid(format!(
                "m = {} must lie in [1, {grid}]",
                self.m
            )));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid("snr_db must be finite"));
            }
        }
        if !(self.recovery_threshold > 0.0) {
            return Err(Error::invalid("recovery threshold must be positive"));
        }
        self.solver.validate()
    }

    /// The unrestricted chain (`N_w x N`) for one modulation draw.
    pub fn full_chain(&self, modulation_seed: u64) -> Result<LinearOperator> {
        let modulation = self.modulation.realize(self.n, modulation_seed)?;
        let psi = make_transform(self.sparsity, self.n)?;
        let c = modulation_operator(&modulation)?;
        match self.modulation.kind {
            ModulationKind::Chirp => {
                let nw = modulation.n_upsampled;
                compose_all(&[
                    make_transform(TransformKind::Fourier, nw)?.adjoint(),
                    c,
                    make_upsampler(self.n, nw)?,
                    psi,
                ])
            }
            ModulationKind::None => compose_all(&[make_transform(self.sensing, self.n)?.adjoint(), psi]),
            _ => compose_all(&[make_transform(self.sensing, self.n)?.adjoint(), c, psi]),
        }
    }
}

/// Result of one recovery attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub recovered: bool,
    /// `||x - x*|| / ||x||` in the signal domain.
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Complex `s`-sparse vector: uniform support, amplitudes in `(0, 1]`,
/// uniform phases.
pub fn generate_sparse_signal(n: usize, s: usize, seed: u64) -> Result<Vec<Complex64>> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!("sparsity {s} must lie in [1, {n}]")));
    }
    let mut rng = rng_from_seed(seed);
    let support = rand::seq::index::sample(&mut rng, n, s);
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    for i in support.iter() {
        let amplitude = 1.0 - rng.random::<f64>();
        let phase = rng.random_range(0.0..2.0 * PI);
        alpha[i] = Complex64::from_polar(amplitude, phase);
    }
    Ok(alpha)
}

/// Sample standard deviation `sqrt(mean |x - mean(x)|^2)`.
pub fn signal_std(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean: Complex64 = x.iter().sum::<Complex64>() / n;
    (x.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n).sqrt()
}

/// Noise variance `sigma^2 = signal_std^2 10^{-snr/10}` for a given input SNR.
pub fn noise_variance(snr_db: f64, signal_std: f64) -> f64 {
    signal_std * signal_std * 10f64.powf(-snr_db / 10.0)
}

/// Adds i.i.d. circular complex Gaussian noise with `E|n_k|^2 = sigma^2`.
pub fn add_noise(y: &[Complex64], snr_db: f64, signal_std: f64, seed: u64) -> Result<Vec<Complex64>> {
    if !(signal_std > 0.0 && signal_std.is_finite()) {
        return Err(Error::invalid(format!(
            "signal standard deviation must be positive, got {signal_std}"
        )));
    }
    let sigma = noise_variance(snr_db, signal_std).sqrt();
    let per_axis = sigma / 2f64.sqrt();
    let mut rng = rng_from_seed(seed);
    Ok(y.iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * per_axis
        })
        .collect())
}

/// `||alpha - T_s(alpha)||_1`, where `T_s` keeps the `s` largest magnitudes
/// (ties go to the lower index).
pub fn best_s_term_error(alpha: &[Complex64], s: usize) -> f64 {
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&a, &b| alpha[b].norm().total_cmp(&alpha[a].norm()).then(a.cmp(&b)));
    order.iter().skip(s).map(|&i| alpha[i].norm()).sum()
}

/// Runs one seeded recovery.
pub fn run_trial(config: &SensingConfig, trial_seed: u64) -> Result<TrialOutcome> {
    config.validate()?;
    let alpha = generate_sparse_signal(
        config.n,
        config.s,
        derive_seed(trial_seed, &[stream::SIGNAL]),
    )?;
    let full = config.full_chain(derive_seed(trial_seed, &[stream::MODULATION]))?;
    let omega = IndexSet::sample(
        config.index_law,
        config.m,
        full.out_dim(),
        derive_seed(trial_seed, &[stream::INDICES]),
    )?;
    let a = restrict_rows(&full, &omega)?;
    let psi = make_transform(config.sparsity, config.n)?;
    let x = psi.apply(&alpha);

    let clean = a.apply(&alpha);
    let (y, eta) = match config.snr_db {
        None => (clean, 0.0),
        Some(snr) => {
            let noisy = add_noise(
                &clean,
                snr,
                signal_std(&x),
                derive_seed(trial_seed, &[stream::NOISE]),
            )?;
            let diff: Vec<Complex64> = noisy.iter().zip(&clean).map(|(a, b)| a - b).collect();
            let eta = l2_norm(&diff);
            (noisy, eta)
        }
    };

    let result = solve_bpdn(&a, &y, eta, &config.solver)?;
    let estimate = psi.apply(&result.alpha);
    let err: Vec<Complex64> = x.iter().zip(&estimate).map(|(a, b)| a - b).collect();
    let rel_error = l2_norm(&err) / l2_norm(&x);
    Ok(TrialOutcome {
        recovered: rel_error <= config.recovery_threshold,
        rel_error,
        iterations: result.iterations,
        converged: result.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_signal_shapes() {
        let full = generate_sparse_signal(16, 16, 3).unwrap();
        assert!(full.iter().all(|v| v.norm() > 0.0 && v.norm() <= 1.0));
        let one = generate_sparse_signal(16, 1, 3).unwrap();
        assert_eq!(one.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert_eq!(generate_sparse_signal(16, 4, 9).unwrap(), generate_sparse_signal(16, 4, 9).unwrap());
        assert!(generate_sparse_signal(4, 5, 0).is_err());
        assert!(generate_sparse_signal(4, 0, 0).is_err());
    }

    #[test]
    fn support_is_uniform() {
        let (n, s, draws) = (16, 8, 10_000u64);
        let mut hist = vec![0usize; n];
        for seed in 0..draws {
            let a = generate_sparse_signal(n, s, seed).unwrap();
            for (i, v) in a.iter().enumerate() {
                if v.norm() > 0.0 {
                    hist[i] += 1;
                }
            }
        }
        let expected = (draws as usize * s) as f64 / n as f64;
        for &h in &hist {
            assert!((h as f64 - expected).abs() <= 0.05 * expected, "{hist:?}");
        }
    }

    #[test]
    fn noise_level_formula() {
        assert!((noise_variance(30.0, 1.0).sqrt() - 10f64.powf(-1.5)).abs() < 1e-15);
        let y = vec![Complex64::new(1.0, -1.0); 64];
        let noisy = add_noise(&y, 300.0, 1.0, 1).unwrap();
        let diff: Vec<_> = noisy.iter().zip(&y).map(|(a, b)| a - b).collect();
        assert!(l2_norm(&diff) < 1e-12 * l2_norm(&y));
        assert!(add_noise(&y, 30.0, 0.0, 1).is_err());
    }

    #[test]
    fn noise_variance_matches_sample_moment() {
        let y = vec![Complex64::new(0.0, 0.0); 100_000];
        let noisy = add_noise(&y, 10.0, 2.0, 42).unwrap();
        let sigma2 = noise_variance(10.0, 2.0);
        let empirical = noisy.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((empirical / sigma2 - 1.0).abs() < 0.02, "{empirical} vs {sigma2}");
        let mean: Complex64 = noisy.iter().sum::<Complex64>() / y.len() as f64;
        assert!(mean.norm() < 0.02);
    }

    #[test]
    fn best_s_term_examples() {
        let a = [
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, -2.0),
            Complex64::new(1.0, 0.0),
        ];
        assert_eq!(best_s_term_error(&a, 3), 0.0);
        assert_eq!(best_s_term_error(&a, 0), 6.0);
        assert_eq!(best_s_term_error(&a, 2), 1.0);
        let ties = [Complex64::new(1.0, 0.0); 3];
        assert_eq!(best_s_term_error(&ties, 1), 2.0);
    }

    #[test]
    fn config_validation() {
        use TransformKind::*;
        let ok = SensingConfig::new(Fourier, Haar, ModulationChoice::none(), 64, 32, 4);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.s = 65;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.m = 65;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.n = 48;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.sensing = Hadamard;
        bad.modulation = ModulationChoice::chirp(0.5);
        assert!(bad.validate().is_err());

        let mut chirp = ok.clone();
        chirp.modulation = ModulationChoice::chirp(0.5);
        chirp.m = 96;
        assert_eq!(chirp.n_upsampled(), 96);
        assert!(chirp.validate().is_ok());
        chirp.m = 97;
        assert!(chirp.validate().is_err());
    }

    #[test]
    fn chains_are_restricted_isometries() {
        use TransformKind::*;
        for modulation in [
            ModulationChoice::none(),
            ModulationChoice::random(ModulationKind::Rademacher),
            ModulationChoice::random(ModulationKind::Steinhaus),
            ModulationChoice::chirp(0.25),
        ] {
            let cfg = SensingConfig::new(Fourier, Haar, modulation, 32, 8, 2);
            let full = cfg.full_chain(1).unwrap();
            assert!(full.is_isometry());
            assert_eq!(full.out_dim(), cfg.n_upsampled());
            let omega = IndexSet::sample(IndexLaw::IidUniform, 8, full.out_dim(), 2).unwrap();
            let a = restrict_rows(&full, &omega).unwrap();
            assert!(a.as_restricted_isometry().is_some());
        }
    }

    #[test]
    fn trial_examples() {
        use TransformKind::*;
        let cfg = SensingConfig::new(Fourier, Dirac, ModulationChoice::none(), 64, 64, 1);
        let mut full = cfg.clone();
        full.index_law = IndexLaw::UniformWithoutReplacement;
        assert!(run_trial(&full, 0).unwrap().recovered);

        let coherent = SensingConfig::new(Fourier, Fourier, ModulationChoice::none(), 64, 16, 4);
        let hits = (0..100)
            .filter(|&t| run_trial(&coherent, t).unwrap().recovered)
            .count();
        assert!(hits < 10, "coherent pair recovered {hits}/100");

        let spread = SensingConfig::new(
            Fourier,
            Fourier,
            ModulationChoice::random(ModulationKind::Rademacher),
            64,
            32,
            4,
        );
        let hits = (0..100)
            .filter(|&t| run_trial(&spread, t).unwrap().recovered)
            .count();
        assert!(hits > 90, "modulated pair recovered {hits}/100");
    }

    #[test]
    fn trial_is_deterministic() {
        use TransformKind::*;
        let mut cfg = SensingConfig::new(
            Fourier,
            Haar,
            ModulationChoice::random(ModulationKind::Steinhaus),
            32,
            16,
            2,
        );
        cfg.snr_db = Some(30.0);
        assert_eq!(run_trial(&cfg, 5).unwrap(), run_trial(&cfg, 5).unwrap());
    }
}
