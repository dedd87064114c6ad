//! Spread spectrum compressed sensing.
//!
//! A signal that is sparse in some orthonormal basis `Psi` is pre-modulated by
//! a unit-modulus wide-band sequence and then probed along `m` randomly chosen
//! vectors of a sensing basis `Phi`. The modulation flattens the coherence
//! between the two bases, so the number of measurements needed for exact
//! l1 recovery becomes essentially independent of `Psi`.
//!
//! Modules:
//!
//! * [`operators`]: matrix-free unitary transforms and operator algebra;
//! * [`modulation`]: Rademacher, Steinhaus and chirp sequences, upsampling;
//! * [`coherence`]: mutual coherence, modulus-coherence, analog coherence;
//! * [`solver`]: basis pursuit and basis pursuit denoising;
//! * [`experiments`]: seeded trials, phase transitions and recovery curves.

pub mod coherence;
pub mod error;
pub mod experiments;
pub mod modulation;
pub mod operators;
pub mod seed;
pub mod solver;

pub use num_complex::Complex64;

pub use coherence::{
    analog_coherence, lemma1_monte_carlo, modulus_coherence, mutual_coherence, CoherenceReport,
    Lemma1Report,
};
pub use error::{Error, Result};
pub use experiments::{
    add_noise, best_s_term_error, generate_sparse_signal, phase_transition, recovery_curve,
    run_trial, ExperimentReport, ModulationChoice, PhaseTransitionConfig, RecoveryCurveConfig,
    SensingConfig, TrialOutcome,
};
pub use modulation::{
    make_chirp_modulation, make_random_modulation, make_upsampler, modulation_operator,
    ModulationKind, ModulationSpec,
};
pub use operators::{
    compose, make_transform, restrict_rows, IndexLaw, IndexSet, LinearOperator, TransformKind,
};
pub use solver::{complex_soft_threshold, solve_bpdn, SolverOptions, SolverResult};
