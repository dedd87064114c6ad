use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Axes, Cell, ExperimentReport};
use super::{run_trial, ModulationChoice, SensingConfig, RECOVERY_THRESHOLD};
use crate::error::{Error, Result};
use crate::modulation::upsampled_size;
use crate::operators::{IndexLaw, TransformKind};
use crate::seed::derive_seed;
use crate::solver::SolverOptions;

/// How the measurement counts of a phase-transition row are chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    /// `m in {s, 2s, ..., k s}`; values beyond the measurement grid are dropped.
    Multiples(usize),
    /// Fixed list; every value must fit the measurement grid.
    Explicit(Vec<usize>),
}

impl Default for MRule {
    fn default() -> Self {
        MRule::Multiples(10)
    }
}

impl MRule {
    fn values(&self, s: usize, grid: usize) -> Result<Vec<usize>> {
        match self {
            MRule::Multiples(k) => Ok((1..=*k).map(|i| i * s).filter(|&m| m <= grid).collect()),
            MRule::Explicit(ms) => {
                if let Some(&bad) = ms.iter().find(|&&m| m == 0 || m > grid) {
                    return Err(Error::invalid(format!(
                        "m = {bad} outside the measurement grid [1, {grid}]"
                    )));
                }
                Ok(ms.clone())
            }
        }
    }
}

fn default_trials() -> usize {
    50
}

fn default_threshold() -> f64 {
    RECOVERY_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseTransitionConfig {
    pub sensing: TransformKind,
    pub sparsity: TransformKind,
    #[serde(default)]
    pub modulation: ModulationChoice,
    pub n: usize,
    pub s_grid: Vec<usize>,
    #[serde(default)]
    pub m_rule: MRule,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub index_law: IndexLaw,
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_threshold")]
    pub recovery_threshold: f64,
}

impl PhaseTransitionConfig {
    pub fn new(
        sensing: TransformKind,
        sparsity: TransformKind,
        modulation: ModulationChoice,
        n: usize,
        s_grid: Vec<usize>,
        trials: usize,
        seed: u64,
    ) -> Self {
        PhaseTransitionConfig {
            sensing,
            sparsity,
            modulation,
            n,
            s_grid,
            m_rule: MRule::default(),
            trials,
            seed,
            index_law: IndexLaw::default(),
            snr_db: None,
            solver: SolverOptions::default(),
            recovery_threshold: RECOVERY_THRESHOLD,
        }
    }

    fn cell_config(&self, s: usize, m: usize) -> SensingConfig {
        SensingConfig {
            sensing: self.sensing,
            sparsity: self.sparsity,
            modulation: self.modulation,
            n: self.n,
            m,
            s,
            index_law: self.index_law,
            snr_db: self.snr_db,
            seed: self.seed,
            solver: self.solver.clone(),
            recovery_threshold: self.recovery_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryCurveConfig {
    pub sparsity: TransformKind,
    pub n: usize,
    pub s: usize,
    pub w_bars: Vec<f64>,
    /// Measurement counts; `None` uses [`default_m_grid`].
    #[serde(default)]
    pub m_grid: Option<Vec<usize>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub index_law: IndexLaw,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_threshold")]
    pub recovery_threshold: f64,
}

impl RecoveryCurveConfig {
    pub fn new(sparsity: TransformKind, n: usize, s: usize, w_bars: Vec<f64>, trials: usize, seed: u64) -> Self {
        RecoveryCurveConfig {
            sparsity,
            n,
            s,
            w_bars,
            m_grid: None,
            trials,
            seed,
            index_law: IndexLaw::default(),
            solver: SolverOptions::default(),
            recovery_threshold: RECOVERY_THRESHOLD,
        }
    }

    pub fn m_values(&self) -> Vec<usize> {
        self.m_grid
            .clone()
            .unwrap_or_else(|| default_m_grid(self.s, self.n, 20))
    }
}

/// Roughly geometric grid of `points` measurement counts from `s` to `n`,
/// rounded and deduplicated.
pub fn default_m_grid(s: usize, n: usize, points: usize) -> Vec<usize> {
    let (lo, hi) = (s.max(1) as f64, n.max(s.max(1)) as f64);
    let steps = points.max(2) - 1;
    let mut grid: Vec<usize> = (0..=steps)
        .map(|k| (lo * (hi / lo).powf(k as f64 / steps as f64)).round() as usize)
        .collect();
    grid.dedup();
    grid
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("thread count must be positive")),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(f)),
    }
}

struct PlannedCell {
    s: usize,
    m: usize,
    w_bar: f64,
    base_seed: u64,
    config: SensingConfig,
}

/// Counts successes per cell; trials are independent work items.
fn execute(cells: &[PlannedCell], trials: usize) -> Result<Vec<usize>> {
    let work: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let hits = work
        .par_iter()
        .map(|&(c, t)| {
            let cell = &cells[c];
            let outcome = run_trial(&cell.config, derive_seed(cell.base_seed, &[t as u64]))?;
            Ok(outcome.recovered)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits
        .chunks(trials)
        .map(|chunk| chunk.iter().filter(|&&h| h).count())
        .collect())
}

fn finish(
    experiment: &str,
    config: serde_json::Value,
    axes: Axes,
    planned: Vec<PlannedCell>,
    successes: Vec<usize>,
    trials: usize,
    started: Instant,
) -> Result<ExperimentReport> {
    let cells = planned
        .iter()
        .zip(successes)
        .map(|(p, hits)| Cell {
            s: p.s,
            m: p.m,
            w_bar: p.w_bar,
            trials,
            successes: hits,
            probability: hits as f64 / trials as f64,
            base_seed: p.base_seed,
        })
        .collect();
    ExperimentReport::new(
        experiment,
        config,
        axes,
        cells,
        Some(started.elapsed().as_secs_f64()),
    )
}

/// Empirical recovery probability over an `(s, m)` grid.
pub fn phase_transition(config: &PhaseTransitionConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    if config.s_grid.is_empty() {
        return Err(Error::invalid("s grid is empty"));
    }
    if config.trials == 0 {
        return Err(Error::invalid("need at least one trial per cell"));
    }
    let grid = config.modulation.grid_size(config.n);
    let mut planned = Vec::new();
    for &s in &config.s_grid {
        for m in config.m_rule.values(s, grid)? {
            let cell = config.cell_config(s, m);
            cell.validate()?;
            planned.push(PlannedCell {
                s,
                m,
                w_bar: config.modulation.w_bar,
                base_seed: derive_seed(config.seed, &[s as u64, m as u64]),
                config: cell,
            });
        }
    }
    if planned.is_empty() {
        return Err(Error::invalid("no admissible (s, m) cells"));
    }
    let successes = execute(&planned, config.trials)?;
    let axes = Axes::from_cells(planned.iter().map(|p| (p.s, p.m, p.w_bar)));
    finish(
        "phase_transition",
        serde_json::to_value(config)?,
        axes,
        planned,
        successes,
        config.trials,
        started,
    )
}

/// Recovery probability as a function of `m` for several chirp rates
/// (analog chain, Fourier sensing on the upsampled grid).
///
/// Cells with the same `m` share trial seeds across chirp rates.
pub fn recovery_curve(config: &RecoveryCurveConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    if config.w_bars.is_empty() {
        return Err(Error::invalid("chirp rate list is empty"));
    }
    if config.trials == 0 {
        return Err(Error::invalid("need at least one trial per cell"));
    }
    let m_values = config.m_values();
    if m_values.is_empty() {
        return Err(Error::invalid("m grid is empty"));
    }
    let mut planned = Vec::new();
    for &w_bar in &config.w_bars {
        if !(w_bar >= 0.0 && w_bar.is_finite()) {
            return Err(Error::invalid(format!("invalid chirp rate {w_bar}")));
        }
        let grid = upsampled_size(w_bar, config.n);
        for &m in &m_values {
            if m > grid {
                return Err(Error::invalid(format!(
                    "m = {m} exceeds the {grid}-point grid at w_bar = {w_bar}"
                )));
            }
            let cell = SensingConfig {
                sensing: TransformKind::Fourier,
                sparsity: config.sparsity,
                modulation: ModulationChoice::chirp(w_bar),
                n: config.n,
                m,
                s: config.s,
                index_law: config.index_law,
                snr_db: None,
                seed: config.seed,
                solver: config.solver.clone(),
                recovery_threshold: config.recovery_threshold,
            };
            cell.validate()?;
            planned.push(PlannedCell {
                s: config.s,
                m,
                w_bar,
                base_seed: derive_seed(config.seed, &[config.s as u64, m as u64]),
                config: cell,
            });
        }
    }
    let successes = execute(&planned, config.trials)?;
    let axes = Axes::from_cells(planned.iter().map(|p| (p.s, p.m, p.w_bar)));
    finish(
        "recovery_curve",
        serde_json::to_value(config)?,
        axes,
        planned,
        successes,
        config.trials,
        started,
    )
}
