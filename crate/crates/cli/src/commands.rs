use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use spreadcs::coherence::{analog_coherence, lemma1_monte_carlo, Lemma1Report};
use spreadcs::experiments::{self, with_threads, MRule};
use spreadcs::{
    make_transform, run_trial, ExperimentReport, IndexLaw, ModulationChoice, ModulationKind,
    PhaseTransitionConfig, RecoveryCurveConfig, SensingConfig, TransformKind, TrialOutcome,
};

use crate::{
    CoherenceTableArgs, Failure, Format, Lemma1Args, Output, PhaseTransitionArgs,
    ReconstructArgs, RecoveryCurveArgs,
};

type Outcome = Result<String, Failure>;

/// Typed parameters from either the config file or the flags, never both.
fn resolve<A, C>(args: A, params: Option<serde_json::Value>, from_flags: impl FnOnce(A) -> Result<C, Failure>) -> Result<C, Failure>
where
    A: Default + PartialEq,
    C: DeserializeOwned,
{
    match params {
        Some(value) => {
            if args != A::default() {
                return Err(Failure::Config(
                    "parameter flags cannot be combined with --config".into(),
                ));
            }
            serde_json::from_value(value).map_err(|e| Failure::Config(e.to_string()))
        }
        None => from_flags(args),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Config(format!("missing --{flag}")))
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn threaded<T: Send>(out: &Output, f: impl FnOnce() -> Result<T, spreadcs::Error> + Send) -> Result<T, Failure> {
    Ok(with_threads(out.threads, f)??)
}

fn write_artifact(out: &Output, emit: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    match &out.path {
        Some(path) => {
            let file = File::create(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            let mut writer = BufWriter::new(file);
            emit(&mut writer)?;
            writer.flush().map_err(runtime)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock)?;
            lock.flush().map_err(runtime)
        }
    }
}

fn write_rows<R: Serialize>(out: &Output, document: &impl Serialize, rows: &[R]) -> Result<(), Failure> {
    write_artifact(out, |w| match out.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, document).map_err(runtime)?;
            writeln!(w).map_err(runtime)
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for row in rows {
                csv.serialize(row).map_err(runtime)?;
            }
            csv.flush().map_err(runtime)
        }
    })
}

fn write_report(out: &Output, report: &ExperimentReport) -> Result<(), Failure> {
    write_artifact(out, |w| match out.format {
        Format::Json => report.write_json(w, out.timing).map_err(runtime),
        Format::Csv => report.write_csv(w).map_err(runtime),
    })
}

fn default_rates() -> Vec<f64> {
    vec![0.0, 0.1, 0.25, 0.5]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoherenceTableConfig {
    n: usize,
    #[serde(default = "default_table_kinds")]
    sparsity: Vec<TransformKind>,
    #[serde(default = "default_rates")]
    w_bars: Vec<f64>,
}

fn default_table_kinds() -> Vec<TransformKind> {
    vec![TransformKind::Dirac, TransformKind::Fourier]
}

#[derive(Debug, Serialize)]
struct CoherenceRow {
    sparsity: TransformKind,
    w_bar: f64,
    n: usize,
    n_upsampled: usize,
    mu: f64,
    product: f64,
}

pub fn coherence_table(args: CoherenceTableArgs, params: Option<serde_json::Value>, out: &Output) -> Outcome {
    let cfg: CoherenceTableConfig = resolve(args, params, |a| {
        Ok(CoherenceTableConfig {
            n: a.n.unwrap_or(1024),
            sparsity: a.sparsity.unwrap_or_else(default_table_kinds),
            w_bars: a.wbar.unwrap_or_else(default_rates),
        })
    })?;
    let rows = threaded(out, || {
        let mut rows = Vec::new();
        for &sparsity in &cfg.sparsity {
            for &w_bar in &cfg.w_bars {
                let r = analog_coherence(sparsity, cfg.n, w_bar)?;
                rows.push(CoherenceRow {
                    sparsity,
                    w_bar,
                    n: cfg.n,
                    n_upsampled: r.n_upsampled,
                    mu: r.mu,
                    product: r.product_nw_mu2,
                });
            }
        }
        Ok(rows)
    })?;
    write_rows(out, &serde_json::json!({ "config": cfg, "rows": rows }), &rows)?;
    let cells: Vec<String> = rows
        .iter()
        .map(|r| format!("{}@{}={:.3}", r.sparsity, r.w_bar, r.product))
        .collect();
    Ok(format!("coherence-table n={}: N_w mu^2 {}", cfg.n, cells.join(" ")))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma1Config {
    n: usize,
    #[serde(default = "fourier")]
    sensing: TransformKind,
    #[serde(default = "haar")]
    sparsity: TransformKind,
    #[serde(default = "rademacher")]
    modulation: ModulationKind,
    #[serde(default = "default_epsilons")]
    epsilons: Vec<f64>,
    #[serde(default = "default_lemma_trials")]
    trials: usize,
    #[serde(default)]
    seed: u64,
}

fn fourier() -> TransformKind {
    TransformKind::Fourier
}

fn haar() -> TransformKind {
    TransformKind::Haar
}

fn rademacher() -> ModulationKind {
    ModulationKind::Rademacher
}

fn default_epsilons() -> Vec<f64> {
    vec![0.05, 0.2]
}

fn default_lemma_trials() -> usize {
    500
}

pub fn lemma1_check(args: Lemma1Args, params: Option<serde_json::Value>, out: &Output) -> Outcome {
    let cfg: Lemma1Config = resolve(args, params, |a| {
        Ok(Lemma1Config {
            n: a.n.unwrap_or(64),
            sensing: a.sensing.unwrap_or(TransformKind::Fourier),
            sparsity: a.sparsity.unwrap_or(TransformKind::Haar),
            modulation: a.modulation.unwrap_or(ModulationKind::Rademacher),
            epsilons: a.epsilon.unwrap_or_else(default_epsilons),
            trials: a.trials.unwrap_or(500),
            seed: a.seed.unwrap_or(0),
        })
    })?;
    let reports: Vec<Lemma1Report> = threaded(out, || {
        let phi = make_transform(cfg.sensing, cfg.n)?;
        let psi = make_transform(cfg.sparsity, cfg.n)?;
        cfg.epsilons
            .iter()
            .map(|&eps| lemma1_monte_carlo(&phi, &psi, cfg.modulation, eps, cfg.trials, cfg.seed))
            .collect()
    })?;
    write_rows(out, &serde_json::json!({ "config": cfg, "rows": reports }), &reports)?;
    let cells: Vec<String> = reports
        .iter()
        .map(|r| format!("eps={} rate={:.4} ({})", r.epsilon, r.violation_rate, if r.violation_rate <= r.epsilon { "ok" } else { "exceeded" }))
        .collect();
    Ok(format!("lemma1-check n={} trials={}: {}", cfg.n, cfg.trials, cells.join(", ")))
}

fn modulation_choice(kind: Option<ModulationKind>, w_bar: Option<f64>) -> Result<ModulationChoice, Failure> {
    let kind = kind.unwrap_or_default();
    match (kind, w_bar) {
        (ModulationKind::Chirp, w) => Ok(ModulationChoice::chirp(w.unwrap_or(0.0))),
        (_, Some(_)) => Err(Failure::Config("--wbar applies to chirp modulation only".into())),
        (kind, None) => Ok(ModulationChoice { kind, w_bar: 0.0 }),
    }
}

fn summarize(name: &str, report: &ExperimentReport) -> String {
    let trials: usize = report.cells.iter().map(|c| c.trials).sum();
    let mean = report.cells.iter().map(|c| c.probability).sum::<f64>() / report.cells.len() as f64;
    format!(
        "{name}: {} cells, {trials} trials, mean recovery probability {mean:.3}, config {}",
        report.cells.len(),
        &report.config_digest[..12]
    )
}

pub fn phase_transition(args: PhaseTransitionArgs, params: Option<serde_json::Value>, out: &Output) -> Outcome {
    let cfg: PhaseTransitionConfig = resolve(args, params, |a| {
        let n = a.n.unwrap_or(128);
        let s_grid = a.s_grid.unwrap_or_else(|| {
            let mut grid: Vec<usize> = [32, 16, 8].iter().map(|d| (n / d).max(1)).collect();
            grid.dedup();
            grid
        });
        let mut cfg = PhaseTransitionConfig::new(
            required(a.sensing, "sensing")?,
            required(a.sparsity, "sparsity")?,
            modulation_choice(a.modulation, a.wbar)?,
            n,
            s_grid,
            a.trials.unwrap_or(50),
            a.seed.unwrap_or(0),
        );
        cfg.m_rule = match (a.m_grid, a.m_multiples) {
            (Some(list), _) => MRule::Explicit(list),
            (None, Some(k)) => MRule::Multiples(k),
            (None, None) => MRule::default(),
        };
        cfg.index_law = a.index_law.unwrap_or_default();
        cfg.snr_db = a.snr_db;
        Ok(cfg)
    })?;
    let report = threaded(out, || experiments::phase_transition(&cfg))?;
    write_report(out, &report)?;
    Ok(summarize("phase-transition", &report))
}

pub fn recovery_curve(args: RecoveryCurveArgs, params: Option<serde_json::Value>, out: &Output) -> Outcome {
    let cfg: RecoveryCurveConfig = resolve(args, params, |a| {
        let mut cfg = RecoveryCurveConfig::new(
            required(a.sparsity, "sparsity")?,
            a.n.unwrap_or(256),
            a.s.unwrap_or(10),
            a.wbar.unwrap_or_else(default_rates),
            a.trials.unwrap_or(50),
            a.seed.unwrap_or(0),
        );
        cfg.m_grid = a.m_grid;
        cfg.index_law = a.index_law.unwrap_or_default();
        Ok(cfg)
    })?;
    let report = threaded(out, || experiments::recovery_curve(&cfg))?;
    write_report(out, &report)?;
    Ok(summarize("recovery-curve", &report))
}

#[derive(Serialize)]
struct Reconstruction<'a> {
    config: &'a SensingConfig,
    outcome: TrialOutcome,
}

pub fn reconstruct(args: ReconstructArgs, params: Option<serde_json::Value>, out: &Output) -> Outcome {
    let cfg: SensingConfig = resolve(args, params, |a| {
        let mut cfg = SensingConfig::new(
            required(a.sensing, "sensing")?,
            required(a.sparsity, "sparsity")?,
            modulation_choice(a.modulation, a.wbar)?,
            required(a.n, "n")?,
            required(a.m, "m")?,
            required(a.s, "s")?,
        );
        cfg.seed = a.seed.unwrap_or(0);
        cfg.index_law = a.index_law.unwrap_or(IndexLaw::default());
        cfg.snr_db = a.snr_db;
        Ok(cfg)
    })?;
    let outcome = threaded(out, || run_trial(&cfg, cfg.seed))?;
    let doc = Reconstruction {
        config: &cfg,
        outcome,
    };
    write_rows(out, &doc, &[outcome])?;
    Ok(format!(
        "reconstruct: rel_error={:.3e} recovered={} iterations={} converged={}",
        outcome.rel_error, outcome.recovered, outcome.iterations, outcome.converged
    ))
}
