//! `spreadcs` command-line front end.
//!
//! Every subcommand either takes explicit flags or a `--config` JSON file
//! holding the same parameters; the two are mutually exclusive.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spreadcs::{IndexLaw, ModulationKind, TransformKind};

#[derive(Debug, Parser)]
#[command(name = "spreadcs", version, about = "Spread spectrum compressed sensing experiments")]
struct Cli {
    /// JSON file with the subcommand parameters (replaces parameter flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Artifact path; stdout when absent.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Artifact format; inferred from the output extension, else json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads: a positive integer or `auto`.
    #[arg(long, global = true)]
    threads: Option<Threads>,

    /// Include wall-clock runtime in JSON reports.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Count(usize),
    Auto,
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
        }
    }
}

impl Threads {
    pub fn count(self) -> Option<usize> {
        match self {
            Threads::Count(n) => Some(n),
            Threads::Auto => None,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analog-chain coherence N_w mu^2 for a list of chirp rates.
    CoherenceTable(CoherenceTableArgs),
    /// Monte Carlo check of the modulated coherence tail bound.
    Lemma1Check(Lemma1Args),
    /// Recovery probabilities over an (s, m) grid.
    PhaseTransition(PhaseTransitionArgs),
    /// Recovery probability against m for several chirp rates.
    RecoveryCurve(RecoveryCurveArgs),
    /// One seeded acquisition and reconstruction.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Default, PartialEq, Args)]
pub struct CoherenceTableArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated sparsity bases.
    #[arg(long, value_delimiter = ',')]
    pub sparsity: Option<Vec<TransformKind>>,
    /// Comma-separated chirp rates.
    #[arg(long, value_delimiter = ',')]
    pub wbar: Option<Vec<f64>>,
}

#[derive(Debug, Default, PartialEq, Args)]
pub struct Lemma1Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sensing: Option<TransformKind>,
    #[arg(long)]
    pub sparsity: Option<TransformKind>,
    #[arg(long)]
    pub modulation: Option<ModulationKind>,
    /// Comma-separated failure probabilities.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Default, PartialEq, Args)]
pub struct PhaseTransitionArgs {
    #[arg(long)]
    pub sensing: Option<TransformKind>,
    #[arg(long)]
    pub sparsity: Option<TransformKind>,
    #[arg(long)]
    pub modulation: Option<ModulationKind>,
    /// Chirp rate (chirp modulation only).
    #[arg(long)]
    pub wbar: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated sparsity levels; defaults to n/32, n/16, n/8.
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<usize>>,
    /// Measurements m = s, 2s, ..., k s.
    #[arg(long, conflicts_with = "m_grid")]
    pub m_multiples: Option<usize>,
    /// Comma-separated explicit measurement counts.
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub index_law: Option<IndexLaw>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Default, PartialEq, Args)]
pub struct RecoveryCurveArgs {
    #[arg(long)]
    pub sparsity: Option<TransformKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    /// Comma-separated chirp rates.
    #[arg(long, value_delimiter = ',')]
    pub wbar: Option<Vec<f64>>,
    /// Comma-separated measurement counts; defaults to a geometric grid.
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub index_law: Option<IndexLaw>,
}

#[derive(Debug, Default, PartialEq, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub sensing: Option<TransformKind>,
    #[arg(long)]
    pub sparsity: Option<TransformKind>,
    #[arg(long)]
    pub modulation: Option<ModulationKind>,
    #[arg(long)]
    pub wbar: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub index_law: Option<IndexLaw>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
}

/// Failure class, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or config contents (exit 2).
    Config(String),
    /// Anything that went wrong while running (exit 1).
    Runtime(String),
}

impl From<spreadcs::Error> for Failure {
    fn from(e: spreadcs::Error) -> Self {
        if e.is_invalid_input() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

/// Output settings shared by all subcommands.
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub timing: bool,
}

/// Contents of a `--config` file: subcommand parameters plus optional
/// `output`, `format`, `threads` and `timing` keys. Flags win over the file.
struct ConfigFile {
    params: serde_json::Value,
    output: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<Threads>,
    timing: Option<bool>,
}

fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| Failure::Config("config must be a JSON object".into()))?;
    let bad = |key: &str| Failure::Config(format!("config key `{key}` has the wrong type"));

    let output = match object.remove("output") {
        None => None,
        Some(v) => Some(PathBuf::from(v.as_str().ok_or_else(|| bad("output"))?)),
    };
    let format = match object.remove("format") {
        None => None,
        Some(v) => {
            let name = v.as_str().ok_or_else(|| bad("format"))?;
            Some(Format::from_str(name, true).map_err(Failure::Config)?)
        }
    };
    let threads = match object.remove("threads") {
        None => None,
        Some(serde_json::Value::String(s)) => Some(s.parse().map_err(Failure::Config)?),
        Some(v) => Some(v.to_string().parse().map_err(Failure::Config)?),
    };
    let timing = match object.remove("timing") {
        None => None,
        Some(v) => Some(v.as_bool().ok_or_else(|| bad("timing"))?),
    };
    Ok(ConfigFile {
        params: value,
        output,
        format,
        threads,
        timing,
    })
}

fn run(cli: Cli) -> Result<(String, bool), Failure> {
    let file = cli.config.as_deref().map(load_config).transpose()?;
    let (params, file_output, file_format, file_threads, file_timing) = match file {
        Some(f) => (Some(f.params), f.output, f.format, f.threads, f.timing),
        None => (None, None, None, None, None),
    };
    let path = cli.output.or(file_output);
    let format = cli.format.or(file_format).unwrap_or(match &path {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        _ => Format::Json,
    });
    let output = Output {
        path,
        format,
        threads: cli.threads.or(file_threads).and_then(Threads::count),
        timing: cli.timing || file_timing.unwrap_or(false),
    };
    let summary = match cli.command {
        Command::CoherenceTable(args) => commands::coherence_table(args, params, &output),
        Command::Lemma1Check(args) => commands::lemma1_check(args, params, &output),
        Command::PhaseTransition(args) => commands::phase_transition(args, params, &output),
        Command::RecoveryCurve(args) => commands::recovery_curve(args, params, &output),
        Command::Reconstruct(args) => commands::reconstruct(args, params, &output),
    }?;
    Ok((summary, output.path.is_some()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((summary, to_file)) => {
            // keep stdout clean when the artifact itself goes there
            if to_file {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
