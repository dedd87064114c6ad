use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Distinct grid values, sorted ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub s_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub w_bar_values: Vec<f64>,
}

impl Axes {
    pub fn from_cells(cells: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut axes = Axes::default();
        for (s, m, w) in cells {
            axes.s_values.push(s);
            axes.m_values.push(m);
            axes.w_bar_values.push(w);
        }
        axes.s_values.sort_unstable();
        axes.s_values.dedup();
        axes.m_values.sort_unstable();
        axes.m_values.dedup();
        axes.w_bar_values.sort_by(f64::total_cmp);
        axes.w_bar_values.dedup();
        axes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub s: usize,
    pub m: usize,
    pub w_bar: f64,
    pub trials: usize,
    pub successes: usize,
    pub probability: f64,
    /// Seed from which this cell's trial seeds are derived.
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    /// Hex SHA-256 of the compact JSON encoding of `config`.
    pub config_digest: String,
    pub axes: Axes,
    pub cells: Vec<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn new(
        experiment: &str,
        config: serde_json::Value,
        axes: Axes,
        cells: Vec<Cell>,
        runtime_seconds: Option<f64>,
    ) -> Result<Self> {
        let digest = Sha256::digest(serde_json::to_vec(&config)?);
        Ok(ExperimentReport {
            experiment: experiment.to_string(),
            config,
            config_digest: hex::encode(digest),
            axes,
            cells,
            runtime_seconds,
        })
    }

    /// Cell at `(s, m, w_bar)`, if present.
    pub fn cell(&self, s: usize, m: usize, w_bar: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.s == s && c.m == m && c.w_bar == w_bar)
    }

    /// Pretty JSON. Wall-clock time is dropped unless `timing` is set, which
    /// keeps repeated runs byte-identical.
    pub fn write_json<W: Write>(&self, mut out: W, timing: bool) -> Result<()> {
        if timing || self.runtime_seconds.is_none() {
            serde_json::to_writer_pretty(&mut out, self)?;
        } else {
            let stripped = ExperimentReport {
                runtime_seconds: None,
                ..self.clone()
            };
            serde_json::to_writer_pretty(&mut out, &stripped)?;
        }
        writeln!(out)?;
        Ok(())
    }

    /// One row per cell: `s,m,w_bar,trials,successes,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["s", "m", "w_bar", "trials", "successes", "probability"])?;
        for c in &self.cells {
            writer.write_record([
                c.s.to_string(),
                c.m.to_string(),
                c.w_bar.to_string(),
                c.trials.to_string(),
                c.successes.to_string(),
                c.probability.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let cells = vec![
            Cell { s: 2, m: 8, w_bar: 0.0, trials: 4, successes: 1, probability: 0.25, base_seed: 9 },
            Cell { s: 2, m: 4, w_bar: 0.5, trials: 4, successes: 0, probability: 0.0, base_seed: 7 },
        ];
        let axes = Axes::from_cells(cells.iter().map(|c| (c.s, c.m, c.w_bar)));
        ExperimentReport::new("demo", serde_json::json!({"n": 16, "a": [1, 2]}), axes, cells, Some(1.5))
            .unwrap()
    }

    #[test]
    fn axes_sorted_unique() {
        let r = sample();
        assert_eq!(r.axes.s_values, vec![2]);
        assert_eq!(r.axes.m_values, vec![4, 8]);
        assert_eq!(r.axes.w_bar_values, vec![0.0, 0.5]);
    }

    #[test]
    fn digest_tracks_config() {
        let a = sample();
        let mut b = sample();
        assert_eq!(a.config_digest, b.config_digest);
        assert_eq!(a.config_digest.len(), 64);
        b.config["n"] = serde_json::json!(17);
        let b = ExperimentReport::new("demo", b.config, b.axes, b.cells, None).unwrap();
        assert_ne!(a.config_digest, b.config_digest);
    }

    #[test]
    fn json_timing_optional() {
        let r = sample();
        let mut plain = Vec::new();
        r.write_json(&mut plain, false).unwrap();
        let text = String::from_utf8(plain).unwrap();
        assert!(!text.contains("runtime_seconds"));
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.cells, r.cells);

        let mut timed = Vec::new();
        r.write_json(&mut timed, true).unwrap();
        assert!(String::from_utf8(timed).unwrap().contains("runtime_seconds"));
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        sample().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,m,w_bar,trials,successes,probability");
        assert_eq!(lines[1], "2,8,0,4,1,0.25");
        assert_eq!(lines.len(), 3);
        assert!(sample().cell(2, 4, 0.5).is_some());
        assert!(sample().cell(3, 4, 0.5).is_none());
    }
}
