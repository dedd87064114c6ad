use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Law used to draw measurement indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexLaw {
    /// Independent uniform draws; duplicates are kept.
    #[default]
    IidUniform,
    UniformWithoutReplacement,
}

impl fmt::Display for IndexLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexLaw::IidUniform => "iid_uniform",
            IndexLaw::UniformWithoutReplacement => "uniform_without_replacement",
        })
    }
}

impl FromStr for IndexLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid_uniform" | "iid" => Ok(IndexLaw::IidUniform),
            "uniform_without_replacement" | "without_replacement" => {
                Ok(IndexLaw::UniformWithoutReplacement)
            }
            _ => Err(Error::invalid(format!("unknown index law '{s}'"))),
        }
    }
}

/// Selected measurement rows, stored 0-based in `[0, n_total)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
    n_total: usize,
    law: Option<IndexLaw>,
    seed: Option<u64>,
}

impl IndexSet {
    /// Draws `m` indices from `[0, n_total)` under `law`.
    pub fn sample(law: IndexLaw, m: usize, n_total: usize, seed: u64) -> Result<Self> {
        if m == 0 || n_total == 0 {
            return Err(Error::invalid("index set needs m >= 1 and n_total >= 1"));
        }
        let mut rng = rng_from_seed(seed);
        let indices = match law {
            IndexLaw::IidUniform => (0..m).map(|_| rng.random_range(0..n_total)).collect(),
            IndexLaw::UniformWithoutReplacement => {
                if m > n_total {
                    return Err(Error::invalid(format!(
                        "cannot draw {m} distinct indices from {n_total}"
                    )));
                }
                rand::seq::index::sample(&mut rng, n_total, m).into_vec()
            }
        };
        Ok(IndexSet {
            indices,
            n_total,
            law: Some(law),
            seed: Some(seed),
        })
    }

    /// An explicit selection.
    pub fn from_indices(indices: Vec<usize>, n_total: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_total) {
            return Err(Error::invalid(format!(
                "index {bad} out of range [0, {n_total})"
            )));
        }
        Ok(IndexSet {
            indices,
            n_total,
            law: None,
            seed: None,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn law(&self) -> Option<IndexLaw> {
        self.law
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}
