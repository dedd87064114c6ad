//! Unit-modulus pre-modulation sequences and the zero-padding upsampler.
//!
//! Random sequences (Rademacher, Steinhaus) are used in the digital setting
//! where the modulation acts directly on the `N`-point signal. The linear
//! chirp is used in the analog setting: the signal is first upsampled to an
//! `N_w`-point grid (band-limited interpolation), then multiplied by the
//! sampled chirp.
//!
//! Chirp samples follow the analog definition `exp(i pi w tau^2)` on the
//! centered field of view `tau_k = (k / N_w - 1/2) L`. With the discrete rate
//! `w_bar = w L^2 / N` the length `L` cancels:
//!
//! ```text
//! c_k = exp(i pi w_bar N (k / N_w - 1/2)^2),   k = 0..N_w
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{self, Kernel, LinearOperator, Structure};
use crate::operators::UnitaryDft;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    #[default]
    None,
    Rademacher,
    Steinhaus,
    Chirp,
}

impl ModulationKind {
    pub fn is_random(self) -> bool {
        matches!(self, ModulationKind::Rademacher | ModulationKind::Steinhaus)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModulationKind::None => "none",
            ModulationKind::Rademacher => "rademacher",
            ModulationKind::Steinhaus => "steinhaus",
            ModulationKind::Chirp => "chirp",
        }
    }
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ModulationKind::None,
            ModulationKind::Rademacher,
            ModulationKind::Steinhaus,
            ModulationKind::Chirp,
        ]
        .into_iter()
        .find(|k| k.name() == s.to_ascii_lowercase())
        .ok_or_else(|| Error::invalid(format!("unknown modulation '{s}'")))
    }
}

/// A realized modulation sequence with its grid metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    /// Signal length `N`.
    pub n_signal: usize,
    /// Grid length `N_w` the sequence lives on; equals `N` except for chirps.
    pub n_upsampled: usize,
    /// Discrete chirp rate `w_bar` (zero for non-chirp kinds).
    pub chirp_rate: f64,
    /// Generator seed (random kinds only).
    pub seed: Option<u64>,
    pub values: Vec<Complex64>,
}

impl ModulationSpec {
    /// The trivial modulation (all ones).
    pub fn none(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("modulation length must be positive"));
        }
        Ok(ModulationSpec {
            kind: ModulationKind::None,
            n_signal: n,
            n_upsampled: n,
            chirp_rate: 0.0,
            seed: None,
            values: vec![Complex64::new(1.0, 0.0); n],
        })
    }
}

/// Draws an i.i.d. Rademacher (`±1`) or Steinhaus (`e^{i theta}`) sequence.
pub fn make_random_modulation(kind: ModulationKind, n: usize, seed: u64) -> Result<ModulationSpec> {
    if n == 0 {
        return Err(Error::invalid("modulation length must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let values = match kind {
        ModulationKind::Rademacher => (0..n)
            .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        ModulationKind::Steinhaus => (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
            .collect(),
        other => {
            return Err(Error::invalid(format!(
                "{other} is not a random modulation kind"
            )))
        }
    };
    Ok(ModulationSpec {
        kind,
        n_signal: n,
        n_upsampled: n,
        chirp_rate: 0.0,
        seed: Some(seed),
        values,
    })
}

/// Smallest even integer `>= (1 + w_bar) n`.
pub fn upsampled_size(w_bar: f64, n: usize) -> usize {
    let target = (1.0 + w_bar.abs()) * n as f64;
    // absorb representation error such as 1.25 * 256 = 320.00000000000006
    let mut nw = (target * (1.0 - 1e-12)).ceil() as usize;
    nw = nw.max(n);
    nw + nw % 2
}

/// Samples the linear chirp of discrete rate `w_bar` on the upsampled grid.
pub fn make_chirp_modulation(w_bar: f64, n: usize) -> Result<ModulationSpec> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "chirp modulation needs an even n >= 2, got {n}"
        )));
    }
    if !w_bar.is_finite() || w_bar < 0.0 {
        return Err(Error::invalid(format!(
            "chirp rate must be finite and non-negative, got {w_bar}"
        )));
    }
    let nw = upsampled_size(w_bar, n);
    let values = (0..nw)
        .map(|k| {
            let tau = k as f64 / nw as f64 - 0.5;
            Complex64::from_polar(1.0, PI * w_bar * n as f64 * tau * tau)
        })
        .collect();
    Ok(ModulationSpec {
        kind: ModulationKind::Chirp,
        n_signal: n,
        n_upsampled: nw,
        chirp_rate: w_bar,
        seed: None,
        values,
    })
}

/// Diagonal operator `C` on the sequence's grid.
pub fn modulation_operator(spec: &ModulationSpec) -> Result<LinearOperator> {
    operators::diagonal(spec.values.clone(), format!("C[{}]", spec.kind))
}

/// Band-limited upsampler `n -> n_up` by spectral zero padding.
struct Upsampler {
    n: usize,
    n_up: usize,
    small: UnitaryDft,
    large: UnitaryDft,
}

impl Upsampler {
    /// Maps the centered band of an `n`-bin spectrum onto the `n_up`-bin one.
    /// Non-negative frequencies keep their index, negative ones (including the
    /// single Nyquist bin `-n/2`) wrap to the top of the larger spectrum.
    fn bin(&self, f: usize) -> usize {
        if f < self.n / 2 {
            f
        } else {
            self.n_up - self.n + f
        }
    }
}

impl Kernel for Upsampler {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let spectrum = self.small.analyze(x);
        let mut padded = vec![Complex64::new(0.0, 0.0); self.n_up];
        for (f, v) in spectrum.into_iter().enumerate() {
            padded[self.bin(f)] = v;
        }
        self.large.synthesize(&padded)
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let spectrum = self.large.analyze(y);
        let band: Vec<_> = (0..self.n).map(|f| spectrum[self.bin(f)]).collect();
        self.small.synthesize(&band)
    }
}

/// `U = F_{n_up} Z F_n^*` with unitary DFTs; satisfies `U* U = I`.
pub fn make_upsampler(n: usize, n_up: usize) -> Result<LinearOperator> {
    if n == 0 || n % 2 != 0 || n_up % 2 != 0 {
        return Err(Error::invalid(format!(
            "upsampler sizes must be positive and even, got {n} -> {n_up}"
        )));
    }
    if n_up < n {
        return Err(Error::invalid(format!(
            "upsampled size {n_up} is smaller than {n}"
        )));
    }
    let structure = if n_up == n {
        Structure::UNITARY
    } else {
        Structure::ISOMETRY
    };
    LinearOperator::from_kernel(
        n,
        n_up,
        format!("U[{n}->{n_up}]"),
        structure,
        Upsampler {
            n,
            n_up,
            small: UnitaryDft::new(n),
            large: UnitaryDft::new(n_up),
        },
    )
}
