use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Kernel, LinearOperator, Structure};
use crate::error::{Error, Result};

/// Orthonormal bases available as sensing or sparsity bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Fourier,
    Hadamard,
    Haar,
    Dirac,
}

impl TransformKind {
    pub const ALL: [TransformKind; 4] = [
        TransformKind::Fourier,
        TransformKind::Hadamard,
        TransformKind::Haar,
        TransformKind::Dirac,
    ];

    /// All entries share the same modulus `n^{-1/2}`.
    pub fn is_universal(self) -> bool {
        matches!(self, TransformKind::Fourier | TransformKind::Hadamard)
    }

    pub fn requires_power_of_two(self) -> bool {
        matches!(self, TransformKind::Hadamard | TransformKind::Haar)
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Fourier => "fourier",
            TransformKind::Hadamard => "hadamard",
            TransformKind::Haar => "haar",
            TransformKind::Dirac => "dirac",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown transform '{s}'")))
    }
}

/// Builds the unitary operator for `kind` on `C^n`.
///
/// `apply` is synthesis (coefficients to signal, the role of the basis
/// matrix itself); `apply_adjoint` is analysis.
pub fn make_transform(kind: TransformKind, n: usize) -> Result<LinearOperator> {
    if n == 0 {
        return Err(Error::invalid("transform size must be positive"));
    }
    if kind.requires_power_of_two() && !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "{kind} transform needs a power-of-two size, got {n}"
        )));
    }
    let label = format!("{kind}{n}");
    match kind {
        TransformKind::Fourier => {
            LinearOperator::from_kernel(n, n, label, Structure::UNITARY, UnitaryDft::new(n))
        }
        TransformKind::Hadamard => {
            LinearOperator::from_kernel(n, n, label, Structure::UNITARY, Hadamard)
        }
        TransformKind::Haar => LinearOperator::from_kernel(n, n, label, Structure::UNITARY, Haar),
        TransformKind::Dirac => {
            LinearOperator::from_kernel(n, n, label, Structure::UNITARY, Identity)
        }
    }
}

/// Unitary DFT pair. Forward is the inverse DFT scaled by `1/sqrt(n)`, so the
/// columns are the Fourier basis vectors `exp(2 pi i k t / n) / sqrt(n)`.
pub(crate) struct UnitaryDft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl UnitaryDft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        UnitaryDft {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    /// `sum_t x_t exp(-2 pi i k t / n) / sqrt(n)`.
    pub(crate) fn analyze(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.run(&self.fwd, x)
    }

    /// `sum_k a_k exp(2 pi i k t / n) / sqrt(n)`.
    pub(crate) fn synthesize(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.run(&self.inv, a)
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        plan.process(&mut buf);
        for v in &mut buf {
            *v *= self.scale;
        }
        buf
    }
}

impl Kernel for UnitaryDft {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.synthesize(x)
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.analyze(y)
    }
}

struct Hadamard;

/// In-place Walsh-Hadamard butterflies, natural (Sylvester) ordering.
fn fwht(data: &mut [Complex64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for v in data {
        *v *= scale;
    }
}

impl Kernel for Hadamard {
    // Real symmetric: forward and adjoint coincide.
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        fwht(&mut buf);
        buf
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.forward(y)
    }
}

/// Full-depth periodic orthonormal Haar wavelet.
///
/// Coefficient layout: index 0 is the scaling coefficient, followed by the
/// detail bands from coarsest (index 1) to finest (indices `n/2..n`).
struct Haar;

impl Kernel for Haar {
    fn forward(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = a.len();
        let mut buf = a.to_vec();
        let mut tmp = vec![Complex64::new(0.0, 0.0); n];
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            for k in 0..half {
                let (s, d) = (buf[k], buf[half + k]);
                tmp[2 * k] = (s + d) * FRAC_1_SQRT_2;
                tmp[2 * k + 1] = (s - d) * FRAC_1_SQRT_2;
            }
            buf[..len].copy_from_slice(&tmp[..len]);
            len *= 2;
        }
        buf
    }

    fn adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        let mut buf = x.to_vec();
        let mut tmp = vec![Complex64::new(0.0, 0.0); n];
        let mut len = n;
        while len > 1 {
            let half = len / 2;
            for k in 0..half {
                let (e, o) = (buf[2 * k], buf[2 * k + 1]);
                tmp[k] = (e + o) * FRAC_1_SQRT_2;
                tmp[half + k] = (e - o) * FRAC_1_SQRT_2;
            }
            buf[..len].copy_from_slice(&tmp[..len]);
            len = half;
        }
        buf
    }
}

struct Identity;

impl Kernel for Identity {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.to_vec()
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        y.to_vec()
    }
}
