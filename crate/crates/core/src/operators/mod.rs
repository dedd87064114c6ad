//! Matrix-free linear operators.
//!
//! A [`LinearOperator`] is a cheap-to-clone handle to an immutable map between
//! complex vector spaces, with forward and adjoint application. Operators are
//! assembled from fast orthonormal transforms ([`make_transform`]), diagonal
//! scalings, row restrictions and composition. Two structural flags are
//! tracked through the algebra:
//!
//! * `isometry`: `A* A = I` (columns orthonormal),
//! * `co_isometry`: `A A* = I` (rows orthonormal).
//!
//! A unitary operator carries both. The solver uses these flags, together with
//! [`LinearOperator::as_restricted_isometry`], to pick closed-form projections.

mod dense;
mod index;
mod transforms;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dense::DenseMatrix;
pub use index::{IndexLaw, IndexSet};
pub use transforms::{make_transform, TransformKind};
pub(crate) use transforms::UnitaryDft;

/// A procedure implementing one concrete linear map.
///
/// Implementations receive inputs of exactly `in_dim` (forward) or `out_dim`
/// (adjoint) entries and must return outputs of the opposite dimension.
pub trait Kernel: Send + Sync {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

enum Node {
    Kernel(Box<dyn Kernel>),
    Adjoint(LinearOperator),
    Compose {
        outer: LinearOperator,
        inner: LinearOperator,
    },
    Restrict {
        base: LinearOperator,
        rows: Vec<usize>,
    },
}

/// Matrix-free linear map `C^in_dim -> C^out_dim`.
#[derive(Clone)]
pub struct LinearOperator {
    in_dim: usize,
    out_dim: usize,
    label: Arc<str>,
    isometry: bool,
    co_isometry: bool,
    node: Arc<Node>,
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator")
            .field("label", &self.label)
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("isometry", &self.isometry)
            .field("co_isometry", &self.co_isometry)
            .finish()
    }
}

/// Flags describing what is known about a kernel's Gram matrices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Structure {
    pub isometry: bool,
    pub co_isometry: bool,
}

impl Structure {
    pub const UNITARY: Structure = Structure {
        isometry: true,
        co_isometry: true,
    };
    pub const ISOMETRY: Structure = Structure {
        isometry: true,
        co_isometry: false,
    };
    pub const GENERAL: Structure = Structure {
        isometry: false,
        co_isometry: false,
    };
}

impl LinearOperator {
    /// Wraps a kernel. `structure` must be truthful: the solver relies on it.
    pub fn from_kernel(
        in_dim: usize,
        out_dim: usize,
        label: impl Into<String>,
        structure: Structure,
        kernel: impl Kernel + 'static,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::invalid("operator dimensions must be positive"));
        }
        let label: String = label.into();
        Ok(LinearOperator {
            in_dim,
            out_dim,
            label: label.into(),
            isometry: structure.isometry,
            co_isometry: structure.co_isometry,
            node: Arc::new(Node::Kernel(Box::new(kernel))),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `A* A = I`.
    pub fn is_isometry(&self) -> bool {
        self.isometry
    }

    /// `A A* = I`.
    pub fn is_co_isometry(&self) -> bool {
        self.co_isometry
    }

    pub fn is_unitary(&self) -> bool {
        self.isometry && self.co_isometry
    }

    /// Applies the operator. Panics if `x.len() != in_dim`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            x.len(),
            self.in_dim,
            "{}: forward input has wrong length",
            self.label
        );
        let y = match &*self.node {
            Node::Kernel(k) => k.forward(x),
            Node::Adjoint(op) => op.apply_adjoint(x),
            Node::Compose { outer, inner } => outer.apply(&inner.apply(x)),
            Node::Restrict { base, rows } => {
                let full = base.apply(x);
                rows.iter().map(|&r| full[r]).collect()
            }
        };
        debug_assert_eq!(y.len(), self.out_dim);
        y
    }

    /// Applies the adjoint. Panics if `y.len() != out_dim`.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            y.len(),
            self.out_dim,
            "{}: adjoint input has wrong length",
            self.label
        );
        let x = match &*self.node {
            Node::Kernel(k) => k.adjoint(y),
            Node::Adjoint(op) => op.apply(y),
            Node::Compose { outer, inner } => inner.apply_adjoint(&outer.apply_adjoint(y)),
            Node::Restrict { base, rows } => {
                base.apply_adjoint(&scatter_add(rows, y, base.out_dim))
            }
        };
        debug_assert_eq!(x.len(), self.in_dim);
        x
    }

    /// The adjoint as an operator in its own right.
    pub fn adjoint(&self) -> LinearOperator {
        if let Node::Adjoint(op) = &*self.node {
            return op.clone();
        }
        LinearOperator {
            in_dim: self.out_dim,
            out_dim: self.in_dim,
            label: format!("({})*", self.label).into(),
            isometry: self.co_isometry,
            co_isometry: self.isometry,
            node: Arc::new(Node::Adjoint(self.clone())),
        }
    }

    /// Dense row-major materialization, built column by column.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.out_dim, self.in_dim);
        let mut e = vec![Complex64::new(0.0, 0.0); self.in_dim];
        for j in 0..self.in_dim {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e);
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        m
    }

    /// If the operator has the form `R B` where `R` selects rows (possibly
    /// repeated) and `B` is an isometry, returns `B` and the row indices.
    ///
    /// Recognizes a restriction of an isometry, and a restriction of an
    /// isometry followed by (i.e. composed onto) further isometries.
    pub fn as_restricted_isometry(&self) -> Option<(LinearOperator, &[usize])> {
        match &*self.node {
            Node::Restrict { base, rows } if base.isometry => Some((base.clone(), rows)),
            Node::Compose { outer, inner } if inner.isometry => {
                let (b, rows) = outer.as_restricted_isometry()?;
                let chained = compose(&b, inner).ok()?;
                Some((chained, rows))
            }
            _ => None,
        }
    }
}

pub(crate) fn scatter_add(rows: &[usize], y: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut full = vec![Complex64::new(0.0, 0.0); dim];
    for (&r, &v) in rows.iter().zip(y) {
        full[r] += v;
    }
    full
}

/// `outer ∘ inner`.
pub fn compose(outer: &LinearOperator, inner: &LinearOperator) -> Result<LinearOperator> {
    if inner.out_dim != outer.in_dim {
        return Err(Error::invalid(format!(
            "cannot compose {} ({}x{}) after {} ({}x{})",
            outer.label, outer.out_dim, outer.in_dim, inner.label, inner.out_dim, inner.in_dim
        )));
    }
    Ok(LinearOperator {
        in_dim: inner.in_dim,
        out_dim: outer.out_dim,
        label: format!("{} . {}", outer.label, inner.label).into(),
        isometry: outer.isometry && inner.isometry,
        co_isometry: outer.co_isometry && inner.co_isometry,
        node: Arc::new(Node::Compose {
            outer: outer.clone(),
            inner: inner.clone(),
        }),
    })
}

/// Chains operators right to left: `compose_all(&[a, b, c])` is `a ∘ b ∘ c`.
pub fn compose_all(ops: &[LinearOperator]) -> Result<LinearOperator> {
    let (last, rest) = ops
        .split_last()
        .ok_or_else(|| Error::invalid("compose_all needs at least one operator"))?;
    rest.iter()
        .rev()
        .try_fold(last.clone(), |acc, outer| compose(outer, &acc))
}

/// Keeps the rows of `op` listed in `omega`, in order, duplicates repeated.
pub fn restrict_rows(op: &LinearOperator, omega: &IndexSet) -> Result<LinearOperator> {
    let rows = omega.indices();
    if rows.is_empty() {
        return Err(Error::invalid("row selection is empty"));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= op.out_dim) {
        return Err(Error::invalid(format!(
            "row index {bad} out of range for operator with {} rows",
            op.out_dim
        )));
    }
    let mut seen = vec![false; op.out_dim];
    let distinct = rows.iter().all(|&r| !std::mem::replace(&mut seen[r], true));
    let full_permutation = distinct && rows.len() == op.out_dim;
    Ok(LinearOperator {
        in_dim: op.in_dim,
        out_dim: rows.len(),
        label: format!("R[{}] {}", rows.len(), op.label).into(),
        isometry: op.isometry && full_permutation,
        co_isometry: op.co_isometry && distinct,
        node: Arc::new(Node::Restrict {
            base: op.clone(),
            rows: rows.to_vec(),
        }),
    })
}

struct Diagonal {
    values: Vec<Complex64>,
}

impl Kernel for Diagonal {
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().zip(&self.values).map(|(a, d)| a * d).collect()
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        y.iter().zip(&self.values).map(|(a, d)| a * d.conj()).collect()
    }
}

/// Entrywise scaling by `values`. Unitary when every entry has unit modulus.
pub fn diagonal(values: Vec<Complex64>, label: impl Into<String>) -> Result<LinearOperator> {
    let unit = values.iter().all(|v| (v.norm() - 1.0).abs() <= 1e-12);
    let structure = if unit {
        Structure::UNITARY
    } else {
        Structure::GENERAL
    };
    LinearOperator::from_kernel(values.len(), values.len(), label, structure, Diagonal { values })
}

/// Identity on `C^n`.
pub fn identity(n: usize) -> Result<LinearOperator> {
    make_transform(TransformKind::Dirac, n)
}
