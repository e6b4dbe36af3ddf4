//! Numeric slack used by invariant checks.
//!
//! Every check in the crate reads its threshold from a [`Tolerances`] record.
//! The crate-wide defaults live in [`Tolerances::DEFAULT`].

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Squared-norm slack for kets.
    pub norm: f64,
    /// Elementwise Hermiticity slack for density matrices.
    pub hermitian: f64,
    /// Trace slack for density matrices.
    pub trace: f64,
    /// Most negative eigenvalue accepted as positive semidefinite.
    pub min_eigenvalue: f64,
    /// Elementwise slack on `U U^dagger = I`.
    pub unitary: f64,
    /// Slack on `[D, Z_k] = 0`.
    pub commutation: f64,
    /// Elementwise slack on `sum K^dagger K = I`.
    pub trace_preserving: f64,
    /// Branch probabilities below this are treated as impossible.
    pub min_branch_probability: f64,
    /// Eigenvalues below this are zeroed before a matrix square root; rounding
    /// noise on a null space would otherwise enter the fidelity as its square root.
    pub sqrt_eigenvalue_floor: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        norm: 1e-12,
        hermitian: 1e-12,
        trace: 1e-12,
        min_eigenvalue: -1e-10,
        unitary: 1e-10,
        commutation: 1e-9,
        trace_preserving: 1e-9,
        min_branch_probability: 1e-12,
        sqrt_eigenvalue_floor: 1e-13,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
