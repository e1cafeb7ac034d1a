//! Numerical geometry of the unit ball of finitely constrained `H∞` spaces.
//!
//! Boundary functions live on a uniform grid of the unit circle. On top of
//! that kernel the crate builds outer functions from prescribed moduli,
//! classifies boundary functions (inner, extreme, exposed mass), constructs
//! explicit perturbations `g ∈ H∞_Φ` showing that a point is not (strongly)
//! extreme, and brackets the admissibility threshold `ε_Φ(f)`.
//!
//! Module map:
//!
//! * [`circle`]: grids, samples, spectra, norms, conjugate function.
//! * [`outer`]: outer functions and boundary classifiers.
//! * [`constraints`]: finite constraint sets and kernel polynomials.
//! * [`witness`]: extremality-violation witnesses and the Turán–Nazarov check.
//! * [`admissibility`]: the extremal construction, brackets and the sweep harness.
//! * [`report`]: JSON envelope and complex-number records shared by reports.

pub mod admissibility;
pub mod circle;
pub mod constraints;
mod error;
pub mod outer;
pub mod report;
pub mod witness;

pub use error::{Degeneracy, Error, Result};

/// Numerical slack shared by the checks in this crate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Slack absorbed by every `‖·‖∞ ≤ bound` claim (grid sup vs. essential sup).
    pub tol_sup: f64,
    /// Allowed residual of a kernel polynomial, relative to `‖G‖∞`.
    pub tol_kernel: f64,
    /// Allowed negative-frequency mass of a constructed `H∞` sample.
    pub tol_analytic: f64,
    /// Lower clip applied to moduli before taking logarithms.
    pub floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_sup: 1e-6,
            tol_kernel: 1e-9,
            tol_analytic: 1e-6,
            floor: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_sup", self.tol_sup),
            ("tol_kernel", self.tol_kernel),
            ("tol_analytic", self.tol_analytic),
            ("floor", self.floor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Contract(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
