//! Numerical thresholds shared across the pipeline.
//!
//! Every check in the library reads its threshold from a [`Tolerances`]
//! value. The defaults are the documented acceptance values; the CLI exposes
//! each one as a `--tol-*` override.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative (to `max|H|`) threshold below which a symplectic eigenvalue
    /// counts as non-positive, or its imaginary part as genuine.
    pub stability: f64,
    /// Relative gap below which two quasiparticle energies are degenerate.
    pub degeneracy: f64,
    /// `max|R̃ J R̃† − J|` accepted for a Bogoliubov transform.
    pub symplectic: f64,
    /// `max|R† (P H) R − diag(Ẽ, Ẽ)|` accepted after diagonalization.
    pub diagonalization: f64,
    /// Bloch-Messiah reconstruction residual for `A` and `B`.
    pub reconstruction: f64,
    /// Squeeze parameters below this are clamped to zero.
    pub squeeze_clamp: f64,
    /// Agreement of the covariance formula with the direct correlators.
    pub covariance: f64,
    /// Most negative eigenvalue accepted in the normal correlator block.
    pub psd: f64,
    /// Asymmetry of `C` tolerated (and then symmetrized away).
    pub c_symmetry: f64,
    /// Relative imaginary residual tolerated in a probability hafnian.
    pub imaginary: f64,
    /// Negative probabilities down to `-negative_clamp` are clamped to zero.
    pub negative_clamp: f64,
    /// Agreement of enumerated moments with the covariance diagonal.
    pub moments: f64,
    /// Minimum captured mass before sampling is allowed.
    pub min_captured_mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stability: 1e-10,
            degeneracy: 1e-12,
            symplectic: 1e-10,
            diagonalization: 1e-9,
            reconstruction: 1e-9,
            squeeze_clamp: 1e-12,
            covariance: 1e-10,
            psd: 1e-10,
            c_symmetry: 1e-8,
            imaginary: 1e-9,
            negative_clamp: 1e-12,
            moments: 1e-6,
            min_captured_mass: 0.99,
        }
    }
}
