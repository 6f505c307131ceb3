//! Exact count statistics for a Bose–Einstein condensate coupled to a
//! multimode cavity.
//!
//! The pipeline runs from physical parameters to sampled detector counts:
//!
//! 1. [`model`]: single-particle basis on a 1-D grid and the coupling blocks
//!    of the quadratic Hamiltonian (or raw blocks from the configuration).
//! 2. [`bdg`]: Hamiltonian assembly, stability check and Bogoliubov
//!    diagonalization.
//! 3. [`blochmessiah`]: rotation–squeeze–rotation factorization and mode
//!    functions.
//! 4. [`gaussian`]: thermal covariance matrix and the base matrix `C`.
//! 5. [`hafnian`]: exact hafnians of the count-extended matrices.
//! 6. [`sampling`]: outcome probabilities, enumeration, marginals, sampling
//!    and goodness-of-fit.
//!
//! [`pipeline::Experiment`] strings the stages together; [`cli`] is the
//! command-line front end.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdg;
pub mod blochmessiah;
pub mod cli;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod hafnian;
pub mod io;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod pipeline;
pub mod sampling;
pub mod tol;
pub mod validation;

pub use error::{Error, Result};
pub use pipeline::Experiment;
pub use tol::Tolerances;
