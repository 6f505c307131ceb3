//! Stage-by-stage wiring from a configuration to the Gaussian state.
//!
//! [`Experiment::new`] runs the cheap build stage (quadrature and Hamiltonian
//! assembly); later stages are computed on request so a caller pays only for
//! the product it needs.

use crate::bdg::{
    assemble_hamiltonian, bogoliubov_diagonalize_with, check_stability_with,
    BogoliubovDecomposition, QuadraticHamiltonian, StabilityReport,
};
use crate::blochmessiah::{bloch_messiah_with, mode_functions, BlochMessiahFactors, ModeFunctions};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::gaussian::{covariance_with, GaussianState};
use crate::model::{build_blocks, CouplingBlocks, ModeBasis};
use crate::tol::Tolerances;

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: SystemConfig,
    pub tol: Tolerances,
    /// Grid and single-particle functions; `None` for raw-matrix input.
    pub basis: Option<ModeBasis>,
    pub blocks: CouplingBlocks,
    pub hamiltonian: QuadraticHamiltonian,
}

impl Experiment {
    pub fn new(config: SystemConfig, tol: Tolerances) -> Result<Self> {
        config.validate()?;
        let (basis, blocks) = build_blocks(&config)?;
        let hamiltonian = assemble_hamiltonian(&blocks)?;
        Ok(Self {
            config,
            tol,
            basis,
            blocks,
            hamiltonian,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(crate::config::load_config(text)?, Tolerances::default())
    }

    pub fn stability(&self) -> StabilityReport {
        check_stability_with(&self.hamiltonian, &self.tol)
    }

    pub fn decompose(&self) -> Result<BogoliubovDecomposition> {
        bogoliubov_diagonalize_with(&self.hamiltonian, &self.tol)
    }

    pub fn bloch_messiah(&self, dec: &BogoliubovDecomposition) -> Result<BlochMessiahFactors> {
        bloch_messiah_with(dec, &self.tol)
    }

    /// Eigen-squeeze and quasiparticle mode functions on the grid. Only
    /// geometry configurations have a grid.
    pub fn mode_functions(&self, factors: &BlochMessiahFactors) -> Result<ModeFunctions> {
        match &self.basis {
            Some(basis) => mode_functions(factors, basis),
            None => Err(Error::Unavailable(
                "mode functions need a Geometry1D configuration".into(),
            )),
        }
    }

    pub fn state_from(&self, dec: &BogoliubovDecomposition) -> Result<GaussianState> {
        covariance_with(dec, self.config.temperature, &self.tol)
    }

    /// Decompose and build the thermal state in one go.
    pub fn state(&self) -> Result<GaussianState> {
        self.state_from(&self.decompose()?)
    }
}
