//! Experiment configuration: one JSON object per run.
//!
//! Keys match the field names below (the serde renames give the on-disk
//! spelling). Unknown keys are rejected. Complex entries are `[re, im]`
//! pairs; matrices are row-major nested arrays (see [`crate::io`]).
//!
//! ```json
//! {
//!   "mode": "Geometry1D",
//!   "M_a": 2, "M_ph": 1,
//!   "g_a_N0": 0.4, "delta_a": -50.0,
//!   "delta_nu": [10.0], "omega_nu": [1.5],
//!   "rabi_drive_amp": 3.0, "rabi_mode_amp": [0.02],
//!   "mu": 0.5, "n_ex": 0.0, "temperature": 0.2,
//!   "kappa_nu": [1.0], "omega_r": 0.1, "N_atoms": 1000,
//!   "grid": { "half_length": 8.0, "points": 16384 }
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::RawMatrix;

/// How the Hamiltonian blocks are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockSource {
    /// Quadrature over the built-in 1-D trap/cavity geometry.
    Geometry1D,
    /// Raw matrices supplied in `direct_blocks`.
    DirectBlocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_length: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_length: 8.0,
            points: 16384,
        }
    }
}

/// Raw coupling matrices for [`BlockSource::DirectBlocks`]. Omitted blocks are
/// zero. `chi_aph` and `chit_aph` are derived as adjoints and cannot be given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectBlocksSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_a: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_ph: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_phph: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_pha: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chit_aa: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chit_pha: Option<RawMatrix>,
}

fn default_drive_center() -> f64 {
    0.5
}

fn default_drive_width() -> f64 {
    2.0
}

fn default_one() -> f64 {
    1.0
}

/// Physical parameters, geometry and numerical settings of one experiment.
///
/// Units: ħ = k_B = 1 and the trap frequency is the energy unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub mode: BlockSource,
    #[serde(rename = "M_a")]
    pub m_a: usize,
    #[serde(rename = "M_ph")]
    pub m_ph: usize,
    #[serde(rename = "g_a_N0", default)]
    pub g_a_n0: f64,
    pub delta_a: f64,
    #[serde(default)]
    pub delta_nu: Vec<f64>,
    #[serde(default)]
    pub omega_nu: Vec<f64>,
    #[serde(default)]
    pub rabi_drive_amp: f64,
    #[serde(default)]
    pub rabi_mode_amp: Vec<f64>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub n_ex: f64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub kappa_nu: Vec<f64>,
    #[serde(default)]
    pub omega_r: f64,
    #[serde(rename = "N_atoms", default = "default_one")]
    pub n_atoms: f64,
    /// Condensate number N_0; defaults to `N_atoms`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_condensate: Option<f64>,
    /// Center of the Gaussian drive profile Ω_0(x).
    #[serde(default = "default_drive_center")]
    pub drive_center: f64,
    /// Width (standard deviation) of the Gaussian drive profile.
    #[serde(default = "default_drive_width")]
    pub drive_width: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_blocks: Option<DirectBlocksSpec>,
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.to_string(),
        message: message.into(),
    }
}

impl SystemConfig {
    /// Total number of sampled modes `M = M_a + M_ph`.
    pub fn modes(&self) -> usize {
        self.m_a + self.m_ph
    }

    pub fn condensate_number(&self) -> f64 {
        self.n_condensate.unwrap_or(self.n_atoms)
    }

    /// Check every documented invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.modes() == 0 {
            return Err(invalid("M_a", "M_a + M_ph must be ≥ 1"));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(invalid("temperature", "temperature must be finite and ≥ 0"));
        }
        if !(self.delta_a.abs() > 0.0) || !self.delta_a.is_finite() {
            return Err(invalid("delta_a", "|delta_a| must be > 0"));
        }
        if !(self.n_ex >= 0.0) {
            return Err(invalid("n_ex", "n_ex must be ≥ 0"));
        }
        if self.grid.points < 16 {
            return Err(invalid("grid.points", "grid.points must be ≥ 16"));
        }
        if !(self.grid.half_length > 0.0) {
            return Err(invalid("grid.half_length", "grid.half_length must be > 0"));
        }
        let per_mode = [
            ("delta_nu", &self.delta_nu),
            ("omega_nu", &self.omega_nu),
            ("rabi_mode_amp", &self.rabi_mode_amp),
            ("kappa_nu", &self.kappa_nu),
        ];
        for (name, values) in per_mode {
            // DirectBlocks runs may leave the geometry lists out entirely.
            let optional = self.mode == BlockSource::DirectBlocks && values.is_empty();
            if !optional && values.len() != self.m_ph {
                return Err(invalid(
                    name,
                    format!(
                        "expected {} entries (M_ph), found {}",
                        self.m_ph,
                        values.len()
                    ),
                ));
            }
        }
        match (self.mode, &self.direct_blocks) {
            (BlockSource::Geometry1D, Some(_)) => {
                return Err(invalid(
                    "direct_blocks",
                    "direct_blocks only valid in DirectBlocks mode",
                ))
            }
            (BlockSource::DirectBlocks, None) => {
                return Err(invalid(
                    "direct_blocks",
                    "direct_blocks is required in DirectBlocks mode",
                ))
            }
            _ => {}
        }
        if self.mode == BlockSource::Geometry1D {
            if !(self.condensate_number() > 0.0) {
                return Err(invalid("N_atoms", "condensate number must be > 0"));
            }
            if !(self.drive_width > 0.0) {
                return Err(invalid("drive_width", "drive_width must be > 0"));
            }
        }
        Ok(())
    }
}

/// Parse and validate a configuration document.
pub fn load_config(text: &str) -> Result<SystemConfig> {
    let cfg: SystemConfig = serde_json::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config_file(path: &std::path::Path) -> Result<SystemConfig> {
    load_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "mode": "DirectBlocks", "M_a": 1, "M_ph": 1, "delta_a": 1.0,
        "direct_blocks": {}
    }"#;

    fn field_of(err: Error) -> (String, String) {
        match err {
            Error::InvalidConfig { field, message } => (field, message),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn minimal_document_loads() {
        let cfg = load_config(MINIMAL).unwrap();
        assert_eq!(cfg.modes(), 2);
        assert_eq!(cfg.temperature, 0.0);
        assert_eq!(cfg.grid, GridSpec::default());
    }

    #[test]
    fn zero_modes_rejected() {
        let text = MINIMAL.replace("\"M_a\": 1, \"M_ph\": 1", "\"M_a\": 0, \"M_ph\": 0");
        let (field, message) = field_of(load_config(&text).unwrap_err());
        assert_eq!(field, "M_a");
        assert_eq!(message, "M_a + M_ph must be ≥ 1");
    }

    #[test]
    fn direct_blocks_outside_direct_mode_rejected() {
        let text = MINIMAL.replace("DirectBlocks", "Geometry1D").replace(
            "\"delta_a\": 1.0,",
            "\"delta_a\": 1.0, \"delta_nu\": [1], \"omega_nu\": [1], \"rabi_mode_amp\": [0], \"kappa_nu\": [1],",
        );
        let (field, message) = field_of(load_config(&text).unwrap_err());
        assert_eq!(field, "direct_blocks");
        assert_eq!(message, "direct_blocks only valid in DirectBlocks mode");
    }

    #[test]
    fn unknown_keys_are_parse_errors_with_location() {
        let text = "{\n  \"mode\": \"DirectBlocks\",\n  \"bogus\": 1\n}";
        match load_config(text).unwrap_err() {
            Error::ConfigParse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invariant_violations_name_their_field() {
        let cases = [
            ("\"delta_a\": 1.0", "\"delta_a\": 0.0", "delta_a"),
            (
                "\"delta_a\": 1.0",
                "\"delta_a\": 1.0, \"temperature\": -1",
                "temperature",
            ),
            (
                "\"delta_a\": 1.0",
                "\"delta_a\": 1.0, \"omega_nu\": [1, 2]",
                "omega_nu",
            ),
            (
                "\"delta_a\": 1.0",
                "\"delta_a\": 1.0, \"grid\": {\"half_length\": 4, \"points\": 8}",
                "grid.points",
            ),
        ];
        for (from, to, expected) in cases {
            let (field, _) = field_of(load_config(&MINIMAL.replace(from, to)).unwrap_err());
            assert_eq!(field, expected);
        }
    }

    #[test]
    fn direct_mode_requires_blocks() {
        let text = r#"{"mode": "DirectBlocks", "M_a": 1, "M_ph": 0, "delta_a": 1.0}"#;
        let (field, _) = field_of(load_config(text).unwrap_err());
        assert_eq!(field, "direct_blocks");
    }
}
