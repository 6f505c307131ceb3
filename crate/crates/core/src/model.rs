//! From configuration to the coupling blocks of the quadratic Hamiltonian.
//!
//! In [`BlockSource::Geometry1D`] mode the atoms sit in a unit-frequency
//! harmonic trap on `[-L, L]`. The condensate `φ_0` and the excited states
//! `φ_1..φ_{M_a}` are the trap eigenfunctions, the drive profile is a Gaussian
//! and the cavity modes are standing waves `cos((ν+1)πx/L)`. All overlap
//! integrals use trapezoidal weights on the uniform grid; the kinetic energy
//! uses a second-order central difference with zero boundary values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{BlockSource, SystemConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, CMat};

/// Residual above which the grid cannot represent the basis.
pub const GRID_RESIDUAL_LIMIT: f64 = 1e-6;

/// Grid-sampled single-particle functions.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub x: DVector<f64>,
    pub weights: DVector<f64>,
    pub phi0: DVector<f64>,
    /// Column `l - 1` holds `φ_l`.
    pub phi_l: DMatrix<f64>,
    pub omega0_profile: DVector<f64>,
    /// Column `ν` holds `Ω_ν(x)`.
    pub omega_nu_profiles: DMatrix<f64>,
}

impl ModeBasis {
    pub fn spacing(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Quadrature `∫ f g dx`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.x.len()).map(|i| self.weights[i] * f(i)).sum()
    }

    /// Gram matrix of `{φ_0, φ_1, …, φ_{M_a}}`.
    pub fn gram(&self) -> DMatrix<f64> {
        let funcs = self.all_atomic();
        let n = funcs.ncols();
        DMatrix::from_fn(n, n, |a, b| {
            self.integrate(|i| funcs[(i, a)] * funcs[(i, b)])
        })
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.gram();
        let n = g.nrows();
        (g - DMatrix::identity(n, n)).amax()
    }

    fn all_atomic(&self) -> DMatrix<f64> {
        let n = self.x.len();
        let m_a = self.phi_l.ncols();
        DMatrix::from_fn(n, m_a + 1, |i, j| {
            if j == 0 {
                self.phi0[i]
            } else {
                self.phi_l[(i, j - 1)]
            }
        })
    }
}

/// First `count` eigenfunctions of the unit-frequency harmonic oscillator,
/// via the normalized Hermite-function recurrence.
pub fn oscillator_eigenfunctions(x: &DVector<f64>, count: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.len(), count);
    if count == 0 {
        return out;
    }
    let norm0 = std::f64::consts::PI.powf(-0.25);
    for (i, &xi) in x.iter().enumerate() {
        let mut prev = 0.0;
        let mut cur = norm0 * (-0.5 * xi * xi).exp();
        out[(i, 0)] = cur;
        for n in 1..count {
            let nf = (n - 1) as f64;
            let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            out[(i, n)] = cur;
        }
    }
    out
}

/// Sample the 1-D geometry on the configured grid.
pub fn build_mode_basis(cfg: &SystemConfig) -> Result<ModeBasis> {
    if cfg.mode != BlockSource::Geometry1D {
        return Err(Error::Unavailable(
            "mode basis requires Geometry1D mode".to_string(),
        ));
    }
    let n = cfg.grid.points;
    let half = cfg.grid.half_length;
    let h = 2.0 * half / (n - 1) as f64;
    let x = DVector::from_fn(n, |i, _| -half + i as f64 * h);
    let weights = DVector::from_fn(n, |i, _| if i == 0 || i == n - 1 { 0.5 * h } else { h });

    let states = oscillator_eigenfunctions(&x, cfg.m_a + 1);
    let phi0 = states.column(0).into_owned();
    let phi_l = states.columns(1, cfg.m_a).into_owned();

    let width = cfg.drive_width;
    let omega0_profile = x.map(|xi| {
        let d = xi - cfg.drive_center;
        cfg.rabi_drive_amp * (-d * d / (2.0 * width * width)).exp()
    });
    let omega_nu_profiles = DMatrix::from_fn(n, cfg.m_ph, |i, nu| {
        let k = (nu + 1) as f64 * std::f64::consts::PI / half;
        cfg.rabi_mode_amp[nu] * (k * x[i]).cos()
    });

    let basis = ModeBasis {
        x,
        weights,
        phi0,
        phi_l,
        omega0_profile,
        omega_nu_profiles,
    };
    let residual = basis.orthonormality_residual();
    if !(residual <= GRID_RESIDUAL_LIMIT) {
        return Err(Error::GridTooCoarse {
            residual,
            points: n,
        });
    }
    Ok(basis)
}

/// The matrices `ε_a, ε_ph, χ, χ̃` of the effective Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingBlocks {
    pub eps_a: CMat,
    pub eps_ph: CMat,
    pub chi_phph: CMat,
    pub chi_pha: CMat,
    pub chit_aa: CMat,
    pub chit_pha: CMat,
}

impl CouplingBlocks {
    pub fn zeros(m_a: usize, m_ph: usize) -> Self {
        Self {
            eps_a: CMat::zeros(m_a, m_a),
            eps_ph: CMat::zeros(m_ph, m_ph),
            chi_phph: CMat::zeros(m_ph, m_ph),
            chi_pha: CMat::zeros(m_ph, m_a),
            chit_aa: CMat::zeros(m_a, m_a),
            chit_pha: CMat::zeros(m_ph, m_a),
        }
    }

    pub fn m_a(&self) -> usize {
        self.eps_a.nrows()
    }

    pub fn m_ph(&self) -> usize {
        self.eps_ph.nrows()
    }

    /// `χ_{a-ph} = χ_{ph-a}†`.
    pub fn chi_aph(&self) -> CMat {
        self.chi_pha.adjoint()
    }

    /// `χ̃_{a-ph} = χ̃_{ph-a}†`.
    pub fn chit_aph(&self) -> CMat {
        self.chit_pha.adjoint()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let (m_a, m_ph) = (self.m_a(), self.m_ph());
        let expect = [
            ("eps_a", &self.eps_a, (m_a, m_a)),
            ("eps_ph", &self.eps_ph, (m_ph, m_ph)),
            ("chi_phph", &self.chi_phph, (m_ph, m_ph)),
            ("chi_pha", &self.chi_pha, (m_ph, m_a)),
            ("chit_aa", &self.chit_aa, (m_a, m_a)),
            ("chit_pha", &self.chit_pha, (m_ph, m_a)),
        ];
        for (name, m, shape) in expect {
            if m.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {:?}, expected {:?}",
                    m.shape(),
                    shape
                )));
            }
        }
        Ok(())
    }

    /// Project the Hermitian blocks onto their Hermitian part and `χ̃_{a-a}`
    /// onto its symmetric part.
    pub fn symmetrized(mut self) -> Self {
        self.eps_a = linalg::hermitize(&self.eps_a);
        self.eps_ph = linalg::hermitize(&self.eps_ph);
        self.chi_phph = linalg::hermitize(&self.chi_phph);
        self.chit_aa = linalg::symmetrize(&self.chit_aa);
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "eps_a": io::matrix_to_json(&self.eps_a),
            "eps_ph": io::matrix_to_json(&self.eps_ph),
            "chi_phph": io::matrix_to_json(&self.chi_phph),
            "chi_pha": io::matrix_to_json(&self.chi_pha),
            "chi_aph": io::matrix_to_json(&self.chi_aph()),
            "chit_aa": io::matrix_to_json(&self.chit_aa),
            "chit_pha": io::matrix_to_json(&self.chit_pha),
            "chit_aph": io::matrix_to_json(&self.chit_aph()),
        })
    }
}

/// Second-order central difference `f''` with zero values outside the grid.
fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let inv = 1.0 / (h * h);
    (0..n)
        .map(|i| {
            let left = if i > 0 { f[i - 1] } else { 0.0 };
            let right = if i + 1 < n { f[i + 1] } else { 0.0 };
            (left - 2.0 * f[i] + right) * inv
        })
        .collect()
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Overlap integrals over the sampled geometry.
#[allow(clippy::needless_range_loop)]
pub fn compute_coupling_blocks(basis: &ModeBasis, cfg: &SystemConfig) -> Result<CouplingBlocks> {
    let m_a = basis.phi_l.ncols();
    let m_ph = basis.omega_nu_profiles.ncols();
    if m_a != cfg.m_a || m_ph != cfg.m_ph || basis.x.len() != cfg.grid.points {
        return Err(Error::DimensionMismatch(format!(
            "basis has M_a={m_a}, M_ph={m_ph}, {} points; config expects M_a={}, M_ph={}, {} points",
            basis.x.len(),
            cfg.m_a,
            cfg.m_ph,
            cfg.grid.points
        )));
    }
    let n0 = cfg.condensate_number();
    let sqrt_n0 = n0.sqrt();
    let g_n0 = cfg.g_a_n0;
    let delta_a = cfg.delta_a;
    let h = basis.spacing();
    let phi0 = &basis.phi0;
    let drive = &basis.omega0_profile;
    let phi = |l: usize, i: usize| basis.phi_l[(i, l)];
    let mode = |nu: usize, i: usize| basis.omega_nu_profiles[(i, nu)];

    // Ĥ_a − μ + 2g_a(N_0|φ_0|² + n_ex) acting on each φ_l.
    let potential: Vec<f64> = (0..basis.x.len())
        .map(|i| {
            let x = basis.x[i];
            0.5 * x * x + drive[i] * drive[i] / delta_a - cfg.mu
                + 2.0 * g_n0 * phi0[i] * phi0[i]
                + 2.0 * (g_n0 / n0) * cfg.n_ex
        })
        .collect();
    let h_phi: Vec<Vec<f64>> = (0..m_a)
        .map(|l| {
            let f: Vec<f64> = (0..basis.x.len()).map(|i| phi(l, i)).collect();
            let lap = second_derivative(&f, h);
            f.iter()
                .zip(&lap)
                .zip(&potential)
                .map(|((fi, li), vi)| -0.5 * li + vi * fi)
                .collect()
        })
        .collect();

    let mut blocks = CouplingBlocks::zeros(m_a, m_ph);
    for l in 0..m_a {
        for lp in 0..m_a {
            blocks.eps_a[(l, lp)] = real(basis.integrate(|i| phi(l, i) * h_phi[lp][i]));
            blocks.chit_aa[(l, lp)] =
                real(g_n0 * basis.integrate(|i| phi(l, i) * phi(lp, i) * phi0[i] * phi0[i]));
        }
    }
    for nu in 0..m_ph {
        blocks.eps_ph[(nu, nu)] = real(cfg.omega_nu[nu]);
        for nup in 0..m_ph {
            blocks.chi_phph[(nu, nup)] = real(
                (n0 / delta_a)
                    * basis.integrate(|i| mode(nu, i) * mode(nup, i) * phi0[i] * phi0[i]),
            );
        }
        for l in 0..m_a {
            // The profiles are real here, so the co- and counter-rotating
            // overlaps coincide.
            let overlap = (sqrt_n0 / delta_a)
                * basis.integrate(|i| mode(nu, i) * drive[i] * phi(l, i) * phi0[i]);
            blocks.chi_pha[(nu, l)] = real(overlap);
            blocks.chit_pha[(nu, l)] = real(overlap);
        }
    }
    Ok(blocks.symmetrized())
}

/// Threshold on the asymmetry of user-supplied blocks before symmetrization.
const DIRECT_BLOCK_SYMMETRY_LIMIT: f64 = 1e-8;

/// Blocks taken verbatim from the configuration.
pub fn direct_coupling_blocks(cfg: &SystemConfig) -> Result<CouplingBlocks> {
    let spec = cfg
        .direct_blocks
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig {
            field: "direct_blocks".into(),
            message: "direct_blocks is required in DirectBlocks mode".into(),
        })?;
    let (m_a, m_ph) = (cfg.m_a, cfg.m_ph);
    let read = |raw: &Option<io::RawMatrix>, rows: usize, cols: usize, name: &str| match raw {
        Some(r) => io::matrix_from_raw(r, rows, cols, &format!("direct_blocks.{name}")),
        None => Ok(CMat::zeros(rows, cols)),
    };
    let blocks = CouplingBlocks {
        eps_a: read(&spec.eps_a, m_a, m_a, "eps_a")?,
        eps_ph: read(&spec.eps_ph, m_ph, m_ph, "eps_ph")?,
        chi_phph: read(&spec.chi_phph, m_ph, m_ph, "chi_phph")?,
        chi_pha: read(&spec.chi_pha, m_ph, m_a, "chi_pha")?,
        chit_aa: read(&spec.chit_aa, m_a, m_a, "chit_aa")?,
        chit_pha: read(&spec.chit_pha, m_ph, m_a, "chit_pha")?,
    };
    let hermitian = [
        ("eps_a", &blocks.eps_a),
        ("eps_ph", &blocks.eps_ph),
        ("chi_phph", &blocks.chi_phph),
    ];
    for (name, m) in hermitian {
        let r = linalg::hermiticity_residual(m);
        if r > DIRECT_BLOCK_SYMMETRY_LIMIT {
            return Err(Error::InvalidConfig {
                field: format!("direct_blocks.{name}"),
                message: format!("must be Hermitian (residual {r:.3e})"),
            });
        }
    }
    let r = linalg::symmetry_residual(&blocks.chit_aa);
    if r > DIRECT_BLOCK_SYMMETRY_LIMIT {
        return Err(Error::InvalidConfig {
            field: "direct_blocks.chit_aa".into(),
            message: format!("must be symmetric (residual {r:.3e})"),
        });
    }
    Ok(blocks.symmetrized())
}

/// Coupling blocks for either source, together with the basis when one exists.
pub fn build_blocks(cfg: &SystemConfig) -> Result<(Option<ModeBasis>, CouplingBlocks)> {
    match cfg.mode {
        BlockSource::Geometry1D => {
            let basis = build_mode_basis(cfg)?;
            let blocks = compute_coupling_blocks(&basis, cfg)?;
            Ok((Some(basis), blocks))
        }
        BlockSource::DirectBlocks => Ok((None, direct_coupling_blocks(cfg)?)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringInputs {
    pub atoms: f64,
    pub kappa: f64,
    pub delta_a: f64,
    pub delta_nu: f64,
    pub drive_rabi: f64,
    pub mode_rabi: f64,
    pub recoil: f64,
}

/// `τ_s ~ N κ³ Δ_a² / (Δ_ν Ω_0² Ω_ν² ω_r)`.
pub fn scattering_time(p: &ScatteringInputs) -> Result<f64> {
    let nonzero = [
        ("delta_nu", p.delta_nu),
        ("rabi_drive_amp", p.drive_rabi),
        ("rabi_mode_amp", p.mode_rabi),
        ("omega_r", p.recoil),
    ];
    for (name, v) in nonzero {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::ScatteringTime(name));
        }
    }
    Ok(p.atoms * p.kappa.powi(3) * p.delta_a * p.delta_a
        / (p.delta_nu * p.drive_rabi * p.drive_rabi * p.mode_rabi * p.mode_rabi * p.recoil))
}

/// Scattering-time estimate using the first cavity mode.
pub fn estimate_scattering_time(cfg: &SystemConfig) -> Result<f64> {
    let first =
        |v: &[f64], name: &'static str| v.first().copied().ok_or(Error::ScatteringTime(name));
    scattering_time(&ScatteringInputs {
        atoms: cfg.n_atoms,
        kappa: first(&cfg.kappa_nu, "kappa_nu")?,
        delta_a: cfg.delta_a,
        delta_nu: first(&cfg.delta_nu, "delta_nu")?,
        drive_rabi: cfg.rabi_drive_amp,
        mode_rabi: first(&cfg.rabi_mode_amp, "rabi_mode_amp")?,
        recoil: cfg.omega_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridSpec;

    pub(crate) fn geometry_config(m_a: usize, m_ph: usize) -> SystemConfig {
        SystemConfig {
            mode: BlockSource::Geometry1D,
            m_a,
            m_ph,
            g_a_n0: 0.4,
            delta_a: -40.0,
            delta_nu: vec![10.0; m_ph],
            omega_nu: (0..m_ph).map(|k| 1.5 + 0.3 * k as f64).collect(),
            rabi_drive_amp: 2.0,
            rabi_mode_amp: vec![0.05; m_ph],
            mu: 0.5,
            n_ex: 0.0,
            temperature: 0.1,
            kappa_nu: vec![1.0; m_ph],
            omega_r: 0.1,
            n_atoms: 100.0,
            n_condensate: None,
            drive_center: 0.5,
            drive_width: 2.0,
            grid: GridSpec::default(),
            direct_blocks: None,
        }
    }

    #[test]
    fn ground_and_first_excited_state_are_orthogonal() {
        let mut cfg = geometry_config(1, 0);
        cfg.grid = GridSpec {
            half_length: 8.0,
            points: 512,
        };
        let basis = build_mode_basis(&cfg).unwrap();
        let overlap = basis.integrate(|i| basis.phi0[i] * basis.phi_l[(i, 0)]);
        assert!(overlap.abs() < 1e-10, "{overlap}");
        let norm0 = basis.integrate(|i| basis.phi0[i].powi(2));
        assert!((norm0 - 1.0).abs() < 1e-10);
        // φ_0 is the Gaussian ground state.
        let mid = 255;
        let x = basis.x[mid];
        let expected = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        assert!((basis.phi0[mid] - expected).abs() < 1e-15);
    }

    #[test]
    fn excited_states_are_orthonormal() {
        let basis = build_mode_basis(&geometry_config(2, 0)).unwrap();
        let gram = basis.gram();
        for a in 0..3 {
            for b in 0..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((gram[(a, b)] - target).abs() < 1e-8);
            }
            assert!((gram[(a, a)] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let mut cfg = geometry_config(1, 0);
        cfg.grid = GridSpec {
            half_length: 20.0,
            points: 16,
        };
        match build_mode_basis(&cfg) {
            Err(Error::GridTooCoarse { residual, points }) => {
                assert_eq!(points, 16);
                assert!(residual > GRID_RESIDUAL_LIMIT);
            }
            other => panic!("expected coarse-grid error, got {other:?}"),
        }
    }

    #[test]
    fn zero_drive_kills_photon_atom_blocks() {
        let mut cfg = geometry_config(2, 2);
        cfg.rabi_drive_amp = 0.0;
        let (_, blocks) = build_blocks(&cfg).unwrap();
        assert!(blocks
            .chi_pha
            .iter()
            .all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(blocks
            .chit_pha
            .iter()
            .all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn zero_interaction_kills_counter_rotating_atom_block() {
        let mut cfg = geometry_config(2, 1);
        cfg.g_a_n0 = 0.0;
        let (_, blocks) = build_blocks(&cfg).unwrap();
        assert!(linalg::max_abs(&blocks.chit_aa) == 0.0);
    }

    #[test]
    fn chit_aa_matches_independent_fine_quadrature() {
        let cfg = geometry_config(1, 0);
        let (_, blocks) = build_blocks(&cfg).unwrap();
        // Composite Simpson on an independent, finer grid with closed-form
        // Hermite functions: φ_0 = π^{-1/4} e^{-x²/2}, φ_1 = √2 x φ_0.
        let n = 200_001;
        let (a, b) = (-12.0f64, 12.0f64);
        let h = (b - a) / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = a + i as f64 * h;
            let p0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
            let p1 = 2f64.sqrt() * x * p0;
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * p1 * p1 * p0 * p0;
        }
        let oracle = cfg.g_a_n0 * acc * h / 3.0;
        let got = blocks.chit_aa[(0, 0)].re;
        assert!(((got - oracle) / oracle).abs() < 1e-8, "{got} vs {oracle}");
    }

    #[test]
    fn blocks_are_hermitian_and_symmetric() {
        let (_, blocks) = build_blocks(&geometry_config(3, 2)).unwrap();
        assert!(linalg::hermiticity_residual(&blocks.eps_a) < 1e-12);
        assert!(linalg::hermiticity_residual(&blocks.chi_phph) < 1e-12);
        assert!(linalg::symmetry_residual(&blocks.chit_aa) < 1e-12);
        // All eight blocks are populated by the default toy geometry.
        for m in [
            &blocks.eps_a,
            &blocks.eps_ph,
            &blocks.chi_phph,
            &blocks.chi_pha,
            &blocks.chit_aa,
            &blocks.chit_pha,
        ] {
            assert!(linalg::max_abs(m) > 0.0);
        }
    }

    #[test]
    fn uncoupled_eps_a_is_trap_spectrum_shifted() {
        // No drive, no interaction: ε_a = diag(l + ½) − μ up to O(h²).
        let mut cfg = geometry_config(3, 0);
        cfg.g_a_n0 = 0.0;
        cfg.rabi_drive_amp = 0.0;
        let (_, blocks) = build_blocks(&cfg).unwrap();
        for l in 0..3 {
            let expected = (l + 1) as f64 + 0.5 - cfg.mu;
            assert!((blocks.eps_a[(l, l)].re - expected).abs() < 1e-5);
        }
    }

    #[test]
    fn grid_doubling_changes_blocks_below_one_ppm() {
        let cfg = geometry_config(2, 2);
        let (_, coarse) = build_blocks(&cfg).unwrap();
        let mut fine_cfg = cfg.clone();
        fine_cfg.grid.points *= 2;
        let (_, fine) = build_blocks(&fine_cfg).unwrap();
        let pairs = [
            (&coarse.eps_a, &fine.eps_a),
            (&coarse.chi_phph, &fine.chi_phph),
            (&coarse.chi_pha, &fine.chi_pha),
            (&coarse.chit_aa, &fine.chit_aa),
            (&coarse.chit_pha, &fine.chit_pha),
        ];
        for (a, b) in pairs {
            let scale = linalg::max_abs(b);
            for (x, y) in a.iter().zip(b.iter()) {
                let rel = (x - y).norm() / y.norm().max(scale);
                assert!(rel < 1e-6, "relative change {rel}");
            }
        }
    }

    #[test]
    fn scattering_time_formula() {
        let unit = ScatteringInputs {
            atoms: 1.0,
            kappa: 1.0,
            delta_a: 1.0,
            delta_nu: 1.0,
            drive_rabi: 1.0,
            mode_rabi: 1.0,
            recoil: 1.0,
        };
        assert_eq!(scattering_time(&unit).unwrap(), 1.0);
        let doubled = ScatteringInputs {
            delta_a: 2.0,
            ..unit
        };
        assert_eq!(scattering_time(&doubled).unwrap(), 4.0);
        let lab = ScatteringInputs {
            atoms: 1e5,
            kappa: 1.0,
            delta_a: 1e3,
            delta_nu: 10.0,
            drive_rabi: 1e2,
            mode_rabi: 1e2,
            recoil: 1e-1,
        };
        let tau = scattering_time(&lab).unwrap();
        assert!((tau - 1e3).abs() < 1e-9, "{tau}");
        let broken = ScatteringInputs {
            recoil: 0.0,
            ..unit
        };
        assert!(matches!(
            scattering_time(&broken),
            Err(Error::ScatteringTime("omega_r"))
        ));
    }

    #[test]
    fn scattering_time_reads_first_mode() {
        let mut cfg = geometry_config(1, 2);
        cfg.kappa_nu = vec![2.0, 100.0];
        cfg.delta_nu = vec![1.0, 100.0];
        cfg.rabi_mode_amp = vec![1.0, 100.0];
        cfg.rabi_drive_amp = 1.0;
        cfg.delta_a = 1.0;
        cfg.omega_r = 1.0;
        cfg.n_atoms = 1.0;
        assert_eq!(estimate_scattering_time(&cfg).unwrap(), 8.0);
        cfg.kappa_nu.clear();
        assert!(matches!(
            estimate_scattering_time(&cfg),
            Err(Error::ScatteringTime("kappa_nu"))
        ));
    }
}
