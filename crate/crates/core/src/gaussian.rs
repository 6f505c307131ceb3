//! Quasi-equilibrium Gaussian state: covariance matrix `G`, base matrix `C`
//! and the count-extended matrices whose hafnians give outcome probabilities.
//!
//! Layout of `G` (rows/columns `j` then `M + j`):
//!
//! ```text
//! G = [[ ⟨ĉᵢ† ĉⱼ⟩ , ⟨ĉᵢ† ĉⱼ†⟩ ],
//!      [ ⟨ĉᵢ ĉⱼ⟩  , ⟨ĉⱼ† ĉᵢ⟩  ]]
//! ```
//!
//! The lower-right block is the transpose of the upper-left one.

use std::fmt;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bdg::BogoliubovDecomposition;
use crate::error::{Error, Result};
use crate::hafnian::extension_indices;
use crate::linalg::{self, CMat, ZERO};
use crate::tol::Tolerances;

/// Detector counts: atom counts `N_l` followed by photon counts `q_ν`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountsVector(pub Vec<u32>);

impl CountsVector {
    pub fn new(atoms: &[u32], photons: &[u32]) -> Self {
        Self(atoms.iter().chain(photons).copied().collect())
    }

    pub fn zeros(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    /// Total number of counts `n`.
    pub fn total(&self) -> usize {
        self.0.iter().map(|&k| k as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `Π m_j!` as a float.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| (1..=k).fold(1.0, |acc, i| acc * i as f64))
            .product()
    }

    /// Parse `"N1,..,q1,.."`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(Self(Vec::new()));
        }
        trimmed
            .split(',')
            .map(|s| {
                s.trim().parse::<u32>().map_err(|e| Error::InvalidConfig {
                    field: "counts".into(),
                    message: format!("cannot parse {s:?} as a nonnegative count: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for CountsVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl From<Vec<u32>> for CountsVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Zero-displacement Gaussian state of the `M = M_a + M_ph` sampled modes.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub g: CMat,
    pub temperature: f64,
    /// Base matrix `C = P G (1+G)⁻¹`, symmetrized.
    pub c: CMat,
    /// `ln √det(1+G)`.
    pub log_norm: f64,
    /// `max|C − Cᵀ|` before symmetrization.
    pub c_asymmetry: f64,
    pub m_a: usize,
    pub m_ph: usize,
}

/// `coth(E/2T)`, with the `T → 0` limit.
pub fn thermal_q(energy: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 1.0;
    }
    let x = energy / (2.0 * temperature);
    // tanh saturates to exactly 1 long before exp overflows.
    1.0 / x.tanh()
}

/// Bose–Einstein occupation `1/(e^{E/T} − 1)`, zero at `T = 0`.
pub fn bose_occupation(energy: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    1.0 / (energy / temperature).exp_m1()
}

/// `G = ½ R diag(Q, Q) R† − ½` with `Q = coth(Ẽ/2T)`.
pub fn covariance(dec: &BogoliubovDecomposition, temperature: f64) -> Result<GaussianState> {
    covariance_with(dec, temperature, &Tolerances::default())
}

pub fn covariance_with(
    dec: &BogoliubovDecomposition,
    temperature: f64,
    tol: &Tolerances,
) -> Result<GaussianState> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidConfig {
            field: "temperature".into(),
            message: "temperature must be finite and ≥ 0".into(),
        });
    }
    let m = dec.modes();
    let r = dec.r_inverse();
    let q: Vec<f64> = dec
        .energies
        .iter()
        .map(|&e| thermal_q(e, temperature))
        .collect();
    let d = CMat::from_fn(2 * m, 2 * m, |i, j| {
        if i == j {
            Complex64::new(0.5 * q[i % m], 0.0)
        } else {
            ZERO
        }
    });
    let mut g = &r * d * r.adjoint();
    for i in 0..2 * m {
        g[(i, i)] -= 0.5;
    }
    from_covariance(g, temperature, dec.m_a, dec.m_ph, tol)
}

/// Covariance assembled from explicit correlators: with `ĉ = A† c̃ + Bᵀ c̃†`
/// and thermal quasiparticles `⟨c̃ₖ† c̃ₖ⟩ = nₖ`, every second moment is a
/// sum over `k` of products of the two coefficient matrices.
pub fn direct_covariance(dec: &BogoliubovDecomposition, temperature: f64) -> CMat {
    let m = dec.modes();
    let p = dec.a.adjoint();
    let q = dec.b.transpose();
    let n: Vec<f64> = dec
        .energies
        .iter()
        .map(|&e| bose_occupation(e, temperature))
        .collect();
    let mut g = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let mut cdag_c = ZERO;
            let mut cdag_cdag = ZERO;
            let mut c_c = ZERO;
            let mut c_cdag = ZERO;
            for k in 0..m {
                let (nk, nk1) = (n[k], n[k] + 1.0);
                cdag_c += p[(i, k)].conj() * p[(j, k)] * nk + q[(i, k)].conj() * q[(j, k)] * nk1;
                cdag_cdag += p[(i, k)].conj() * q[(j, k)].conj() * nk
                    + q[(i, k)].conj() * p[(j, k)].conj() * nk1;
                c_c += p[(i, k)] * q[(j, k)] * nk1 + q[(i, k)] * p[(j, k)] * nk;
                c_cdag += p[(i, k)] * p[(j, k)].conj() * nk1 + q[(i, k)] * q[(j, k)].conj() * nk;
            }
            g[(i, j)] = cdag_c;
            g[(i, m + j)] = cdag_cdag;
            g[(m + i, j)] = c_c;
            // ⟨ĉᵢ ĉⱼ†⟩ − δᵢⱼ = ⟨ĉⱼ† ĉᵢ⟩
            g[(m + i, m + j)] = if i == j { c_cdag - 1.0 } else { c_cdag };
        }
    }
    g
}

/// Build a state from an explicit covariance matrix.
pub fn from_covariance(
    g: CMat,
    temperature: f64,
    m_a: usize,
    m_ph: usize,
    tol: &Tolerances,
) -> Result<GaussianState> {
    let m = m_a + m_ph;
    if g.shape() != (2 * m, 2 * m) {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {:?}, expected {}×{}",
            g.shape(),
            2 * m,
            2 * m
        )));
    }
    let one_plus_g = &g + CMat::identity(2 * m, 2 * m);
    let lu = one_plus_g.clone().lu();
    let det = lu.determinant();
    if !(det.re > 0.0) || det.im.abs() > tol.imaginary * det.re {
        return Err(Error::Singular("1 + G (determinant not real positive)"));
    }
    let log_norm = 0.5 * det.re.ln();
    if !log_norm.is_finite() {
        return Err(Error::Singular("1 + G (log determinant not finite)"));
    }
    let inv = lu.try_inverse().ok_or(Error::Singular("1 + G"))?;
    let raw = linalg::block_swap(m) * &g * inv;
    let c_asymmetry = linalg::symmetry_residual(&raw);
    if c_asymmetry > tol.c_symmetry {
        return Err(Error::NotSymmetric("base matrix C", c_asymmetry));
    }
    Ok(GaussianState {
        c: linalg::symmetrize(&raw),
        g,
        temperature,
        log_norm,
        c_asymmetry,
        m_a,
        m_ph,
    })
}

impl GaussianState {
    pub fn modes(&self) -> usize {
        self.m_a + self.m_ph
    }

    /// Upper-left block `⟨ĉᵢ† ĉⱼ⟩`.
    pub fn normal_block(&self) -> CMat {
        let m = self.modes();
        linalg::block(&self.g, 0, 0, m, m)
    }

    /// Anomalous block `⟨ĉᵢ ĉⱼ⟩`.
    pub fn anomalous_block(&self) -> CMat {
        let m = self.modes();
        linalg::block(&self.g, m, 0, m, m)
    }

    /// `√det(1+G)`.
    pub fn normalization(&self) -> f64 {
        self.log_norm.exp()
    }

    /// Smallest eigenvalue of the Hermitian part of the normal block.
    pub fn normal_block_min_eigenvalue(&self) -> f64 {
        let n = self.normal_block();
        if n.nrows() == 0 {
            return 0.0;
        }
        SymmetricEigen::new(linalg::hermitize(&n))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Singular values of `G (1+G)⁻¹`.
    pub fn c_singular_values(&self) -> Vec<f64> {
        let m = self.modes();
        // C differs from G(1+G)⁻¹ only by the block swap, which is unitary.
        let unswapped = linalg::block_swap(m) * &self.c;
        unswapped.singular_values().iter().copied().collect()
    }

    /// Mean occupations `⟨n̂ⱼ⟩`.
    pub fn mean_occupations(&self) -> Vec<f64> {
        (0..self.modes()).map(|j| self.g[(j, j)].re).collect()
    }

    /// SHA-256 over the little-endian bytes of `G` (row-major, re then im)
    /// followed by `T`.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for i in 0..self.g.nrows() {
            for j in 0..self.g.ncols() {
                let z = self.g[(i, j)];
                hasher.update(z.re.to_le_bytes());
                hasher.update(z.im.to_le_bytes());
            }
        }
        hasher.update(self.temperature.to_le_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn base_matrix(&self) -> &CMat {
        &self.c
    }
}

/// Extended matrix `C̃ = C[idx, idx]` for the given counts.
pub fn extend_matrix(c: &CMat, counts: &CountsVector) -> Result<CMat> {
    let m = c.nrows() / 2;
    if c.nrows() != c.ncols() || !c.nrows().is_multiple_of(2) || counts.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for a {}×{} base matrix",
            counts.len(),
            c.nrows(),
            c.ncols()
        )));
    }
    let idx = extension_indices(counts.as_slice());
    Ok(CMat::from_fn(idx.len(), idx.len(), |r, s| {
        c[(idx[r], idx[s])]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdg::{assemble_hamiltonian, bogoliubov_diagonalize};
    use crate::model::CouplingBlocks;

    fn single_mode(e: f64, t: f64) -> BogoliubovDecomposition {
        let mut blocks = CouplingBlocks::zeros(1, 0);
        blocks.eps_a[(0, 0)] = Complex64::new(e, 0.0);
        blocks.chit_aa[(0, 0)] = Complex64::new(t, 0.0);
        bogoliubov_diagonalize(&assemble_hamiltonian(&blocks).unwrap()).unwrap()
    }

    fn canonical_squeeze(r: f64) -> BogoliubovDecomposition {
        BogoliubovDecomposition {
            energies: vec![1.0],
            a: CMat::from_element(1, 1, Complex64::new(r.cosh(), 0.0)),
            b: CMat::from_element(1, 1, Complex64::new(-r.sinh(), 0.0)),
            m_a: 1,
            m_ph: 0,
        }
    }

    #[test]
    fn bose_einstein_occupation_at_t_one_over_ln2() {
        let dec = single_mode(1.0, 0.0);
        let state = covariance(&dec, 1.0 / 2f64.ln()).unwrap();
        assert!((state.mean_occupations()[0] - 1.0).abs() < 1e-12);
        assert!(state.anomalous_block()[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn zero_temperature_uncoupled_is_vacuum() {
        let dec = single_mode(2.5, 0.0);
        let state = covariance(&dec, 0.0).unwrap();
        assert!(linalg::max_abs(&state.g) < 1e-15);
        assert!(linalg::max_abs(&state.c) < 1e-15);
        assert_eq!(state.log_norm, 0.0);
    }

    #[test]
    fn squeezed_vacuum_moments() {
        let r: f64 = 0.5;
        let state = covariance(&canonical_squeeze(r), 0.0).unwrap();
        assert!((state.mean_occupations()[0] - r.sinh().powi(2)).abs() < 1e-14);
        let anomalous = state.anomalous_block()[(0, 0)].norm();
        assert!((anomalous - r.cosh() * r.sinh()).abs() < 1e-14);
        // C = −tanh r · I for this phase convention.
        assert!((state.c[(0, 0)].re + r.tanh()).abs() < 1e-14);
        assert!((state.c[(1, 1)].re + r.tanh()).abs() < 1e-14);
        assert!((state.normalization() - r.cosh()).abs() < 1e-14);
    }

    #[test]
    fn thermal_base_matrix_is_off_diagonal() {
        let n_bar = 0.7;
        let g = CMat::from_diagonal_element(2, 2, Complex64::new(n_bar, 0.0));
        let state = from_covariance(g, 1.0, 1, 0, &Tolerances::default()).unwrap();
        let q = n_bar / (1.0 + n_bar);
        assert!(state.c[(0, 0)].norm() < 1e-16);
        assert!((state.c[(0, 1)].re - q).abs() < 1e-15);
        assert!((state.c[(1, 0)].re - q).abs() < 1e-15);
        assert!((state.normalization() - (1.0 + n_bar)).abs() < 1e-14);
    }

    #[test]
    fn formula_matches_direct_correlators() {
        for (e, t, temp) in [(1.0, 0.6, 0.0), (2.0, 0.3, 0.8), (1.3, -0.9, 2.0)] {
            let dec = single_mode(e, t);
            let state = covariance(&dec, temp).unwrap();
            let direct = direct_covariance(&dec, temp);
            let diff = linalg::max_abs_diff(&state.g, &direct);
            assert!(diff < 1e-12, "e={e} t={t} T={temp}: {diff}");
        }
    }

    #[test]
    fn extension_replicates_rows_and_columns() {
        let c = CMat::from_fn(2, 2, |i, j| Complex64::new((10 * i + j) as f64, 0.0));
        let ext = extend_matrix(&c, &CountsVector(vec![2])).unwrap();
        let expected = [
            [0, 0, 1, 1],
            [0, 0, 1, 1],
            [10, 10, 11, 11],
            [10, 10, 11, 11],
        ];
        for r in 0..4 {
            for s in 0..4 {
                assert_eq!(ext[(r, s)].re, expected[r][s] as f64);
            }
        }
        assert_eq!(
            extend_matrix(&c, &CountsVector(vec![0])).unwrap().nrows(),
            0
        );
        assert!(extend_matrix(&c, &CountsVector(vec![1, 1])).is_err());
    }

    #[test]
    fn fingerprint_tracks_state_and_temperature() {
        let dec = single_mode(1.0, 0.2);
        let a = covariance(&dec, 0.5).unwrap();
        let b = covariance(&dec, 0.5).unwrap();
        let c = covariance(&dec, 0.6).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn counts_parse_and_display() {
        let c = CountsVector::parse(" 1, 0,3").unwrap();
        assert_eq!(c.as_slice(), &[1, 0, 3]);
        assert_eq!(c.to_string(), "1,0,3");
        assert_eq!(c.total(), 4);
        assert_eq!(c.factorial_product(), 6.0);
        assert!(CountsVector::parse("1,-2").is_err());
    }
}
