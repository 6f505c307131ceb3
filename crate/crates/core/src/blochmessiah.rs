//! Bloch-Messiah reduction `A = W cosh Λ V`, `B = −W sinh Λ V*`.
//!
//! The singular vectors of `B` fix `W` only up to phases, and those phases
//! are not free: `B` pins them up to a sign for every nonzero squeeze. The
//! factors are therefore obtained from the Takagi factorization of the
//! complex symmetric matrix `S = −B (A*)⁻¹ = W tanh Λ Wᵀ`, after which
//! `V = cosh(Λ)⁻¹ W† A`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bdg::BogoliubovDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use crate::model::ModeBasis;
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct BlochMessiahFactors {
    /// Bare → eigen-squeeze rotation.
    pub v: CMat,
    /// Eigen-squeeze → quasiparticle rotation.
    pub w: CMat,
    /// Squeeze parameters, descending, clamped to exactly zero below tolerance.
    pub r: Vec<f64>,
}

impl BlochMessiahFactors {
    pub fn modes(&self) -> usize {
        self.r.len()
    }

    pub fn cosh(&self) -> CMat {
        diag(self.r.iter().map(|r| r.cosh()))
    }

    pub fn sinh(&self) -> CMat {
        diag(self.r.iter().map(|r| r.sinh()))
    }

    /// `W cosh Λ V`.
    pub fn a(&self) -> CMat {
        &self.w * self.cosh() * &self.v
    }

    /// `−W sinh Λ V*`.
    pub fn b(&self) -> CMat {
        -(&self.w * self.sinh() * linalg::conj(&self.v))
    }

    /// Largest entrywise deviation of the reconstructed `A`, `B`.
    pub fn reconstruction_residual(&self, dec: &BogoliubovDecomposition) -> f64 {
        linalg::max_abs_diff(&self.a(), &dec.a).max(linalg::max_abs_diff(&self.b(), &dec.b))
    }

    /// Multimode squeeze matrix `W Λ W†`.
    pub fn squeeze_matrix(&self) -> CMat {
        &self.w * diag(self.r.iter().copied()) * self.w.adjoint()
    }
}

fn diag(values: impl Iterator<Item = f64>) -> CMat {
    let v: Vec<Complex64> = values.map(|x| Complex64::new(x, 0.0)).collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(v))
}

/// Sign-fix a Takagi vector: largest entry gets a positive real part.
fn fix_sign(w: &mut CMat, j: usize) {
    if let Some(k) = linalg::argmax_abs(w.column(j).iter()) {
        let z = w[(k, j)];
        let negative = if z.re.abs() > 1e-14 * z.norm() {
            z.re < 0.0
        } else {
            z.im < 0.0
        };
        if negative {
            for i in 0..w.nrows() {
                w[(i, j)] = -w[(i, j)];
            }
        }
    }
}

/// Takagi factorization `S = W diag(σ) Wᵀ` of a complex symmetric matrix,
/// with σ descending and values below `clamp` set to zero.
///
/// For `S = X + iY` the real symmetric matrix `[[X, Y], [Y, −X]]` has
/// eigenpairs `±σ_j`; a positive eigenvector `(a; b)` gives the Takagi vector
/// `a + ib`. The null space is completed by Gram-Schmidt over the unit vectors.
pub fn takagi(s: &CMat, clamp: f64) -> (CMat, Vec<f64>) {
    let m = s.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = 0.5 * (s[(i, j)] + s[(j, i)]);
            real[(i, j)] = z.re;
            real[(i, j + m)] = z.im;
            real[(i + m, j)] = z.im;
            real[(i + m, j + m)] = -z.re;
        }
    }
    let eig = SymmetricEigen::new(real);
    let mut order: Vec<usize> = (0..2 * m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut w = CMat::zeros(m, m);
    let mut sigma = vec![0.0; m];
    let mut filled = 0;
    for &idx in order.iter().take(m) {
        let value = eig.eigenvalues[idx];
        if value <= clamp {
            break;
        }
        let col = eig.eigenvectors.column(idx);
        let mut norm = 0.0;
        for i in 0..m {
            let z = Complex64::new(col[i], col[i + m]);
            w[(i, filled)] = z;
            norm += z.norm_sqr();
        }
        let inv = 1.0 / norm.sqrt();
        for i in 0..m {
            w[(i, filled)] *= inv;
        }
        fix_sign(&mut w, filled);
        sigma[filled] = value;
        filled += 1;
    }

    // Complete the basis on the zero-σ subspace.
    let mut candidate = 0;
    while filled < m && candidate < m {
        let mut v = nalgebra::DVector::<Complex64>::zeros(m);
        v[candidate] = Complex64::new(1.0, 0.0);
        candidate += 1;
        for _ in 0..2 {
            for k in 0..filled {
                let proj: Complex64 = w
                    .column(k)
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for i in 0..m {
                    v[i] -= proj * w[(i, k)];
                }
            }
        }
        let norm = v.norm();
        if norm < 1e-6 {
            continue;
        }
        v /= Complex64::new(norm, 0.0);
        w.set_column(filled, &v);
        linalg::fix_column_phase(&mut w, filled);
        filled += 1;
    }
    (w, sigma)
}

pub fn bloch_messiah(dec: &BogoliubovDecomposition) -> Result<BlochMessiahFactors> {
    bloch_messiah_with(dec, &Tolerances::default())
}

pub fn bloch_messiah_with(
    dec: &BogoliubovDecomposition,
    tol: &Tolerances,
) -> Result<BlochMessiahFactors> {
    let m = dec.modes();
    // S (A*) = −B  ⇔  A† Sᵀ = −Bᵀ, and S is symmetric.
    let a_adj = dec.a.adjoint();
    let s_t = a_adj
        .lu()
        .solve(&(-dec.b.transpose()))
        .ok_or(Error::Singular("Bogoliubov block A"))?;
    let s = linalg::symmetrize(&s_t.transpose());
    let (w, tanh) = takagi(&s, tol.squeeze_clamp.tanh());
    if let Some(&t) = tanh.iter().find(|&&t| t >= 1.0) {
        return Err(Error::Reconstruction {
            residual: t,
            tolerance: tol.reconstruction,
        });
    }
    let r: Vec<f64> = tanh
        .iter()
        .map(|&t| if t > 0.0 { t.atanh() } else { 0.0 })
        .collect();
    let inv_cosh = diag(r.iter().map(|r| 1.0 / r.cosh()));
    let v = inv_cosh * w.adjoint() * &dec.a;
    let factors = BlochMessiahFactors { v, w, r };
    let residual = factors.reconstruction_residual(dec);
    if !(residual <= tol.reconstruction) {
        return Err(Error::Reconstruction {
            residual,
            tolerance: tol.reconstruction,
        });
    }
    debug_assert_eq!(factors.modes(), m);
    Ok(factors)
}

/// Squeeze parameters `r_j`, descending.
pub fn squeeze_spectrum(f: &BlochMessiahFactors) -> Vec<f64> {
    f.r.clone()
}

/// A function on the hybrid single-particle space: grid samples on the atomic
/// part, coefficients over the cavity-mode profiles on the photonic part.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridMode {
    pub atom: Vec<Complex64>,
    pub photon: Vec<Complex64>,
}

impl HybridMode {
    /// `∫|f|² dx + Σ|coefficients|²`.
    pub fn norm_sqr(&self, basis: &ModeBasis) -> f64 {
        let atom: f64 = self
            .atom
            .iter()
            .zip(basis.weights.iter())
            .map(|(z, w)| w * z.norm_sqr())
            .sum();
        atom + self.photon.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    fn zeros(points: usize, m_ph: usize) -> Self {
        Self {
            atom: vec![ZERO; points],
            photon: vec![ZERO; m_ph],
        }
    }

    fn axpy(&mut self, alpha: Complex64, other: &HybridMode) {
        for (y, x) in self.atom.iter_mut().zip(&other.atom) {
            *y += alpha * x;
        }
        for (y, x) in self.photon.iter_mut().zip(&other.photon) {
            *y += alpha * x;
        }
    }

    fn conj(&self) -> Self {
        Self {
            atom: self.atom.iter().map(|z| z.conj()).collect(),
            photon: self.photon.iter().map(|z| z.conj()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunctions {
    /// `φ'_j = Σ V*_{jj'} φ_{j'}`.
    pub eigen_squeeze: Vec<HybridMode>,
    /// `u_j = Σ W*_{jj'} φ'_{j'} cosh r_{j'}`.
    pub u: Vec<HybridMode>,
    /// `v_j` with `v_j* = −Σ W_{jj'} φ'_{j'} sinh r_{j'}`.
    pub v: Vec<HybridMode>,
    pub m_a: usize,
    pub m_ph: usize,
}

/// The bare single-particle basis: atomic states on the grid, then photon
/// unit vectors.
pub fn bare_modes(basis: &ModeBasis) -> Vec<HybridMode> {
    let points = basis.x.len();
    let m_a = basis.phi_l.ncols();
    let m_ph = basis.omega_nu_profiles.ncols();
    let mut out = Vec::with_capacity(m_a + m_ph);
    for l in 0..m_a {
        let mut f = HybridMode::zeros(points, m_ph);
        for i in 0..points {
            f.atom[i] = Complex64::new(basis.phi_l[(i, l)], 0.0);
        }
        out.push(f);
    }
    for nu in 0..m_ph {
        let mut f = HybridMode::zeros(points, m_ph);
        f.photon[nu] = Complex64::new(1.0, 0.0);
        out.push(f);
    }
    out
}

pub fn mode_functions(f: &BlochMessiahFactors, basis: &ModeBasis) -> Result<ModeFunctions> {
    let m_a = basis.phi_l.ncols();
    let m_ph = basis.omega_nu_profiles.ncols();
    let m = f.modes();
    if m != m_a + m_ph {
        return Err(Error::DimensionMismatch(format!(
            "factors have {m} modes, basis has {}",
            m_a + m_ph
        )));
    }
    let points = basis.x.len();
    let bare = bare_modes(basis);
    let eigen_squeeze: Vec<HybridMode> = (0..m)
        .map(|j| {
            let mut out = HybridMode::zeros(points, m_ph);
            for (jp, phi) in bare.iter().enumerate() {
                out.axpy(f.v[(j, jp)].conj(), phi);
            }
            out
        })
        .collect();
    let mut u = Vec::with_capacity(m);
    let mut v = Vec::with_capacity(m);
    for j in 0..m {
        let mut uj = HybridMode::zeros(points, m_ph);
        let mut vj_conj = HybridMode::zeros(points, m_ph);
        for (jp, phi) in eigen_squeeze.iter().enumerate() {
            uj.axpy(f.w[(j, jp)].conj() * f.r[jp].cosh(), phi);
            vj_conj.axpy(-f.w[(j, jp)] * f.r[jp].sinh(), phi);
        }
        u.push(uj);
        v.push(vj_conj.conj());
    }
    Ok(ModeFunctions {
        eigen_squeeze,
        u,
        v,
        m_a,
        m_ph,
    })
}
