//! Quadratic Hamiltonian assembly and its symplectic diagonalization.
//!
//! The Hamiltonian is `Ĥ = ½ xᵀ H x` over the operator column
//! `x = (ĉ†, ĉ)` with
//!
//! ```text
//! H = [[χ̃, ε + χ], [ε + χ*, χ̃*]]
//! ```
//!
//! Because `x` is transposed rather than adjointed, `H` is complex
//! *symmetric*; the Hermitian object is `K = H P` (the familiar
//! Bogoliubov–de Gennes matrix over `(ĉ, ĉ†)`). Both are real for the toy
//! geometry, where the two notions coincide.
//!
//! Quasiparticles are `(c̃†, c̃)ᵀ = R̃ (ĉ†, ĉ)ᵀ` with
//! `R̃ = [[A*, −B*], [−B, A]]`, i.e. `c̃ = A ĉ − B ĉ†`.

use nalgebra::{Cholesky, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, block, block2, CMat, ZERO};
use crate::model::CouplingBlocks;
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    /// `2M × 2M` matrix in the `(ĉ†, ĉ)` layout.
    pub h: CMat,
    pub m_a: usize,
    pub m_ph: usize,
}

impl QuadraticHamiltonian {
    pub fn modes(&self) -> usize {
        self.m_a + self.m_ph
    }

    /// `K = H P`, Hermitian over `(ĉ, ĉ†)`.
    pub fn bdg_matrix(&self) -> CMat {
        &self.h * linalg::block_swap(self.modes())
    }

    pub fn scale(&self) -> f64 {
        linalg::max_abs(&self.h)
    }

    /// Upper-left block `χ̃`.
    pub fn pairing_block(&self) -> CMat {
        let m = self.modes();
        block(&self.h, 0, 0, m, m)
    }

    /// Upper-right block `ε + χ`.
    pub fn hopping_block(&self) -> CMat {
        let m = self.modes();
        block(&self.h, 0, m, m, m)
    }
}

/// Build `H` from the coupling blocks.
pub fn assemble_hamiltonian(blocks: &CouplingBlocks) -> Result<QuadraticHamiltonian> {
    blocks.check_dimensions()?;
    let (m_a, m_ph) = (blocks.m_a(), blocks.m_ph());
    let zeros_ph = CMat::zeros(m_ph, m_ph);
    let zeros_a = CMat::zeros(m_a, m_a);
    let eps = block2(
        &blocks.eps_a,
        &CMat::zeros(m_a, m_ph),
        &CMat::zeros(m_ph, m_a),
        &blocks.eps_ph,
    );
    let chi = block2(
        &zeros_a,
        &blocks.chi_aph(),
        &blocks.chi_pha,
        &blocks.chi_phph,
    );
    let chit = block2(
        &blocks.chit_aa,
        &blocks.chit_aph(),
        &blocks.chit_pha,
        &zeros_ph,
    );

    let hop = linalg::hermitize(&(eps + chi));
    let pair = linalg::symmetrize(&chit);
    let h = block2(&pair, &hop, &linalg::conj(&hop), &linalg::conj(&pair));
    Ok(QuadraticHamiltonian { h, m_a, m_ph })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Whether the layout matrix `H` itself (Hermitian part) is positive definite.
    pub positive_definite: bool,
    pub min_eigenvalue: f64,
    /// Whether `K = H P` is positive definite; this is the thermodynamic criterion.
    pub bdg_positive_definite: bool,
    pub bdg_min_eigenvalue: f64,
    /// Eigenvalues of `J K`, `J = diag(I, −I)`, sorted by real part.
    pub symplectic_eigenvalues: Vec<Complex64>,
    /// All quasiparticle energies real and strictly positive.
    pub stable: bool,
}

fn hermitian_min_eigenvalue(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(linalg::hermitize(m))
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Eigenvalues of the non-Hermitian dynamical matrix `J K`.
pub fn symplectic_spectrum(h: &QuadraticHamiltonian) -> Vec<Complex64> {
    let m = h.modes();
    let jk = linalg::sigma3(m) * h.bdg_matrix();
    let mut eig: Vec<Complex64> = Schur::new(jk)
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    eig
}

pub fn check_stability(h: &QuadraticHamiltonian) -> StabilityReport {
    check_stability_with(h, &Tolerances::default())
}

pub fn check_stability_with(h: &QuadraticHamiltonian, tol: &Tolerances) -> StabilityReport {
    let scale = h.scale().max(f64::MIN_POSITIVE);
    let min_eigenvalue = hermitian_min_eigenvalue(&h.h);
    let bdg_min_eigenvalue = hermitian_min_eigenvalue(&h.bdg_matrix());
    let symplectic_eigenvalues = symplectic_spectrum(h);
    let threshold = tol.stability * scale;
    let real_spectrum = symplectic_eigenvalues
        .iter()
        .all(|z| z.im.abs() <= threshold);
    let bdg_positive_definite = bdg_min_eigenvalue > threshold;
    StabilityReport {
        positive_definite: min_eigenvalue > threshold,
        min_eigenvalue,
        bdg_positive_definite,
        bdg_min_eigenvalue,
        stable: bdg_positive_definite && real_spectrum && h.scale() > 0.0,
        symplectic_eigenvalues,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovDecomposition {
    /// Quasiparticle energies, ascending.
    pub energies: Vec<f64>,
    pub a: CMat,
    pub b: CMat,
    pub m_a: usize,
    pub m_ph: usize,
}

impl BogoliubovDecomposition {
    pub fn modes(&self) -> usize {
        self.a.nrows()
    }

    /// `R̃ = [[A*, −B*], [−B, A]]`.
    pub fn r_tilde(&self) -> CMat {
        block2(
            &linalg::conj(&self.a),
            &(-linalg::conj(&self.b)),
            &(-&self.b),
            &self.a,
        )
    }

    /// `R = R̃⁻¹ = J R̃† J`, exact for a symplectic `R̃`.
    pub fn r_inverse(&self) -> CMat {
        let j = linalg::sigma3(self.modes());
        &j * self.r_tilde().adjoint() * &j
    }

    /// `max|R̃ J R̃† − J|`.
    pub fn symplectic_residual(&self) -> f64 {
        let j = linalg::sigma3(self.modes());
        let r = self.r_tilde();
        linalg::max_abs_diff(&(&r * &j * r.adjoint()), &j)
    }

    /// `max|R† (P H) R − diag(Ẽ, Ẽ)|`.
    pub fn diagonalization_residual(&self, h: &QuadraticHamiltonian) -> f64 {
        let m = self.modes();
        let r = self.r_inverse();
        let ph = linalg::block_swap(m) * &h.h;
        let d = r.adjoint() * ph * &r;
        let target = CMat::from_fn(2 * m, 2 * m, |i, j| {
            if i == j {
                Complex64::new(self.energies[i % m], 0.0)
            } else {
                ZERO
            }
        });
        linalg::max_abs_diff(&d, &target)
    }
}

pub fn bogoliubov_diagonalize(h: &QuadraticHamiltonian) -> Result<BogoliubovDecomposition> {
    bogoliubov_diagonalize_with(h, &Tolerances::default())
}

fn instability_from_spectrum(h: &QuadraticHamiltonian, tol: &Tolerances, fallback: f64) -> Error {
    let threshold = tol.stability * h.scale().max(f64::MIN_POSITIVE);
    let spectrum = symplectic_spectrum(h);
    if let Some(z) = spectrum
        .iter()
        .filter(|z| z.im.abs() > threshold)
        .max_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
    {
        return Error::Instability {
            eigenvalue: *z,
            message: "non-real symplectic eigenvalue".into(),
        };
    }
    Error::Instability {
        eigenvalue: Complex64::new(fallback, 0.0),
        message: "quasiparticle energy is not positive".into(),
    }
}

/// Invert a factor `X` with `K = X† X`.
///
/// The Cholesky factor is tried first; if it fails but `K` is still positive
/// definite within tolerance, the Hermitian square root is used instead.
fn gram_factor_inverse(h: &QuadraticHamiltonian, tol: &Tolerances) -> Result<CMat> {
    let k = linalg::hermitize(&h.bdg_matrix());
    let n = k.nrows();
    let threshold = tol.stability * h.scale().max(f64::MIN_POSITIVE);
    if let Some(chol) = Cholesky::new(k.clone()) {
        let l = chol.l();
        let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |a, z| a.min(z.re));
        if min_pivot * min_pivot > threshold {
            let x = l.adjoint();
            return x
                .solve_upper_triangular(&CMat::identity(n, n))
                .ok_or(Error::Singular("Cholesky factor"));
        }
    }
    let eig = SymmetricEigen::new(k);
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(min > threshold) {
        return Err(instability_from_spectrum(h, tol, min));
    }
    // X = Λ^{1/2} U†, so X⁻¹ = U Λ^{-1/2}.
    let mut xinv = eig.eigenvectors.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let s = 1.0 / lam.sqrt();
        for i in 0..n {
            xinv[(i, j)] *= s;
        }
    }
    Ok(xinv)
}

/// Bring a block of degenerate columns to lower-echelon form with real
/// positive pivots by a unitary mixing from the right.
fn canonicalize_degenerate(s: &mut CMat, cols: &[usize]) {
    let k = cols.len();
    let rows = s.nrows();
    let mut sub = CMat::from_fn(rows, k, |i, j| s[(i, cols[j])]);
    let scale = linalg::max_abs(&sub).max(f64::MIN_POSITIVE);
    let mut pivot = 0;
    for row in 0..rows {
        if pivot == k {
            break;
        }
        let tail: Vec<Complex64> = (pivot..k).map(|j| sub[(row, j)]).collect();
        let norm = tail.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-8 * scale {
            continue;
        }
        // Householder reflection on the columns pivot..k mapping the row
        // tail onto (norm, 0, …, 0).
        let mut v = tail.clone();
        let alpha = if tail[0].norm() > 0.0 {
            -(tail[0] / tail[0].norm()) * norm
        } else {
            Complex64::new(-norm, 0.0)
        };
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for z in v.iter_mut() {
                *z /= vnorm;
            }
            // Apply (I − 2 v* vᵀ) from the right: row · (I − 2 v* vᵀ) maps
            // the row tail t onto t − 2 (t·v*) vᵀ.
            for i in 0..rows {
                let dot: Complex64 = (0..v.len())
                    .map(|j| sub[(i, pivot + j)] * v[j].conj())
                    .sum();
                for j in 0..v.len() {
                    sub[(i, pivot + j)] -= 2.0 * dot * v[j];
                }
            }
        }
        // Rotate the pivot entry onto the positive real axis.
        let z = sub[(row, pivot)];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for i in 0..rows {
                sub[(i, pivot)] *= phase;
            }
            sub[(row, pivot)] = Complex64::new(sub[(row, pivot)].re, 0.0);
        }
        pivot += 1;
    }
    for (j, &c) in cols.iter().enumerate() {
        for i in 0..rows {
            s[(i, c)] = sub[(i, j)];
        }
    }
}

/// Colpa diagonalization: factor `K = X† X`, diagonalize `X J X†`, rescale.
pub fn bogoliubov_diagonalize_with(
    h: &QuadraticHamiltonian,
    tol: &Tolerances,
) -> Result<BogoliubovDecomposition> {
    let m = h.modes();
    let sym = linalg::symmetry_residual(&h.h);
    if sym > 1e-12 * h.scale().max(1.0) {
        return Err(Error::NotSymmetric("Hamiltonian layout matrix", sym));
    }
    let xinv = gram_factor_inverse(h, tol)?;
    let j = linalg::sigma3(m);
    // X J X† with X = (X⁻¹)⁻¹; using X⁻¹ directly: X J X† = (X⁻¹)⁻¹ J (X⁻¹)⁻†.
    let x = xinv
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("Gram factor"))?;
    let w = linalg::hermitize(&(&x * &j * x.adjoint()));
    let eig = SymmetricEigen::new(w);

    // The M positive eigenvalues are the quasiparticle energies.
    let mut order: Vec<usize> = (0..2 * m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut positive: Vec<usize> = order[..m].to_vec();
    positive.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let threshold = tol.stability * h.scale().max(f64::MIN_POSITIVE);
    let energies: Vec<f64> = positive.iter().map(|&i| eig.eigenvalues[i]).collect();
    if let Some(&bad) = energies.iter().find(|&&e| !(e > threshold)) {
        return Err(instability_from_spectrum(h, tol, bad));
    }

    // Columns j < M of S (with y = S ỹ over (ĉ, ĉ†)).
    let mut s = CMat::zeros(2 * m, 2 * m);
    for (col, &idx) in positive.iter().enumerate() {
        let u = eig.eigenvectors.column(idx);
        let v = &xinv * u * Complex64::new(energies[col].sqrt(), 0.0);
        s.set_column(col, &v);
    }

    // Deterministic gauge: echelon form inside degenerate groups, largest
    // entry real positive otherwise.
    let degenerate_gap = tol.degeneracy * h.scale().max(1.0);
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && energies[end] - energies[end - 1] <= degenerate_gap {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = (start..end).collect();
            canonicalize_degenerate(&mut s, &cols);
        } else {
            linalg::fix_column_phase(&mut s, start);
        }
        start = end;
    }

    // S = [[A†, Bᵀ], [B†, Aᵀ]]; the top-left and bottom-left blocks of the
    // first M columns give A and B.
    let a = block(&s, 0, 0, m, m).adjoint();
    let b = block(&s, m, 0, m, m).adjoint();
    Ok(BogoliubovDecomposition {
        energies,
        a,
        b,
        m_a: h.m_a,
        m_ph: h.m_ph,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub(crate) fn single_mode(e: f64, t: f64) -> QuadraticHamiltonian {
        let mut blocks = CouplingBlocks::zeros(1, 0);
        blocks.eps_a[(0, 0)] = c(e);
        blocks.chit_aa[(0, 0)] = c(t);
        assemble_hamiltonian(&blocks).unwrap()
    }

    #[test]
    fn layout_of_uncoupled_hamiltonian() {
        let mut blocks = CouplingBlocks::zeros(1, 1);
        blocks.eps_a[(0, 0)] = c(1.0);
        blocks.eps_ph[(0, 0)] = c(2.0);
        let h = assemble_hamiltonian(&blocks).unwrap();
        let expected = CMat::from_row_slice(
            4,
            4,
            &[
                ZERO,
                ZERO,
                c(1.0),
                ZERO,
                ZERO,
                ZERO,
                ZERO,
                c(2.0),
                c(1.0),
                ZERO,
                ZERO,
                ZERO,
                ZERO,
                c(2.0),
                ZERO,
                ZERO,
            ],
        );
        assert_eq!(h.h, expected);
    }

    #[test]
    fn pairing_block_placement() {
        let h = single_mode(0.0, 0.3);
        assert_eq!(h.h[(0, 0)], c(0.3));
        assert_eq!(h.h[(1, 1)], c(0.3));
    }

    #[test]
    fn uncoupled_diagonalization_is_identity() {
        let mut blocks = CouplingBlocks::zeros(2, 1);
        blocks.eps_a[(0, 0)] = c(1.3);
        blocks.eps_a[(1, 1)] = c(0.7);
        blocks.eps_ph[(0, 0)] = c(2.0);
        let h = assemble_hamiltonian(&blocks).unwrap();
        let dec = bogoliubov_diagonalize(&h).unwrap();
        assert_eq!(dec.energies.len(), 3);
        for (e, x) in dec.energies.iter().zip([0.7, 1.3, 2.0]) {
            assert!((e - x).abs() < 1e-12);
        }
        // Ascending energies permute the bare modes.
        let perm = [1usize, 0, 2];
        for (row, &col) in perm.iter().enumerate() {
            assert!((dec.a[(row, col)] - ONE).norm() < 1e-12);
        }
        assert!(linalg::max_abs(&dec.b) < 1e-12);
    }

    #[test]
    fn degenerate_uncoupled_modes_give_identity() {
        let mut blocks = CouplingBlocks::zeros(2, 1);
        blocks.eps_a[(0, 0)] = c(1.0);
        blocks.eps_a[(1, 1)] = c(1.0);
        blocks.eps_ph[(0, 0)] = c(1.0);
        let h = assemble_hamiltonian(&blocks).unwrap();
        let dec = bogoliubov_diagonalize(&h).unwrap();
        let r = dec.r_tilde();
        assert!(linalg::max_abs_diff(&r, &CMat::identity(6, 6)) < 1e-12);
    }

    #[test]
    fn single_mode_closed_form() {
        let (e, t) = (1.0, 0.6);
        let h = single_mode(e, t);
        let dec = bogoliubov_diagonalize(&h).unwrap();
        let energy = (e * e - t * t).sqrt();
        assert!((dec.energies[0] - energy).abs() < 1e-12);
        let r = 0.25 * ((e + t) / (e - t)).ln();
        assert!((dec.a[(0, 0)] - c(r.cosh())).norm() < 1e-12);
        assert!((dec.b[(0, 0)] - c(-r.sinh())).norm() < 1e-12);
        assert!((dec.b[(0, 0)].norm() / dec.a[(0, 0)].norm() - r.tanh()).abs() < 1e-12);
    }

    #[test]
    fn stability_report_distinguishes_layout_and_quasiparticles() {
        let mut blocks = CouplingBlocks::zeros(2, 0);
        blocks.eps_a[(0, 0)] = c(1.0);
        blocks.eps_a[(1, 1)] = c(1.0);
        let report = check_stability(&assemble_hamiltonian(&blocks).unwrap());
        // H = [[0, I], [I, 0]] has eigenvalues ±1 …
        assert!(!report.positive_definite);
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-12);
        // … yet the quasiparticles are stable with Ẽ = 1.
        assert!(report.stable);
        assert!(report.bdg_positive_definite);
        for z in &report.symplectic_eigenvalues {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_hamiltonian_is_unstable() {
        let h = assemble_hamiltonian(&CouplingBlocks::zeros(1, 1)).unwrap();
        assert!(!check_stability(&h).stable);
        assert!(matches!(
            bogoliubov_diagonalize(&h),
            Err(Error::Instability { .. })
        ));
    }

    #[test]
    fn strong_pairing_produces_complex_pair() {
        // Sweep t up to and beyond the gap e = 1: Ẽ = √(1 − t²) collapses at t = 1.
        for &t in &[0.2, 0.6, 0.99] {
            assert!(check_stability(&single_mode(1.0, t)).stable, "t = {t}");
        }
        for &t in &[1.01, 1.5] {
            let h = single_mode(1.0, t);
            let report = check_stability(&h);
            assert!(!report.stable);
            assert!(report
                .symplectic_eigenvalues
                .iter()
                .any(|z| z.im.abs() > 1e-3));
            match bogoliubov_diagonalize(&h) {
                Err(Error::Instability { eigenvalue, .. }) => {
                    assert!((eigenvalue.im.abs() - (t * t - 1.0f64).sqrt()).abs() < 1e-9)
                }
                other => panic!("expected instability, got {other:?}"),
            }
        }
    }

    #[test]
    fn negative_energy_mode_is_unstable() {
        let mut blocks = CouplingBlocks::zeros(1, 0);
        blocks.eps_a[(0, 0)] = c(-1.0);
        let h = assemble_hamiltonian(&blocks).unwrap();
        assert!(!check_stability(&h).stable);
        assert!(bogoliubov_diagonalize(&h).is_err());
    }

    #[test]
    fn block_structure_round_trips() {
        let h = single_mode(2.0, 0.5);
        let dec = bogoliubov_diagonalize(&h).unwrap();
        let r = dec.r_tilde();
        let m = dec.modes();
        assert_eq!(block(&r, m, m, m, m), dec.a);
        assert_eq!(-block(&r, m, 0, m, m), dec.b);
        assert_eq!(block(&r, 0, 0, m, m), linalg::conj(&dec.a));
    }

    #[test]
    fn determinism() {
        let h = single_mode(1.7, -0.4);
        let a = bogoliubov_diagonalize(&h).unwrap();
        let b = bogoliubov_diagonalize(&h).unwrap();
        assert_eq!(a, b);
    }
}
