//! Small dense complex helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max|X − Xᵀ|`.
pub fn symmetry_residual(m: &CMat) -> f64 {
    max_abs_diff(m, &m.transpose())
}

/// `max|X − X†|`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.transpose()).scale(0.5)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Block swap `[[0, I], [I, 0]]` of size `2m`.
pub fn block_swap(m: usize) -> CMat {
    let mut p = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        p[(i, i + m)] = ONE;
        p[(i + m, i)] = ONE;
    }
    p
}

/// `diag(I_m, −I_m)`.
pub fn sigma3(m: usize) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_fn(2 * m, |i, _| {
        if i < m {
            ONE
        } else {
            -ONE
        }
    }))
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMat::identity(n, n))
}

/// Assemble a `2×2` block matrix from equally sized blocks.
pub fn block2(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> CMat {
    let (r0, c0) = tl.shape();
    let (r1, c1) = br.shape();
    let mut out = CMat::zeros(r0 + r1, c0 + c1);
    out.view_mut((0, 0), (r0, c0)).copy_from(tl);
    out.view_mut((0, c0), (r0, c1)).copy_from(tr);
    out.view_mut((r0, 0), (r1, c0)).copy_from(bl);
    out.view_mut((r0, c0), (r1, c1)).copy_from(br);
    out
}

pub fn block(m: &CMat, row: usize, col: usize, nrows: usize, ncols: usize) -> CMat {
    m.view((row, col), (nrows, ncols)).into_owned()
}

/// Index of the entry with largest modulus; first index wins ties.
pub fn argmax_abs<'a>(entries: impl Iterator<Item = &'a Complex64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, z) in entries.enumerate() {
        let a = z.norm();
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((i, a));
        }
    }
    best.map(|(i, _)| i)
}

/// Rotate column `j` so that its largest-modulus entry is real positive.
pub fn fix_column_phase(m: &mut CMat, j: usize) {
    if let Some(k) = argmax_abs(m.column(j).iter()) {
        let z = m[(k, j)];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for i in 0..m.nrows() {
                m[(i, j)] *= phase;
            }
            m[(k, j)] = Complex64::new(m[(k, j)].re, 0.0);
        }
    }
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}
