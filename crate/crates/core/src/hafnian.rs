//! Exact hafnians of complex symmetric matrices.
//!
//! Two independent algorithms:
//!
//! * [`hafnian_naive`] sums over all perfect matchings, `(2n−1)!!` terms.
//! * [`hafnian_powertrace`] uses the inclusion–exclusion formula
//!   `haf A = Σ_{S ⊆ [n]} (−1)^{n−|S|} [λⁿ] det(I − λ (AX)_S)^{−1/2}`, where
//!   index `i` is paired with `i + n`, `X` swaps the two halves and `(AX)_S`
//!   keeps the rows/columns of the pairs in `S`. Each term costs one
//!   Hessenberg reduction and a La Budde characteristic polynomial, so the
//!   whole sum is `O(2ⁿ n³)`.
//!
//! [`hafnian_repeated`] evaluates the same formula for a matrix whose pairs
//! come in identical copies (the extended matrices of the count
//! distribution): subsets are then counted by multiplicity, with binomial
//! weights, instead of enumerated.
//!
//! [`hafnian_repeated_matching`] is the matching sum for the same repeated
//! structure, memoized over the remaining multiplicity of every row. It sums
//! products only, so it keeps full precision where the alternating
//! inclusion–exclusion sum cancels (large count totals of nearly thermal
//! states), at a cost of `Π (m_j + 1)²` states.
//!
//! Subset sums are split into fixed-size chunks, each accumulated with
//! Neumaier compensation, and the chunk totals are combined in a fixed
//! pairwise tree. The split does not depend on the number of worker threads,
//! so results are bitwise reproducible under any rayon pool.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Largest dimension accepted by the matching sum.
pub const NAIVE_MAX_DIM: usize = 16;
/// Largest dimension accepted by the power-trace sum.
pub const POWERTRACE_MAX_DIM: usize = 32;
/// Dispatch threshold: at or below this dimension [`hafnian`] uses the matching sum.
pub const DISPATCH_NAIVE_MAX_DIM: usize = 8;
/// Largest dimension accepted by the repeated-row sum.
pub const REPEATED_MAX_DIM: usize = 64;
/// Largest number of distinct subsets the repeated-row sum will visit.
pub const REPEATED_MAX_SUBSETS: u64 = 1 << 16;
/// Largest memo table the repeated matching sum will allocate.
pub const REPEATED_MATCHING_MAX_STATES: u64 = 1 << 20;
/// Largest table [`RepeatedHafnianTable`] will allocate.
pub const TABLE_MAX_STATES: u64 = 1 << 22;
/// Asymmetry tolerated on construction.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

const CHUNK: u64 = 256;

/// A square, even-dimensional, complex symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: CMat,
    residual: f64,
}

impl SymmetricMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "hafnian needs a square matrix, got {:?}",
                m.shape()
            )));
        }
        if !m.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "hafnian needs an even dimension, got {}",
                m.nrows()
            )));
        }
        let residual = linalg::symmetry_residual(&m);
        if residual > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric("hafnian input", residual));
        }
        Ok(Self { m, residual })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.m
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.residual
    }
}

fn matching_sum(a: &CMat, unmatched: u32) -> Complex64 {
    if unmatched == 0 {
        return ONE;
    }
    let i = unmatched.trailing_zeros() as usize;
    let rest = unmatched & !(1 << i);
    let mut total = ZERO;
    let mut candidates = rest;
    while candidates != 0 {
        let j = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        let w = a[(i, j)];
        if w != ZERO {
            total += w * matching_sum(a, rest & !(1 << j));
        }
    }
    total
}

/// Sum over perfect matchings.
pub fn hafnian_naive(x: &SymmetricMatrix) -> Result<Complex64> {
    let dim = x.dim();
    if dim > NAIVE_MAX_DIM {
        return Err(Error::HafnianSize {
            dim,
            max: NAIVE_MAX_DIM,
            method: "matching-sum",
        });
    }
    let all = if dim == 0 { 0 } else { (1u32 << dim) - 1 };
    Ok(matching_sum(x.as_matrix(), all))
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexAccumulator {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexAccumulator {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => ZERO,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Reduce a dense row-major `dim × dim` matrix to upper Hessenberg form by
/// Householder similarity transforms.
fn hessenberg_in_place(a: &mut [Complex64], dim: usize, v: &mut Vec<Complex64>) {
    if dim < 3 {
        return;
    }
    for k in 0..dim - 2 {
        let len = dim - k - 1;
        v.clear();
        v.extend((0..len).map(|r| a[(k + 1 + r) * dim + k]));
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let head = v[0];
        let alpha = if head.norm() > 0.0 {
            -(head / head.norm()) * norm
        } else {
            Complex64::new(-norm, 0.0)
        };
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Left: rows k+1.. ← (I − 2vv†) rows.
        for col in 0..dim {
            let mut dot = ZERO;
            for r in 0..len {
                dot += v[r].conj() * a[(k + 1 + r) * dim + col];
            }
            let dot2 = 2.0 * dot;
            for r in 0..len {
                a[(k + 1 + r) * dim + col] -= v[r] * dot2;
            }
        }
        // Right: columns k+1.. ← columns (I − 2vv†).
        for row in 0..dim {
            let base = row * dim + k + 1;
            let mut dot = ZERO;
            for r in 0..len {
                dot += a[base + r] * v[r];
            }
            let dot2 = 2.0 * dot;
            for r in 0..len {
                a[base + r] -= dot2 * v[r].conj();
            }
        }
    }
}

/// Reusable buffers for one worker.
#[derive(Default)]
struct Scratch {
    mat: Vec<Complex64>,
    house: Vec<Complex64>,
    polys: Vec<Complex64>,
    series: Vec<Complex64>,
    idx: Vec<usize>,
}

/// `[λⁿ] det(I − λC)^{−1/2}` for the row-major matrix in `scratch.mat`.
fn half_power_coefficient(scratch: &mut Scratch, dim: usize, n: usize) -> Complex64 {
    if n == 0 {
        return ONE;
    }
    if dim == 0 {
        return ZERO;
    }
    hessenberg_in_place(&mut scratch.mat, dim, &mut scratch.house);
    let h = |r: usize, c: usize| scratch.mat[r * dim + c];

    // q_i(λ) = det(I − λ H_i) truncated at degree n, via La Budde's recurrence
    // over the leading principal submatrices of the Hessenberg matrix.
    let width = n + 1;
    let polys = &mut scratch.polys;
    polys.clear();
    polys.resize((dim + 1) * width, ZERO);
    polys[0] = ONE;
    for i in 1..=dim {
        let (done, rest) = polys.split_at_mut(i * width);
        let cur = &mut rest[..width];
        let prev = &done[(i - 1) * width..i * width];
        let hii = h(i - 1, i - 1);
        cur.copy_from_slice(prev);
        for d in 1..width {
            cur[d] -= hii * prev[d - 1];
        }
        let mut beta_prod = ONE;
        for m in 1..i {
            // β_{i−m+1} = h(i−m, i−m−1) in 0-based indexing.
            beta_prod *= h(i - m, i - m - 1);
            if beta_prod == ZERO {
                break;
            }
            let coeff = h(i - m - 1, i - 1) * beta_prod;
            if coeff == ZERO {
                continue;
            }
            let older = &done[(i - m - 1) * width..(i - m) * width];
            for d in (m + 1)..width {
                cur[d] -= coeff * older[d - m - 1];
            }
        }
    }
    let p = &polys[dim * width..(dim + 1) * width];

    // g = p^α with α = −½: k g_k = Σ_{j=1}^{k} ((α+1) j − k) p_j g_{k−j}.
    let series = &mut scratch.series;
    series.clear();
    series.resize(width, ZERO);
    series[0] = ONE;
    for k in 1..width {
        let mut acc = ZERO;
        for j in 1..=k {
            let w = 0.5 * j as f64 - k as f64;
            acc += p[j] * series[k - j] * w;
        }
        series[k] = acc / k as f64;
    }
    series[n]
}

/// Load `(AX)` restricted to `idx` (first half paired with second half).
fn load_swapped(scratch: &mut Scratch, a: &CMat, half: usize) -> usize {
    let dim = 2 * half;
    scratch.mat.clear();
    scratch.mat.resize(dim * dim, ZERO);
    for r in 0..dim {
        let row = scratch.idx[r];
        for c in 0..dim {
            let partner = scratch.idx[(c + half) % dim];
            scratch.mat[r * dim + c] = a[(row, partner)];
        }
    }
    dim
}

fn chunked_sum<F>(total: u64, term: F) -> Complex64
where
    F: Fn(u64, &mut Scratch) -> Complex64 + Sync,
{
    let chunks = total.div_ceil(CHUNK).max(1);
    let chunk_total = |c: u64| {
        let mut scratch = Scratch::default();
        let mut acc = ComplexAccumulator::default();
        let end = ((c + 1) * CHUNK).min(total);
        for s in c * CHUNK..end {
            acc.add(term(s, &mut scratch));
        }
        acc.value()
    };
    let partials: Vec<Complex64> = if chunks == 1 {
        vec![chunk_total(0)]
    } else {
        (0..chunks).into_par_iter().map(chunk_total).collect()
    };
    pairwise_sum(&partials)
}

/// Inclusion–exclusion power-trace hafnian.
pub fn hafnian_powertrace(x: &SymmetricMatrix) -> Result<Complex64> {
    let dim = x.dim();
    if dim > POWERTRACE_MAX_DIM {
        return Err(Error::HafnianSize {
            dim,
            max: POWERTRACE_MAX_DIM,
            method: "power-trace",
        });
    }
    let n = dim / 2;
    if n == 0 {
        return Ok(ONE);
    }
    let a = x.as_matrix();
    let value = chunked_sum(1u64 << n, |mask, scratch| {
        scratch.idx.clear();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                scratch.idx.push(i);
            }
        }
        let s = scratch.idx.len();
        for k in 0..s {
            let i = scratch.idx[k];
            scratch.idx.push(i + n);
        }
        let sub_dim = load_swapped(scratch, a, s);
        let f = half_power_coefficient(scratch, sub_dim, n);
        if (n - s).is_multiple_of(2) {
            f
        } else {
            -f
        }
    });
    Ok(value)
}

/// Matching sum up to [`DISPATCH_NAIVE_MAX_DIM`], power-trace above.
pub fn hafnian(x: &SymmetricMatrix) -> Result<Complex64> {
    if x.dim() <= DISPATCH_NAIVE_MAX_DIM {
        hafnian_naive(x)
    } else {
        hafnian_powertrace(x)
    }
}

/// Index list of the extended matrix: each `j < M` repeated `reps[j]` times,
/// followed by each `M + j` repeated `reps[j]` times.
pub fn extension_indices(reps: &[u32]) -> Vec<usize> {
    let m = reps.len();
    let n: usize = reps.iter().map(|&k| k as usize).sum();
    let mut idx = Vec::with_capacity(2 * n);
    for (j, &k) in reps.iter().enumerate() {
        idx.extend(std::iter::repeat_n(j, k as usize));
    }
    for (j, &k) in reps.iter().enumerate() {
        idx.extend(std::iter::repeat_n(m + j, k as usize));
    }
    idx
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Hafnian of the matrix obtained from the `2M × 2M` base by replicating rows
/// and columns `j` and `M + j` `reps[j]` times each.
pub fn hafnian_repeated(base: &SymmetricMatrix, reps: &[u32]) -> Result<Complex64> {
    let m = base.dim() / 2;
    if reps.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} repetition counts for a base with {m} modes",
            reps.len()
        )));
    }
    let n: usize = reps.iter().map(|&k| k as usize).sum();
    if 2 * n > REPEATED_MAX_DIM {
        return Err(Error::HafnianSize {
            dim: 2 * n,
            max: REPEATED_MAX_DIM,
            method: "repeated power-trace",
        });
    }
    let subsets: u64 = reps.iter().map(|&k| k as u64 + 1).product();
    if subsets > REPEATED_MAX_SUBSETS {
        return Err(Error::Budget(format!(
            "repeated hafnian would visit {subsets} subsets (limit {REPEATED_MAX_SUBSETS})"
        )));
    }
    if n == 0 {
        return Ok(ONE);
    }
    let a = base.as_matrix();
    let value = chunked_sum(subsets, |linear, scratch| {
        let mut rest = linear;
        let mut chosen = [0u32; 64];
        let mut weight = 1.0;
        let mut size = 0usize;
        for (j, &k) in reps.iter().enumerate() {
            let radix = k as u64 + 1;
            let s = (rest % radix) as u32;
            rest /= radix;
            chosen[j] = s;
            weight *= binomial(k, s);
            size += s as usize;
        }
        let sub = extension_indices(&chosen[..m]);
        scratch.idx.clear();
        scratch.idx.extend_from_slice(&sub);
        let sub_dim = load_swapped(scratch, a, size);
        let f = half_power_coefficient(scratch, sub_dim, n) * weight;
        if (n - size).is_multiple_of(2) {
            f
        } else {
            -f
        }
    });
    Ok(value)
}

/// Number of memo states [`hafnian_repeated_matching`] needs for `reps`.
pub fn repeated_matching_states(reps: &[u32]) -> u64 {
    reps.iter()
        .map(|&k| (k as u64 + 1) * (k as u64 + 1))
        .fold(1u64, |acc, x| acc.saturating_mul(x))
}

struct RepeatedMatching<'a> {
    a: &'a CMat,
    /// Multiplicity cap of each of the 2M rows.
    caps: Vec<u32>,
    strides: Vec<usize>,
    memo: Vec<Option<Complex64>>,
}

impl RepeatedMatching<'_> {
    fn eval(&mut self, left: &mut [u32], code: usize) -> Complex64 {
        let Some(i) = left.iter().position(|&r| r > 0) else {
            return ONE;
        };
        if let Some(v) = self.memo[code] {
            return v;
        }
        left[i] -= 1;
        let after_i = code - self.strides[i];
        let mut total = ZERO;
        for k in i..left.len() {
            let copies = left[k];
            if copies == 0 {
                continue;
            }
            let w = self.a[(i, k)];
            if w == ZERO {
                continue;
            }
            left[k] -= 1;
            let sub = self.eval(left, after_i - self.strides[k]);
            left[k] += 1;
            total += w * sub * copies as f64;
        }
        left[i] += 1;
        self.memo[code] = Some(total);
        total
    }
}

/// Same value as [`hafnian_repeated`], by a memoized matching sum.
pub fn hafnian_repeated_matching(base: &SymmetricMatrix, reps: &[u32]) -> Result<Complex64> {
    let m = base.dim() / 2;
    if reps.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} repetition counts for a base with {m} modes",
            reps.len()
        )));
    }
    let states = repeated_matching_states(reps);
    if states > REPEATED_MATCHING_MAX_STATES {
        return Err(Error::Budget(format!(
            "repeated matching sum would need {states} states (limit {REPEATED_MATCHING_MAX_STATES})"
        )));
    }
    let caps: Vec<u32> = reps.iter().chain(reps).copied().collect();
    let mut strides = Vec::with_capacity(caps.len());
    let mut stride = 1usize;
    for &c in &caps {
        strides.push(stride);
        stride *= c as usize + 1;
    }
    let mut left = caps.clone();
    let code = caps
        .iter()
        .zip(&strides)
        .map(|(&c, &s)| c as usize * s)
        .sum();
    let mut solver = RepeatedMatching {
        a: base.as_matrix(),
        caps,
        strides,
        memo: vec![None; stride],
    };
    debug_assert_eq!(solver.caps.len(), 2 * m);
    Ok(solver.eval(&mut left, code))
}

/// Hafnians of every count extension of a base matrix with all counts
/// `≤ K`, filled bottom-up with the same recursion as
/// [`hafnian_repeated_matching`]. Entry `(r, r')` holds the hafnian with `r_j`
/// copies of row `j` and `r'_j` copies of row `M + j`; the count extensions
/// are the entries with `r = r'`.
#[derive(Debug, Clone)]
pub struct RepeatedHafnianTable {
    cutoff: u32,
    modes: usize,
    values: Vec<Complex64>,
}

/// Table size `(K+1)^{2M}`, saturating.
pub fn table_states(modes: usize, cutoff: u32) -> u64 {
    (cutoff as u64 + 1).saturating_pow(2 * modes as u32)
}

impl RepeatedHafnianTable {
    pub fn new(base: &SymmetricMatrix, cutoff: u32) -> Result<Self> {
        let modes = base.dim() / 2;
        let states = table_states(modes, cutoff);
        if states > TABLE_MAX_STATES {
            return Err(Error::Budget(format!(
                "hafnian table needs (K+1)^(2M) = {states} states (limit {TABLE_MAX_STATES})"
            )));
        }
        let a = base.as_matrix();
        let rows = 2 * modes;
        let radix = cutoff as usize + 1;
        let strides: Vec<usize> = (0..rows).map(|t| radix.pow(t as u32)).collect();
        let mut values = vec![ZERO; states as usize];
        values[0] = ONE;
        let mut digits = vec![0u32; rows];
        for code in 1..values.len() {
            // Odometer increment; index 0 is the least significant digit.
            for d in digits.iter_mut() {
                if *d == cutoff {
                    *d = 0;
                } else {
                    *d += 1;
                    break;
                }
            }
            let i = digits.iter().position(|&r| r > 0).expect("code > 0");
            digits[i] -= 1;
            let after_i = code - strides[i];
            let mut total = ZERO;
            for k in i..rows {
                let copies = digits[k];
                if copies == 0 {
                    continue;
                }
                let w = a[(i, k)];
                if w == ZERO {
                    continue;
                }
                total += w * values[after_i - strides[k]] * copies as f64;
            }
            digits[i] += 1;
            values[code] = total;
        }
        Ok(Self {
            cutoff,
            modes,
            values,
        })
    }

    /// Hafnian of the extension by `counts` (each entry `≤ K`).
    pub fn get(&self, counts: &[u32]) -> Option<Complex64> {
        if counts.len() != self.modes || counts.iter().any(|&k| k > self.cutoff) {
            return None;
        }
        let radix = self.cutoff as usize + 1;
        let mut code = 0usize;
        let mut stride = 1usize;
        for &k in counts.iter().chain(counts) {
            code += k as usize * stride;
            stride *= radix;
        }
        Some(self.values[code])
    }
}
