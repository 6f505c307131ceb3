//! Outcome probabilities, enumeration over a truncated count lattice,
//! marginals, seeded sampling and a chi-square goodness-of-fit check.
//!
//! The probability of counts `m = (N, q)` with `n = Σ m_j` is
//!
//! ```text
//! ρ(m) = haf C̃(m) / (√det(1+G) · Π m_j!)
//! ```
//!
//! Sampling draws by inverse CDF over the enumerated outcomes in
//! lexicographic order. The generator is ChaCha20 (`rand_chacha`), seeded
//! with `seed_from_u64(seed)`; draws are grouped into batches of
//! [`SAMPLE_BATCH`] and batch `b` uses stream `b` of that generator, so the
//! output is independent of how batches are spread over threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::gaussian::{extend_matrix, CountsVector, GaussianState};
use crate::hafnian::{
    self, RepeatedHafnianTable, SymmetricMatrix, REPEATED_MATCHING_MAX_STATES, REPEATED_MAX_DIM,
    REPEATED_MAX_SUBSETS, TABLE_MAX_STATES,
};
use crate::tol::Tolerances;

/// Largest lattice `(K+1)^M` that [`enumerate_distribution`] will visit.
pub const MAX_LATTICE: u64 = 1_000_000;
/// Draws per independently seeded batch.
pub const SAMPLE_BATCH: usize = 1024;
/// Minimum expected count per chi-square bucket.
pub const MIN_EXPECTED: f64 = 20.0;
/// Significance level of the chi-square check.
pub const CHI_SQUARE_ALPHA: f64 = 0.01;

/// Hafnian of the extended matrix: the memoized matching sum when its table
/// fits, otherwise the repeated power-trace sum, otherwise the plain one.
fn extended_hafnian(
    base: &SymmetricMatrix,
    counts: &CountsVector,
) -> Result<num_complex::Complex64> {
    if hafnian::repeated_matching_states(counts.as_slice()) <= REPEATED_MATCHING_MAX_STATES {
        return hafnian::hafnian_repeated_matching(base, counts.as_slice());
    }
    let dim = 2 * counts.total();
    let subsets: u64 = counts.as_slice().iter().map(|&k| k as u64 + 1).product();
    if dim <= REPEATED_MAX_DIM && subsets <= REPEATED_MAX_SUBSETS {
        return hafnian::hafnian_repeated(base, counts.as_slice());
    }
    let ext = SymmetricMatrix::new(extend_matrix(base.as_matrix(), counts)?)?;
    hafnian::hafnian_powertrace(&ext)
}

/// Probability before the negativity clamp; `Ok(p)` may be slightly negative.
fn raw_probability(
    state: &GaussianState,
    base: &SymmetricMatrix,
    counts: &CountsVector,
    tol: &Tolerances,
) -> Result<f64> {
    if counts.len() != state.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} modes",
            counts.len(),
            state.modes()
        )));
    }
    let haf = extended_hafnian(base, counts)?;
    probability_from_hafnian(state, haf, counts, tol)
}

fn probability_from_hafnian(
    state: &GaussianState,
    haf: num_complex::Complex64,
    counts: &CountsVector,
    tol: &Tolerances,
) -> Result<f64> {
    // Near-zero probabilities have no meaningful relative phase, hence the
    // absolute floor next to the relative bound.
    if haf.im.abs() > tol.imaginary * haf.re.abs() + 1e-12 {
        return Err(Error::ImaginaryResidual {
            real: haf.re,
            imag: haf.im,
        });
    }
    Ok(haf.re / (state.normalization() * counts.factorial_product()))
}

fn clamp(p: f64, counts: &CountsVector, tol: &Tolerances) -> Result<(f64, bool)> {
    if p >= 0.0 {
        Ok((p, false))
    } else if p >= -tol.negative_clamp {
        log::debug!("clamping probability {p:e} of outcome ({counts}) to zero");
        Ok((0.0, true))
    } else {
        Err(Error::NegativeProbability(p))
    }
}

pub fn outcome_probability(state: &GaussianState, counts: &CountsVector) -> Result<f64> {
    outcome_probability_with(state, counts, &Tolerances::default())
}

pub fn outcome_probability_with(
    state: &GaussianState,
    counts: &CountsVector,
    tol: &Tolerances,
) -> Result<f64> {
    let base = SymmetricMatrix::new(state.c.clone())?;
    let p = raw_probability(state, &base, counts, tol)?;
    Ok(clamp(p, counts, tol)?.0)
}

/// Probabilities over a truncated lattice of counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    /// Per-mode cutoff `K`.
    pub cutoff: u32,
    /// Original indices of the modes present in each counts vector.
    pub modes: Vec<usize>,
    /// Number of atom modes among `modes` (they come first).
    pub m_a: usize,
    pub probabilities: BTreeMap<CountsVector, f64>,
    pub captured_mass: f64,
    /// SHA-256 of the state's `G` and `T`.
    pub fingerprint: String,
    /// Number of tiny negative probabilities set to zero.
    pub clamped: usize,
}

impl OutcomeDistribution {
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn m_ph(&self) -> usize {
        self.modes.len() - self.m_a
    }

    pub fn probability(&self, counts: &CountsVector) -> Option<f64> {
        self.probabilities.get(counts).copied()
    }

    /// `Σ m_j ρ(m)` over the lattice, per mode.
    pub fn means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.mode_count()];
        for (counts, &p) in &self.probabilities {
            for (mean, &k) in means.iter_mut().zip(counts.as_slice()) {
                *mean += k as f64 * p;
            }
        }
        means
    }

    /// Count covariance `⟨m_i m_j⟩ − ⟨m_i⟩⟨m_j⟩`, renormalized by the
    /// captured mass.
    pub fn count_covariance(&self, i: usize, j: usize) -> f64 {
        let (mut mi, mut mj, mut mij) = (0.0, 0.0, 0.0);
        for (counts, &p) in &self.probabilities {
            let (a, b) = (counts.as_slice()[i] as f64, counts.as_slice()[j] as f64);
            mi += a * p;
            mj += b * p;
            mij += a * b * p;
        }
        let z = self.captured_mass;
        mij / z - (mi / z) * (mj / z)
    }
}

fn lattice_size(cutoff: u32, modes: usize) -> Option<u64> {
    (cutoff as u64 + 1).checked_pow(modes as u32)
}

/// Every counts vector with entries `≤ K`, in lexicographic order.
fn lattice(
    cutoff: u32,
    modes: usize,
    total: u64,
) -> impl IndexedParallelIterator<Item = CountsVector> {
    let radix = cutoff as u64 + 1;
    (0..total as usize).into_par_iter().map(move |linear| {
        let mut linear = linear as u64;
        let mut counts = vec![0u32; modes];
        for slot in counts.iter_mut().rev() {
            *slot = (linear % radix) as u32;
            linear /= radix;
        }
        CountsVector(counts)
    })
}

/// Whether every outcome of the `(K+1)^M` lattice has an exact hafnian
/// route within budget. The corner `(K, ..., K)` is the most expensive one.
pub fn cutoff_supported(modes: usize, cutoff: u32) -> bool {
    let corner = vec![cutoff; modes];
    let subsets: u64 = corner.iter().map(|&k| k as u64 + 1).product();
    let dim = 2 * cutoff as usize * modes;
    hafnian::table_states(modes, cutoff) <= TABLE_MAX_STATES
        || hafnian::repeated_matching_states(&corner) <= REPEATED_MATCHING_MAX_STATES
        || (dim <= REPEATED_MAX_DIM && subsets <= REPEATED_MAX_SUBSETS)
        || dim <= hafnian::POWERTRACE_MAX_DIM
}

pub fn enumerate_distribution(state: &GaussianState, cutoff: u32) -> Result<OutcomeDistribution> {
    enumerate_distribution_with(state, cutoff, &Tolerances::default())
}

pub fn enumerate_distribution_with(
    state: &GaussianState,
    cutoff: u32,
    tol: &Tolerances,
) -> Result<OutcomeDistribution> {
    let m = state.modes();
    let total = match lattice_size(cutoff, m) {
        Some(t) if t <= MAX_LATTICE => t,
        _ => {
            return Err(Error::Budget(format!(
                "lattice (K+1)^M = {}^{} exceeds {MAX_LATTICE} outcomes; lower the cutoff K or the mode count M",
                cutoff as u64 + 1,
                m
            )))
        }
    };
    if !cutoff_supported(m, cutoff) {
        return Err(Error::Budget(format!(
            "cutoff {cutoff} over {m} modes needs hafnians of {0}×{0} extended matrices, beyond every exact route",
            2 * cutoff as usize * m
        )));
    }
    let base = SymmetricMatrix::new(state.c.clone())?;
    let evaluated: Vec<(CountsVector, f64, bool)> =
        if hafnian::table_states(m, cutoff) <= TABLE_MAX_STATES {
            // One bottom-up table holds the hafnian of every outcome.
            let table = RepeatedHafnianTable::new(&base, cutoff)?;
            lattice(cutoff, m, total)
                .map(|counts| {
                    let haf = table
                        .get(counts.as_slice())
                        .expect("counts within the cutoff");
                    let p = probability_from_hafnian(state, haf, &counts, tol)?;
                    let (p, clamped) = clamp(p, &counts, tol)?;
                    Ok((counts, p, clamped))
                })
                .collect::<Result<_>>()?
        } else {
            lattice(cutoff, m, total)
                .map(|counts| {
                    let p = raw_probability(state, &base, &counts, tol)?;
                    let (p, clamped) = clamp(p, &counts, tol)?;
                    Ok((counts, p, clamped))
                })
                .collect::<Result<_>>()?
        };
    let clamped = evaluated.iter().filter(|e| e.2).count();
    if clamped > 0 {
        log::info!("clamped {clamped} tiny negative probabilities to zero");
    }
    let captured_mass = evaluated.iter().map(|e| e.1).sum();
    Ok(OutcomeDistribution {
        cutoff,
        modes: (0..m).collect(),
        m_a: state.m_a,
        probabilities: evaluated.into_iter().map(|(c, p, _)| (c, p)).collect(),
        captured_mass,
        fingerprint: state.fingerprint(),
        clamped,
    })
}

/// Sum out every mode not listed in `keep` (positions within `dist`).
pub fn marginalize(dist: &OutcomeDistribution, keep: &[usize]) -> Result<OutcomeDistribution> {
    if keep.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&k| k >= dist.mode_count()) {
        return Err(Error::DimensionMismatch(format!(
            "mode {bad} out of range for {} modes",
            dist.mode_count()
        )));
    }
    let mut probabilities = BTreeMap::new();
    for (counts, &p) in &dist.probabilities {
        let key = CountsVector(sorted.iter().map(|&k| counts.as_slice()[k]).collect());
        *probabilities.entry(key).or_insert(0.0) += p;
    }
    Ok(OutcomeDistribution {
        cutoff: dist.cutoff,
        modes: sorted.iter().map(|&k| dist.modes[k]).collect(),
        m_a: sorted.iter().filter(|&&k| k < dist.m_a).count(),
        probabilities,
        captured_mass: dist.captured_mass,
        fingerprint: dist.fingerprint.clone(),
        clamped: dist.clamped,
    })
}

/// Keep only the photon modes.
pub fn photon_marginal(dist: &OutcomeDistribution) -> Result<OutcomeDistribution> {
    let keep: Vec<usize> = (dist.m_a..dist.mode_count()).collect();
    marginalize(dist, &keep)
}

/// Draw `n` outcomes with the default truncation threshold.
pub fn sample(dist: &OutcomeDistribution, n: usize, seed: u64) -> Result<Vec<CountsVector>> {
    sample_with(dist, n, seed, &Tolerances::default())
}

pub fn sample_with(
    dist: &OutcomeDistribution,
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<CountsVector>> {
    if !(dist.captured_mass > tol.min_captured_mass) {
        return Err(Error::Truncation {
            captured_mass: dist.captured_mass,
            required: tol.min_captured_mass,
        });
    }
    let outcomes: Vec<&CountsVector> = dist.probabilities.keys().collect();
    let mut cdf = Vec::with_capacity(outcomes.len());
    let mut running = 0.0;
    for p in dist.probabilities.values() {
        running += p;
        cdf.push(running);
    }
    let batches = n.div_ceil(SAMPLE_BATCH);
    let drawn: Vec<Vec<CountsVector>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = SAMPLE_BATCH.min(n - b * SAMPLE_BATCH);
            (0..len)
                .map(|_| {
                    let u: f64 = rng.random::<f64>() * running;
                    let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                    outcomes[i].clone()
                })
                .collect()
        })
        .collect();
    Ok(drawn.into_iter().flatten().collect())
}

/// Pearson goodness-of-fit result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub buckets: usize,
    pub pass: bool,
}

/// Compare samples against the enumerated probabilities. Outcomes expected
/// fewer than [`MIN_EXPECTED`] times are pooled into one bucket.
pub fn chi_square(dist: &OutcomeDistribution, samples: &[CountsVector]) -> Result<ChiSquareReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples("no samples".into()));
    }
    let mut observed: BTreeMap<&CountsVector, u64> = BTreeMap::new();
    for s in samples {
        if !dist.probabilities.contains_key(s) {
            return Err(Error::UnknownOutcome(s.to_string()));
        }
        *observed.entry(s).or_insert(0) += 1;
    }
    let n = samples.len() as f64;
    let mut buckets: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_expected, mut pooled_observed) = (0.0, 0.0);
    for (counts, &p) in &dist.probabilities {
        let expected = n * p / dist.captured_mass;
        let seen = observed.get(counts).copied().unwrap_or(0) as f64;
        if expected >= MIN_EXPECTED {
            buckets.push((expected, seen));
        } else {
            pooled_expected += expected;
            pooled_observed += seen;
        }
    }
    if pooled_expected >= MIN_EXPECTED {
        buckets.push((pooled_expected, pooled_observed));
    } else if let Some(smallest) = buckets.iter_mut().min_by(|a, b| a.0.total_cmp(&b.0)) {
        smallest.0 += pooled_expected;
        smallest.1 += pooled_observed;
    }
    if buckets.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "{} samples leave {} bucket(s) with ≥ {MIN_EXPECTED} expected counts; at least 2 are needed",
            samples.len(),
            buckets.len()
        )));
    }
    let statistic: f64 = buckets.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
    let dof = buckets.len() - 1;
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::InsufficientSamples(e.to_string()))?;
    let p_value = law.sf(statistic);
    Ok(ChiSquareReport {
        statistic,
        dof,
        p_value,
        buckets: buckets.len(),
        pass: p_value > CHI_SQUARE_ALPHA,
    })
}

/// Suggested per-mode cutoff: ten times the largest mean occupation, at least 1.
pub fn recommend_cutoff(state: &GaussianState) -> u32 {
    let max_mean = state.mean_occupations().into_iter().fold(0.0, f64::max);
    (10.0 * max_mean).ceil().max(1.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::from_covariance;
    use crate::linalg::CMat;
    use num_complex::Complex64;

    fn thermal(n_bars: &[f64]) -> GaussianState {
        let m = n_bars.len();
        let g = CMat::from_fn(2 * m, 2 * m, |i, j| {
            if i == j {
                Complex64::new(n_bars[i % m], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        from_covariance(g, 1.0, m, 0, &Tolerances::default()).unwrap()
    }

    fn bose(n_bar: f64, k: u32) -> f64 {
        n_bar.powi(k as i32) / (1.0 + n_bar).powi(k as i32 + 1)
    }

    #[test]
    fn thermal_probabilities_follow_bose_einstein() {
        let state = thermal(&[1.0]);
        for (k, expected) in [(0, 0.5), (1, 0.25), (2, 0.125)] {
            let p = outcome_probability(&state, &CountsVector(vec![k])).unwrap();
            assert!((p - expected).abs() < 1e-14, "{k}: {p}");
        }
    }

    #[test]
    fn thermal_captured_mass_is_geometric_tail() {
        let dist = enumerate_distribution(&thermal(&[1.0]), 10).unwrap();
        assert!((dist.captured_mass - (1.0 - 2f64.powi(-11))).abs() < 1e-9);
        assert_eq!(dist.probabilities.len(), 11);
        assert_eq!(dist.clamped, 0);
    }

    #[test]
    fn vacuum_has_a_single_outcome() {
        let dist = enumerate_distribution(&thermal(&[0.0, 0.0]), 3).unwrap();
        assert!((dist.captured_mass - 1.0).abs() < 1e-15);
        assert_eq!(dist.probability(&CountsVector(vec![0, 0])), Some(1.0));
        let samples = sample(&dist, 100, 7).unwrap();
        assert!(samples.iter().all(|s| s.total() == 0));
    }

    #[test]
    fn product_marginal_is_single_mode_form() {
        let dist = enumerate_distribution(&thermal(&[0.4, 1.5]), 12).unwrap();
        let first = marginalize(&dist, &[0]).unwrap();
        for k in 0..=12 {
            // Summing over the truncated second mode scales by its captured mass.
            let tail = 1.0 - (1.5f64 / 2.5).powi(13);
            let expected = bose(0.4, k) * tail;
            let got = first.probability(&CountsVector(vec![k])).unwrap();
            assert!((got - expected).abs() < 1e-12, "{k}: {got} vs {expected}");
        }
        assert_eq!(
            marginalize(&dist, &[0, 1]).unwrap().probabilities,
            dist.probabilities
        );
        assert!(matches!(
            marginalize(&dist, &[]),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn budget_errors_name_the_lattice() {
        let err = enumerate_distribution(&thermal(&[0.1; 6]), 10).unwrap_err();
        assert!(err.to_string().contains("(K+1)^M"), "{err}");
    }

    #[test]
    fn truncated_distributions_refuse_to_sample() {
        let dist = enumerate_distribution(&thermal(&[5.0]), 3).unwrap();
        assert!(matches!(
            sample(&dist, 10, 1),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn sampling_is_seed_deterministic_and_calibrated() {
        let dist = enumerate_distribution(&thermal(&[1.0]), 30).unwrap();
        let a = sample(&dist, 100_000, 42).unwrap();
        let b = sample(&dist, 100_000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(&dist, 100_000, 43).unwrap());
        let mean = a.iter().map(|s| s.as_slice()[0] as f64).sum::<f64>() / a.len() as f64;
        let sigma = (2.0f64 / 1e5).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn chi_square_detects_a_perturbed_distribution() {
        let dist = enumerate_distribution(&thermal(&[1.0]), 30).unwrap();
        let samples = sample(&dist, 100_000, 5).unwrap();
        assert!(chi_square(&dist, &samples).unwrap().pass);

        let mut perturbed = dist.clone();
        *perturbed
            .probabilities
            .get_mut(&CountsVector(vec![1]))
            .unwrap() *= 1.2;
        perturbed.captured_mass = perturbed.probabilities.values().sum();
        let wrong = sample(&perturbed, 100_000, 5).unwrap();
        assert!(!chi_square(&dist, &wrong).unwrap().pass);
    }

    #[test]
    fn chi_square_input_errors() {
        let dist = enumerate_distribution(&thermal(&[1.0]), 10).unwrap();
        assert!(matches!(
            chi_square(&dist, &[]),
            Err(Error::InsufficientSamples(_))
        ));
        let stray = [CountsVector(vec![11])];
        assert!(matches!(
            chi_square(&dist, &stray),
            Err(Error::UnknownOutcome(_))
        ));
        let few = [CountsVector(vec![0])];
        assert!(matches!(
            chi_square(&dist, &few),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn cutoff_recommendation_scales_with_occupation() {
        assert_eq!(recommend_cutoff(&thermal(&[0.0])), 1);
        assert_eq!(recommend_cutoff(&thermal(&[0.25, 1.04])), 11);
    }
}
