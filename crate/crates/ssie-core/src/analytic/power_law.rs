//! Power-law leaf-size distributions: construction, sampling, histograms
//! over observed sizes, and discrete maximum-likelihood exponent fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const PROPORTION_SUM_TOL: f64 = 1e-9;

/// Normalized probability weights proportional to `1 / F^X` over integer
/// sizes `F = 1..=max_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafSizeDistribution {
    exponent: f64,
    max_size: u64,
    weights: Vec<f64>,
}

impl LeafSizeDistribution {
    pub fn power_law(exponent: f64, max_size: u64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power-law exponent must be positive and finite, got {exponent}"
            )));
        }
        if max_size < 1 {
            return Err(Error::InvalidArgument(
                "power-law support needs max size >= 1".into(),
            ));
        }
        let raw: Vec<f64> = (1..=max_size)
            .map(|f| (f as f64).powf(-exponent))
            .collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        Ok(Self {
            exponent,
            max_size,
            weights,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn max_size(&self) -> u64 {
        self.max_size
    }

    /// Normalized weight of size `f` (1-based); zero outside the support.
    pub fn weight(&self, f: u64) -> f64 {
        if f == 0 || f > self.max_size {
            0.0
        } else {
            self.weights[f as usize - 1]
        }
    }

    /// Iterate `(size, weight)` pairs over the support.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i as u64 + 1, w))
    }

    /// Draw `count` sizes by inverse-CDF sampling; deterministic per seed.
    pub fn sample_sizes(&self, count: usize, seed: u64) -> Vec<u64> {
        let mut cdf = Vec::with_capacity(self.weights.len());
        let mut run = 0.0;
        for &w in &self.weights {
            run += w;
            cdf.push(run);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                    Ok(i) | Err(i) => (i as u64 + 1).min(self.max_size),
                }
            })
            .collect()
    }
}

/// Observed leaf sizes paired with the proportion of the population that
/// sits in leaves of each size.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LeafSizeHistogram {
    bins: Vec<(u64, f64)>,
}

impl LeafSizeHistogram {
    /// Build from explicit `(size, proportion)` bins. Sizes must be
    /// positive and unique; proportions must sum to 1 within 1e-9.
    pub fn new(mut bins: Vec<(u64, f64)>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidArgument("empty leaf-size histogram".into()));
        }
        bins.sort_by_key(|&(size, _)| size);
        for window in bins.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate leaf size {} in histogram",
                    window[0].0
                )));
            }
        }
        let mut total = 0.0;
        for &(size, p) in &bins {
            if size == 0 {
                return Err(Error::InvalidArgument("leaf size 0 in histogram".into()));
            }
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::InvalidArgument(format!(
                    "histogram proportion {p} outside [0, 1]"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROPORTION_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "histogram proportions sum to {total}, expected 1"
            )));
        }
        Ok(Self { bins })
    }

    /// Build from a list of per-leaf sizes. The proportion of a size `i`
    /// is mass-weighted: `i * (number of leaves of size i) / total rows`.
    /// Zero-sized entries are rejected.
    pub fn from_leaf_sizes(sizes: &[u64]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot build a histogram from no leaves".into(),
            ));
        }
        let mut counts: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        let mut total: u64 = 0;
        for &s in sizes {
            if s == 0 {
                return Err(Error::InvalidArgument("leaf of size 0".into()));
            }
            *counts.entry(s).or_insert(0) += 1;
            total += s;
        }
        let bins = counts
            .into_iter()
            .map(|(size, n)| (size, (size * n) as f64 / total as f64))
            .collect();
        Ok(Self { bins })
    }

    /// A histogram with all mass at one size.
    pub fn singleton(size: u64) -> Result<Self> {
        Self::new(vec![(size, 1.0)])
    }

    pub fn bins(&self) -> &[(u64, f64)] {
        &self.bins
    }

    /// SHA-256 over the canonical `size:proportion` listing, used to make
    /// audit rows traceable to the exact histogram behind them.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for &(size, p) in &self.bins {
            hasher.update(size.to_le_bytes());
            hasher.update(p.to_le_bytes());
        }
        hex_string(&hasher.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Discrete maximum-likelihood power-law exponent with minimum size fixed
/// at 1 and the normalizer truncated at the largest observed size.
///
/// Maximizes `-X * sum(ln s_i) - n * ln(sum_{F=1}^{Fmax} F^-X)` by golden-
/// section search; the profile is strictly concave in `X`, so the interior
/// maximum is unique when one exists. All-identical sizes have no interior
/// maximum and are rejected as degenerate.
pub fn fit_power_law(sizes: &[u64]) -> Result<f64> {
    if sizes.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 observations, got {}",
            sizes.len()
        )));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidArgument("size 0 in power-law fit".into()));
    }
    let first = sizes[0];
    if sizes.iter().all(|&s| s == first) {
        return Err(Error::DegenerateFit(format!(
            "all {} observed sizes equal {}; exponent is unidentifiable",
            sizes.len(),
            first
        )));
    }

    let max = *sizes.iter().max().expect("nonempty");
    let sum_ln: f64 = sizes.iter().map(|&s| (s as f64).ln()).sum();
    let n = sizes.len() as f64;
    let log_likelihood = |x: f64| -> f64 {
        let z: f64 = (1..=max).map(|f| (f as f64).powf(-x)).sum();
        -x * sum_ln - n * z.ln()
    };

    // Golden-section search for the maximum on a bracket wide enough for
    // any plausible leaf-size data.
    let (mut lo, mut hi) = (1e-3, 25.0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = log_likelihood(a);
    let mut fb = log_likelihood(b);
    while hi - lo > 1e-7 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = log_likelihood(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = log_likelihood(a);
        }
    }
    Ok((lo + hi) / 2.0)
}
