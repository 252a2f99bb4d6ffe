//! Exact feature-combination (PVC) census of an encoded dataset.

use std::collections::HashMap;

use crate::analytic::{fit_power_law, LeafSizeHistogram};
use crate::pipeline::EncodedDataset;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PvcCensus {
    /// Number of distinct full feature combinations.
    pub distinct: usize,
    pub max_size: u64,
    /// Proportion of rows sitting in combinations seen fewer than 100 times.
    pub mass_below_100: f64,
    /// Discrete MLE exponent over the combination sizes; absent when the
    /// fit is degenerate (all sizes equal).
    pub fitted_exponent: Option<f64>,
    pub histogram: LeafSizeHistogram,
}

/// Group rows by their full encoded feature vector and histogram the
/// resulting combination sizes.
pub fn pvc_size_census(data: &EncodedDataset) -> PvcCensus {
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    for r in 0..data.n_rows() {
        *counts.entry(data.row(r)).or_insert(0) += 1;
    }
    let sizes: Vec<u64> = counts.values().copied().collect();
    let histogram = LeafSizeHistogram::from_leaf_sizes(&sizes).expect("dataset is nonempty");
    let mass_below_100 = histogram
        .bins()
        .iter()
        .filter(|&&(size, _)| size < 100)
        .map(|&(_, p)| p)
        .sum();
    PvcCensus {
        distinct: sizes.len(),
        max_size: sizes.iter().copied().max().unwrap_or(0),
        mass_below_100,
        fitted_exponent: fit_power_law(&sizes).ok(),
        histogram,
    }
}
