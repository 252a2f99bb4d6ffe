//! Synthetic datasets with controlled PVC structure, used to calibrate and
//! test the audit path against known generating parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::LeafSizeDistribution;
use crate::error::Result;
use crate::pipeline::EncodedDataset;

/// Parameters of a power-law PVC dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Power-law exponent of the PVC size distribution.
    pub pvc_exponent: f64,
    pub max_pvc_size: u64,
    /// Exact number of rows to emit.
    pub rows: usize,
    /// Per-row Bernoulli target probability.
    pub target_rate: f64,
    /// Probability a row lands in the minority group (independent of PVC
    /// and target).
    pub minority_share: f64,
    pub seed: u64,
}

/// Build a dataset whose rows cluster into PVCs with power-law sizes: each
/// PVC gets a distinct binary code over `ceil(log2(#pvcs))` feature
/// columns, plus a `grp=min` group column. Targets are iid Bernoulli.
pub fn power_law_dataset(spec: &SyntheticSpec) -> Result<EncodedDataset> {
    let dist = LeafSizeDistribution::power_law(spec.pvc_exponent, spec.max_pvc_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Draw PVC sizes until they cover the requested row count.
    let mut sizes: Vec<u64> = Vec::new();
    let mut covered = 0usize;
    let mut draw_seed = spec.seed;
    while covered < spec.rows {
        draw_seed = draw_seed.wrapping_add(1);
        for s in dist.sample_sizes(256, draw_seed) {
            let s = s.min((spec.rows - covered) as u64);
            if s == 0 {
                break;
            }
            sizes.push(s);
            covered += s as usize;
            if covered >= spec.rows {
                break;
            }
        }
    }

    let bits = usize::max(1, sizes.len().next_power_of_two().trailing_zeros() as usize);
    let mut feature_names: Vec<String> = (0..bits).map(|b| format!("code{b}=1")).collect();
    feature_names.push("grp=min".to_string());

    let mut rows = Vec::with_capacity(spec.rows);
    let mut target = Vec::with_capacity(spec.rows);
    for (pvc, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let mut row: Vec<u8> = (0..bits).map(|b| ((pvc >> b) & 1) as u8).collect();
            row.push(u8::from(rng.gen::<f64>() < spec.minority_share));
            rows.push(row);
            target.push(u8::from(rng.gen::<f64>() < spec.target_rate));
        }
    }

    EncodedDataset::from_parts("synthetic", feature_names, &["grp=min"], rows, target)
}

/// A dataset whose target is exactly `f0 XOR f1`: perfectly learnable by a
/// depth-2 tree, while each single feature still leaves targets on both of
/// its sides (so subset splits survive the audit filter). The `grp=min`
/// column is random.
pub fn perfectly_separable_dataset(rows: usize, seed: u64) -> Result<EncodedDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = Vec::with_capacity(rows);
    let mut target = Vec::with_capacity(rows);
    for _ in 0..rows {
        let a = u8::from(rng.gen::<f64>() < 0.5);
        let b = u8::from(rng.gen::<f64>() < 0.5);
        let grp = u8::from(rng.gen::<f64>() < 0.4);
        matrix.push(vec![a, b, grp]);
        target.push(a ^ b);
    }
    EncodedDataset::from_parts(
        "separable",
        vec!["f0=1".into(), "f1=1".into(), "grp=min".into()],
        &["grp=min"],
        matrix,
        target,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_exactly_the_requested_rows() {
        let spec = SyntheticSpec {
            pvc_exponent: 2.0,
            max_pvc_size: 200,
            rows: 1500,
            target_rate: 0.2,
            minority_share: 0.3,
            seed: 4,
        };
        let d = power_law_dataset(&spec).unwrap();
        assert_eq!(d.n_rows(), 1500);
        let rate = d.target().iter().map(|&t| t as f64).sum::<f64>() / 1500.0;
        assert!((rate - 0.2).abs() < 0.05, "{rate}");
        let grp = d.feature_index("grp=min").unwrap();
        let minority = (0..d.n_rows()).filter(|&r| d.value(r, grp) == 1).count();
        assert!((minority as f64 / 1500.0 - 0.3).abs() < 0.05);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticSpec {
            pvc_exponent: 1.5,
            max_pvc_size: 100,
            rows: 400,
            target_rate: 0.3,
            minority_share: 0.25,
            seed: 9,
        };
        let a = power_law_dataset(&spec).unwrap();
        let b = power_law_dataset(&spec).unwrap();
        assert_eq!(a.digest(), b.digest());
        let c = power_law_dataset(&SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn pvcs_have_distinct_codes() {
        let spec = SyntheticSpec {
            pvc_exponent: 2.0,
            max_pvc_size: 50,
            rows: 600,
            target_rate: 0.5,
            minority_share: 0.5,
            seed: 1,
        };
        let d = power_law_dataset(&spec).unwrap();
        // Rows sharing a code form one PVC; the code width must cover all.
        let mut codes = std::collections::BTreeSet::new();
        let code_width = d.n_features() - 1;
        for r in 0..d.n_rows() {
            let code: Vec<u8> = d.row(r)[..code_width].to_vec();
            codes.insert(code);
        }
        assert!(codes.len() > 1);
    }

    #[test]
    fn separable_dataset_is_separable() {
        let d = perfectly_separable_dataset(500, 2).unwrap();
        for r in 0..d.n_rows() {
            assert_eq!(d.value(r, 0) ^ d.value(r, 1), d.target()[r]);
        }
    }
}
