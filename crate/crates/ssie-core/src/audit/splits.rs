//! Candidate subset splits: one per encoded predictor feature, filtered so
//! every surviving split has a usable minority side.

use crate::pipeline::{EncodedDataset, FeatureRole};

/// Minimum minority-side size for a split to be considered realistic.
pub const MIN_MINORITY_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSide {
    pub feature_value: u8,
    pub rows: Vec<usize>,
    pub target_count: u64,
    /// Target rate Tr of the side.
    pub target_rate: f64,
}

/// A dataset partition by one binary feature. `sides[v]` holds the rows
/// with feature value `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSplit {
    pub id: usize,
    pub feature: usize,
    pub feature_name: String,
    pub sides: [SplitSide; 2],
    /// Feature value of the smaller side (ties go to value 1).
    pub minority_value: u8,
}

impl SubsetSplit {
    pub fn minority(&self) -> &SplitSide {
        &self.sides[self.minority_value as usize]
    }

    pub fn majority(&self) -> &SplitSide {
        &self.sides[1 - self.minority_value as usize]
    }
}

/// One candidate split per predictor feature (group and target columns are
/// not splitting features), keeping only splits whose minority side has at
/// least [`MIN_MINORITY_SIZE`] rows and whose sides both contain target
/// occurrences.
pub fn enumerate_splits(data: &EncodedDataset) -> Vec<SubsetSplit> {
    let mut out = Vec::new();
    for feature in 0..data.n_features() {
        if data.role(feature) == FeatureRole::Group {
            continue;
        }
        let mut rows: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let mut targets = [0u64; 2];
        for r in 0..data.n_rows() {
            let v = data.value(r, feature) as usize;
            rows[v].push(r);
            targets[v] += data.target()[r] as u64;
        }
        let minority_value = u8::from(rows[1].len() <= rows[0].len());
        if rows[minority_value as usize].len() < MIN_MINORITY_SIZE {
            continue;
        }
        if targets[0] == 0 || targets[1] == 0 {
            continue;
        }
        let [rows0, rows1] = rows;
        let side = |value: u8, rows: Vec<usize>, target_count: u64| SplitSide {
            feature_value: value,
            target_rate: target_count as f64 / rows.len() as f64,
            target_count,
            rows,
        };
        out.push(SubsetSplit {
            id: out.len(),
            feature,
            feature_name: data.feature_names()[feature].clone(),
            sides: [side(0, rows0, targets[0]), side(1, rows1, targets[1])],
            minority_value,
        });
    }
    out
}
