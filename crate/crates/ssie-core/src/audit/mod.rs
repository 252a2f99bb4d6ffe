//! The subset audit: enumerate splits, measure observed per-side bias
//! under an evaluation protocol, compute the Tr / ES / ES+Tr predictors,
//! and correlate.

mod census;
mod correlate;
mod evaluate;
mod splits;

pub use census::{pvc_size_census, PvcCensus};
pub use correlate::{correlate, CorrelationCell, CorrelationReport};
pub use evaluate::{evaluate_rows, EvalProtocol, EvaluatedModel, FoldTree};
pub use splits::{enumerate_splits, SplitSide, SubsetSplit, MIN_MINORITY_SIZE};

use crate::analytic::{exponential_spread, exponential_spread_with_target, LeafSizeHistogram};
use crate::error::Result;
use crate::exec;
use crate::pipeline::{EncodedDataset, FeatureRole, GroupTargetTable};
use crate::tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SideLabel {
    Majority = 0,
    Minority = 1,
}

/// One side of one split: observed bias and its predictors.
///
/// `bias` is signed as `(pred - act) / act`, so negative means
/// underprediction; `fall` is the same number with the opposite
/// orientation (positive = underprediction), kept alongside to keep sign
/// conventions out of downstream code.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AuditRow {
    pub split_id: usize,
    pub feature_name: String,
    pub side: SideLabel,
    pub rows: usize,
    /// Predictor Tr: the side's target rate.
    pub target_rate: f64,
    pub predicted_rate: f64,
    pub bias: f64,
    pub fall: f64,
    /// Exponential spread of the side's pooled leaf histogram.
    pub es: f64,
    /// ES with Tr added inside each term (the headline ES+Tr predictor).
    pub es_plus_tr: f64,
    /// Plain additive Tr + ES variant.
    pub tr_plus_es: f64,
    pub histogram_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub tree: TreeParams,
    pub protocol: EvalProtocol,
    /// Re-train and evaluate within each side's rows instead of reading
    /// sides off one dataset-wide model.
    pub per_subset_retrain: bool,
    /// Hide the splitting feature from the trees measuring its split.
    pub exclude_split_feature: bool,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            tree: TreeParams::default(),
            protocol: EvalProtocol::CrossValidation { folds: 5 },
            per_subset_retrain: false,
            exclude_split_feature: false,
            seed: 0,
        }
    }
}

impl AuditConfig {
    /// Protocol descriptor embedded in reports.
    pub fn descriptor(&self) -> String {
        let mut s = self.protocol.descriptor();
        if self.per_subset_retrain {
            s.push_str(", re-trained per subset");
        } else {
            s.push_str(", one dataset-wide model");
        }
        if self.exclude_split_feature {
            s.push_str(", split feature excluded");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AuditReport {
    pub dataset: String,
    pub dataset_digest: String,
    pub source_digest: String,
    pub schema_digest: String,
    pub seed: u64,
    pub protocol: String,
    pub tree_params: TreeParams,
    /// Surviving splits, and sides (two per split) — both counts, since
    /// "number of subsets" is read both ways.
    pub split_count: usize,
    pub side_count: usize,
    pub group_tables: Vec<GroupTargetTable>,
    pub census: PvcCensus,
    pub correlations: CorrelationReport,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat per-side rows.
    pub fn write_rows_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "split_id,feature,side,rows,target_rate,predicted_rate,bias,fall,es,es_plus_tr,tr_plus_es,histogram_digest"
        )?;
        for r in &self.rows {
            let side = match r.side {
                SideLabel::Majority => "maj",
                SideLabel::Minority => "min",
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.split_id,
                r.feature_name,
                side,
                r.rows,
                r.target_rate,
                r.predicted_rate,
                r.bias,
                r.fall,
                r.es,
                r.es_plus_tr,
                r.tr_plus_es,
                r.histogram_digest
            )?;
        }
        Ok(())
    }

    /// One wide row mirroring the correlation-table layout; undefined
    /// cells stay empty.
    pub fn write_correlations_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "data,maj_tr,maj_es_tr,min_tr,min_es_tr,diff_es_tr,full_tr,full_es_tr"
        )?;
        let fmt = |c: CorrelationCell| c.r.map(|v| v.to_string()).unwrap_or_default();
        let c = &self.correlations;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            self.dataset,
            fmt(c.maj_tr),
            fmt(c.maj_es_tr),
            fmt(c.min_tr),
            fmt(c.min_es_tr),
            fmt(c.diff_es_tr),
            fmt(c.full_tr),
            fmt(c.full_es_tr)
        )?;
        Ok(())
    }
}

/// Run the full audit: split enumeration, bias measurement under the
/// configured protocol, predictors, correlations, and the PVC census.
/// Subset measurements run in parallel under the `parallel` feature;
/// reports are byte-identical either way.
pub fn run_audit(data: &EncodedDataset, cfg: &AuditConfig) -> Result<AuditReport> {
    let splits = enumerate_splits(data);
    let all_rows: Vec<usize> = (0..data.n_rows()).collect();

    let measured: Vec<Result<[AuditRow; 2]>> = if cfg.per_subset_retrain {
        exec::map_indexed(splits.len(), |i| measure_retrained(data, &splits[i], cfg))
    } else if cfg.exclude_split_feature {
        // A shared model cannot exclude a per-split feature; re-evaluate
        // the dataset-wide model once per split with the feature masked.
        exec::map_indexed(splits.len(), |i| {
            let split = &splits[i];
            let model = evaluate_rows(
                data,
                &all_rows,
                cfg.protocol,
                &cfg.tree,
                &[split.feature],
                cfg.seed,
            )?;
            Ok(measure_shared(data, split, &model))
        })
    } else {
        let model = evaluate_rows(data, &all_rows, cfg.protocol, &cfg.tree, &[], cfg.seed)?;
        exec::map_indexed(splits.len(), |i| Ok(measure_shared(data, &splits[i], &model)))
    };

    let mut rows = Vec::with_capacity(splits.len() * 2);
    for pair in measured {
        rows.extend(pair?);
    }

    let correlations = correlate(&rows);
    let census = pvc_size_census(data);
    let group_tables = group_tables(data);

    Ok(AuditReport {
        dataset: data.name().to_string(),
        dataset_digest: data.digest(),
        source_digest: data.source_digest().to_string(),
        schema_digest: data.schema_digest().to_string(),
        seed: cfg.seed,
        protocol: cfg.descriptor(),
        tree_params: cfg.tree.clone(),
        split_count: splits.len(),
        side_count: rows.len(),
        group_tables,
        census,
        correlations,
        rows,
    })
}

/// One proportion table per distinct group source column, using its first
/// encoded feature; degenerate (constant) group columns are skipped.
fn group_tables(data: &EncodedDataset) -> Vec<GroupTargetTable> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for f in 0..data.n_features() {
        if data.role(f) != FeatureRole::Group {
            continue;
        }
        if !seen.insert(data.source_column(f).to_string()) {
            continue;
        }
        if let Ok(table) = data.group_target_table(&data.feature_names()[f]) {
            out.push(table);
        }
    }
    out
}

/// Measure both sides of a split against a dataset-wide evaluated model.
fn measure_shared(
    data: &EncodedDataset,
    split: &SubsetSplit,
    model: &EvaluatedModel,
) -> [AuditRow; 2] {
    let side_row = |side: &SplitSide, label: SideLabel| {
        let mut member = vec![false; data.n_rows()];
        for &r in &side.rows {
            member[r] = true;
        }
        let predicted = side
            .rows
            .iter()
            .map(|&r| model.predictions[r] as u64)
            .sum::<u64>() as f64
            / side.rows.len() as f64;
        let sizes = model.pooled_subset_leaf_sizes(&member);
        build_row(split, side, label, predicted, &sizes)
    };
    [
        side_row(split.majority(), SideLabel::Majority),
        side_row(split.minority(), SideLabel::Minority),
    ]
}

/// Measure both sides with models trained and evaluated within each side.
fn measure_retrained(
    data: &EncodedDataset,
    split: &SubsetSplit,
    cfg: &AuditConfig,
) -> Result<[AuditRow; 2]> {
    let excluded: Vec<usize> = if cfg.exclude_split_feature {
        vec![split.feature]
    } else {
        Vec::new()
    };
    let side_row = |side: &SplitSide, label: SideLabel| -> Result<AuditRow> {
        let model = evaluate_rows(data, &side.rows, cfg.protocol, &cfg.tree, &excluded, cfg.seed)?;
        let predicted =
            model.predictions.iter().map(|&p| p as u64).sum::<u64>() as f64
                / model.predictions.len() as f64;
        let mut member = vec![false; data.n_rows()];
        for &r in &side.rows {
            member[r] = true;
        }
        let sizes = model.pooled_subset_leaf_sizes(&member);
        Ok(build_row(split, side, label, predicted, &sizes))
    };
    Ok([
        side_row(split.majority(), SideLabel::Majority)?,
        side_row(split.minority(), SideLabel::Minority)?,
    ])
}

fn build_row(
    split: &SubsetSplit,
    side: &SplitSide,
    label: SideLabel,
    predicted_rate: f64,
    leaf_sizes: &[u64],
) -> AuditRow {
    let hist = LeafSizeHistogram::from_leaf_sizes(leaf_sizes)
        .expect("every side row reaches at least one evaluation tree");
    let tr = side.target_rate;
    let es = exponential_spread(&hist);
    let bias = (predicted_rate - tr) / tr;
    AuditRow {
        split_id: split.id,
        feature_name: split.feature_name.clone(),
        side: label,
        rows: side.rows.len(),
        target_rate: tr,
        predicted_rate,
        bias,
        fall: -bias,
        es,
        es_plus_tr: exponential_spread_with_target(&hist, tr),
        tr_plus_es: tr + es,
        histogram_digest: hist.digest(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{perfectly_separable_dataset, power_law_dataset, SyntheticSpec};

    fn synth(rows: usize, p: f64, seed: u64) -> EncodedDataset {
        power_law_dataset(&SyntheticSpec {
            pvc_exponent: 2.0,
            max_pvc_size: 150,
            rows,
            target_rate: p,
            minority_share: 0.35,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn filter_soundness_on_report_rows() {
        let d = synth(2000, 0.25, 3);
        let report = run_audit(&d, &AuditConfig::default()).unwrap();
        assert_eq!(report.side_count, report.split_count * 2);
        for pair in report.rows.chunks(2) {
            let min = pair.iter().find(|r| r.side == SideLabel::Minority).unwrap();
            assert!(min.rows >= MIN_MINORITY_SIZE);
            for r in pair {
                assert!(r.target_rate > 0.0);
                assert!(r.bias.is_finite());
            }
        }
    }

    #[test]
    fn underprediction_shows_up_for_low_target_rates() {
        let d = synth(3000, 0.2, 5);
        let report = run_audit(&d, &AuditConfig::default()).unwrap();
        assert!(report.split_count >= 1);
        let mean_bias: f64 =
            report.rows.iter().map(|r| r.bias).sum::<f64>() / report.rows.len() as f64;
        assert!(mean_bias < 0.0, "expected net underprediction, got {mean_bias}");
    }

    #[test]
    fn separable_dataset_measures_zero_bias_and_undefined_correlations() {
        let d = perfectly_separable_dataset(1200, 8).unwrap();
        let report = run_audit(&d, &AuditConfig::default()).unwrap();
        assert!(report.split_count >= 1);
        for r in &report.rows {
            assert_eq!(r.bias, 0.0, "{}", r.feature_name);
        }
        // Zero variance in bias: correlations undefined, not zero.
        assert_eq!(report.correlations.full_tr.r, None);
    }

    #[test]
    fn reports_are_byte_identical_for_identical_inputs() {
        let d = synth(1500, 0.3, 7);
        let cfg = AuditConfig::default();
        let a = run_audit(&d, &cfg).unwrap().to_json_pretty();
        let b = run_audit(&d, &cfg).unwrap().to_json_pretty();
        assert_eq!(a, b);
        let other_seed = AuditConfig { seed: 1, ..AuditConfig::default() };
        let c = run_audit(&d, &other_seed).unwrap().to_json_pretty();
        assert_ne!(a, c);
    }

    #[test]
    fn csv_outputs_have_expected_shape() {
        let d = synth(1500, 0.3, 9);
        let report = run_audit(&d, &AuditConfig::default()).unwrap();
        let mut rows_csv = Vec::new();
        report.write_rows_csv(&mut rows_csv).unwrap();
        let text = String::from_utf8(rows_csv).unwrap();
        assert_eq!(text.lines().count(), 1 + report.rows.len());

        let mut corr_csv = Vec::new();
        report.write_correlations_csv(&mut corr_csv).unwrap();
        let text = String::from_utf8(corr_csv).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("data,maj_tr,"));
    }

    #[test]
    fn per_subset_retraining_also_runs() {
        let d = synth(1200, 0.3, 13);
        let cfg = AuditConfig {
            per_subset_retrain: true,
            ..AuditConfig::default()
        };
        let report = run_audit(&d, &cfg).unwrap();
        assert_eq!(report.side_count, report.split_count * 2);
        assert!(report.protocol.contains("re-trained per subset"));
    }

    #[test]
    fn train_on_all_memorizes_unique_rows_and_measures_zero_bias() {
        // max_pvc_size 1 makes every row's feature vector unique, so a
        // fully grown tree scores its own training set perfectly and the
        // measured bias collapses to zero — exactly why out-of-sample
        // evaluation is the default protocol.
        let d = power_law_dataset(&SyntheticSpec {
            pvc_exponent: 2.0,
            max_pvc_size: 1,
            rows: 600,
            target_rate: 0.3,
            minority_share: 0.35,
            seed: 21,
        })
        .unwrap();
        let toa = run_audit(
            &d,
            &AuditConfig {
                protocol: EvalProtocol::TrainOnAll,
                ..AuditConfig::default()
            },
        )
        .unwrap();
        assert!(toa.split_count >= 1);
        for r in &toa.rows {
            assert_eq!(r.bias, 0.0, "{}", r.feature_name);
        }

        let cv = run_audit(&d, &AuditConfig::default()).unwrap();
        let mean_abs =
            cv.rows.iter().map(|x| x.bias.abs()).sum::<f64>() / cv.rows.len() as f64;
        assert!(mean_abs > 0.0, "out-of-fold evaluation keeps the bias visible");
    }
}
