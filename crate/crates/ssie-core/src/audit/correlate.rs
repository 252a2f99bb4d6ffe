//! Pearson correlations between observed per-side bias and its predictors,
//! in the seven-cell layout of the report tables.

use crate::stats::pearson;

use super::{AuditRow, SideLabel};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CorrelationCell {
    /// Pearson coefficient; absent (not zero) for undefined cases: fewer
    /// than three rows or a zero-variance column.
    pub r: Option<f64>,
    pub n: usize,
}

fn cell(x: &[f64], y: &[f64]) -> CorrelationCell {
    let r = if x.len() < 3 { None } else { pearson(x, y) };
    CorrelationCell { r, n: x.len() }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorrelationReport {
    pub maj_tr: CorrelationCell,
    pub maj_es_tr: CorrelationCell,
    pub min_tr: CorrelationCell,
    pub min_es_tr: CorrelationCell,
    /// Minority-minus-majority predictor against minority-minus-majority
    /// bias, one point per split.
    pub diff_es_tr: CorrelationCell,
    pub full_tr: CorrelationCell,
    pub full_es_tr: CorrelationCell,
}

impl CorrelationReport {
    pub fn cells(&self) -> [(&'static str, CorrelationCell); 7] {
        [
            ("Maj Tr", self.maj_tr),
            ("Maj ES+Tr", self.maj_es_tr),
            ("Min Tr", self.min_tr),
            ("Min ES+Tr", self.min_es_tr),
            ("Diff ES+Tr", self.diff_es_tr),
            ("Full Tr", self.full_tr),
            ("Full ES+Tr", self.full_es_tr),
        ]
    }
}

/// Correlate observed bias with the Tr and ES+Tr predictors per side, on
/// per-split differences, and over all rows pooled.
pub fn correlate(rows: &[AuditRow]) -> CorrelationReport {
    let collect = |side: Option<SideLabel>, predictor: fn(&AuditRow) -> f64| -> (Vec<f64>, Vec<f64>) {
        rows.iter()
            .filter(|r| side.is_none_or(|s| r.side == s))
            .map(|r| (predictor(r), r.bias))
            .unzip()
    };

    let tr = |r: &AuditRow| r.target_rate;
    let es_tr = |r: &AuditRow| r.es_plus_tr;

    let (maj_tr_x, maj_y) = collect(Some(SideLabel::Majority), tr);
    let (maj_es_x, _) = collect(Some(SideLabel::Majority), es_tr);
    let (min_tr_x, min_y) = collect(Some(SideLabel::Minority), tr);
    let (min_es_x, _) = collect(Some(SideLabel::Minority), es_tr);
    let (full_tr_x, full_y) = collect(None, tr);
    let (full_es_x, _) = collect(None, es_tr);

    // Pair sides by split id for the difference cell.
    let mut diff_x = Vec::new();
    let mut diff_y = Vec::new();
    let mut by_split: std::collections::BTreeMap<usize, [Option<&AuditRow>; 2]> = Default::default();
    for r in rows {
        let slot = &mut by_split.entry(r.split_id).or_default()[r.side as usize];
        *slot = Some(r);
    }
    for (maj, min) in by_split.values().filter_map(|p| Some((p[0]?, p[1]?))) {
        diff_x.push(min.es_plus_tr - maj.es_plus_tr);
        diff_y.push(min.bias - maj.bias);
    }

    CorrelationReport {
        maj_tr: cell(&maj_tr_x, &maj_y),
        maj_es_tr: cell(&maj_es_x, &maj_y),
        min_tr: cell(&min_tr_x, &min_y),
        min_es_tr: cell(&min_es_x, &min_y),
        diff_es_tr: cell(&diff_x, &diff_y),
        full_tr: cell(&full_tr_x, &full_y),
        full_es_tr: cell(&full_es_x, &full_y),
    }
}
