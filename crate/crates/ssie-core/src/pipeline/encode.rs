//! Turning raw delimited text into a binary feature matrix: missing-value
//! deletion, binning, then one-hot encoding, all driven by a [`Schema`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::schema::{Binning, Role, Schema};

/// Whether an encoded feature column came from a predictor or a group
/// column; the audit excludes group features from split enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FeatureRole {
    Predictor,
    Group,
}

/// A fully encoded dataset: binary features, binary target, and the
/// provenance digests that make runs reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    name: String,
    feature_names: Vec<String>,
    source_columns: Vec<String>,
    roles: Vec<FeatureRole>,
    rows: Vec<Vec<u8>>,
    target: Vec<u8>,
    source_digest: String,
    schema_digest: String,
    dropped_rows: usize,
}

impl EncodedDataset {
    /// Read, digest, and encode a delimited file under a schema.
    pub fn load_csv(path: &Path, schema: &Schema) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes, schema)
    }

    pub fn from_bytes(bytes: &[u8], schema: &Schema) -> Result<Self> {
        let source_digest = super::sha256_hex(bytes);
        Self::encode(bytes, schema, source_digest)
    }

    fn encode(bytes: &[u8], schema: &Schema, source_digest: String) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(schema.has_header)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(bytes as &[u8]);

        // Map each declared column to its position in the file.
        let kept: Vec<usize> = schema
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role != Role::Drop)
            .map(|(i, _)| i)
            .collect();
        let positions: Vec<usize> = if schema.has_header {
            let headers = reader
                .headers()
                .map_err(|e| Error::Data(format!("cannot read header row: {e}")))?
                .clone();
            let index: BTreeMap<&str, usize> = headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h, i))
                .collect();
            let mut out = Vec::with_capacity(schema.columns.len());
            for c in &schema.columns {
                let pos = index.get(c.name.as_str()).ok_or_else(|| {
                    Error::Data(format!(
                        "declared column {:?} is missing from the file header",
                        c.name
                    ))
                })?;
                out.push(*pos);
            }
            out
        } else {
            (0..schema.columns.len()).collect()
        };

        // Pass 1: read raw rows, drop rows with missing markers in kept
        // columns, bin values, and collect category sets + unknown values.
        let mut binned_rows: Vec<Vec<String>> = Vec::new();
        let mut targets: Vec<u8> = Vec::new();
        let mut dropped = 0usize;
        let mut categories: Vec<BTreeSet<String>> = vec![BTreeSet::new(); kept.len()];
        let mut unknown: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Data(format!("row {}: {e}", line + 1)))?;
            if !schema.has_header && record.len() != schema.columns.len() {
                return Err(Error::Data(format!(
                    "row {}: expected {} columns, found {}",
                    line + 1,
                    schema.columns.len(),
                    record.len()
                )));
            }
            let mut missing = false;
            for &ci in &kept {
                let raw = record.get(positions[ci]).unwrap_or("");
                if schema.missing_markers.iter().any(|m| m == raw) {
                    missing = true;
                    break;
                }
            }
            if missing {
                dropped += 1;
                continue;
            }

            let mut row = Vec::with_capacity(kept.len());
            let mut row_target = None;
            for (slot, &ci) in kept.iter().enumerate() {
                let spec = &schema.columns[ci];
                let raw = record.get(positions[ci]).ok_or_else(|| {
                    Error::Data(format!("row {}: column {:?} absent", line + 1, spec.name))
                })?;
                if spec.role == Role::Target {
                    row_target = Some(u8::from(spec.positive.iter().any(|p| p == raw)));
                    row.push(String::new());
                    continue;
                }
                match spec.bin(raw) {
                    Ok(cat) => {
                        categories[slot].insert(cat.clone());
                        row.push(cat);
                    }
                    Err(Error::Data(_)) if matches!(spec.binning, Binning::Merge { .. }) => {
                        unknown
                            .entry(spec.name.clone())
                            .or_default()
                            .insert(raw.to_string());
                        row.push(String::new());
                    }
                    Err(e) => return Err(e),
                }
            }
            targets.push(row_target.expect("target column is kept"));
            binned_rows.push(row);
        }

        if !unknown.is_empty() {
            let listing: Vec<String> = unknown
                .iter()
                .map(|(col, vals)| {
                    let vals: Vec<_> = vals.iter().map(|v| format!("{v:?}")).collect();
                    format!("{col}: {}", vals.join(", "))
                })
                .collect();
            return Err(Error::Data(format!(
                "values not covered by the schema — {}",
                listing.join("; ")
            )));
        }
        if binned_rows.is_empty() {
            return Err(Error::Data(format!(
                "no rows survived encoding ({dropped} dropped as missing)"
            )));
        }

        // Pass 2: one-hot in schema order, categories lexicographic.
        let mut feature_names = Vec::new();
        let mut source_columns = Vec::new();
        let mut roles = Vec::new();
        let mut layout: Vec<(usize, Vec<String>)> = Vec::new();
        for (slot, &ci) in kept.iter().enumerate() {
            let spec = &schema.columns[ci];
            if spec.role == Role::Target {
                continue;
            }
            let cats: Vec<String> = categories[slot].iter().cloned().collect();
            for cat in &cats {
                feature_names.push(format!("{}={}", spec.name, cat));
                source_columns.push(spec.name.clone());
                roles.push(match spec.role {
                    Role::Group => FeatureRole::Group,
                    _ => FeatureRole::Predictor,
                });
            }
            layout.push((slot, cats));
        }

        let n_features = feature_names.len();
        let rows: Vec<Vec<u8>> = binned_rows
            .iter()
            .map(|binned| {
                let mut row = Vec::with_capacity(n_features);
                for (slot, cats) in &layout {
                    let value = &binned[*slot];
                    for cat in cats {
                        row.push(u8::from(cat == value));
                    }
                }
                row
            })
            .collect();

        Ok(EncodedDataset {
            name: schema.name.clone(),
            feature_names,
            source_columns,
            roles,
            rows,
            target: targets,
            source_digest,
            schema_digest: schema.digest.clone(),
            dropped_rows: dropped,
        })
    }

    /// Assemble a dataset directly from binary parts; synthetic generators
    /// and tests use this. Marks every feature a predictor except names
    /// passed in `group_features`.
    pub fn from_parts(
        name: impl Into<String>,
        feature_names: Vec<String>,
        group_features: &[&str],
        rows: Vec<Vec<u8>>,
        target: Vec<u8>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("no rows".into()));
        }
        if rows.len() != target.len() {
            return Err(Error::Data(format!(
                "{} rows but {} target values",
                rows.len(),
                target.len()
            )));
        }
        for row in &rows {
            if row.len() != feature_names.len() {
                return Err(Error::Data("row width does not match feature names".into()));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Data("features must be binary".into()));
            }
        }
        if target.iter().any(|&v| v > 1) {
            return Err(Error::Data("target must be binary".into()));
        }
        let roles = feature_names
            .iter()
            .map(|n| {
                if group_features.contains(&n.as_str()) {
                    FeatureRole::Group
                } else {
                    FeatureRole::Predictor
                }
            })
            .collect();
        let source_columns = feature_names
            .iter()
            .map(|n| n.split('=').next().unwrap_or(n).to_string())
            .collect();
        let mut d = EncodedDataset {
            name: name.into(),
            feature_names,
            source_columns,
            roles,
            rows,
            target,
            source_digest: String::new(),
            schema_digest: String::new(),
            dropped_rows: 0,
        };
        let digest = d.digest();
        d.source_digest = digest;
        Ok(d)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// The raw column an encoded feature came from.
    pub fn source_column(&self, feature: usize) -> &str {
        &self.source_columns[feature]
    }

    pub fn role(&self, feature: usize) -> FeatureRole {
        self.roles[feature]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }

    pub fn value(&self, row: usize, feature: usize) -> u8 {
        self.rows[row][feature]
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn schema_digest(&self) -> &str {
        &self.schema_digest
    }

    /// Content digest over names, matrix, and target: identical encodings
    /// hash identically regardless of where the bytes came from.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for name in &self.feature_names {
            hasher.update(name.as_bytes());
            hasher.update([0]);
        }
        for row in &self.rows {
            hasher.update(row);
        }
        hasher.update(&self.target);
        crate::analytic::hex_string(&hasher.finalize())
    }

    /// Dump the encoded matrix as CSV for inspection.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},target", self.feature_names.join(","))?;
        for (row, t) in self.rows.iter().zip(&self.target) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", cells.join(","), t)?;
        }
        Ok(())
    }

    /// Joint proportions and per-group target rates for one encoded binary
    /// feature, in the layout of a 2x2 proportion table.
    pub fn group_target_table(&self, group_feature: &str) -> Result<GroupTargetTable> {
        let gi = self.feature_index(group_feature).ok_or_else(|| {
            Error::Data(format!("no encoded feature named {group_feature:?}"))
        })?;
        let mut counts = [[0u64; 2]; 2];
        for (row, &t) in self.rows.iter().zip(&self.target) {
            counts[row[gi] as usize][t as usize] += 1;
        }
        let group_counts = [counts[0][0] + counts[0][1], counts[1][0] + counts[1][1]];
        if group_counts[0] == 0 || group_counts[1] == 0 {
            return Err(Error::DegenerateGroup(format!(
                "feature {group_feature:?} is constant"
            )));
        }
        let n = self.n_rows() as f64;
        let joint = [
            [counts[0][0] as f64 / n, counts[0][1] as f64 / n],
            [counts[1][0] as f64 / n, counts[1][1] as f64 / n],
        ];
        let group_rates = [
            counts[0][1] as f64 / group_counts[0] as f64,
            counts[1][1] as f64 / group_counts[1] as f64,
        ];
        Ok(GroupTargetTable {
            feature: group_feature.to_string(),
            joint,
            group_rates,
            group_counts,
        })
    }
}

/// 2x2 joint proportion table for one binary feature against the target.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GroupTargetTable {
    pub feature: String,
    /// `joint[g][t]` = proportion of all rows with feature = g, target = t.
    pub joint: [[f64; 2]; 2],
    /// `P(T = 1 | feature = g)`.
    pub group_rates: [f64; 2],
    pub group_counts: [u64; 2],
}
