//! Declarative ingestion schemas: per-column roles, binning rules, and the
//! positive target value, read from a TOML file.
//!
//! A schema declares every column it cares about. Files with a header row
//! may carry extra columns (implicitly dropped); headerless files must be
//! covered completely, in order, by the `[[column]]` entries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Target,
    Group,
    Predictor,
    Drop,
}

impl Role {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(Role::Target),
            "group" => Ok(Role::Group),
            "predictor" => Ok(Role::Predictor),
            "drop" => Ok(Role::Drop),
            other => Err(Error::Schema(format!(
                "unknown role {other:?}; expected target, group, predictor, or drop"
            ))),
        }
    }
}

/// How a kept column's raw values become categories.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Keep raw values as categories.
    Identity,
    /// Parse as a number and bucket by half-open edge intervals:
    /// `v < edges[0]` gets `labels[0]`, `edges[i-1] <= v < edges[i]` gets
    /// `labels[i]`, `v >= last edge` gets the last label.
    Buckets { edges: Vec<f64>, labels: Vec<String> },
    /// Map listed raw values to merged categories; unlisted values take
    /// `default` when present and are a hard error otherwise.
    Merge {
        map: BTreeMap<String, String>,
        default: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
    pub binning: Binning,
    /// Raw values counting as target = 1; only set on the target column.
    pub positive: Vec<String>,
}

impl ColumnSpec {
    /// Apply the binning rule to a raw value. `Ok(None)` never happens for
    /// identity/bucket rules; merges without a default reject unknowns.
    pub fn bin(&self, raw: &str) -> Result<String> {
        match &self.binning {
            Binning::Identity => Ok(raw.to_string()),
            Binning::Buckets { edges, labels } => {
                let v: f64 = raw.trim().parse().map_err(|_| {
                    Error::Data(format!(
                        "column {:?}: value {raw:?} is not numeric",
                        self.name
                    ))
                })?;
                let idx = edges.iter().take_while(|&&e| v >= e).count();
                Ok(labels[idx].clone())
            }
            Binning::Merge { map, default } => match map.get(raw) {
                Some(merged) => Ok(merged.clone()),
                None => default.clone().ok_or_else(|| {
                    Error::Data(format!(
                        "column {:?}: value {raw:?} is not covered by the merge rule",
                        self.name
                    ))
                }),
            },
        }
    }
}

/// A parsed, validated schema plus the digest of its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub name: String,
    pub has_header: bool,
    pub missing_markers: Vec<String>,
    pub columns: Vec<ColumnSpec>,
    pub digest: String,
}

impl Schema {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Schema(format!("cannot read schema {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSchema = toml::from_str(text)
            .map_err(|e| Error::Schema(format!("schema does not parse: {e}")))?;
        let digest = crate::pipeline::sha256_hex(text.as_bytes());

        let mut columns = Vec::with_capacity(raw.column.len());
        for c in raw.column {
            let role = Role::parse(&c.role)?;
            let binning = match (c.bins, c.merge) {
                (Some(_), Some(_)) => {
                    return Err(Error::Schema(format!(
                        "column {:?} declares both bins and merge",
                        c.name
                    )))
                }
                (Some(b), None) => {
                    if b.labels.len() != b.edges.len() + 1 {
                        return Err(Error::Schema(format!(
                            "column {:?}: {} edges need {} labels, got {}",
                            c.name,
                            b.edges.len(),
                            b.edges.len() + 1,
                            b.labels.len()
                        )));
                    }
                    if b.edges.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::Schema(format!(
                            "column {:?}: bucket edges must be strictly increasing",
                            c.name
                        )));
                    }
                    Binning::Buckets {
                        edges: b.edges,
                        labels: b.labels,
                    }
                }
                (None, Some(m)) => Binning::Merge {
                    map: m.map,
                    default: m.default,
                },
                (None, None) => Binning::Identity,
            };
            if role == Role::Target && c.positive.is_empty() {
                return Err(Error::Schema(format!(
                    "target column {:?} needs at least one positive value",
                    c.name
                )));
            }
            if role != Role::Target && !c.positive.is_empty() {
                return Err(Error::Schema(format!(
                    "column {:?} sets positive values but is not the target",
                    c.name
                )));
            }
            columns.push(ColumnSpec {
                name: c.name,
                role,
                binning,
                positive: c.positive,
            });
        }

        let mut seen = std::collections::BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.name.clone()) {
                return Err(Error::Schema(format!("column {:?} declared twice", c.name)));
            }
        }
        let targets = columns.iter().filter(|c| c.role == Role::Target).count();
        if targets != 1 {
            return Err(Error::Schema(format!(
                "schema must declare exactly one target column, found {targets}"
            )));
        }

        Ok(Schema {
            name: raw.name,
            has_header: raw.has_header,
            missing_markers: raw.missing_markers,
            columns,
            digest,
        })
    }

    pub fn target(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.role == Role::Target)
            .expect("validated at parse time")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    name: String,
    #[serde(default = "default_true")]
    has_header: bool,
    #[serde(default)]
    missing_markers: Vec<String>,
    column: Vec<RawColumn>,
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumn {
    name: String,
    role: String,
    #[serde(default)]
    positive: Vec<String>,
    bins: Option<RawBins>,
    merge: Option<RawMerge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBins {
    edges: Vec<f64>,
    labels: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMerge {
    map: BTreeMap<String, String>,
    default: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
name = "toy"
has_header = true
missing_markers = ["?"]

[[column]]
name = "color"
role = "predictor"

[[column]]
name = "size"
role = "predictor"
[column.bins]
edges = [10.0, 20.0]
labels = ["small", "medium", "large"]

[[column]]
name = "country"
role = "group"
[column.merge]
map = { "US" = "US" }
default = "non-US"

[[column]]
name = "label"
role = "target"
positive = ["yes"]
"#;

    #[test]
    fn parses_and_validates() {
        let s = Schema::from_toml_str(TOY).unwrap();
        assert_eq!(s.name, "toy");
        assert_eq!(s.columns.len(), 4);
        assert_eq!(s.target().name, "label");
        assert_eq!(s.missing_markers, vec!["?"]);
    }

    #[test]
    fn binning_rules() {
        let s = Schema::from_toml_str(TOY).unwrap();
        let size = &s.columns[1];
        assert_eq!(size.bin("3").unwrap(), "small");
        assert_eq!(size.bin("10").unwrap(), "medium");
        assert_eq!(size.bin("19.5").unwrap(), "medium");
        assert_eq!(size.bin("20").unwrap(), "large");
        assert!(size.bin("tall").is_err());

        let country = &s.columns[2];
        assert_eq!(country.bin("US").unwrap(), "US");
        assert_eq!(country.bin("Japan").unwrap(), "non-US");

        let color = &s.columns[0];
        assert_eq!(color.bin("red").unwrap(), "red");
    }

    #[test]
    fn merge_without_default_rejects_unknowns() {
        let text = r#"
name = "t"
[[column]]
name = "a"
role = "predictor"
[column.merge]
map = { "x" = "x" }
[[column]]
name = "y"
role = "target"
positive = ["1"]
"#;
        let s = Schema::from_toml_str(text).unwrap();
        assert!(s.columns[0].bin("unseen").is_err());
    }

    #[test]
    fn rejects_structural_problems() {
        // No target.
        let no_target = r#"
name = "t"
[[column]]
name = "a"
role = "predictor"
"#;
        assert!(Schema::from_toml_str(no_target).is_err());

        // Two targets.
        let two = r#"
name = "t"
[[column]]
name = "a"
role = "target"
positive = ["1"]
[[column]]
name = "b"
role = "target"
positive = ["1"]
"#;
        assert!(Schema::from_toml_str(two).is_err());

        // Label count mismatch.
        let bad_bins = r#"
name = "t"
[[column]]
name = "a"
role = "predictor"
[column.bins]
edges = [1.0]
labels = ["only"]
[[column]]
name = "y"
role = "target"
positive = ["1"]
"#;
        assert!(Schema::from_toml_str(bad_bins).is_err());

        // Duplicate column.
        let dup = r#"
name = "t"
[[column]]
name = "a"
role = "predictor"
[[column]]
name = "a"
role = "predictor"
[[column]]
name = "y"
role = "target"
positive = ["1"]
"#;
        assert!(Schema::from_toml_str(dup).is_err());

        // Target without positive values.
        let no_pos = r#"
name = "t"
[[column]]
name = "y"
role = "target"
"#;
        assert!(Schema::from_toml_str(no_pos).is_err());
    }

    #[test]
    fn digest_tracks_text() {
        let a = Schema::from_toml_str(TOY).unwrap();
        let b = Schema::from_toml_str(TOY).unwrap();
        assert_eq!(a.digest, b.digest);
        let c = Schema::from_toml_str(&TOY.replace("toy", "toy2")).unwrap();
        assert_ne!(a.digest, c.digest);
    }
}
