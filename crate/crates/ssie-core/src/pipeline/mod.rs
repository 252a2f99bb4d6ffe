//! Dataset ingestion: declarative schemas, binning, one-hot encoding.

mod encode;
mod schema;

pub use encode::{EncodedDataset, FeatureRole, GroupTargetTable};
pub use schema::{Binning, ColumnSpec, Role, Schema};

use sha2::{Digest, Sha256};

/// Hex SHA-256, the digest used for all provenance fields.
pub fn sha256_hex(bytes: &[u8]) -> String {
    crate::analytic::hex_string(&Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = r#"
name = "toy"
has_header = true
missing_markers = ["?"]

[[column]]
name = "shade"
role = "predictor"

[[column]]
name = "grp"
role = "group"

[[column]]
name = "hours"
role = "predictor"
[column.bins]
edges = [10.0]
labels = ["low", "high"]

[[column]]
name = "noise"
role = "drop"

[[column]]
name = "label"
role = "target"
positive = ["yes"]
"#;

    const DATA: &str = "\
shade,grp,hours,noise,label
dark, a,3,zzz,yes
light,b,12,zzz,no
dark, b,9,zzz,no
";

    fn load(data: &str) -> crate::Result<EncodedDataset> {
        let schema = Schema::from_toml_str(SCHEMA).unwrap();
        EncodedDataset::from_bytes(data.as_bytes(), &schema)
    }

    #[test]
    fn one_hot_layout_follows_schema_then_lexicographic_order() {
        let d = load(DATA).unwrap();
        assert_eq!(
            d.feature_names(),
            &[
                "shade=dark",
                "shade=light",
                "grp=a",
                "grp=b",
                "hours=high",
                "hours=low"
            ]
        );
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.row(0), &[1, 0, 1, 0, 0, 1]);
        assert_eq!(d.row(1), &[0, 1, 0, 1, 1, 0]);
        assert_eq!(d.row(2), &[1, 0, 0, 1, 0, 1]);
        assert_eq!(d.target(), &[1, 0, 0]);
        assert_eq!(d.role(2), FeatureRole::Group);
        assert_eq!(d.role(0), FeatureRole::Predictor);
        assert_eq!(d.source_column(4), "hours");
    }

    #[test]
    fn binary_categories_one_hot_into_complementary_columns() {
        let d = load(DATA).unwrap();
        for i in 0..d.n_rows() {
            assert_eq!(d.value(i, 0) + d.value(i, 1), 1);
            assert_eq!(d.value(i, 2) + d.value(i, 3), 1);
        }
    }

    #[test]
    fn one_hot_completeness_per_source_column() {
        let d = load(DATA).unwrap();
        let columns = ["shade", "grp", "hours"];
        for row in 0..d.n_rows() {
            for col in columns {
                let ones: u8 = (0..d.n_features())
                    .filter(|&f| d.source_column(f) == col)
                    .map(|f| d.value(row, f))
                    .sum();
                assert_eq!(ones, 1, "row {row} column {col}");
            }
        }
    }

    #[test]
    fn missing_rows_are_dropped_and_counted() {
        let with_missing = "\
shade,grp,hours,noise,label
dark,a,3,zzz,yes
?,b,12,zzz,no
light,b,?,zzz,no
dark,b,9,?,no
";
        // '?' in the dropped `noise` column must NOT drop the row.
        let d = load(with_missing).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.dropped_rows(), 2);
    }

    #[test]
    fn encoding_is_deterministic() {
        let a = load(DATA).unwrap();
        let b = load(DATA).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        let c = load(&DATA.replace("dark, a,3", "dark, a,11")).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn empty_result_is_an_error() {
        let all_missing = "\
shade,grp,hours,noise,label
?,a,3,zzz,yes
";
        assert!(load(all_missing).is_err());
    }

    #[test]
    fn non_numeric_bucket_value_is_an_error_with_context() {
        let bad = "\
shade,grp,hours,noise,label
dark,a,lots,zzz,yes
dark,b,3,zzz,no
";
        let err = load(bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("hours"), "{msg}");
        assert!(msg.contains("lots"), "{msg}");
    }

    #[test]
    fn headerless_files_use_schema_order() {
        let schema_text = SCHEMA.replace("has_header = true", "has_header = false");
        let schema = Schema::from_toml_str(&schema_text).unwrap();
        let data = "dark,a,3,zzz,yes\nlight,b,12,zzz,no\n";
        let d = EncodedDataset::from_bytes(data.as_bytes(), &schema).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.target(), &[1, 0]);

        let short = "dark,a,3,yes\n";
        assert!(EncodedDataset::from_bytes(short.as_bytes(), &schema).is_err());
    }

    #[test]
    fn declared_column_missing_from_header_is_an_error() {
        let data = "shade,grp,noise,label\ndark,a,zzz,yes\n";
        let err = load(data).unwrap_err();
        assert!(err.to_string().contains("hours"));
    }

    #[test]
    fn unknown_merge_values_are_listed_in_the_error() {
        let schema_text = r#"
name = "t"
[[column]]
name = "c"
role = "predictor"
[column.merge]
map = { "x" = "x" }
[[column]]
name = "label"
role = "target"
positive = ["1"]
"#;
        let schema = Schema::from_toml_str(schema_text).unwrap();
        let data = "c,label\nx,1\nweird,0\nstrange,1\n";
        let err = EncodedDataset::from_bytes(data.as_bytes(), &schema).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weird") && msg.contains("strange"), "{msg}");
    }

    #[test]
    fn group_target_table_matches_hand_counts() {
        let data = "\
shade,grp,hours,noise,label
dark,a,3,z,yes
dark,a,3,z,no
dark,a,3,z,no
light,b,12,z,yes
light,b,12,z,yes
light,b,12,z,no
light,b,12,z,no
light,b,12,z,no
";
        let d = load(data).unwrap();
        let t = d.group_target_table("grp=a").unwrap();
        // grp=a side is feature value 1: 3 rows, 1 target.
        assert_eq!(t.group_counts, [5, 3]);
        assert!((t.group_rates[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((t.group_rates[0] - 2.0 / 5.0).abs() < 1e-12);
        let total: f64 = t.joint.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-9);
        // Within-group rates equal joint cell ratios.
        for g in 0..2 {
            let denom = t.joint[g][0] + t.joint[g][1];
            assert!((t.joint[g][1] / denom - t.group_rates[g]).abs() < 1e-12);
        }

        assert!(d.group_target_table("nope=1").is_err());
    }

    #[test]
    fn constant_group_is_degenerate() {
        let constant = EncodedDataset::from_parts(
            "t",
            vec!["g=1".into()],
            &["g=1"],
            vec![vec![1], vec![1]],
            vec![0, 1],
        )
        .unwrap();
        assert!(matches!(
            constant.group_target_table("g=1"),
            Err(crate::Error::DegenerateGroup(_))
        ));
    }

    #[test]
    fn from_parts_validates() {
        assert!(EncodedDataset::from_parts("t", vec!["a".into()], &[], vec![], vec![]).is_err());
        assert!(EncodedDataset::from_parts(
            "t",
            vec!["a".into()],
            &[],
            vec![vec![2]],
            vec![0]
        )
        .is_err());
        assert!(EncodedDataset::from_parts(
            "t",
            vec!["a".into()],
            &[],
            vec![vec![1], vec![0]],
            vec![0]
        )
        .is_err());
    }

    #[test]
    fn csv_dump_round_trips_shape() {
        let d = load(DATA).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 1 + d.n_rows());
        assert!(lines[0].ends_with(",target"));
        assert_eq!(lines[1].split(',').count(), d.n_features() + 1);
    }
}
