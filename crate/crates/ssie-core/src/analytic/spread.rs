//! Exponential spread, per-leaf inferred probabilities, and the power-law
//! aggregation of per-leaf bias into a single group-level number.

use crate::error::{Error, Result};
use crate::exec;

use super::power_law::{LeafSizeDistribution, LeafSizeHistogram};

/// Exponential spread `ES = sum_i p_i / i` over observed leaf sizes `i`.
///
/// Lies in (0, 1]; equals 1 exactly when every leaf is a singleton. High
/// values mean the population sits mostly in small leaves.
pub fn exponential_spread(h: &LeafSizeHistogram) -> f64 {
    h.bins().iter().map(|&(size, p)| p / size as f64).sum()
}

/// The ES variant with the target rate added inside every term:
/// `sum_i (p_i + Tr) / i`.
pub fn exponential_spread_with_target(h: &LeafSizeHistogram, target_rate: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&target_rate));
    h.bins()
        .iter()
        .map(|&(size, p)| (p + target_rate) / size as f64)
        .sum()
}

/// Posterior-mean probability inferred from a leaf of `leaf_size` rows
/// whose target co-occurrence rate is `target_rate`, under a symmetric
/// `Beta(a, a)` prior: `(S*F + a) / (F + 2a)`.
pub fn leaf_inferred_probability(target_rate: f64, leaf_size: u64, pseudo_count: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&target_rate));
    debug_assert!(pseudo_count > 0.0);
    let f = leaf_size as f64;
    (target_rate * f + pseudo_count) / (f + 2.0 * pseudo_count)
}

/// Ratio of the minority group's prediction deviation to the majority's,
/// for leaves of size `leaf_size` split `minority_share` / rest between
/// the groups with target rates `minority_rate` (S2) and `majority_rate`
/// (S1):
///
/// ```text
/// b(F) = [(S2*F*R + 1)/(F*R + 2) - S2] / [(S1*F*(1-R) + 1)/(F*(1-R) + 2) - S1]
/// ```
///
/// The sub-leaf sizes `F*R` and `F*(1-R)` enter as real quantities. The
/// ratio is singular when the majority deviation vanishes, which happens
/// exactly at `S1 = 0.5`.
pub fn bias_ratio(
    leaf_size: u64,
    minority_share: f64,
    majority_rate: f64,
    minority_rate: f64,
) -> Result<f64> {
    let f = leaf_size as f64;
    let fr = f * minority_share;
    let fq = f * (1.0 - minority_share);
    if fr < 0.0 || fq <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bias ratio needs F*R >= 0 and F*(1-R) > 0, got {fr} and {fq}"
        )));
    }
    let minority_dev = (minority_rate * fr + 1.0) / (fr + 2.0) - minority_rate;
    let majority_dev = (majority_rate * fq + 1.0) / (fq + 2.0) - majority_rate;
    if majority_dev.abs() < 1e-12 {
        return Err(Error::SingularRatio { s1: majority_rate });
    }
    Ok(minority_dev / majority_dev)
}

/// Power-law-weighted aggregate of [`bias_ratio`] over integer leaf sizes:
/// the discrete sum `sum_{F=1}^{N} b(F) * P(F)` with normalized weights.
pub fn aggregate_bias(
    d: &LeafSizeDistribution,
    minority_share: f64,
    majority_rate: f64,
    minority_rate: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (size, weight) in d.iter() {
        total += weight * bias_ratio(size, minority_share, majority_rate, minority_rate)?;
    }
    Ok(total)
}

/// Which parameter a [`group_underprediction_curve`] sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSweep {
    /// Vary the power-law exponent at a fixed leaf target rate.
    Exponent { exponents: Vec<f64>, target_rate: f64 },
    /// Vary the leaf target rate at a fixed exponent.
    TargetRate { rates: Vec<f64>, exponent: f64 },
}

/// One emitted sweep point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurvePoint {
    /// The swept value (exponent or target rate).
    pub x: f64,
    /// `sum_F P(F) * leaf_inferred_probability(S, ceil(F * group_fraction), a)`.
    pub expected_predicted: f64,
    /// `S - expected_predicted`; positive means underprediction.
    pub underprediction: f64,
}

/// Default exponent grid for the sweep: 0.5 to 3.0 in steps of 0.5.
pub fn default_exponent_grid() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
}

/// Default target-rate grid for the sweep: 0.5 to 1.0 in steps of 0.1.
pub fn default_rate_grid() -> Vec<f64> {
    vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

/// Tabulate expected predicted rate and underprediction for a group that
/// holds `group_fraction` of every leaf, over a sweep of exponents or
/// target rates. Grid points are independent and evaluated in parallel
/// under the `parallel` feature; output order always follows the grid.
pub fn group_underprediction_curve(
    max_size: u64,
    group_fraction: f64,
    pseudo_count: f64,
    sweep: &CurveSweep,
) -> Result<Vec<CurvePoint>> {
    curve_impl(max_size, group_fraction, pseudo_count, sweep, true)
}

/// Sequential twin of [`group_underprediction_curve`]; identical output.
pub fn group_underprediction_curve_seq(
    max_size: u64,
    group_fraction: f64,
    pseudo_count: f64,
    sweep: &CurveSweep,
) -> Result<Vec<CurvePoint>> {
    curve_impl(max_size, group_fraction, pseudo_count, sweep, false)
}

fn curve_impl(
    max_size: u64,
    group_fraction: f64,
    pseudo_count: f64,
    sweep: &CurveSweep,
    parallel: bool,
) -> Result<Vec<CurvePoint>> {
    if !(group_fraction > 0.0 && group_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "group fraction must lie in (0, 1], got {group_fraction}"
        )));
    }
    if !(pseudo_count > 0.0 && pseudo_count.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "pseudo count must be positive, got {pseudo_count}"
        )));
    }

    let grid: Vec<(f64, f64)> = match sweep {
        CurveSweep::Exponent {
            exponents,
            target_rate,
        } => exponents.iter().map(|&x| (x, *target_rate)).collect(),
        CurveSweep::TargetRate { rates, exponent } => {
            rates.iter().map(|&s| (*exponent, s)).collect()
        }
    };
    for &(x, s) in &grid {
        if !(x > 0.0) {
            return Err(Error::InvalidArgument(format!("exponent {x} not positive")));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "target rate {s} outside [0, 1]"
            )));
        }
    }

    let point = move |i: usize, grid: &[(f64, f64)]| -> Result<CurvePoint> {
        let (exponent, rate) = grid[i];
        let d = LeafSizeDistribution::power_law(exponent, max_size)?;
        let expected: f64 = d
            .iter()
            .map(|(f, w)| {
                let sub = (f as f64 * group_fraction).ceil() as u64;
                w * leaf_inferred_probability(rate, sub, pseudo_count)
            })
            .sum();
        let x = match sweep {
            CurveSweep::Exponent { .. } => exponent,
            CurveSweep::TargetRate { .. } => rate,
        };
        Ok(CurvePoint {
            x,
            expected_predicted: expected,
            underprediction: rate - expected,
        })
    };

    let results = if parallel {
        exec::map_indexed(grid.len(), |i| point(i, &grid))
    } else {
        exec::map_indexed_seq(grid.len(), |i| point(i, &grid))
    };
    results.into_iter().collect()
}

/// Write sweep points as `x,value` CSV rows with one header row; the value
/// column is the underprediction.
pub fn write_curve_csv<W: std::io::Write>(points: &[CurvePoint], mut w: W) -> Result<()> {
    writeln!(w, "x,value")?;
    for p in points {
        writeln!(w, "{},{}", p.x, p.underprediction)?;
    }
    Ok(())
}
