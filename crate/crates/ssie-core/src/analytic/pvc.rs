//! The single-PVC worked scenario: two groups share one perfectly
//! predictive feature combination, and the only difference between them is
//! how many rows each contributes to it.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::inference::{beta_posterior_mean, BetaPrior, SampleCount};

/// Scenario parameters: a sample of `total` rows, a minority holding
/// `minority_share` of it, per-group target/PVC co-occurrence rates, and
/// the prior used for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct PvcScenario {
    total: u64,
    minority_share: f64,
    majority_rate: f64,
    minority_rate: f64,
    prior: BetaPrior,
}

impl PvcScenario {
    pub fn new(
        total: u64,
        minority_share: f64,
        majority_rate: f64,
        minority_rate: f64,
        prior: BetaPrior,
    ) -> Result<Self> {
        if total < 1 {
            return Err(Error::InvalidArgument("scenario needs N >= 1".into()));
        }
        if !(minority_share > 0.0 && minority_share < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "minority share must lie strictly between 0 and 1, got {minority_share}"
            )));
        }
        for (name, rate) in [("majority", majority_rate), ("minority", minority_rate)] {
            if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
                return Err(Error::InvalidArgument(format!(
                    "{name} target rate must lie in [0, 1], got {rate}"
                )));
            }
        }
        Ok(Self {
            total,
            minority_share,
            majority_rate,
            minority_rate,
            prior,
        })
    }
}

/// One group's slice of the scenario outcome.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GroupOutcome {
    pub label: &'static str,
    /// Rounded group size, and its share of the sample (size / N).
    pub group_size: u64,
    pub group_share: f64,
    /// Rounded count of PVC occurrences in the group; the sample the
    /// conditional prediction is inferred from.
    pub pvc_count: u64,
    /// The group's target (= PVC) rate in the sample.
    pub target_rate: f64,
    /// Inferred `P(T=1 | X=1, G)`: posterior mean of a perfect-predictor
    /// sample of `pvc_count` successes in `pvc_count` trials.
    pub conditional: f64,
    /// `conditional` as an exact fraction when the prior is integer.
    pub conditional_fraction: Option<(u64, u64)>,
    /// Predicted target proportion within the group: conditional * rate.
    pub predicted_in_group: f64,
    /// Joint sample proportions, predicted and actual.
    pub joint_predicted: f64,
    pub joint_actual: f64,
    /// Relative fall `(actual - predicted) / actual` within the group;
    /// absent when the group's target rate is zero.
    pub relative_fall: Option<f64>,
    /// Set when the group has no PVC occurrences and the conditional is
    /// just the prior mean.
    pub degenerate: bool,
}

/// Scenario outcome for both groups, with a companion view that applies
/// two-decimal display rounding at each reporting step.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PvcScenarioResult {
    pub majority: GroupOutcome,
    pub minority: GroupOutcome,
}

/// The same cells after rounding the conditional to two decimals before
/// multiplying out, and the joint cells to two decimals before comparing —
/// the convention behind commonly reported proportion tables. The fall
/// computed from rounded joint cells can differ noticeably from the
/// unrounded one (0.03 vs 0.04 reads as a 25% fall where the unrounded
/// arithmetic gives about 17%).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RoundedGroupView {
    pub label: &'static str,
    pub conditional: f64,
    pub predicted_in_group: f64,
    pub joint_predicted: f64,
    pub joint_actual: f64,
    /// Fall computed from the rounded joint cells.
    pub relative_fall_from_cells: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RoundedScenarioView {
    pub majority: RoundedGroupView,
    pub minority: RoundedGroupView,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl PvcScenarioResult {
    pub fn rounded(&self) -> RoundedScenarioView {
        RoundedScenarioView {
            majority: rounded_view(&self.majority),
            minority: rounded_view(&self.minority),
        }
    }
}

fn rounded_view(g: &GroupOutcome) -> RoundedGroupView {
    let conditional = round2(g.conditional);
    let predicted_in_group = conditional * g.target_rate;
    let joint_predicted = round2(predicted_in_group * g.group_share);
    let joint_actual = round2(g.joint_actual);
    let relative_fall_from_cells = (joint_actual > 0.0)
        .then(|| (joint_actual - joint_predicted) / joint_actual);
    RoundedGroupView {
        label: g.label,
        conditional,
        predicted_in_group,
        joint_predicted,
        joint_actual,
        relative_fall_from_cells,
    }
}

/// Work the scenario through: infer each group's conditional prediction
/// from its perfect-predictor PVC sample, scale back to within-group and
/// joint proportions, and report the relative falls.
pub fn single_pvc_scenario(s: &PvcScenario) -> PvcScenarioResult {
    let minority_size = (s.total as f64 * s.minority_share).round() as u64;
    let majority_size = s.total - minority_size;
    PvcScenarioResult {
        majority: group_outcome("majority", majority_size, s.total, s.majority_rate, s.prior),
        minority: group_outcome("minority", minority_size, s.total, s.minority_rate, s.prior),
    }
}

fn group_outcome(
    label: &'static str,
    group_size: u64,
    total: u64,
    target_rate: f64,
    prior: BetaPrior,
) -> GroupOutcome {
    let pvc_count = (group_size as f64 * target_rate).round() as u64;
    let degenerate = pvc_count == 0;
    // A perfect predictor: every PVC occurrence carries the target.
    let sample = SampleCount::new(pvc_count, pvc_count).expect("K = N");
    let conditional = beta_posterior_mean(prior, sample);
    let conditional_fraction = prior.integer_counts().map(|(a, b)| {
        let frac = Ratio::new(pvc_count + a, pvc_count + a + b);
        (*frac.numer(), *frac.denom())
    });
    let group_share = group_size as f64 / total as f64;
    let predicted_in_group = conditional * target_rate;
    let relative_fall =
        (target_rate > 0.0).then(|| (target_rate - predicted_in_group) / target_rate);
    GroupOutcome {
        label,
        group_size,
        group_share,
        pvc_count,
        target_rate,
        conditional,
        conditional_fraction,
        predicted_in_group,
        joint_predicted: predicted_in_group * group_share,
        joint_actual: target_rate * group_share,
        relative_fall,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(total: u64, r: f64, s1: f64, s2: f64) -> PvcScenarioResult {
        let s = PvcScenario::new(total, r, s1, s2, BetaPrior::uniform()).unwrap();
        single_pvc_scenario(&s)
    }

    #[test]
    fn worked_example_with_equal_rates() {
        let out = scenario(100, 0.2, 0.2, 0.2);
        assert_eq!(out.majority.pvc_count, 16);
        assert_eq!(out.minority.pvc_count, 4);
        assert_eq!(out.majority.conditional_fraction, Some((17, 18)));
        assert_eq!(out.minority.conditional_fraction, Some((5, 6)));
        assert!((out.majority.predicted_in_group - 17.0 / 18.0 * 0.2).abs() < 1e-12);
        assert!((out.minority.predicted_in_group - 1.0 / 6.0).abs() < 1e-12);
        assert!((out.majority.joint_predicted - 17.0 / 18.0 * 0.2 * 0.8).abs() < 1e-12);
        assert!((out.minority.joint_predicted - 1.0 / 30.0).abs() < 1e-12);
        // Unrounded falls: 1/18 and 1/6.
        assert!((out.majority.relative_fall.unwrap() - 1.0 / 18.0).abs() < 1e-12);
        assert!((out.minority.relative_fall.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!(!out.majority.degenerate && !out.minority.degenerate);
    }

    #[test]
    fn worked_example_rounded_view() {
        let view = scenario(100, 0.2, 0.2, 0.2).rounded();
        assert!((view.majority.conditional - 0.94).abs() < 1e-12);
        assert!((view.minority.conditional - 0.83).abs() < 1e-12);
        assert!((view.majority.predicted_in_group - 0.188).abs() < 1e-12);
        assert!((view.minority.predicted_in_group - 0.166).abs() < 1e-12);
        assert!((view.majority.joint_predicted - 0.15).abs() < 1e-12);
        assert!((view.minority.joint_predicted - 0.03).abs() < 1e-12);
        // From rounded cells the minority fall reads as (0.04-0.03)/0.04.
        assert!((view.minority.relative_fall_from_cells.unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn symmetric_groups_get_identical_conditionals() {
        let out = scenario(100, 0.5, 0.2, 0.2);
        assert_eq!(out.majority.pvc_count, out.minority.pvc_count);
        assert_eq!(out.majority.conditional, out.minority.conditional);
    }

    #[test]
    fn adult_style_rerun() {
        let out = scenario(100, 0.33, 0.30, 0.12);
        assert_eq!(out.majority.group_size, 67);
        assert_eq!(out.minority.group_size, 33);
        assert_eq!(out.majority.pvc_count, 20);
        assert_eq!(out.minority.pvc_count, 4);
        assert_eq!(out.majority.conditional_fraction, Some((21, 22)));
        assert_eq!(out.minority.conditional_fraction, Some((5, 6)));
        let view = out.rounded();
        assert!((view.majority.joint_predicted - 0.19).abs() < 1e-12);
        assert!((view.minority.joint_predicted - 0.03).abs() < 1e-12);
        // Unrounded minority fall is 1/6, not the 25% the rounded cells give.
        assert!((out.minority.relative_fall.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!((view.minority.relative_fall_from_cells.unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_pvc_group_is_degenerate_with_prior_mean() {
        let out = scenario(100, 0.2, 0.2, 0.0);
        assert!(out.minority.degenerate);
        assert_eq!(out.minority.conditional, 0.5);
        assert_eq!(out.minority.relative_fall, None);
        assert!(!out.majority.degenerate);
    }

    #[test]
    fn scenario_validation() {
        let p = BetaPrior::uniform();
        assert!(PvcScenario::new(0, 0.2, 0.2, 0.2, p).is_err());
        assert!(PvcScenario::new(100, 0.0, 0.2, 0.2, p).is_err());
        assert!(PvcScenario::new(100, 1.0, 0.2, 0.2, p).is_err());
        assert!(PvcScenario::new(100, 0.2, 1.2, 0.2, p).is_err());
    }
}
