//! Closed-form and numerical models of small-sample prediction bias.

mod power_law;
mod pvc;
mod spread;
mod threshold;

pub use power_law::{fit_power_law, LeafSizeDistribution, LeafSizeHistogram};
pub use pvc::{
    single_pvc_scenario, GroupOutcome, PvcScenario, PvcScenarioResult, RoundedGroupView,
    RoundedScenarioView,
};
pub use spread::{
    aggregate_bias, bias_ratio, default_exponent_grid, default_rate_grid, exponential_spread,
    exponential_spread_with_target, group_underprediction_curve,
    group_underprediction_curve_seq, leaf_inferred_probability, write_curve_csv, CurvePoint,
    CurveSweep,
};
pub use threshold::{threshold_group_rate, threshold_predicted_rate};

pub(crate) use power_law::hex_string;
