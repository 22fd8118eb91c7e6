//! Fairness metrics, significance testing and scenario comparison.

pub mod metrics;
pub mod scenario;
pub mod stats;

pub use metrics::{fairness_metrics, performance, t_score, DirDisplay, FairnessMetrics, Performance};
pub use scenario::{
    compare_metric, evaluate_scenario, group_membership, reweigh, reweighing_weights,
    summarize_scenarios, FoldOutcome, Metric, MetricComparison, Scenario, ScenarioEvaluation,
    ScenarioRun,
};
pub use stats::{cliffs_delta, wilcoxon_exact, wilcoxon_normal, wilcoxon_rank_sum, wtl_label, Wtl};
