//! Counterfactual bias auditing for tabular binary classifiers.
//!
//! Feature values are swapped between the two halves of each feature's
//! value partition, alone or together with a temporally later mediator,
//! and the shift in a logistic model's prediction distribution is scored
//! with four divergences. The resulting bias rankings are compared with
//! exact linear Shapley importances, and mitigation scenarios (feature
//! removal, reweighing) are scored on performance and group fairness.
//!
//! ```no_run
//! use swapaudit::{run_audit, write_report, AuditConfig};
//!
//! let cfg = AuditConfig::from_file("audit.json")?;
//! let report = run_audit(&cfg)?;
//! write_report(&report, &cfg.output_dir)?;
//! # Ok::<(), swapaudit::Error>(())
//! ```

pub mod attribution;
pub mod data;
pub mod divergence;
pub mod error;
pub mod fairness;
pub mod impact;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod swap;
pub mod synth;

pub use attribution::{global_importance, shap_linear, AttributionMatrix};
pub use data::{
    drop_correlated, kfold_split, load_csv, load_csv_with, partition_feature, read_csv, Category,
    FeatureKind, FeaturePartition, FeatureSchema, FoldSplit, LoadOptions, TabularDataset,
};
pub use divergence::{DivergenceKind, DivergenceScores};
pub use error::{Error, Result};
pub use impact::{
    controlled_direct_impact, label_features, natural_direct_impact, natural_indirect_impact,
    rank_features, ranking_stability, total_natural_impact, BiasImportanceLabel, FeatureRanking,
    ImpactReport,
};
pub use model::{
    fit_logistic, fit_logistic_weighted, predict_proba, prediction_distribution, FitConfig,
    LogisticModel, PredictionDistribution,
};
pub use pipeline::{
    emit_plot_data, read_report, run_audit, write_report, AuditConfig, AuditReport, PlotRow,
};
pub use swap::{mediator_pairs, temporal_order, SwapConfig, SwapContext, TemporalOrder};
