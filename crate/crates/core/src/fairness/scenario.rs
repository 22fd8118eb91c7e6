//! Scenario evaluation: cross-validated training under the default setup,
//! with a feature removed, or with reweighed samples, compared against the
//! default on per-fold metric samples.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{fairness_metrics, performance, t_score, FairnessMetrics, Performance};
use super::stats::{cliffs_delta, wilcoxon_rank_sum, wtl_label, Wtl};
use crate::data::{Category, FeaturePartition, FoldSplit, TabularDataset};
use crate::error::{Error, Result};
use crate::model::{fit_logistic_weighted, predict_proba, FitConfig};

/// Per-row weights `P(g) P(c) / P(g, c)` that make group and class
/// independent in the weighted sample.
pub fn reweighing_weights(privileged: &[bool], target: &[u8]) -> Result<Vec<f64>> {
    if privileged.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            found: privileged.len(),
        });
    }
    let mut cells = [[0usize; 2]; 2];
    for (&g, &c) in privileged.iter().zip(target) {
        cells[usize::from(g)][usize::from(c)] += 1;
    }
    for (g, row) in cells.iter().enumerate() {
        for (c, &count) in row.iter().enumerate() {
            if count == 0 {
                return Err(Error::EmptyCell {
                    group: if g == 1 { "privileged" } else { "unprivileged" },
                    class: c as u8,
                });
            }
        }
    }
    let n = target.len() as f64;
    let group_n = [cells[0][0] + cells[0][1], cells[1][0] + cells[1][1]];
    let class_n = [cells[0][0] + cells[1][0], cells[0][1] + cells[1][1]];
    let weight = |g: usize, c: usize| (group_n[g] * class_n[c]) as f64 / (n * cells[g][c] as f64);
    Ok(privileged
        .iter()
        .zip(target)
        .map(|(&g, &c)| weight(usize::from(g), usize::from(c)))
        .collect())
}

/// Reweighing weights for a dataset, with group membership from a feature.
pub fn reweigh(ds: &TabularDataset, partition: &FeaturePartition, privileged: Category) -> Result<Vec<f64>> {
    reweighing_weights(&group_membership(ds, partition, privileged)?, ds.target())
}

/// Marks the rows whose group feature falls in the `privileged` category.
pub fn group_membership(
    ds: &TabularDataset,
    partition: &FeaturePartition,
    privileged: Category,
) -> Result<Vec<bool>> {
    ds.column(partition.feature)
        .iter()
        .map(|&v| match partition.category_of(v) {
            Some(c) => Ok(c == privileged),
            None => Err(Error::ValueOutsidePartition {
                feature: ds.feature_name(partition.feature).to_owned(),
                value: v,
            }),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "feature", rename_all = "snake_case")]
pub enum Scenario {
    Default,
    Drop(String),
    Reweigh,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Default => f.write_str("default"),
            Scenario::Drop(name) => write!(f, "drop:{name}"),
            Scenario::Reweigh => f.write_str("reweigh"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Scenario::Default),
            "reweigh" => Ok(Scenario::Reweigh),
            _ => match s.strip_prefix("drop:") {
                Some(name) if !name.is_empty() => Ok(Scenario::Drop(name.to_owned())),
                _ => Err(Error::InvalidArgument(format!("unknown scenario `{s}`"))),
            },
        }
    }
}

/// The columns of a scenario table, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ACC")]
    Accuracy,
    #[serde(rename = "PRE")]
    Precision,
    #[serde(rename = "Recall")]
    Recall,
    #[serde(rename = "F1")]
    F1,
    #[serde(rename = "F-alarm")]
    FAlarm,
    #[serde(rename = "AOD")]
    Aod,
    #[serde(rename = "SPD")]
    Spd,
    #[serde(rename = "DIR")]
    Dir,
    #[serde(rename = "FPR_D")]
    FprD,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Recall,
        Metric::F1,
        Metric::FAlarm,
        Metric::Aod,
        Metric::Spd,
        Metric::Dir,
        Metric::FprD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "ACC",
            Metric::Precision => "PRE",
            Metric::Recall => "Recall",
            Metric::F1 => "F1",
            Metric::FAlarm => "F-alarm",
            Metric::Aod => "AOD",
            Metric::Spd => "SPD",
            Metric::Dir => "DIR",
            Metric::FprD => "FPR_D",
        }
    }

    /// Performance metrics are better when higher, fairness metrics when
    /// lower (the same orientation the T-Score uses).
    pub fn higher_is_better(self) -> bool {
        matches!(
            self,
            Metric::Accuracy | Metric::Precision | Metric::Recall | Metric::F1
        )
    }

    pub fn value(self, perf: &Performance, fair: &FairnessMetrics) -> Option<f64> {
        Some(match self {
            Metric::Accuracy => perf.accuracy,
            Metric::Precision => perf.precision,
            Metric::Recall => perf.recall,
            Metric::F1 => perf.f1,
            Metric::FAlarm => fair.f_alarm,
            Metric::Aod => fair.aod,
            Metric::Spd => fair.spd,
            Metric::Dir => return fair.dir,
            Metric::FprD => fair.fpr_d,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub performance: Performance,
    pub fairness: FairnessMetrics,
}

impl FoldOutcome {
    pub fn metric(&self, m: Metric) -> Option<f64> {
        m.value(&self.performance, &self.fairness)
    }
}

/// Per-fold outcomes of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub folds: Vec<FoldOutcome>,
}

/// Trains and evaluates one scenario on every fold. `privileged` marks group
/// membership per row of `ds` and is unaffected by dropping the group
/// feature itself. Reweighing weights come from the full dataset.
pub fn evaluate_scenario(
    ds: &TabularDataset,
    fit: &FitConfig,
    scenario: &Scenario,
    privileged: &[bool],
    folds: &[FoldSplit],
) -> Result<ScenarioRun> {
    if privileged.len() != ds.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_rows(),
            found: privileged.len(),
        });
    }
    let (data, weights) = match scenario {
        Scenario::Default => (ds.clone(), None),
        Scenario::Drop(name) => {
            let j = ds
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
            if ds.n_features() == 1 {
                return Err(Error::InvalidArgument(format!(
                    "dropping `{name}` would leave no features"
                )));
            }
            (ds.drop_features(&[j]), None)
        }
        Scenario::Reweigh => (ds.clone(), Some(reweighing_weights(privileged, ds.target())?)),
    };

    let mut outcomes = Vec::with_capacity(folds.len());
    for split in folds {
        let train = data.select_rows(&split.train);
        let test = data.select_rows(&split.test);
        let w: Option<Vec<f64>> = weights
            .as_ref()
            .map(|w| split.train.iter().map(|&i| w[i]).collect());
        let model = fit_logistic_weighted(&train, fit, w.as_deref())?;
        let pred: Vec<u8> = predict_proba(&model, &test)?
            .into_iter()
            .map(|p| u8::from(p >= 0.5))
            .collect();
        let group: Vec<bool> = split.test.iter().map(|&i| privileged[i]).collect();
        outcomes.push(FoldOutcome {
            fold: split.fold,
            performance: performance(test.target(), &pred)?,
            fairness: fairness_metrics(test.target(), &pred, &group)?,
        });
    }
    Ok(ScenarioRun {
        scenario: scenario.clone(),
        folds: outcomes,
    })
}

/// One W/T/L cell. `delta` is oriented so that positive means the scenario
/// improved on the default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: Metric,
    pub p_value: f64,
    pub delta: f64,
    pub label: Wtl,
}

pub fn compare_metric(scenario: &[FoldOutcome], baseline: &[FoldOutcome], metric: Metric) -> Result<MetricComparison> {
    let a: Vec<f64> = scenario.iter().filter_map(|f| f.metric(metric)).collect();
    let b: Vec<f64> = baseline.iter().filter_map(|f| f.metric(metric)).collect();
    if a.is_empty() || b.is_empty() {
        return Ok(MetricComparison {
            metric,
            p_value: 1.0,
            delta: 0.0,
            label: Wtl::Tie,
        });
    }
    let p_value = wilcoxon_rank_sum(&a, &b)?;
    let raw = cliffs_delta(&a, &b)?;
    let delta = if metric.higher_is_better() { raw } else { -raw };
    Ok(MetricComparison {
        metric,
        p_value,
        delta,
        label: wtl_label(p_value, delta),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvaluation {
    pub scenario: Scenario,
    /// Fold means.
    pub performance: Performance,
    pub fairness: FairnessMetrics,
    pub t_score: f64,
    /// 1 is the highest T-Score.
    pub rank: usize,
    pub comparisons: Vec<MetricComparison>,
    pub folds: Vec<FoldOutcome>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn fold_means(folds: &[FoldOutcome]) -> Result<(Performance, FairnessMetrics)> {
    if folds.is_empty() {
        return Err(Error::Empty("fold outcomes"));
    }
    let avg = |m: Metric| mean(folds.iter().filter_map(|f| f.metric(m)));
    let get = |m: Metric| avg(m).unwrap_or(0.0);
    Ok((
        Performance {
            accuracy: get(Metric::Accuracy),
            precision: get(Metric::Precision),
            recall: get(Metric::Recall),
            f1: get(Metric::F1),
        },
        FairnessMetrics {
            f_alarm: get(Metric::FAlarm),
            aod: get(Metric::Aod),
            spd: get(Metric::Spd),
            dir: avg(Metric::Dir),
            fpr_d: get(Metric::FprD),
        },
    ))
}

/// Averages each run, scores and ranks it by T-Score, and compares every
/// metric against `baseline`. Ties in T-Score keep input order.
pub fn summarize_scenarios(runs: &[ScenarioRun], baseline: &ScenarioRun) -> Result<Vec<ScenarioEvaluation>> {
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        let (perf, fair) = fold_means(&run.folds)?;
        let comparisons = Metric::ALL
            .iter()
            .map(|&m| compare_metric(&run.folds, &baseline.folds, m))
            .collect::<Result<Vec<_>>>()?;
        out.push(ScenarioEvaluation {
            scenario: run.scenario.clone(),
            performance: perf,
            fairness: fair,
            t_score: t_score(&perf, &fair),
            rank: 0,
            comparisons,
            folds: run.folds.clone(),
        });
    }
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out[b].t_score.total_cmp(&out[a].t_score).then(a.cmp(&b)));
    for (pos, &i) in order.iter().enumerate() {
        out[i].rank = pos + 1;
    }
    Ok(out)
}
