//! End-to-end audit: load, filter, cross-validate, swap, attribute, rank,
//! label, evaluate scenarios and write reports.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{global_importance, shap_linear};
use crate::data::{
    drop_correlated, kfold_split, load_csv_with, Category, FeatureKind, FeatureSchema, FoldSplit,
    LoadOptions, TabularDataset, DEFAULT_CORRELATION_THRESHOLD,
};
use crate::divergence::DivergenceKind;
use crate::error::{Error, Result, StageExt};
use crate::fairness::{
    evaluate_scenario, group_membership, summarize_scenarios, DirDisplay, Metric, Scenario,
    ScenarioEvaluation,
};
use crate::impact::{
    fold_impact, label_features, rank_features, ranking_stability, BiasImportanceLabel,
    FeatureRanking, FoldImpact, FoldImpactSettings, ImpactReport, DEFAULT_TOP_FRACTION,
};
use crate::model::{fit_logistic, FitConfig, DEFAULT_BINS};
use crate::rng::{derive_seed, tag};
use crate::swap::{temporal_order, SwapContext, TemporalOrder, DEFAULT_MAX_DISTORTION, DEFAULT_SWAP_RATIO};

pub const DEFAULT_RATIOS: [f64; 4] = [0.1, 0.3, 0.5, 0.7];
pub const DEFAULT_FOLDS: usize = 10;
pub const PLOT_HEADER: [&str; 5] = ["feature", "ratio", "divergence", "metric", "value"];

/// A scenario as written in the config. `drop_most_biased` resolves to the
/// top feature of the bias ranking once impacts are known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScenarioSpec {
    Fixed(Scenario),
    DropMostBiased,
}

impl fmt::Display for ScenarioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSpec::Fixed(s) => s.fmt(f),
            ScenarioSpec::DropMostBiased => f.write_str("drop_most_biased"),
        }
    }
}

impl FromStr for ScenarioSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "drop_most_biased" {
            Ok(ScenarioSpec::DropMostBiased)
        } else {
            s.parse().map(ScenarioSpec::Fixed)
        }
    }
}

impl TryFrom<String> for ScenarioSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScenarioSpec> for String {
    fn from(s: ScenarioSpec) -> Self {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub data: PathBuf,
    pub target: String,
    pub positive_label: Option<String>,
    pub kind_overrides: BTreeMap<String, FeatureKind>,
    /// Feature defining the fairness groups. Defaults to the most
    /// bias-inducing feature.
    pub group_feature: Option<String>,
    pub privileged: Category,
    /// User-declared temporal prefix, earliest first.
    pub temporal_order: Vec<String>,
    pub strict_order: bool,
    pub ratios: Vec<f64>,
    /// `null` disables the distortion bound.
    pub d_max: Option<f64>,
    pub bins: usize,
    pub folds: usize,
    pub correlation_threshold: f64,
    pub seed: u64,
    pub divergences: Vec<DivergenceKind>,
    pub scenarios: Vec<ScenarioSpec>,
    /// Swap ratio whose rankings drive labels and `drop_most_biased`.
    pub ranking_ratio: f64,
    pub label_divergence: DivergenceKind,
    pub top_fraction: f64,
    pub fit: FitConfig,
    /// Worker threads for fold and scenario fan-out; 0 uses every core.
    pub threads: usize,
    pub output_dir: PathBuf,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::new(),
            target: String::new(),
            positive_label: None,
            kind_overrides: BTreeMap::new(),
            group_feature: None,
            privileged: Category::Upper,
            temporal_order: Vec::new(),
            strict_order: false,
            ratios: DEFAULT_RATIOS.to_vec(),
            d_max: Some(DEFAULT_MAX_DISTORTION),
            bins: DEFAULT_BINS,
            folds: DEFAULT_FOLDS,
            correlation_threshold: DEFAULT_CORRELATION_THRESHOLD,
            seed: 0,
            divergences: DivergenceKind::ALL.to_vec(),
            scenarios: vec![
                ScenarioSpec::Fixed(Scenario::Default),
                ScenarioSpec::DropMostBiased,
                ScenarioSpec::Fixed(Scenario::Reweigh),
            ],
            ranking_ratio: DEFAULT_SWAP_RATIO,
            label_divergence: DivergenceKind::Hellinger,
            top_fraction: DEFAULT_TOP_FRACTION,
            fit: FitConfig::default(),
            threads: 0,
            output_dir: PathBuf::from("audit-out"),
        }
    }
}

impl AuditConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Reads a JSON config; a relative `data` path is taken relative to the
    /// config file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if cfg.data.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.data = dir.join(&cfg.data);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.target.is_empty() {
            return bad("target column is not set".into());
        }
        if self.ratios.is_empty() {
            return bad("no swap ratios".into());
        }
        if let Some(&r) = self.ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidRatio(r));
        }
        for (i, r) in self.ratios.iter().enumerate() {
            if self.ratios[..i].contains(r) {
                return bad(format!("swap ratio {r} listed twice"));
            }
        }
        if !self.ratios.contains(&self.ranking_ratio) {
            return bad(format!(
                "ranking ratio {} is not one of the swap ratios",
                self.ranking_ratio
            ));
        }
        if self.folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.folds));
        }
        if self.bins < 2 {
            return bad(format!("need at least 2 bins, got {}", self.bins));
        }
        if let Some(d) = self.d_max {
            if !(d >= 0.0) {
                return bad(format!("d_max {d} must be non-negative"));
            }
        }
        if self.divergences.is_empty() {
            return bad("no divergences selected".into());
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 0.5) {
            return bad(format!("top fraction {} outside (0, 0.5]", self.top_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapKind {
    /// Controlled direct impact.
    Single,
    /// Total natural impact over mediators.
    Double,
}

impl SwapKind {
    pub fn name(self) -> &'static str {
        match self {
            SwapKind::Single => "single",
            SwapKind::Double => "double",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRanking {
    pub swap: SwapKind,
    pub ratio: f64,
    pub divergence: DivergenceKind,
    pub ranking: FeatureRanking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub swap: SwapKind,
    pub ratio: f64,
    pub divergence: DivergenceKind,
    /// Agreement between this bias ranking and the importance ranking.
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Mean absolute attribution per feature, one vector per fold.
    pub per_fold: Vec<Vec<f64>>,
    pub base_values: Vec<f64>,
    pub mean: Vec<f64>,
    pub ranking: FeatureRanking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLabel {
    pub feature: String,
    pub bias_rank: usize,
    pub importance_rank: usize,
    pub label: BiasImportanceLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub version: String,
    pub config: AuditConfig,
    pub n_rows: usize,
    pub schema: FeatureSchema,
    pub dropped_correlated: Vec<String>,
    pub temporal_order: TemporalOrder,
    pub impact: ImpactReport,
    pub importance: ImportanceReport,
    pub rankings: Vec<BiasRanking>,
    pub stability: Vec<StabilityRow>,
    pub labels: Vec<FeatureLabel>,
    pub group_feature: Option<String>,
    pub scenarios: Vec<ScenarioEvaluation>,
}

impl AuditReport {
    pub fn ranking(&self, swap: SwapKind, ratio: f64, divergence: DivergenceKind) -> Option<&FeatureRanking> {
        self.rankings
            .iter()
            .find(|r| r.swap == swap && r.ratio == ratio && r.divergence == divergence)
            .map(|r| &r.ranking)
    }
}

struct FoldResult {
    impact: FoldImpact,
    importance: Vec<f64>,
    base_value: f64,
}

fn run_fold(
    ds: &TabularDataset,
    split: &FoldSplit,
    ctx: &SwapContext,
    order: &TemporalOrder,
    settings: &FoldImpactSettings,
    fit: &FitConfig,
) -> Result<FoldResult> {
    let train = ds.select_rows(&split.train);
    let test = ds.select_rows(&split.test);
    let model = fit_logistic(&train, fit).stage("fit")?;
    debug!(
        "fold {}: trained in {} iterations",
        split.fold,
        model.training.as_ref().map_or(0, |t| t.iterations)
    );
    let impact = fold_impact(&model, &test, ctx, order, settings, split.fold).stage("impact")?;
    let attr = shap_linear(&model, &test).stage("attribution")?;
    let importance = global_importance(&attr).stage("attribution")?;
    Ok(FoldResult {
        impact,
        importance,
        base_value: attr.base_value,
    })
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Runs the whole audit in memory. Nothing is written; see [`write_report`].
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate().stage("config")?;
    let pool = thread_pool(cfg.threads).stage("config")?;

    let opts = LoadOptions {
        target: cfg.target.clone(),
        positive_label: cfg.positive_label.clone(),
        kind_overrides: cfg.kind_overrides.clone(),
    };
    let raw = load_csv_with(&cfg.data, &opts).stage("load")?;
    info!("loaded {} rows x {} features", raw.n_rows(), raw.n_features());

    let (ds, dropped) = drop_correlated(&raw, cfg.correlation_threshold).stage("correlation")?;
    if !dropped.is_empty() {
        info!("dropped correlated features: {}", dropped.join(", "));
    }

    let order = temporal_order(&ds, &cfg.temporal_order, cfg.strict_order).stage("order")?;
    debug!("temporal order: {}", order.ordered_names().join(" < "));

    let folds = kfold_split(ds.n_rows(), cfg.folds, derive_seed(cfg.seed, &[tag::FOLDS])).stage("folds")?;
    let ctx = SwapContext::from_dataset(&ds);
    for j in (0..ds.n_features()).filter(|&j| !ctx.is_swappable(j)) {
        warn!("feature `{}` is constant and will not be swapped", ds.feature_name(j));
    }
    let settings = FoldImpactSettings {
        ratios: cfg.ratios.clone(),
        d_max: cfg.d_max,
        bins: cfg.bins,
        master_seed: cfg.seed,
    };

    let fold_results: Vec<FoldResult> = pool.install(|| {
        folds
            .par_iter()
            .map(|split| run_fold(&ds, split, &ctx, &order, &settings, &cfg.fit))
            .collect::<Result<Vec<_>>>()
    })?;
    info!("computed impacts on {} folds", fold_results.len());

    let mut per_fold = Vec::with_capacity(fold_results.len());
    let mut base_values = Vec::with_capacity(fold_results.len());
    let mut impacts = Vec::with_capacity(fold_results.len());
    for r in fold_results {
        per_fold.push(r.importance);
        base_values.push(r.base_value);
        impacts.push(r.impact);
    }
    let impact = ImpactReport::from_folds(cfg.ratios.clone(), impacts).stage("aggregate")?;
    let m = ds.n_features();
    let mean_importance: Vec<f64> = (0..m)
        .map(|j| per_fold.iter().map(|v| v[j]).sum::<f64>() / per_fold.len() as f64)
        .collect();
    let importance_ranking = rank_features(&mean_importance);

    let mut rankings = Vec::new();
    let mut stability = Vec::new();
    for swap in [SwapKind::Single, SwapKind::Double] {
        for &ratio in &cfg.ratios {
            for &divergence in &cfg.divergences {
                let scores = match swap {
                    SwapKind::Single => impact.cdi_scores(ratio, divergence),
                    SwapKind::Double => impact.total_scores(ratio, divergence),
                };
                let ranking = rank_features(&scores);
                if m >= 2 {
                    stability.push(StabilityRow {
                        swap,
                        ratio,
                        divergence,
                        stability: ranking_stability(&ranking, &importance_ranking).stage("ranking")?,
                    });
                }
                rankings.push(BiasRanking {
                    swap,
                    ratio,
                    divergence,
                    ranking,
                });
            }
        }
    }

    let bias_ranking = rank_features(&impact.cdi_scores(cfg.ranking_ratio, cfg.label_divergence));
    let labels = label_features(&bias_ranking, &importance_ranking, cfg.top_fraction)
        .stage("labels")?
        .into_iter()
        .enumerate()
        .map(|(j, label)| FeatureLabel {
            feature: ds.feature_name(j).to_owned(),
            bias_rank: bias_ranking.ranks[j],
            importance_rank: importance_ranking.ranks[j],
            label,
        })
        .collect();
    let most_biased = ds.feature_name(bias_ranking.order()[0]).to_owned();

    let (group_feature, scenarios) = if cfg.scenarios.is_empty() {
        (None, Vec::new())
    } else {
        let group = cfg.group_feature.clone().unwrap_or_else(|| most_biased.clone());
        let evals = run_scenarios(cfg, &ds, &ctx, &folds, &group, &most_biased, &pool).stage("scenarios")?;
        (Some(group), evals)
    };

    Ok(AuditReport {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: cfg.clone(),
        n_rows: ds.n_rows(),
        schema: ds.schema(),
        dropped_correlated: dropped,
        temporal_order: order,
        impact,
        importance: ImportanceReport {
            per_fold,
            base_values,
            mean: mean_importance,
            ranking: importance_ranking,
        },
        rankings,
        stability,
        labels,
        group_feature,
        scenarios,
    })
}

fn run_scenarios(
    cfg: &AuditConfig,
    ds: &TabularDataset,
    ctx: &SwapContext,
    folds: &[FoldSplit],
    group: &str,
    most_biased: &str,
    pool: &rayon::ThreadPool,
) -> Result<Vec<ScenarioEvaluation>> {
    let g = ds
        .feature_index(group)
        .ok_or_else(|| Error::UnknownFeature(group.to_owned()))?;
    let privileged = group_membership(ds, ctx.partition(g)?, cfg.privileged)?;

    // The default run is the comparison baseline and always comes first.
    let mut list = vec![Scenario::Default];
    for spec in &cfg.scenarios {
        let s = match spec {
            ScenarioSpec::Fixed(s) => s.clone(),
            ScenarioSpec::DropMostBiased => Scenario::Drop(most_biased.to_owned()),
        };
        if !list.contains(&s) {
            list.push(s);
        }
    }
    let runs = pool.install(|| {
        list.par_iter()
            .map(|s| evaluate_scenario(ds, &cfg.fit, s, &privileged, folds))
            .collect::<Result<Vec<_>>>()
    })?;
    summarize_scenarios(&runs, &runs[0])
}

/// One long-format plot record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub feature: String,
    pub ratio: Option<f64>,
    pub divergence: Option<DivergenceKind>,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotData {
    pub single_swap: Vec<PlotRow>,
    pub double_swap: Vec<PlotRow>,
    pub importance: Vec<PlotRow>,
}

/// Flattens fold-mean impacts and importances into long-format rows,
/// restricted to the configured divergences.
pub fn emit_plot_data(report: &AuditReport) -> PlotData {
    let kinds = &report.config.divergences;
    let mut out = PlotData::default();
    for feat in &report.impact.mean {
        let row = |ratio: f64, kind: DivergenceKind, metric: String, value: f64| PlotRow {
            feature: feat.feature.clone(),
            ratio: Some(ratio),
            divergence: Some(kind),
            metric,
            value,
        };
        for rs in &feat.cdi {
            for &k in kinds {
                out.single_swap.push(row(rs.ratio, k, "cdi".into(), rs.scores[k]));
            }
        }
        for (idx, rs) in feat.total_natural.iter().enumerate() {
            for &k in kinds {
                out.double_swap
                    .push(row(rs.ratio, k, "total_natural".into(), rs.scores[k]));
                if feat.no_mediators {
                    out.double_swap.push(row(rs.ratio, k, "no_mediators".into(), 1.0));
                }
                for med in &feat.mediators {
                    let pr = &med.ratios[idx];
                    out.double_swap
                        .push(row(rs.ratio, k, format!("ndi:{}", med.mediator), pr.ndi[k]));
                    out.double_swap
                        .push(row(rs.ratio, k, format!("nii:{}", med.mediator), pr.nii[k]));
                }
            }
        }
    }
    for (name, &value) in report.schema.names.iter().zip(&report.importance.mean) {
        out.importance.push(PlotRow {
            feature: name.clone(),
            ratio: None,
            divergence: None,
            metric: "shap_phi".into(),
            value,
        });
    }
    out
}

pub fn write_plot_csv<W: Write>(rows: &[PlotRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(PLOT_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<plot csv>", e))?;
    Ok(())
}

pub fn read_plot_csv<R: Read>(reader: R) -> Result<Vec<PlotRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != PLOT_HEADER {
        return Err(Error::InvalidArgument(format!(
            "unexpected plot header {}",
            header.join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn write_scenarios_csv<W: Write>(scenarios: &[ScenarioEvaluation], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["scenario"];
    header.extend(Metric::ALL.iter().map(|m| m.name()));
    header.extend(["T-Score", "Rank"]);
    w.write_record(&header)?;
    for s in scenarios {
        let p = &s.performance;
        let f = &s.fairness;
        w.write_record([
            s.scenario.to_string(),
            p.accuracy.to_string(),
            p.precision.to_string(),
            p.recall.to_string(),
            p.f1.to_string(),
            f.f_alarm.to_string(),
            f.aod.to_string(),
            f.spd.to_string(),
            DirDisplay(f.dir).to_string(),
            f.fpr_d.to_string(),
            s.t_score.to_string(),
            s.rank.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scenario csv>", e))?;
    Ok(())
}

fn write_wtl_csv<W: Write>(scenarios: &[ScenarioEvaluation], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scenario", "metric", "p_value", "delta", "label"])?;
    for s in scenarios {
        for c in &s.comparisons {
            w.write_record([
                s.scenario.to_string(),
                c.metric.name().to_owned(),
                c.p_value.to_string(),
                c.delta.to_string(),
                c.label.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<wtl csv>", e))?;
    Ok(())
}

fn write_stability_csv<W: Write>(rows: &[StabilityRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["swap", "ratio", "divergence", "stability"])?;
    for r in rows {
        w.write_record([
            r.swap.name().to_owned(),
            r.ratio.to_string(),
            r.divergence.name().to_owned(),
            r.stability.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<stability csv>", e))?;
    Ok(())
}

fn write_labels_csv<W: Write>(labels: &[FeatureLabel], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["feature", "bias_rank", "importance_rank", "label"])?;
    for l in labels {
        w.write_record([
            l.feature.clone(),
            l.bias_rank.to_string(),
            l.importance_rank.to_string(),
            l.label.code().to_owned(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<labels csv>", e))?;
    Ok(())
}

pub const REPORT_FILES: [&str; 8] = [
    "report.json",
    "single_swap.csv",
    "double_swap.csv",
    "importance.csv",
    "stability.csv",
    "labels.csv",
    "scenarios.csv",
    "wtl.csv",
];

/// Renders every report file in memory, in [`REPORT_FILES`] order.
pub fn render_report(report: &AuditReport) -> Result<Vec<(&'static str, Vec<u8>)>> {
    let plots = emit_plot_data(report);
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    let mut files = vec![("report.json", json)];
    let mut add = |name: &'static str, f: &dyn Fn(&mut Vec<u8>) -> Result<()>| -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        files.push((name, buf));
        Ok(())
    };
    add("single_swap.csv", &|b| write_plot_csv(&plots.single_swap, b))?;
    add("double_swap.csv", &|b| write_plot_csv(&plots.double_swap, b))?;
    add("importance.csv", &|b| write_plot_csv(&plots.importance, b))?;
    add("stability.csv", &|b| write_stability_csv(&report.stability, b))?;
    add("labels.csv", &|b| write_labels_csv(&report.labels, b))?;
    add("scenarios.csv", &|b| write_scenarios_csv(&report.scenarios, b))?;
    add("wtl.csv", &|b| write_wtl_csv(&report.scenarios, b))?;
    Ok(files)
}

/// Writes every report file into `dir`. All files are rendered before the
/// first one is written.
pub fn write_report(report: &AuditReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let files = render_report(report).stage("write")?;
    fs::create_dir_all(dir)
        .map_err(|e| Error::io(dir, e))
        .stage("write")?;
    let mut written = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Error::io(&path, e))
            .stage("write")?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_report(dir: impl AsRef<Path>) -> Result<AuditReport> {
    let path = dir.as_ref().join("report.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}
