//! Controlled direct impact, natural direct/indirect impact and their
//! aggregation into rankings, stability scores and bias/importance labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::divergence::{DivergenceKind, DivergenceScores};
use crate::error::{Error, Result};
use crate::model::{predict_proba, prediction_distribution, LogisticModel, PredictionDistribution};
use crate::rng::{derive_seed, rng_from_seed, tag, NO_MEDIATOR};
use crate::swap::{mediator_pairs, select_swap_indices, SwapConfig, SwapContext, TemporalOrder};

pub const DEFAULT_TOP_FRACTION: f64 = 1.0 / 3.0;

fn distribution_of(model: &LogisticModel, ds: &TabularDataset, bins: usize) -> Result<PredictionDistribution> {
    prediction_distribution(&predict_proba(model, ds)?, bins)
}

/// Divergence between predictions on `test` and on `test` with feature `j`
/// swapped in a `cfg.ratio` share of rows. All other columns stay fixed.
pub fn controlled_direct_impact(
    model: &LogisticModel,
    test: &TabularDataset,
    ctx: &SwapContext,
    j: usize,
    cfg: &SwapConfig,
    bins: usize,
) -> Result<DivergenceScores> {
    let baseline = distribution_of(model, test, bins)?;
    cdi_against(model, test, &baseline, ctx, j, cfg, bins)
}

fn cdi_against(
    model: &LogisticModel,
    test: &TabularDataset,
    baseline: &PredictionDistribution,
    ctx: &SwapContext,
    j: usize,
    cfg: &SwapConfig,
    bins: usize,
) -> Result<DivergenceScores> {
    let mut rng = rng_from_seed(cfg.seed);
    let indices = select_swap_indices(test.n_rows(), cfg.ratio, &mut rng)?;
    let swapped = ctx.single_swap(test, j, &indices, cfg.d_max, &mut rng)?;
    let after = distribution_of(model, &swapped.dataset, bins)?;
    DivergenceScores::between(baseline, &after)
}

/// Mediator swapped, then the feature: divergence between the two stages.
pub fn natural_direct_impact(
    model: &LogisticModel,
    test: &TabularDataset,
    ctx: &SwapContext,
    j: usize,
    m: usize,
    cfg: &SwapConfig,
    bins: usize,
) -> Result<DivergenceScores> {
    let mut rng = rng_from_seed(cfg.seed);
    let indices = select_swap_indices(test.n_rows(), cfg.ratio, &mut rng)?;
    let (first, second) = ctx.double_swap_scenario1(test, j, m, &indices, cfg.d_max, &mut rng)?;
    DivergenceScores::between(
        &distribution_of(model, &first.dataset, bins)?,
        &distribution_of(model, &second.dataset, bins)?,
    )
}

/// Feature swapped, then the mediator: divergence between the two stages.
pub fn natural_indirect_impact(
    model: &LogisticModel,
    test: &TabularDataset,
    ctx: &SwapContext,
    j: usize,
    m: usize,
    cfg: &SwapConfig,
    bins: usize,
) -> Result<DivergenceScores> {
    let mut rng = rng_from_seed(cfg.seed);
    let indices = select_swap_indices(test.n_rows(), cfg.ratio, &mut rng)?;
    let (first, second) = ctx.double_swap_scenario2(test, j, m, &indices, cfg.d_max, &mut rng)?;
    DivergenceScores::between(
        &distribution_of(model, &first.dataset, bins)?,
        &distribution_of(model, &second.dataset, bins)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalNaturalImpact {
    pub scores: DivergenceScores,
    pub no_mediators: bool,
}

/// Sum of NDI + NII over every mediator of a feature.
pub fn total_natural_impact(pairs: &[(DivergenceScores, DivergenceScores)]) -> TotalNaturalImpact {
    let scores = pairs
        .iter()
        .fold(DivergenceScores::default(), |acc, (ndi, nii)| acc.add(&ndi.add(nii)));
    TotalNaturalImpact {
        scores,
        no_mediators: pairs.is_empty(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioScores {
    pub ratio: f64,
    pub scores: DivergenceScores,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRatioScores {
    pub ratio: f64,
    pub ndi: DivergenceScores,
    pub nii: DivergenceScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediatorImpact {
    pub mediator: String,
    /// False when the feature or mediator could not be partitioned.
    pub swappable: bool,
    pub ratios: Vec<PairRatioScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImpact {
    pub feature: String,
    pub swappable: bool,
    pub cdi: Vec<RatioScores>,
    pub mediators: Vec<MediatorImpact>,
    pub total_natural: Vec<RatioScores>,
    pub no_mediators: bool,
}

impl FeatureImpact {
    pub fn cdi_at(&self, ratio: f64) -> Option<&DivergenceScores> {
        self.cdi.iter().find(|r| r.ratio == ratio).map(|r| &r.scores)
    }

    pub fn total_at(&self, ratio: f64) -> Option<&DivergenceScores> {
        self.total_natural.iter().find(|r| r.ratio == ratio).map(|r| &r.scores)
    }

    fn recompute_totals(&mut self, ratios: &[f64]) {
        self.no_mediators = self.mediators.is_empty();
        self.total_natural = ratios
            .iter()
            .enumerate()
            .map(|(k, &ratio)| {
                let pairs: Vec<_> = self
                    .mediators
                    .iter()
                    .map(|m| (m.ratios[k].ndi, m.ratios[k].nii))
                    .collect();
                RatioScores {
                    ratio,
                    scores: total_natural_impact(&pairs).scores,
                }
            })
            .collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldImpact {
    pub fold: usize,
    pub features: Vec<FeatureImpact>,
}

/// Per-fold and fold-averaged impact scores, indexed by feature then
/// mediator then swap ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub ratios: Vec<f64>,
    pub folds: Vec<FoldImpact>,
    pub mean: Vec<FeatureImpact>,
}

impl ImpactReport {
    /// Averages per-fold scores; totals are re-summed from the averaged
    /// pairwise scores so they match exactly.
    pub fn from_folds(ratios: Vec<f64>, folds: Vec<FoldImpact>) -> Result<Self> {
        let first = folds.first().ok_or(Error::Empty("fold impacts"))?;
        let mut mean = first.features.clone();
        for (fj, feat) in mean.iter_mut().enumerate() {
            for (k, rs) in feat.cdi.iter_mut().enumerate() {
                rs.scores = DivergenceScores::mean(folds.iter().map(|f| &f.features[fj].cdi[k].scores));
            }
            for (mi, med) in feat.mediators.iter_mut().enumerate() {
                for (k, pr) in med.ratios.iter_mut().enumerate() {
                    pr.ndi = DivergenceScores::mean(
                        folds.iter().map(|f| &f.features[fj].mediators[mi].ratios[k].ndi),
                    );
                    pr.nii = DivergenceScores::mean(
                        folds.iter().map(|f| &f.features[fj].mediators[mi].ratios[k].nii),
                    );
                }
            }
            feat.recompute_totals(&ratios);
        }
        Ok(Self { ratios, folds, mean })
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureImpact> {
        self.mean.iter().find(|f| f.feature == name)
    }

    /// Fold-mean CDI of every feature at `ratio` under `kind`.
    pub fn cdi_scores(&self, ratio: f64, kind: DivergenceKind) -> Vec<f64> {
        self.mean
            .iter()
            .map(|f| f.cdi_at(ratio).map_or(0.0, |s| s[kind]))
            .collect()
    }

    pub fn total_scores(&self, ratio: f64, kind: DivergenceKind) -> Vec<f64> {
        self.mean
            .iter()
            .map(|f| f.total_at(ratio).map_or(0.0, |s| s[kind]))
            .collect()
    }
}

/// Settings for computing every impact score on one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldImpactSettings {
    pub ratios: Vec<f64>,
    pub d_max: Option<f64>,
    pub bins: usize,
    pub master_seed: u64,
}

impl FoldImpactSettings {
    pub fn cdi_seed(&self, fold: usize, j: usize, ratio: f64) -> u64 {
        derive_seed(
            self.master_seed,
            &[tag::CDI, fold as u64, j as u64, NO_MEDIATOR, ratio.to_bits()],
        )
    }

    pub fn pair_seed(&self, fold: usize, j: usize, m: usize, ratio: f64) -> u64 {
        derive_seed(
            self.master_seed,
            &[tag::PAIR, fold as u64, j as u64, m as u64, ratio.to_bits()],
        )
    }
}

/// CDI for every feature and NDI/NII for every mediator pair on one test
/// fold. Both double-swap scenarios of a pair share a seed, hence the same
/// swapped rows.
pub fn fold_impact(
    model: &LogisticModel,
    test: &TabularDataset,
    ctx: &SwapContext,
    order: &TemporalOrder,
    settings: &FoldImpactSettings,
    fold: usize,
) -> Result<FoldImpact> {
    let baseline = distribution_of(model, test, settings.bins)?;
    let pairs = mediator_pairs(order);
    let mut features = Vec::with_capacity(test.n_features());
    for j in 0..test.n_features() {
        let swappable = ctx.is_swappable(j);
        let mut cdi = Vec::with_capacity(settings.ratios.len());
        for &ratio in &settings.ratios {
            let scores = if swappable {
                let cfg = SwapConfig::new(ratio, settings.d_max, settings.cdi_seed(fold, j, ratio))?;
                cdi_against(model, test, &baseline, ctx, j, &cfg, settings.bins)?
            } else {
                DivergenceScores::default()
            };
            cdi.push(RatioScores { ratio, scores });
        }

        let mut mediators = Vec::new();
        for &(_, m) in pairs.iter().filter(|(pj, _)| *pj == j) {
            let pair_ok = swappable && ctx.is_swappable(m);
            let mut ratios = Vec::with_capacity(settings.ratios.len());
            for &ratio in &settings.ratios {
                let (ndi, nii) = if pair_ok {
                    let cfg = SwapConfig::new(ratio, settings.d_max, settings.pair_seed(fold, j, m, ratio))?;
                    (
                        natural_direct_impact(model, test, ctx, j, m, &cfg, settings.bins)?,
                        natural_indirect_impact(model, test, ctx, j, m, &cfg, settings.bins)?,
                    )
                } else {
                    Default::default()
                };
                ratios.push(PairRatioScores { ratio, ndi, nii });
            }
            mediators.push(MediatorImpact {
                mediator: test.feature_name(m).to_owned(),
                swappable: pair_ok,
                ratios,
            });
        }

        let mut feat = FeatureImpact {
            feature: test.feature_name(j).to_owned(),
            swappable,
            cdi,
            mediators,
            total_natural: Vec::new(),
            no_mediators: false,
        };
        feat.recompute_totals(&settings.ratios);
        features.push(feat);
    }
    Ok(FoldImpact { fold, features })
}

/// Ranks derived from a score vector; rank 1 is the highest score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub ranks: Vec<usize>,
    pub scores: Vec<f64>,
}

impl FeatureRanking {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Feature indices from rank 1 downwards.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranks.len()).collect();
        idx.sort_by_key(|&j| self.ranks[j]);
        idx
    }
}

/// Descending-score ranking, ties broken by ascending feature index.
pub fn rank_features(scores: &[f64]) -> FeatureRanking {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; scores.len()];
    for (pos, &j) in idx.iter().enumerate() {
        ranks[j] = pos + 1;
    }
    FeatureRanking {
        ranks,
        scores: scores.to_vec(),
    }
}

/// `1 - sum_i (a_i - b_i)^2 / (m (m^2 - 1))`.
///
/// There is no factor 6 as in Spearman's coefficient. A full reversal has
/// squared rank differences summing to `m (m^2 - 1) / 3`, so values lie in
/// `[2/3, 1]`.
pub fn ranking_stability(a: &FeatureRanking, b: &FeatureRanking) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "ranking stability needs at least two features".into(),
        ));
    }
    // Integer arithmetic keeps the extremes exact (identical rankings give
    // exactly 1, a three-feature reversal exactly 2/3).
    let sq: u128 = a
        .ranks
        .iter()
        .zip(&b.ranks)
        .map(|(&x, &y)| (x.abs_diff(y) as u128).pow(2))
        .sum();
    let m = m as u128;
    let den = m * (m * m - 1);
    Ok((den as f64 - sq as f64) / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BiasImportanceLabel {
    /// More bias-inducing, more important.
    #[serde(rename = "MI_MPhi")]
    MoreBiasMoreImportant,
    /// More bias-inducing, less important.
    #[serde(rename = "MI_LPhi")]
    MoreBiasLessImportant,
    /// Less bias-inducing, more important.
    #[serde(rename = "LI_MPhi")]
    LessBiasMoreImportant,
    /// Less bias-inducing, less important.
    #[serde(rename = "LI_LPhi")]
    LessBiasLessImportant,
    #[serde(rename = "unlabeled")]
    Unlabeled,
}

impl BiasImportanceLabel {
    pub fn code(self) -> &'static str {
        match self {
            Self::MoreBiasMoreImportant => "MI_MPhi",
            Self::MoreBiasLessImportant => "MI_LPhi",
            Self::LessBiasMoreImportant => "LI_MPhi",
            Self::LessBiasLessImportant => "LI_LPhi",
            Self::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for BiasImportanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tier {
    More,
    Less,
}

fn tier(rank: usize, cut: usize, m: usize) -> Option<Tier> {
    if rank <= cut {
        Some(Tier::More)
    } else if rank + cut > m {
        Some(Tier::Less)
    } else {
        None
    }
}

/// Top `ceil(top_fraction * m)` ranks count as "more", the bottom as many
/// as "less". When the bands overlap (small odd `m`) "more" wins.
pub fn label_features(
    bias: &FeatureRanking,
    importance: &FeatureRanking,
    top_fraction: f64,
) -> Result<Vec<BiasImportanceLabel>> {
    if !(top_fraction > 0.0 && top_fraction <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "top fraction {top_fraction} outside (0, 0.5]"
        )));
    }
    if bias.len() != importance.len() {
        return Err(Error::DimensionMismatch {
            expected: bias.len(),
            found: importance.len(),
        });
    }
    let m = bias.len();
    let cut = (top_fraction * m as f64).ceil() as usize;
    Ok(bias
        .ranks
        .iter()
        .zip(&importance.ranks)
        .map(|(&rb, &ri)| match (tier(rb, cut, m), tier(ri, cut, m)) {
            (Some(Tier::More), Some(Tier::More)) => BiasImportanceLabel::MoreBiasMoreImportant,
            (Some(Tier::More), Some(Tier::Less)) => BiasImportanceLabel::MoreBiasLessImportant,
            (Some(Tier::Less), Some(Tier::More)) => BiasImportanceLabel::LessBiasMoreImportant,
            (Some(Tier::Less), Some(Tier::Less)) => BiasImportanceLabel::LessBiasLessImportant,
            _ => BiasImportanceLabel::Unlabeled,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureKind;
    use crate::swap::temporal_order;

    fn fixture() -> (TabularDataset, LogisticModel) {
        let ds = TabularDataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                FeatureKind::Categorical,
                FeatureKind::Continuous,
                FeatureKind::Categorical,
            ],
            vec![
                vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0],
                vec![1.0, 4.0, 2.5, 9.0, 3.0, 7.0, 5.5, 6.0],
                vec![1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0],
            ],
            "y",
            vec![0, 1, 0, 1, 1, 0, 1, 0],
        )
        .unwrap();
        let model = LogisticModel::from_parameters(
            ds.column_names().to_vec(),
            vec![2.0, 0.0, -1.0],
            0.1,
        );
        (ds, model)
    }

    #[test]
    fn zero_weight_continuous_feature_has_no_direct_impact() {
        let (ds, model) = fixture();
        let ctx = SwapContext::from_dataset(&ds);
        for seed in 0..10 {
            let cfg = SwapConfig::new(0.7, None, seed).unwrap();
            let s = controlled_direct_impact(&model, &ds, &ctx, 1, &cfg, 10).unwrap();
            assert_eq!(s, DivergenceScores::default());
        }
    }

    #[test]
    fn empty_swap_set_scores_zero() {
        let (ds, model) = fixture();
        let ctx = SwapContext::from_dataset(&ds);
        // round(0.01 * 8) = 0 rows selected.
        let cfg = SwapConfig::new(0.01, None, 1).unwrap();
        assert_eq!(
            controlled_direct_impact(&model, &ds, &ctx, 0, &cfg, 10).unwrap(),
            DivergenceScores::default()
        );
        assert_eq!(
            natural_direct_impact(&model, &ds, &ctx, 0, 2, &cfg, 10).unwrap(),
            DivergenceScores::default()
        );
        assert_eq!(
            natural_indirect_impact(&model, &ds, &ctx, 0, 2, &cfg, 10).unwrap(),
            DivergenceScores::default()
        );
    }

    #[test]
    fn zero_weight_feature_or_mediator_contributes_nothing() {
        let (ds, model) = fixture();
        let ctx = SwapContext::from_dataset(&ds);
        let cfg = SwapConfig::new(1.0, None, 4).unwrap();
        // NDI compares X' and X'' that differ only in column j = b.
        assert_eq!(
            natural_direct_impact(&model, &ds, &ctx, 1, 2, &cfg, 10).unwrap(),
            DivergenceScores::default()
        );
        // NII compares stages that differ only in mediator m = b.
        assert_eq!(
            natural_indirect_impact(&model, &ds, &ctx, 0, 1, &cfg, 10).unwrap(),
            DivergenceScores::default()
        );
        let nonzero = natural_direct_impact(&model, &ds, &ctx, 0, 2, &cfg, 10).unwrap();
        assert!(nonzero.total_variation > 0.0);
    }

    #[test]
    fn totals_sum_pairs() {
        let s = |v: f64| DivergenceScores {
            hellinger: v,
            total_variation: v,
            wasserstein: v,
            jensen_shannon: v,
        };
        let t = total_natural_impact(&[(s(0.1), s(0.2)), (s(0.3), s(0.4))]);
        assert!((t.scores.hellinger - 1.0).abs() < 1e-12);
        assert!(!t.no_mediators);
        let none = total_natural_impact(&[]);
        assert!(none.no_mediators);
        assert_eq!(none.scores, DivergenceScores::default());
    }

    #[test]
    fn fold_impact_shape_and_totals() {
        let (ds, model) = fixture();
        let ctx = SwapContext::from_dataset(&ds);
        let order = temporal_order::<&str>(&ds, &[], false).unwrap();
        let settings = FoldImpactSettings {
            ratios: vec![0.25, 0.5],
            d_max: Some(0.2),
            bins: 10,
            master_seed: 9,
        };
        let fi = fold_impact(&model, &ds, &ctx, &order, &settings, 0).unwrap();
        assert_eq!(fi.features.len(), 3);
        let n_pairs: usize = fi.features.iter().map(|f| f.mediators.len()).sum();
        assert_eq!(n_pairs, 3);
        let last = order.order[2];
        assert!(fi.features[last].no_mediators);
        for f in &fi.features {
            assert_eq!(f.cdi.len(), 2);
            for (k, total) in f.total_natural.iter().enumerate() {
                let sum: f64 = f
                    .mediators
                    .iter()
                    .map(|m| m.ratios[k].ndi.hellinger + m.ratios[k].nii.hellinger)
                    .sum();
                assert!((total.scores.hellinger - sum).abs() < 1e-9);
            }
        }
        let report = ImpactReport::from_folds(settings.ratios.clone(), vec![fi.clone(), fi.clone()]).unwrap();
        assert_eq!(report.mean, fi.features);
    }

    #[test]
    fn ranking_examples() {
        assert_eq!(rank_features(&[0.5, 0.2, 0.9]).ranks, vec![2, 3, 1]);
        assert_eq!(rank_features(&[0.3, 0.3, 0.3]).ranks, vec![1, 2, 3]);
        assert_eq!(rank_features(&[4.0]).ranks, vec![1]);
        assert_eq!(rank_features(&[0.5, 0.2, 0.9]).order(), vec![2, 0, 1]);
    }

    #[test]
    fn stability_examples() {
        let a = rank_features(&[3.0, 2.0, 1.0]);
        let b = rank_features(&[1.0, 2.0, 3.0]);
        assert_eq!(ranking_stability(&a, &a).unwrap(), 1.0);
        // 1 - (4 + 0 + 4) / (3 * 8)
        assert_eq!(ranking_stability(&a, &b).unwrap(), 2.0 / 3.0);
        assert!(ranking_stability(&a, &rank_features(&[1.0, 2.0])).is_err());
        let one = rank_features(&[1.0]);
        assert!(ranking_stability(&one, &one).is_err());
    }

    #[test]
    fn labeling_examples() {
        let m = 9;
        let bias = rank_features(&(0..m).map(|i| (m - i) as f64).collect::<Vec<_>>());
        let imp_rev = rank_features(&(0..m).map(|i| i as f64).collect::<Vec<_>>());
        let labels = label_features(&bias, &imp_rev, 1.0 / 3.0).unwrap();
        assert_eq!(labels[0], BiasImportanceLabel::MoreBiasLessImportant);
        assert_eq!(labels[m - 1], BiasImportanceLabel::LessBiasMoreImportant);
        let same = label_features(&bias, &bias, 1.0 / 3.0).unwrap();
        assert_eq!(same[0], BiasImportanceLabel::MoreBiasMoreImportant);
        assert_eq!(same[m - 1], BiasImportanceLabel::LessBiasLessImportant);
        // rank 5 of 9 is mid-pack
        assert_eq!(same[4], BiasImportanceLabel::Unlabeled);
        assert!(label_features(&bias, &bias, 0.7).is_err());
        assert!(label_features(&bias, &rank_features(&[1.0]), 0.3).is_err());
    }
}
