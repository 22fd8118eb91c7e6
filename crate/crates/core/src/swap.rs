//! Feature swapping: replacing a feature's value with one drawn from the
//! opposite partition category, alone or together with a mediator, under a
//! swap ratio and a distortion ceiling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{partition_feature, FeaturePartition, FeatureSchema, TabularDataset};
use crate::error::{Error, Result};

pub const DEFAULT_SWAP_RATIO: f64 = 0.5;
pub const DEFAULT_MAX_DISTORTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapConfig {
    pub ratio: f64,
    /// `None` means unbounded.
    pub d_max: Option<f64>,
    pub seed: u64,
}

impl SwapConfig {
    pub fn new(ratio: f64, d_max: Option<f64>, seed: u64) -> Result<Self> {
        check_ratio(ratio)?;
        if let Some(d) = d_max {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "maximum distortion {d} must be finite and >= 0"
                )));
            }
        }
        Ok(Self { ratio, d_max, seed })
    }
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            ratio: DEFAULT_SWAP_RATIO,
            d_max: Some(DEFAULT_MAX_DISTORTION),
            seed: 0,
        }
    }
}

fn check_ratio(r: f64) -> Result<()> {
    if r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRatio(r))
    }
}

/// Draws `round(ratio * n)` distinct row indices, returned in ascending order.
pub fn select_swap_indices<R: Rng + ?Sized>(n: usize, ratio: f64, rng: &mut R) -> Result<Vec<usize>> {
    check_ratio(ratio)?;
    let k = ((ratio * n as f64).round() as usize).min(n);
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Mixed-type distortion between two rows: categorical mismatches count 1
/// each, continuous differences are scaled by the feature's observed range.
pub fn distortion(u: &[f64], v: &[f64], schema: &FeatureSchema) -> f64 {
    u.iter()
        .zip(v)
        .enumerate()
        .map(|(j, (&a, &b))| {
            if schema.is_categorical(j) {
                if a != b {
                    1.0
                } else {
                    0.0
                }
            } else {
                (a - b).abs() / schema.range(j)
            }
        })
        .sum()
}

/// Uniform draw from the observed values of the category opposite to
/// `current`. Single-member categories are returned without touching `rng`.
pub fn alternate_value<R: Rng + ?Sized>(
    partition: &FeaturePartition,
    current: f64,
    rng: &mut R,
) -> Result<f64> {
    let category = partition
        .category_of(current)
        .ok_or_else(|| Error::ValueOutsidePartition {
            feature: format!("#{}", partition.feature),
            value: current,
        })?;
    let options = partition.members(category.opposite());
    match options.len() {
        0 => Err(Error::InvalidArgument(format!(
            "partition of feature #{} has an empty category",
            partition.feature
        ))),
        1 => Ok(options[0]),
        n => Ok(options[rng.random_range(0..n)]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapResult {
    pub dataset: TabularDataset,
    /// Rows actually changed, ascending.
    pub altered: Vec<usize>,
    /// Distortion of each altered row, parallel to `altered`.
    pub distortions: Vec<f64>,
}

/// Single-feature swap. Categorical swaps always apply; continuous swaps
/// apply only when the row's distortion stays within `d_max`.
pub fn single_swap<R: Rng + ?Sized>(
    ds: &TabularDataset,
    partition: &FeaturePartition,
    schema: &FeatureSchema,
    indices: &[usize],
    d_max: Option<f64>,
    rng: &mut R,
) -> Result<SwapResult> {
    let j = partition.feature;
    ds.check_feature(j)?;
    let bounded = !schema.is_categorical(j);
    let mut out = ds.clone();
    let mut altered = Vec::new();
    let mut distortions = Vec::new();
    let mut u = Vec::with_capacity(ds.n_features());
    let mut v = Vec::with_capacity(ds.n_features());
    for &i in indices {
        let current = ds.value(i, j);
        let candidate = alternate_value(partition, current, rng).map_err(|e| match e {
            Error::ValueOutsidePartition { value, .. } => Error::ValueOutsidePartition {
                feature: ds.feature_name(j).to_owned(),
                value,
            },
            other => other,
        })?;
        ds.row_into(i, &mut u);
        v.clone_from(&u);
        v[j] = candidate;
        let d = distortion(&u, &v, schema);
        let allowed = match d_max {
            Some(limit) if bounded => d <= limit,
            _ => true,
        };
        if allowed && candidate != current {
            out.column_mut(j)[i] = candidate;
            altered.push(i);
            distortions.push(d);
        }
    }
    Ok(SwapResult {
        dataset: out,
        altered,
        distortions,
    })
}

/// Schema and per-feature partitions of a reference dataset, reused across
/// every swap of an analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapContext {
    pub schema: FeatureSchema,
    pub partitions: Vec<Option<FeaturePartition>>,
}

impl SwapContext {
    pub fn from_dataset(ds: &TabularDataset) -> Self {
        let partitions = (0..ds.n_features())
            .map(|j| partition_feature(ds, j).ok())
            .collect();
        Self {
            schema: ds.schema(),
            partitions,
        }
    }

    pub fn partition(&self, j: usize) -> Result<&FeaturePartition> {
        match self.partitions.get(j) {
            Some(Some(p)) => Ok(p),
            Some(None) => Err(Error::ConstantFeature(self.schema.names[j].clone())),
            None => Err(Error::FeatureOutOfRange {
                index: j,
                n_features: self.partitions.len(),
            }),
        }
    }

    pub fn is_swappable(&self, j: usize) -> bool {
        matches!(self.partitions.get(j), Some(Some(_)))
    }

    pub fn single_swap<R: Rng + ?Sized>(
        &self,
        ds: &TabularDataset,
        j: usize,
        indices: &[usize],
        d_max: Option<f64>,
        rng: &mut R,
    ) -> Result<SwapResult> {
        single_swap(ds, self.partition(j)?, &self.schema, indices, d_max, rng)
    }

    /// Mediator first, then the feature: returns `(X', X'')` where `X'` has
    /// `m` swapped and `X''` additionally has `j` swapped.
    pub fn double_swap_scenario1<R: Rng + ?Sized>(
        &self,
        ds: &TabularDataset,
        j: usize,
        m: usize,
        indices: &[usize],
        d_max: Option<f64>,
        rng: &mut R,
    ) -> Result<(SwapResult, SwapResult)> {
        let first = self.single_swap(ds, m, indices, d_max, rng)?;
        let second = self.single_swap(&first.dataset, j, indices, d_max, rng)?;
        Ok((first, second))
    }

    /// Feature first, then the mediator.
    pub fn double_swap_scenario2<R: Rng + ?Sized>(
        &self,
        ds: &TabularDataset,
        j: usize,
        m: usize,
        indices: &[usize],
        d_max: Option<f64>,
        rng: &mut R,
    ) -> Result<(SwapResult, SwapResult)> {
        let first = self.single_swap(ds, j, indices, d_max, rng)?;
        let second = self.single_swap(&first.dataset, m, indices, d_max, rng)?;
        Ok((first, second))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UserSpecified,
    StatisticallyInferred,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRelation {
    pub earlier: usize,
    pub later: usize,
    pub provenance: Provenance,
    /// Set on user relations where the earlier event is not strictly more
    /// frequent than the later one.
    pub violates_frequency: bool,
}

/// Total order over features: the user-specified prefix first, then the
/// remaining features by descending event frequency (ties by index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalOrder {
    pub names: Vec<String>,
    /// Feature indices in temporal order.
    pub order: Vec<usize>,
    /// Position of each feature index within `order`.
    pub position: Vec<usize>,
    /// Empirical frequency of each feature's lower category.
    pub event_frequency: Vec<f64>,
    pub relations: Vec<OrderRelation>,
}

impl TemporalOrder {
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    pub fn ordered_names(&self) -> Vec<&str> {
        self.order.iter().map(|&j| self.names[j].as_str()).collect()
    }

    pub fn violations(&self) -> impl Iterator<Item = &OrderRelation> {
        self.relations.iter().filter(|r| r.violates_frequency)
    }
}

pub fn temporal_order<S: AsRef<str>>(
    ds: &TabularDataset,
    user_partial: &[S],
    strict: bool,
) -> Result<TemporalOrder> {
    let m = ds.n_features();
    let mut prefix = Vec::with_capacity(user_partial.len());
    for name in user_partial {
        let name = name.as_ref();
        let j = ds
            .feature_index(name)
            .ok_or_else(|| Error::UnknownFeature(name.to_owned()))?;
        if prefix.contains(&j) {
            return Err(Error::DuplicateFeature(name.to_owned()));
        }
        prefix.push(j);
    }

    // Constant features form a single event observed in every row.
    let event_frequency: Vec<f64> = (0..m)
        .map(|j| match partition_feature(ds, j) {
            Ok(p) => p.lower_frequency(ds.column(j)),
            Err(_) => 1.0,
        })
        .collect();

    let mut rest: Vec<usize> = (0..m).filter(|j| !prefix.contains(j)).collect();
    rest.sort_by(|&a, &b| {
        event_frequency[b]
            .total_cmp(&event_frequency[a])
            .then(a.cmp(&b))
    });
    let user_len = prefix.len();
    let order: Vec<usize> = prefix.into_iter().chain(rest).collect();
    let mut position = vec![0; m];
    for (pos, &j) in order.iter().enumerate() {
        position[j] = pos;
    }

    let mut relations = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            let (earlier, later) = (order[a], order[b]);
            let user = b < user_len;
            let violates =
                user && !(event_frequency[earlier] > event_frequency[later]);
            if violates {
                let err = Error::OrderViolation {
                    earlier: ds.feature_name(earlier).to_owned(),
                    later: ds.feature_name(later).to_owned(),
                    p_earlier: event_frequency[earlier],
                    p_later: event_frequency[later],
                };
                if strict {
                    return Err(err);
                }
                log::warn!("keeping user order: {err}");
            }
            relations.push(OrderRelation {
                earlier,
                later,
                provenance: if user {
                    Provenance::UserSpecified
                } else {
                    Provenance::StatisticallyInferred
                },
                violates_frequency: violates,
            });
        }
    }

    Ok(TemporalOrder {
        names: ds.column_names().to_vec(),
        order,
        position,
        event_frequency,
        relations,
    })
}

/// Every `(feature, mediator)` pair with the feature earlier in the order,
/// enumerated by the feature's position and then the mediator's.
pub fn mediator_pairs(order: &TemporalOrder) -> Vec<(usize, usize)> {
    let o = &order.order;
    let mut pairs = Vec::with_capacity(o.len() * o.len().saturating_sub(1) / 2);
    for a in 0..o.len() {
        for b in (a + 1)..o.len() {
            pairs.push((o[a], o[b]));
        }
    }
    pairs
}
