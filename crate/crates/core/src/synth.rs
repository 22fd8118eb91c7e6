//! Synthetic datasets drawn from a known logistic model.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{FeatureKind, TabularDataset};
use crate::error::{Error, Result};
use crate::model::sigmoid;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnDist {
    /// Standard normal, continuous.
    Normal,
    /// 0/1 with the given probability of 1, categorical.
    Bernoulli(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    /// True log-odds coefficient per feature.
    pub weights: Vec<f64>,
    pub columns: Vec<ColumnDist>,
    pub intercept: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// All-normal features with the given weights.
    pub fn continuous(n_rows: usize, weights: Vec<f64>, seed: u64) -> Self {
        let columns = vec![ColumnDist::Normal; weights.len()];
        Self {
            n_rows,
            weights,
            columns,
            intercept: 0.0,
            seed,
        }
    }
}

/// Features `x0..x{m-1}` and target `y ~ Bernoulli(sigmoid(b + w.x))`.
pub fn generate(spec: &SyntheticSpec) -> Result<TabularDataset> {
    if spec.weights.len() != spec.columns.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.weights.len(),
            found: spec.columns.len(),
        });
    }
    if spec.n_rows == 0 || spec.weights.is_empty() {
        return Err(Error::Empty("synthetic spec"));
    }
    if let Some(ColumnDist::Bernoulli(p)) = spec
        .columns
        .iter()
        .find(|c| matches!(c, ColumnDist::Bernoulli(p) if !(0.0..=1.0).contains(p)))
    {
        return Err(Error::InvalidArgument(format!("Bernoulli rate {p} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(spec.seed);
    let m = spec.weights.len();
    let mut columns = vec![Vec::with_capacity(spec.n_rows); m];
    let mut target = Vec::with_capacity(spec.n_rows);
    for _ in 0..spec.n_rows {
        let mut z = spec.intercept;
        for j in 0..m {
            let x = match spec.columns[j] {
                ColumnDist::Normal => rng.sample::<f64, _>(StandardNormal),
                ColumnDist::Bernoulli(p) => f64::from(u8::from(rng.random_bool(p))),
            };
            z += spec.weights[j] * x;
            columns[j].push(x);
        }
        target.push(u8::from(rng.random::<f64>() < sigmoid(z)));
    }
    let names = (0..m).map(|j| format!("x{j}")).collect();
    let kinds = spec
        .columns
        .iter()
        .map(|c| match c {
            ColumnDist::Normal => FeatureKind::Continuous,
            ColumnDist::Bernoulli(_) => FeatureKind::Categorical,
        })
        .collect();
    TabularDataset::new(names, kinds, columns, "y", target)
}
