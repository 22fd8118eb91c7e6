//! Logistic regression trained by full-batch gradient descent on
//! standardized features, and binning of predicted probabilities into
//! discrete distributions.

use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub l2: f64,
    /// Training stops once the gradient's infinity norm drops below this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iterations: 2000,
            l2: 1e-4,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub iterations: usize,
    pub learning_rate: f64,
    pub converged: bool,
    pub final_loss: f64,
}

/// Binary logistic model. Weights apply to z-scored features; the stored
/// means and standard deviations make predictions on raw rows well-defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub training: Option<TrainingInfo>,
}

impl LogisticModel {
    /// Model with explicit parameters and identity standardization.
    pub fn from_parameters(feature_names: Vec<String>, weights: Vec<f64>, intercept: f64) -> Self {
        let m = weights.len();
        Self {
            feature_names,
            weights,
            intercept,
            means: vec![0.0; m],
            stds: vec![1.0; m],
            training: None,
        }
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn standardize(&self, j: usize, x: f64) -> f64 {
        (x - self.means[j]) / self.stds[j]
    }

    pub fn log_odds_row(&self, row: &[f64]) -> f64 {
        let mut s = self.intercept;
        for (j, &x) in row.iter().enumerate() {
            s += self.weights[j] * self.standardize(j, x);
        }
        s
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.log_odds_row(row))
    }

    fn check_dims(&self, ds: &TabularDataset) -> Result<()> {
        if ds.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: ds.n_features(),
            });
        }
        Ok(())
    }

    /// Log-odds for every row of `ds`.
    pub fn log_odds(&self, ds: &TabularDataset) -> Result<Vec<f64>> {
        self.check_dims(ds)?;
        let mut scores = vec![self.intercept; ds.n_rows()];
        for j in 0..self.n_features() {
            let (w, mu, sd) = (self.weights[j], self.means[j], self.stds[j]);
            for (s, &x) in scores.iter_mut().zip(ds.column(j)) {
                *s += w * ((x - mu) / sd);
            }
        }
        Ok(scores)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn predict_proba(model: &LogisticModel, ds: &TabularDataset) -> Result<Vec<f64>> {
    Ok(model.log_odds(ds)?.into_iter().map(sigmoid).collect())
}

pub fn fit_logistic(train: &TabularDataset, cfg: &FitConfig) -> Result<LogisticModel> {
    fit_logistic_weighted(train, cfg, None)
}

/// Fits with optional per-row weights multiplying each log-likelihood term.
pub fn fit_logistic_weighted(
    train: &TabularDataset,
    cfg: &FitConfig,
    sample_weights: Option<&[f64]>,
) -> Result<LogisticModel> {
    Trainer::new(train, cfg, sample_weights)?.run(None)
}

/// Like [`fit_logistic_weighted`], also returning the objective value before
/// training and after every accepted step.
pub fn fit_logistic_traced(
    train: &TabularDataset,
    cfg: &FitConfig,
    sample_weights: Option<&[f64]>,
) -> Result<(LogisticModel, Vec<f64>)> {
    let mut trace = Vec::new();
    let model = Trainer::new(train, cfg, sample_weights)?.run(Some(&mut trace))?;
    Ok((model, trace))
}

struct Trainer<'a> {
    cfg: &'a FitConfig,
    names: Vec<String>,
    n: usize,
    m: usize,
    /// Row-major standardized design matrix.
    z: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    w_sum: f64,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl<'a> Trainer<'a> {
    fn new(train: &TabularDataset, cfg: &'a FitConfig, weights: Option<&[f64]>) -> Result<Self> {
        let (n, m) = (train.n_rows(), train.n_features());
        if n == 0 {
            return Err(Error::Empty("training set"));
        }
        if !(cfg.learning_rate > 0.0) || !(cfg.l2 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate {} and l2 {} must be positive / non-negative",
                cfg.learning_rate, cfg.l2
            )));
        }
        let w: Vec<f64> = match weights {
            Some(w) if w.len() != n => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.len(),
                })
            }
            Some(w) => {
                if w.iter().any(|&v| !v.is_finite() || v < 0.0) {
                    return Err(Error::InvalidArgument(
                        "sample weights must be finite and non-negative".into(),
                    ));
                }
                w.to_vec()
            }
            None => vec![1.0; n],
        };
        let y: Vec<f64> = train.target().iter().map(|&t| f64::from(t)).collect();
        let positive = y.iter().zip(&w).any(|(&t, &s)| t == 1.0 && s > 0.0);
        let negative = y.iter().zip(&w).any(|(&t, &s)| t == 0.0 && s > 0.0);
        if !(positive && negative) {
            return Err(Error::SingleClass);
        }
        let w_sum: f64 = w.iter().sum();

        let mut means = Vec::with_capacity(m);
        let mut stds = Vec::with_capacity(m);
        for j in 0..m {
            let col = train.column(j);
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(train.feature_name(j).to_owned()));
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            means.push(mean);
            stds.push(if sd > 0.0 && sd.is_finite() { sd } else { 1.0 });
        }
        let mut z = vec![0.0; n * m];
        for j in 0..m {
            for (i, &x) in train.column(j).iter().enumerate() {
                z[i * m + j] = (x - means[j]) / stds[j];
            }
        }
        Ok(Self {
            cfg,
            names: train.column_names().to_vec(),
            n,
            m,
            z,
            y,
            w,
            w_sum,
            means,
            stds,
        })
    }

    fn scores(&self, coef: &[f64], bias: f64, out: &mut [f64]) {
        for (i, s) in out.iter_mut().enumerate() {
            let row = &self.z[i * self.m..(i + 1) * self.m];
            *s = bias + row.iter().zip(coef).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    fn loss(&self, scores: &[f64], coef: &[f64]) -> f64 {
        let nll: f64 = scores
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((&s, &t), &wt)| wt * (softplus(s) - t * s))
            .sum();
        let penalty: f64 = coef.iter().map(|c| c * c).sum::<f64>() * self.cfg.l2 / 2.0;
        nll / self.w_sum + penalty
    }

    fn run(self, mut trace: Option<&mut Vec<f64>>) -> Result<LogisticModel> {
        let (n, m) = (self.n, self.m);
        let mut coef = vec![0.0; m];
        let mut bias = 0.0;
        let mut scores = vec![0.0; n];
        self.scores(&coef, bias, &mut scores);
        let mut loss = self.loss(&scores, &coef);
        if let Some(t) = trace.as_deref_mut() {
            t.push(loss);
        }

        let mut grad = vec![0.0; m];
        let mut cand = vec![0.0; m];
        let mut cand_scores = vec![0.0; n];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < self.cfg.max_iterations {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_bias = 0.0;
            for i in 0..n {
                let r = self.w[i] * (sigmoid(scores[i]) - self.y[i]) / self.w_sum;
                grad_bias += r;
                let row = &self.z[i * m..(i + 1) * m];
                for (g, &x) in grad.iter_mut().zip(row) {
                    *g += r * x;
                }
            }
            for (g, &c) in grad.iter_mut().zip(&coef) {
                *g += self.cfg.l2 * c;
            }
            let norm = grad.iter().fold(grad_bias.abs(), |acc, g| acc.max(g.abs()));
            if norm < self.cfg.tolerance {
                converged = true;
                break;
            }

            // Halve the step until the objective does not increase.
            let mut step = self.cfg.learning_rate;
            let accepted = loop {
                for ((c, &w), &g) in cand.iter_mut().zip(&coef).zip(&grad) {
                    *c = w - step * g;
                }
                let cand_bias = bias - step * grad_bias;
                self.scores(&cand, cand_bias, &mut cand_scores);
                let cand_loss = self.loss(&cand_scores, &cand);
                if cand_loss <= loss {
                    break Some((cand_bias, cand_loss));
                }
                step /= 2.0;
                if step < self.cfg.learning_rate * 1e-10 {
                    break None;
                }
            };
            iterations += 1;
            match accepted {
                Some((cand_bias, cand_loss)) => {
                    std::mem::swap(&mut coef, &mut cand);
                    std::mem::swap(&mut scores, &mut cand_scores);
                    bias = cand_bias;
                    loss = cand_loss;
                    if let Some(t) = trace.as_deref_mut() {
                        t.push(loss);
                    }
                }
                None => break,
            }
        }

        Ok(LogisticModel {
            feature_names: self.names,
            weights: coef,
            intercept: bias,
            means: self.means,
            stds: self.stds,
            training: Some(TrainingInfo {
                iterations,
                learning_rate: self.cfg.learning_rate,
                converged,
                final_loss: loss,
            }),
        })
    }
}

/// Normalized histogram of predicted probabilities over equal-width bins
/// `[i/B, (i+1)/B)`, with the last bin closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionDistribution {
    masses: Vec<f64>,
}

impl PredictionDistribution {
    /// Wraps raw masses, checking they are non-negative and sum to one.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidArgument("a distribution needs at least 2 bins".into()));
        }
        if masses.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.masses.len() as f64
    }
}

pub fn bin_index(p: f64, bins: usize) -> usize {
    ((p * bins as f64) as usize).min(bins - 1)
}

pub fn prediction_distribution(probs: &[f64], bins: usize) -> Result<PredictionDistribution> {
    if probs.is_empty() {
        return Err(Error::Empty("probability vector"));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("bin count {bins} < 2")));
    }
    let mut counts = vec![0usize; bins];
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        counts[bin_index(p, bins)] += 1;
    }
    let n = probs.len() as f64;
    Ok(PredictionDistribution {
        masses: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Two-point distribution of hard labels (`p >= 0.5` is class 1).
pub fn label_distribution(probs: &[f64]) -> Result<PredictionDistribution> {
    prediction_distribution(probs, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureKind;
    use proptest::prelude::*;

    fn dataset(cols: Vec<Vec<f64>>, target: Vec<u8>) -> TabularDataset {
        let names = (0..cols.len()).map(|j| format!("x{j}")).collect();
        let kinds = vec![FeatureKind::Continuous; cols.len()];
        TabularDataset::new(names, kinds, cols, "y", target).unwrap()
    }

    #[test]
    fn separable_data_is_fit_perfectly() {
        let x = vec![-3.0, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 3.0];
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let ds = dataset(vec![x], y.clone());
        let cfg = FitConfig {
            l2: 0.01,
            ..Default::default()
        };
        let model = fit_logistic(&ds, &cfg).unwrap();
        let probs = predict_proba(&model, &ds).unwrap();
        let correct = probs
            .iter()
            .zip(&y)
            .filter(|(&p, &t)| u8::from(p >= 0.5) == t)
            .count();
        assert_eq!(correct, y.len());
    }

    #[test]
    fn identical_rows_recover_the_class_prior() {
        let ds = dataset(vec![vec![2.0; 10]], vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        let model = fit_logistic(&ds, &FitConfig::default()).unwrap();
        // Intercept-only optimum: log(p / (1 - p)) with p = 0.3. Training
        // stops at |p - 0.3| < 1e-6, i.e. within 1e-6 / (0.3 * 0.7) in log-odds.
        let expected = (0.3f64 / 0.7).ln();
        assert!((model.intercept - expected).abs() < 1e-5, "{}", model.intercept);
        for p in predict_proba(&model, &ds).unwrap() {
            assert!((p - 0.3).abs() < 1e-6);
        }
    }

    #[test]
    fn fitting_is_bitwise_deterministic() {
        let ds = dataset(
            vec![vec![0.1, 0.5, 0.2, 0.9, 0.7, 0.3], vec![1.0, 0.0, 1.0, 0.0, 1.0, 1.0]],
            vec![0, 1, 0, 1, 1, 0],
        );
        let a = fit_logistic(&ds, &FitConfig::default()).unwrap();
        let b = fit_logistic(&ds, &FitConfig::default()).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.intercept.to_bits(), b.intercept.to_bits());
    }

    #[test]
    fn fit_errors() {
        let ds = dataset(vec![vec![1.0, 2.0]], vec![1, 1]);
        assert!(matches!(fit_logistic(&ds, &FitConfig::default()), Err(Error::SingleClass)));
        let ds = dataset(vec![vec![1.0, 2.0]], vec![0, 1]);
        assert!(fit_logistic_weighted(&ds, &FitConfig::default(), Some(&[1.0])).is_err());
    }

    #[test]
    fn loss_never_increases() {
        let ds = dataset(
            vec![
                vec![0.1, 0.5, 0.2, 0.9, 0.7, 0.3, 0.8, 0.4],
                vec![10.0, 0.0, 12.0, 3.0, 11.0, 1.0, 2.0, 9.0],
            ],
            vec![0, 1, 0, 1, 1, 0, 1, 0],
        );
        let (_, trace) = fit_logistic_traced(&ds, &FitConfig::default(), None).unwrap();
        assert!(trace.len() > 1);
        for pair in trace.windows(2) {
            assert!(pair[1] <= pair[0], "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn zero_model_predicts_one_half() {
        let model = LogisticModel::from_parameters(vec!["a".into(), "b".into()], vec![0.0, 0.0], 0.0);
        let ds = dataset(vec![vec![3.0, -7.0], vec![1.0, 2.0]], vec![0, 1]);
        assert_eq!(predict_proba(&model, &ds).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn large_intercept_saturates() {
        let model = LogisticModel::from_parameters(vec!["a".into()], vec![0.0], 50.0);
        let ds = dataset(vec![vec![1.0]], vec![1]);
        assert!(predict_proba(&model, &ds).unwrap()[0] > 1.0 - 1e-12);
    }

    #[test]
    fn single_row_matches_hand_sigmoid() {
        let mut model =
            LogisticModel::from_parameters(vec!["a".into(), "b".into()], vec![0.7, -1.3], 0.25);
        model.means = vec![1.0, 2.0];
        model.stds = vec![2.0, 0.5];
        let ds = dataset(vec![vec![4.0], vec![1.5]], vec![1]);
        let z = 0.25 + 0.7 * ((4.0 - 1.0) / 2.0) + -1.3 * ((1.5 - 2.0) / 0.5);
        let expected = 1.0 / (1.0 + (-z as f64).exp());
        let got = predict_proba(&model, &ds).unwrap()[0];
        assert!((got - expected).abs() < 1e-15);
        let wrong = dataset(vec![vec![1.0]], vec![1]);
        assert!(matches!(
            predict_proba(&model, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn model_json_round_trip() {
        let ds = dataset(vec![vec![0.1, 0.5, 0.2, 0.9]], vec![0, 1, 0, 1]);
        let model = fit_logistic(&ds, &FitConfig::default()).unwrap();
        let back = LogisticModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn histogram_conventions() {
        let d = prediction_distribution(&[0.5; 4], 10).unwrap();
        assert_eq!(d.masses()[5], 1.0);
        assert_eq!(d.masses().iter().sum::<f64>(), 1.0);

        let d = prediction_distribution(&[0.0, 1.0], 10).unwrap();
        assert_eq!(d.masses()[0], 0.5);
        assert_eq!(d.masses()[9], 0.5);

        let probs: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
        let d = prediction_distribution(&probs, 10).unwrap();
        assert!(d.masses().iter().all(|&m| m == 0.1));

        assert!(prediction_distribution(&[], 10).is_err());
        assert!(prediction_distribution(&[0.5], 1).is_err());
        assert!(prediction_distribution(&[1.5], 10).is_err());
    }

    proptest! {
        #[test]
        fn histogram_sums_to_one(probs in proptest::collection::vec(0.0f64..=1.0, 1..200), bins in 2usize..50) {
            let d = prediction_distribution(&probs, bins).unwrap();
            prop_assert!((d.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(d.masses().iter().all(|&m| m >= 0.0));
        }

        #[test]
        fn probability_monotone_in_positive_weight_feature(
            w in 0.0f64..5.0, other in -5.0f64..5.0, b in -3.0f64..3.0,
            x in -10.0f64..10.0, dx in 0.0f64..10.0,
        ) {
            let model = LogisticModel::from_parameters(vec!["a".into(), "b".into()], vec![w, other], b);
            let lo = model.predict_row(&[x, 1.0]);
            let hi = model.predict_row(&[x + dx, 1.0]);
            prop_assert!(hi >= lo);
        }
    }
}
