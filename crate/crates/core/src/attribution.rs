//! Exact Shapley attribution for the logistic model on the log-odds scale.
//!
//! The model is linear in its standardized inputs, so with the training mean
//! as the reference point each feature's contribution is `w_j * z_j(x)` and
//! the contributions of a row sum to its log-odds minus the intercept.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::error::{Error, Result};
use crate::model::LogisticModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionMatrix {
    pub feature_names: Vec<String>,
    /// Row-major `n_rows x n_features` contributions in log-odds units.
    pub values: Vec<f64>,
    pub n_rows: usize,
    /// Model output at the reference point.
    pub base_value: f64,
}

impl AttributionMatrix {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_features();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features() + j]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["row".to_owned()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.n_rows {
            let mut rec = vec![i.to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

pub fn shap_linear(model: &LogisticModel, ds: &TabularDataset) -> Result<AttributionMatrix> {
    if ds.n_features() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            found: ds.n_features(),
        });
    }
    let (n, m) = (ds.n_rows(), ds.n_features());
    let mut values = vec![0.0; n * m];
    for j in 0..m {
        let w = model.weights[j];
        // Standardized training mean is zero by construction.
        let reference = 0.0;
        for (i, &x) in ds.column(j).iter().enumerate() {
            values[i * m + j] = w * (model.standardize(j, x) - reference);
        }
    }
    Ok(AttributionMatrix {
        feature_names: ds.column_names().to_vec(),
        values,
        n_rows: n,
        base_value: model.intercept,
    })
}

/// Mean absolute attribution per feature.
pub fn global_importance(attr: &AttributionMatrix) -> Result<Vec<f64>> {
    if attr.n_rows == 0 || attr.n_features() == 0 {
        return Err(Error::Empty("attribution matrix"));
    }
    let m = attr.n_features();
    let mut sums = vec![0.0; m];
    for i in 0..attr.n_rows {
        for (s, v) in sums.iter_mut().zip(attr.row(i)) {
            *s += v.abs();
        }
    }
    let n = attr.n_rows as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureKind;

    fn two_feature_ds(rows: &[[f64; 2]]) -> TabularDataset {
        TabularDataset::new(
            vec!["a".into(), "b".into()],
            vec![FeatureKind::Continuous; 2],
            vec![
                rows.iter().map(|r| r[0]).collect(),
                rows.iter().map(|r| r[1]).collect(),
            ],
            "y",
            vec![0; rows.len()],
        )
        .unwrap()
    }

    #[test]
    fn row_at_training_mean_has_zero_attribution() {
        let mut model = LogisticModel::from_parameters(vec!["a".into(), "b".into()], vec![1.5, -2.0], 0.3);
        model.means = vec![4.0, -1.0];
        model.stds = vec![2.0, 3.0];
        let attr = shap_linear(&model, &two_feature_ds(&[[4.0, -1.0]])).unwrap();
        assert_eq!(attr.row(0), &[0.0, 0.0]);
        assert_eq!(attr.base_value, 0.3);
    }

    #[test]
    fn centered_linear_contribution() {
        let model = LogisticModel::from_parameters(vec!["a".into(), "b".into()], vec![1.0, 0.0], 0.0);
        let attr = shap_linear(&model, &two_feature_ds(&[[2.0, 5.0]])).unwrap();
        assert_eq!(attr.row(0), &[2.0, 0.0]);
    }

    #[test]
    fn efficiency_holds_per_row() {
        let mut model = LogisticModel::from_parameters(vec!["a".into(), "b".into()], vec![0.8, -1.1], -0.4);
        model.means = vec![1.0, 2.0];
        model.stds = vec![0.5, 4.0];
        let ds = two_feature_ds(&[[0.0, 1.0], [3.0, -2.0], [1.0, 2.0], [7.5, 0.25]]);
        let attr = shap_linear(&model, &ds).unwrap();
        let logit = model.log_odds(&ds).unwrap();
        for (i, l) in logit.iter().enumerate() {
            let sum: f64 = attr.row(i).iter().sum();
            assert!((sum - (l - attr.base_value)).abs() < 1e-12);
        }
    }

    #[test]
    fn global_importance_is_mean_absolute_value() {
        let attr = AttributionMatrix {
            feature_names: vec!["a".into(), "b".into()],
            values: vec![1.0, 0.0, -1.0, 0.0],
            n_rows: 2,
            base_value: 0.0,
        };
        assert_eq!(global_importance(&attr).unwrap(), vec![1.0, 0.0]);
        let empty = AttributionMatrix {
            n_rows: 0,
            values: vec![],
            ..attr
        };
        assert!(global_importance(&empty).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let model = LogisticModel::from_parameters(vec!["a".into()], vec![1.0], 0.0);
        assert!(shap_linear(&model, &two_feature_ds(&[[1.0, 2.0]])).is_err());
    }
}
