//! Tabular dataset ingestion, schema inference, correlation filtering,
//! feature-value partitioning and cross-validation splits.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Default absolute Pearson correlation above which the later column is dropped.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.8;

const MISSING_MARKERS: &[&str] = &["", "na", "n/a", "nan", "null", "?"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical,
    Continuous,
}

/// Column-major table of features plus a binary target.
///
/// Categorical features hold numeric codes; when the codes were produced
/// from strings the original labels are kept in `levels` so the data can be
/// written back out unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    column_names: Vec<String>,
    kinds: Vec<FeatureKind>,
    columns: Vec<Vec<f64>>,
    levels: Vec<Option<Vec<String>>>,
    target_name: String,
    target: Vec<u8>,
    target_levels: Option<Vec<String>>,
}

impl TabularDataset {
    pub fn new(
        column_names: Vec<String>,
        kinds: Vec<FeatureKind>,
        columns: Vec<Vec<f64>>,
        target_name: impl Into<String>,
        target: Vec<u8>,
    ) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: column_names.len(),
                found: columns.len(),
            });
        }
        if kinds.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                found: kinds.len(),
            });
        }
        let n = target.len();
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(name.clone()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        if let Some(&bad) = target.iter().find(|&&t| t > 1) {
            return Err(Error::InvalidArgument(format!(
                "target labels must be 0 or 1, found {bad}"
            )));
        }
        let levels = vec![None; columns.len()];
        Ok(Self {
            column_names,
            kinds,
            columns,
            levels,
            target_name: target_name.into(),
            target,
            target_levels: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn feature_name(&self, j: usize) -> &str {
        &self.column_names[j]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn kind(&self, j: usize) -> FeatureKind {
        self.kinds[j]
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.columns[j]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    /// Copies row `i` into `buf`, replacing its contents.
    pub fn row_into(&self, i: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.columns.iter().map(|c| c[i]));
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut buf = Vec::with_capacity(self.n_features());
        self.row_into(i, &mut buf);
        buf
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn levels(&self, j: usize) -> Option<&[String]> {
        self.levels[j].as_deref()
    }

    pub fn with_levels(mut self, j: usize, levels: Vec<String>) -> Self {
        self.levels[j] = Some(levels);
        self
    }

    pub fn with_target_levels(mut self, levels: Vec<String>) -> Self {
        self.target_levels = Some(levels);
        self
    }

    pub(crate) fn check_feature(&self, j: usize) -> Result<()> {
        if j >= self.n_features() {
            return Err(Error::FeatureOutOfRange {
                index: j,
                n_features: self.n_features(),
            });
        }
        Ok(())
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        Self {
            column_names: self.column_names.clone(),
            kinds: self.kinds.clone(),
            columns,
            levels: self.levels.clone(),
            target_name: self.target_name.clone(),
            target: rows.iter().map(|&i| self.target[i]).collect(),
            target_levels: self.target_levels.clone(),
        }
    }

    /// New dataset without the listed feature columns.
    pub fn drop_features(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.n_features())
            .filter(|j| !drop.contains(j))
            .collect();
        Self {
            column_names: keep.iter().map(|&j| self.column_names[j].clone()).collect(),
            kinds: keep.iter().map(|&j| self.kinds[j]).collect(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            levels: keep.iter().map(|&j| self.levels[j].clone()).collect(),
            target_name: self.target_name.clone(),
            target: self.target.clone(),
            target_levels: self.target_levels.clone(),
        }
    }

    pub fn schema(&self) -> FeatureSchema {
        FeatureSchema::infer(self)
    }

    /// Writes the dataset (features then target) as CSV, restoring string
    /// labels for coded categorical columns.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.column_names.iter().map(String::as_str).collect();
        header.push(&self.target_name);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            for j in 0..self.n_features() {
                let v = self.columns[j][i];
                let cell = match &self.levels[j] {
                    Some(levels) => levels
                        .get(v as usize)
                        .cloned()
                        .unwrap_or_else(|| v.to_string()),
                    None => v.to_string(),
                };
                record.push(cell);
            }
            let t = self.target[i];
            record.push(match &self.target_levels {
                Some(levels) => levels[t as usize].clone(),
                None => t.to_string(),
            });
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Per-feature schema summary derived from observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureSpec {
    Categorical { codes: Vec<f64> },
    Continuous { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    pub features: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn infer(ds: &TabularDataset) -> Self {
        let features = (0..ds.n_features())
            .map(|j| match ds.kind(j) {
                FeatureKind::Categorical => FeatureSpec::Categorical {
                    codes: distinct_sorted(ds.column(j)),
                },
                FeatureKind::Continuous => {
                    let col = ds.column(j);
                    let (min, max) = col
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                            (lo.min(v), hi.max(v))
                        });
                    FeatureSpec::Continuous { min, max }
                }
            })
            .collect();
        Self {
            names: ds.column_names().to_vec(),
            features,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Observed range of a continuous feature, with a zero range read as 1.
    pub fn range(&self, j: usize) -> f64 {
        match self.features[j] {
            FeatureSpec::Continuous { min, max } if max > min => max - min,
            _ => 1.0,
        }
    }

    pub fn is_categorical(&self, j: usize) -> bool {
        matches!(self.features[j], FeatureSpec::Categorical { .. })
    }
}

pub(crate) fn distinct_sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Options controlling CSV ingestion.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub target: String,
    /// Target label mapped to class 1. Without it, numeric 0/1 targets are
    /// taken as-is and other labels are coded in first-appearance order.
    pub positive_label: Option<String>,
    pub kind_overrides: BTreeMap<String, FeatureKind>,
}

impl LoadOptions {
    pub fn new(target: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            ..Default::default()
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, target_name: &str) -> Result<TabularDataset> {
    load_csv_with(path, &LoadOptions::new(target_name))
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<TabularDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts)
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    MISSING_MARKERS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

/// Reads a headered CSV. Rows with any missing cell are dropped.
pub fn read_csv<R: Read>(reader: R, opts: &LoadOptions) -> Result<TabularDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let target_col = header
        .iter()
        .position(|h| *h == opts.target)
        .ok_or_else(|| Error::MissingTarget(opts.target.clone()))?;
    for name in opts.kind_overrides.keys() {
        if !header.contains(name) || *name == opts.target {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    let mut dropped = 0usize;
    for record in rdr.records() {
        let record = record?;
        if record.len() != header.len() || record.iter().any(is_missing) {
            dropped += 1;
            continue;
        }
        rows.push(record);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    if rows.is_empty() {
        return Err(Error::NoUsableRows);
    }

    let target_cells: Vec<&str> = rows.iter().map(|r| &r[target_col]).collect();
    let (target, target_levels) = code_target(&target_cells, opts.positive_label.as_deref())?;

    let mut names = Vec::new();
    let mut kinds = Vec::new();
    let mut columns = Vec::new();
    let mut levels = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == target_col {
            continue;
        }
        let cells: Vec<&str> = rows.iter().map(|r| &r[c]).collect();
        let numeric: Option<Vec<f64>> = cells
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let forced = opts.kind_overrides.get(name).copied();
        let (kind, values, lv) = match (numeric, forced) {
            (Some(values), Some(kind)) => (kind, values, None),
            (Some(values), None) => {
                let kind = if distinct_sorted(&values).len() <= 2 {
                    FeatureKind::Categorical
                } else {
                    FeatureKind::Continuous
                };
                (kind, values, None)
            }
            (None, Some(FeatureKind::Continuous)) => {
                return Err(Error::NotNumeric {
                    column: name.clone(),
                })
            }
            (None, _) => {
                let (codes, lv) = first_appearance_codes(&cells);
                (FeatureKind::Categorical, codes, Some(lv))
            }
        };
        names.push(name.clone());
        kinds.push(kind);
        columns.push(values);
        levels.push(lv);
    }

    let mut ds = TabularDataset::new(names, kinds, columns, opts.target.clone(), target)?;
    for (j, lv) in levels.into_iter().enumerate() {
        if let Some(lv) = lv {
            ds = ds.with_levels(j, lv);
        }
    }
    if let Some(tl) = target_levels {
        ds = ds.with_target_levels(tl);
    }
    Ok(ds)
}

fn first_appearance_codes(cells: &[&str]) -> (Vec<f64>, Vec<String>) {
    let mut map: HashMap<&str, usize> = HashMap::new();
    let mut levels = Vec::new();
    let codes = cells
        .iter()
        .map(|&s| {
            let next = map.len();
            let code = *map.entry(s).or_insert_with(|| {
                levels.push(s.to_owned());
                next
            });
            code as f64
        })
        .collect();
    (codes, levels)
}

fn code_target(cells: &[&str], positive: Option<&str>) -> Result<(Vec<u8>, Option<Vec<String>>)> {
    if let Some(pos) = positive {
        let negative = cells
            .iter()
            .find(|&&c| c != pos)
            .map(|s| s.to_string())
            .unwrap_or_else(|| "other".to_owned());
        let t = cells.iter().map(|&c| u8::from(c == pos)).collect();
        return Ok((t, Some(vec![negative, pos.to_owned()])));
    }
    let numeric: Option<Vec<u8>> = cells
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(0.0) => Some(0),
            Ok(1.0) => Some(1),
            _ => None,
        })
        .collect();
    if let Some(t) = numeric {
        return Ok((t, None));
    }
    let (codes, levels) = first_appearance_codes(cells);
    if levels.len() > 2 {
        return Err(Error::NonBinaryTarget(levels.len()));
    }
    Ok((codes.into_iter().map(|c| c as u8).collect(), Some(levels)))
}

/// Pearson correlation, `None` when either column has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.is_empty() || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Removes the higher-indexed column of every pair whose absolute Pearson
/// correlation exceeds `threshold`, in a single pass over pairs in index
/// order. Categorical columns participate through their numeric codes.
pub fn drop_correlated(
    ds: &TabularDataset,
    threshold: f64,
) -> Result<(TabularDataset, Vec<String>)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "correlation threshold {threshold} outside [0, 1]"
        )));
    }
    let m = ds.n_features();
    let mut dropped = vec![false; m];
    for a in 0..m {
        if dropped[a] {
            continue;
        }
        for b in (a + 1)..m {
            if dropped[b] {
                continue;
            }
            if let Some(r) = pearson(ds.column(a), ds.column(b)) {
                if r.abs() > threshold {
                    dropped[b] = true;
                }
            }
        }
    }
    let idx: Vec<usize> = (0..m).filter(|&j| dropped[j]).collect();
    let names = idx.iter().map(|&j| ds.feature_name(j).to_owned()).collect();
    Ok((ds.drop_features(&idx), names))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    /// C1
    Lower,
    /// C2
    Upper,
}

impl Category {
    pub fn opposite(self) -> Self {
        match self {
            Category::Lower => Category::Upper,
            Category::Upper => Category::Lower,
        }
    }
}

/// Two-way split of a feature's observed values.
///
/// Continuous features are cut at the midpoint of their observed range;
/// categorical codes are split into lower and upper halves by code order
/// (with the extra code going to the upper half).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePartition {
    pub feature: usize,
    pub kind: FeatureKind,
    /// Continuous split point; values below it are in the lower category.
    pub split: Option<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl FeaturePartition {
    pub fn members(&self, c: Category) -> &[f64] {
        match c {
            Category::Lower => &self.lower,
            Category::Upper => &self.upper,
        }
    }

    pub fn category_of(&self, v: f64) -> Option<Category> {
        match self.split {
            Some(split) => {
                let lo = *self.lower.first()?;
                let hi = *self.upper.last()?;
                if v < lo || v > hi {
                    None
                } else if v < split {
                    Some(Category::Lower)
                } else {
                    Some(Category::Upper)
                }
            }
            None => {
                let hit = |s: &[f64]| s.binary_search_by(|x| x.total_cmp(&v)).is_ok();
                if hit(&self.lower) {
                    Some(Category::Lower)
                } else if hit(&self.upper) {
                    Some(Category::Upper)
                } else {
                    None
                }
            }
        }
    }

    /// Fraction of `values` falling in the lower category.
    pub fn lower_frequency(&self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        let hits = values
            .iter()
            .filter(|&&v| self.category_of(v) == Some(Category::Lower))
            .count();
        hits as f64 / values.len() as f64
    }
}

pub fn partition_feature(ds: &TabularDataset, j: usize) -> Result<FeaturePartition> {
    ds.check_feature(j)?;
    let values = distinct_sorted(ds.column(j));
    if values.len() < 2 {
        return Err(Error::ConstantFeature(ds.feature_name(j).to_owned()));
    }
    let kind = ds.kind(j);
    let (split, lower, upper) = match kind {
        FeatureKind::Continuous => {
            let (lo, hi) = (values[0], values[values.len() - 1]);
            let width = (hi - lo) / 2.0;
            let split = lo + width;
            let (lower, upper): (Vec<f64>, Vec<f64>) = values.iter().partition(|&&v| v < split);
            (Some(split), lower, upper)
        }
        FeatureKind::Categorical => {
            let half = values.len() / 2;
            (None, values[..half].to_vec(), values[half..].to_vec())
        }
    };
    Ok(FeaturePartition {
        feature: j,
        kind,
        split,
        lower,
        upper,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded k-fold split. The first `n % k` folds receive one extra test row.
pub fn kfold_split(n_rows: usize, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fold count {k} < 2")));
    }
    if k > n_rows {
        return Err(Error::InvalidArgument(format!(
            "fold count {k} exceeds row count {n_rows}"
        )));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let (base, extra) = (n_rows / k, n_rows % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut in_test = vec![false; n_rows];
        for &i in &test {
            in_test[i] = true;
        }
        let train = (0..n_rows).filter(|&i| !in_test[i]).collect();
        folds.push(FoldSplit { fold, train, test });
        start += size;
    }
    Ok(folds)
}
