//! Divergences between binned prediction distributions.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PredictionDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    Hellinger,
    TotalVariation,
    Wasserstein,
    JensenShannon,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 4] = [
        DivergenceKind::Hellinger,
        DivergenceKind::TotalVariation,
        DivergenceKind::Wasserstein,
        DivergenceKind::JensenShannon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::Hellinger => "hellinger",
            DivergenceKind::TotalVariation => "total_variation",
            DivergenceKind::Wasserstein => "wasserstein",
            DivergenceKind::JensenShannon => "jensen_shannon",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    pub fn compute(self, p: &PredictionDistribution, q: &PredictionDistribution) -> Result<f64> {
        match self {
            DivergenceKind::Hellinger => hellinger(p, q),
            DivergenceKind::TotalVariation => total_variation(p, q),
            DivergenceKind::Wasserstein => wasserstein(p, q),
            DivergenceKind::JensenShannon => jensen_shannon(p, q),
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DivergenceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown divergence `{s}`")))
    }
}

/// One score per divergence kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DivergenceScores {
    pub hellinger: f64,
    pub total_variation: f64,
    pub wasserstein: f64,
    pub jensen_shannon: f64,
}

impl DivergenceScores {
    pub fn between(p: &PredictionDistribution, q: &PredictionDistribution) -> Result<Self> {
        let mut out = Self::default();
        for kind in DivergenceKind::ALL {
            out[kind] = kind.compute(p, q)?;
        }
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (DivergenceKind, f64)> + '_ {
        DivergenceKind::ALL.into_iter().map(move |k| (k, self[k]))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for k in DivergenceKind::ALL {
            out[k] += other[k];
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        for k in DivergenceKind::ALL {
            out[k] *= factor;
        }
        out
    }

    /// Arithmetic mean, accumulated in input order.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a Self>) -> Self {
        let mut sum = Self::default();
        let mut n = 0usize;
        for s in items {
            sum = sum.add(s);
            n += 1;
        }
        if n == 0 {
            sum
        } else {
            sum.scale(1.0 / n as f64)
        }
    }
}

impl Index<DivergenceKind> for DivergenceScores {
    type Output = f64;

    fn index(&self, k: DivergenceKind) -> &f64 {
        match k.slot() {
            0 => &self.hellinger,
            1 => &self.total_variation,
            2 => &self.wasserstein,
            _ => &self.jensen_shannon,
        }
    }
}

impl IndexMut<DivergenceKind> for DivergenceScores {
    fn index_mut(&mut self, k: DivergenceKind) -> &mut f64 {
        match k.slot() {
            0 => &mut self.hellinger,
            1 => &mut self.total_variation,
            2 => &mut self.wasserstein,
            _ => &mut self.jensen_shannon,
        }
    }
}

fn paired<'a>(
    p: &'a PredictionDistribution,
    q: &'a PredictionDistribution,
) -> Result<(&'a [f64], &'a [f64])> {
    if p.bins() != q.bins() {
        return Err(Error::DimensionMismatch {
            expected: p.bins(),
            found: q.bins(),
        });
    }
    Ok((p.masses(), q.masses()))
}

pub fn hellinger(p: &PredictionDistribution, q: &PredictionDistribution) -> Result<f64> {
    let (p, q) = paired(p, q)?;
    let sum: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok((sum / 2.0).sqrt().min(1.0))
}

pub fn total_variation(p: &PredictionDistribution, q: &PredictionDistribution) -> Result<f64> {
    let (p, q) = paired(p, q)?;
    let sum: f64 = p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum();
    Ok((sum / 2.0).min(1.0))
}

/// Earth mover's distance with bin centers as support points: the sum of
/// absolute CDF differences times the bin width.
pub fn wasserstein(p: &PredictionDistribution, q: &PredictionDistribution) -> Result<f64> {
    let bins = p.bins();
    let (p, q) = paired(p, q)?;
    let (mut fp, mut fq, mut sum) = (0.0, 0.0, 0.0);
    for (&a, &b) in p.iter().zip(q) {
        fp += a;
        fq += b;
        sum += (fp - fq).abs();
    }
    Ok(sum / bins as f64)
}

/// Kullback-Leibler divergence in nats; `f64::INFINITY` when `p` puts mass
/// where `q` has none.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        sum += a * (a / b).ln();
    }
    sum
}

/// Jensen-Shannon divergence in nats, bounded by ln 2.
pub fn jensen_shannon(p: &PredictionDistribution, q: &PredictionDistribution) -> Result<f64> {
    let (p, q) = paired(p, q)?;
    let m: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| (a + b) / 2.0).collect();
    let js = kl(p, &m) / 2.0 + kl(q, &m) / 2.0;
    Ok(js.clamp(0.0, std::f64::consts::LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(m: &[f64]) -> PredictionDistribution {
        PredictionDistribution::from_masses(m.to_vec()).unwrap()
    }

    fn point(bins: usize, at: usize) -> PredictionDistribution {
        let mut m = vec![0.0; bins];
        m[at] = 1.0;
        dist(&m)
    }

    #[test]
    fn hellinger_examples() {
        let p = dist(&[0.5, 0.5]);
        assert_eq!(hellinger(&p, &p).unwrap(), 0.0);
        assert_eq!(hellinger(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 1.0);
        // Closed form: sqrt(((sqrt .5 - sqrt .9)^2 + (sqrt .5 - sqrt .1)^2) / 2)
        let a = 0.5f64.sqrt() - 0.9f64.sqrt();
        let b = 0.5f64.sqrt() - 0.1f64.sqrt();
        let expected = ((a * a + b * b) / 2.0).sqrt();
        let got = hellinger(&p, &dist(&[0.9, 0.1])).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.324_919_696_232_906_3).abs() < 1e-12);
    }

    #[test]
    fn total_variation_examples() {
        let p = dist(&[0.5, 0.5]);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        assert_eq!(total_variation(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((total_variation(&p, &dist(&[0.9, 0.1])).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn jensen_shannon_examples() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(jensen_shannon(&p, &p).unwrap(), 0.0);
        let js = jensen_shannon(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap();
        assert!((js - std::f64::consts::LN_2).abs() < 1e-15);
        let q = dist(&[0.8, 0.2]);
        assert_eq!(jensen_shannon(&p, &q).unwrap(), jensen_shannon(&q, &p).unwrap());
    }

    #[test]
    fn wasserstein_examples() {
        let p = point(10, 0);
        assert_eq!(wasserstein(&p, &p).unwrap(), 0.0);
        assert!((wasserstein(&point(10, 0), &point(10, 9)).unwrap() - 0.9).abs() < 1e-15);
        let half = dist(&[0.5, 0.5]);
        assert_eq!(wasserstein(&half, &dist(&[0.5, 0.5])).unwrap(), 0.0);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl(&[0.4, 0.6], &[0.4, 0.6]), 0.0);
        assert!((kl(&[1.0, 0.0], &[0.5, 0.5]) - std::f64::consts::LN_2).abs() < 1e-15);
        let forward = 0.9 * (0.9f64 / 0.5).ln() + 0.1 * (0.1f64 / 0.5).ln();
        let backward = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert!((kl(&[0.9, 0.1], &[0.5, 0.5]) - forward).abs() < 1e-15);
        assert!((kl(&[0.5, 0.5], &[0.9, 0.1]) - backward).abs() < 1e-15);
        assert_ne!(forward, backward);
        assert_eq!(kl(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn bin_mismatch_is_an_error() {
        let p = point(2, 0);
        let q = point(3, 0);
        for kind in DivergenceKind::ALL {
            assert!(kind.compute(&p, &q).is_err());
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in DivergenceKind::ALL {
            assert_eq!(kind.name().parse::<DivergenceKind>().unwrap(), kind);
            assert_eq!(
                serde_json::to_string(&kind).unwrap(),
                format!("\"{}\"", kind.name())
            );
        }
        assert!("kl".parse::<DivergenceKind>().is_err());
    }

    fn normalized(raw: Vec<f64>) -> PredictionDistribution {
        let total: f64 = raw.iter().sum();
        dist(&raw.iter().map(|v| v / total).collect::<Vec<_>>())
    }

    proptest! {
        #[test]
        fn hellinger_brackets_total_variation(
            a in proptest::collection::vec(0.01f64..1.0, 10),
            b in proptest::collection::vec(0.01f64..1.0, 10),
        ) {
            let (p, q) = (normalized(a), normalized(b));
            let h = hellinger(&p, &q).unwrap();
            let tv = total_variation(&p, &q).unwrap();
            prop_assert!(h * h <= tv + 1e-12);
            prop_assert!(tv <= std::f64::consts::SQRT_2 * h + 1e-12);
        }
    }
}
