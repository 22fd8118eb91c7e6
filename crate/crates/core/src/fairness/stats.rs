//! Rank-sum test, Cliff's delta and the win/tie/loss verdict built on them.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Samples up to this combined size use exact enumeration.
pub const EXACT_LIMIT: usize = 12;
pub const SIGNIFICANCE: f64 = 0.05;
pub const NEGLIGIBLE_DELTA: f64 = 0.147;

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("sample"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("sample".into()));
    }
    Ok(())
}

/// Mid-ranks of the pooled sample `a ++ b`, 1-based.
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&x, &y| pooled[x].total_cmp(&pooled[y]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && pooled[idx[end]] == pooled[idx[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Two-sided rank-sum p-value: exact for small samples, normal
/// approximation otherwise.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() + b.len() <= EXACT_LIMIT {
        wilcoxon_exact(a, b)
    } else {
        wilcoxon_normal(a, b)
    }
}

/// Exact two-sided p-value by enumerating every assignment of the pooled
/// mid-ranks to the first sample.
pub fn wilcoxon_exact(a: &[f64], b: &[f64]) -> Result<f64> {
    check(a, b)?;
    let (ranks, _) = midranks(a, b);
    // Mid-ranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r) as usize).collect();
    let n1 = a.len();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![vec![0u128; total + 1]; n1 + 1];
    counts[0][0] = 1;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=total).rev() {
                let add = counts[k - 1][s - r];
                counts[k][s] += add;
            }
        }
    }
    let n = doubled.len();
    let expected = (n1 * (n + 1)) as i64;
    let observed: usize = doubled[..n1].iter().sum();
    let dev = (observed as i64 - expected).abs();
    let (mut extreme, mut all) = (0u128, 0u128);
    for (s, &c) in counts[n1].iter().enumerate() {
        all += c;
        if (s as i64 - expected).abs() >= dev {
            extreme += c;
        }
    }
    Ok((extreme as f64 / all as f64).min(1.0))
}

/// Normal approximation with tie and continuity corrections.
pub fn wilcoxon_normal(a: &[f64], b: &[f64]) -> Result<f64> {
    check(a, b)?;
    let (ranks, ties) = midranks(a, b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let w: f64 = ranks[..a.len()].iter().sum();
    let mean = n1 * (n + 1.0) / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = if n > 1.0 {
        n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(erfc(z / std::f64::consts::SQRT_2).min(1.0))
}

/// `(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)`.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    check(a, b)?;
    let mut more = 0i64;
    let mut less = 0i64;
    for &x in a {
        for &y in b {
            if x > y {
                more += 1;
            } else if x < y {
                less += 1;
            }
        }
    }
    Ok((more - less) as f64 / (a.len() * b.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wtl {
    #[serde(rename = "W")]
    Win,
    #[serde(rename = "T")]
    Tie,
    #[serde(rename = "L")]
    Loss,
}

impl fmt::Display for Wtl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wtl::Win => "W",
            Wtl::Tie => "T",
            Wtl::Loss => "L",
        })
    }
}

pub fn wtl_label(p: f64, delta: f64) -> Wtl {
    if p < SIGNIFICANCE && delta > NEGLIGIBLE_DELTA {
        Wtl::Win
    } else if p < SIGNIFICANCE && delta < -NEGLIGIBLE_DELTA {
        Wtl::Loss
    } else {
        Wtl::Tie
    }
}
