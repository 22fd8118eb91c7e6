//! Classification performance and group fairness metrics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Confusion {
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
}

impl Confusion {
    fn push(&mut self, truth: u8, pred: u8) {
        match (truth, pred) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (0, 0) => self.tn += 1,
            _ => self.fn_ += 1,
        }
    }

    fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn positive_rate(&self) -> f64 {
        ratio(self.tp + self.fp, self.total())
    }

    fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }
}

/// `num / den`, or 0 when the denominator is empty.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_lengths(y_true: &[u8], y_pred: &[u8]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    Ok(())
}

/// Accuracy, precision, recall and F1, all in percent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Performance {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Performance {
    pub fn sum(&self) -> f64 {
        self.accuracy + self.precision + self.recall + self.f1
    }
}

pub fn performance(y_true: &[u8], y_pred: &[u8]) -> Result<Performance> {
    check_lengths(y_true, y_pred)?;
    let mut c = Confusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        c.push(t, p);
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = c.tpr();
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Performance {
        accuracy: 100.0 * ratio(c.tp + c.tn, c.total()),
        precision: 100.0 * precision,
        recall: 100.0 * recall,
        f1: 100.0 * f1,
    })
}

/// Fairness metrics between an unprivileged and a privileged group. All
/// differences are absolute; `dir` is `None` when the privileged group has
/// no positive predictions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FairnessMetrics {
    pub f_alarm: f64,
    pub aod: f64,
    pub spd: f64,
    pub dir: Option<f64>,
    pub fpr_d: f64,
}

impl FairnessMetrics {
    /// Sum of the defined metrics.
    pub fn sum(&self) -> f64 {
        self.f_alarm + self.aod + self.spd + self.dir.unwrap_or(0.0) + self.fpr_d
    }
}

/// Renders an optional disparate impact ratio, `-` when undefined.
pub struct DirDisplay(pub Option<f64>);

impl fmt::Display for DirDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("-"),
        }
    }
}

/// `privileged[i]` marks row `i` as a member of the privileged group.
pub fn fairness_metrics(y_true: &[u8], y_pred: &[u8], privileged: &[bool]) -> Result<FairnessMetrics> {
    check_lengths(y_true, y_pred)?;
    if privileged.len() != y_true.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            found: privileged.len(),
        });
    }
    let mut all = Confusion::default();
    let mut p = Confusion::default();
    let mut u = Confusion::default();
    for ((&t, &pred), &g) in y_true.iter().zip(y_pred).zip(privileged) {
        all.push(t, pred);
        if g {
            p.push(t, pred);
        } else {
            u.push(t, pred);
        }
    }
    if p.total() == 0 {
        return Err(Error::Empty("privileged group"));
    }
    if u.total() == 0 {
        return Err(Error::Empty("unprivileged group"));
    }
    let pr_p = p.positive_rate();
    let pr_u = u.positive_rate();
    Ok(FairnessMetrics {
        f_alarm: all.fpr(),
        aod: ((u.tpr() - p.tpr()).abs() + (u.fpr() - p.fpr()).abs()) / 2.0,
        spd: (pr_u - pr_p).abs(),
        dir: (pr_p > 0.0).then(|| pr_u / pr_p),
        fpr_d: (u.fpr() - p.fpr()).abs(),
    })
}

/// Performance sum minus fairness sum. An undefined DIR is left out.
pub fn t_score(perf: &Performance, fair: &FairnessMetrics) -> f64 {
    perf.sum() - fair.sum()
}
