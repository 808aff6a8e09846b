//! Confusion matrices and the accuracy statistics derived from them.
//!
//! The matrix is laid out as `K` truth rows by `K + 1` prediction columns:
//! the extra trailing column counts labeled pixels whose prediction carried
//! the unlabeled id 0 ("rejected"). The classifier itself always assigns a
//! class, so that column is only populated when predictions come from an
//! external source.
//!
//! Overall accuracy divides the diagonal sum by every labeled pixel,
//! rejected ones included. Producer's accuracy for class `c` is the diagonal
//! entry over the truth-row total; user's accuracy is the diagonal entry
//! over the prediction-column total (rejected pixels belong to no predicted
//! class and so never enter a column total). A class absent from the truth
//! or from the predictions yields `None` for the corresponding statistic
//! rather than a division fault — downstream formatting renders it as "NA".

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::pipeline::LabelRaster;

/// Per-class tally of truth/prediction pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    /// `K x (K + 1)`; `[t][K]` counts rejected pixels of truth class `t + 1`.
    counts: Array2<u64>,
    class_names: Option<Vec<String>>,
}

impl ConfusionMatrix {
    /// Empty matrix over `k` classes.
    pub fn new(k: usize, class_names: Option<Vec<String>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidText {
                what: "confusion matrix".into(),
                detail: "class count must be at least 1".into(),
            });
        }
        if let Some(names) = &class_names {
            if names.len() != k {
                return Err(Error::InvalidText {
                    what: "confusion matrix".into(),
                    detail: format!("{} class names for {} classes", names.len(), k),
                });
            }
        }
        Ok(Self {
            k,
            counts: Array2::zeros((k, k + 1)),
            class_names,
        })
    }

    /// Build from explicit count rows. Each row may have `k` entries, or
    /// `k + 1` when a rejected column is included.
    pub fn from_counts(rows: &[Vec<u64>], class_names: Option<Vec<String>>) -> Result<Self> {
        let k = rows.len();
        let mut cm = Self::new(k, class_names)?;
        for (t, row) in rows.iter().enumerate() {
            if row.len() != k && row.len() != k + 1 {
                return Err(Error::InvalidText {
                    what: "confusion matrix".into(),
                    detail: format!("row {} has {} entries for {} classes", t, row.len(), k),
                });
            }
            for (p, &n) in row.iter().enumerate() {
                cm.counts[[t, p]] = n;
            }
        }
        Ok(cm)
    }

    /// Tally one labeled pixel. `truth` is 1-based and must be labeled;
    /// `pred` 0 lands in the rejected column.
    pub fn record(&mut self, truth: u16, pred: u16) -> Result<()> {
        if truth == 0 || truth as usize > self.k {
            return Err(Error::LabelOutOfRange {
                id: truth,
                num_classes: self.k,
            });
        }
        if pred as usize > self.k {
            return Err(Error::LabelOutOfRange {
                id: pred,
                num_classes: self.k,
            });
        }
        let t = truth as usize - 1;
        let p = if pred == 0 { self.k } else { pred as usize - 1 };
        self.counts[[t, p]] += 1;
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    /// Count of truth class `t` predicted as `p`, both 0-based.
    pub fn count(&self, t: usize, p: usize) -> u64 {
        self.counts[[t, p]]
    }

    /// Labeled pixels of truth class `t` (0-based) left unassigned.
    pub fn rejected(&self, t: usize) -> u64 {
        self.counts[[t, self.k]]
    }

    pub fn rejected_total(&self) -> u64 {
        (0..self.k).map(|t| self.rejected(t)).sum()
    }

    /// Truth total for class `t`, rejected pixels included.
    pub fn row_total(&self, t: usize) -> u64 {
        self.counts.row(t).sum()
    }

    /// Prediction total for class `p`; the rejected column has no
    /// predicted class and is not addressable here.
    pub fn col_total(&self, p: usize) -> u64 {
        assert!(p < self.k, "rejected column has no prediction total");
        self.counts.column(p).sum()
    }

    pub fn diagonal_total(&self) -> u64 {
        (0..self.k).map(|c| self.counts[[c, c]]).sum()
    }

    /// Every labeled pixel tallied, rejected included.
    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Display name for 0-based class `c`: the stored name or "class N".
    pub fn class_label(&self, c: usize) -> String {
        match &self.class_names {
            Some(names) => names[c].clone(),
            None => format!("class {}", c + 1),
        }
    }
}

/// Accuracy figures computed from a [`ConfusionMatrix`].
///
/// `producer[c]` and `user[c]` are `None` when class `c` has no truth
/// pixels or no predictions, respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyStats {
    pub overall: f64,
    pub producer: Vec<Option<f64>>,
    pub user: Vec<Option<f64>>,
    pub correct: u64,
    pub total: u64,
    pub row_totals: Vec<u64>,
    pub col_totals: Vec<u64>,
    pub rejected: u64,
}

/// Tally predictions against ground truth over `k` classes.
///
/// Truth pixels labeled 0 are ignored. Prediction id 0 at a labeled pixel
/// is tallied in the rejected column. Class names are carried over from
/// the truth raster when it declares exactly `k` of them.
pub fn confusion_matrix(pred: &LabelRaster, truth: &LabelRaster, k: usize) -> Result<ConfusionMatrix> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::DimensionMismatch {
            what: "prediction raster".into(),
            expected_width: truth.width(),
            expected_height: truth.height(),
            found_width: pred.width(),
            found_height: pred.height(),
        });
    }
    let names = truth
        .class_names()
        .filter(|n| n.len() == k)
        .map(|n| n.to_vec());
    let mut cm = ConfusionMatrix::new(k, names)?;
    for y in 0..truth.height() {
        for x in 0..truth.width() {
            let t = truth.get(x, y);
            if t == 0 {
                continue;
            }
            cm.record(t, pred.get(x, y))?;
        }
    }
    Ok(cm)
}

/// Overall, producer's, and user's accuracies.
pub fn accuracy_stats(cm: &ConfusionMatrix) -> Result<AccuracyStats> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let k = cm.num_classes();
    let row_totals: Vec<u64> = (0..k).map(|t| cm.row_total(t)).collect();
    let col_totals: Vec<u64> = (0..k).map(|p| cm.col_total(p)).collect();
    let producer = (0..k)
        .map(|c| {
            (row_totals[c] > 0).then(|| cm.count(c, c) as f64 / row_totals[c] as f64)
        })
        .collect();
    let user = (0..k)
        .map(|c| {
            (col_totals[c] > 0).then(|| cm.count(c, c) as f64 / col_totals[c] as f64)
        })
        .collect();
    let correct = cm.diagonal_total();
    Ok(AccuracyStats {
        overall: correct as f64 / total as f64,
        producer,
        user,
        correct,
        total,
        row_totals,
        col_totals,
        rejected: cm.rejected_total(),
    })
}

/// Render a ratio as a percentage with two decimals, or "NA" when the
/// statistic is undefined. Used for terminal tables; CSV output keeps
/// full precision.
pub fn format_percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "NA".to_string(),
    }
}
