//! Classification quality: accuracy, one-vs-rest precision/recall/F1 and
//! ROC analysis.
//!
//! Degenerate denominators (a class never predicted or never present)
//! yield 0 for the affected metric and set [`ClassMetrics::degenerate`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("confusion matrix has no classifications")]
    Empty,
    #[error("confusion matrix must be square, got {0} cells")]
    NotSquare(usize),
    #[error("class index {index} out of range for {classes} classes")]
    ClassIndex { index: usize, classes: usize },
    #[error("ROC needs at least one positive and one negative sample")]
    SingleClass,
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("non-finite score at sample {0}")]
    NonFinite(usize),
}

/// Square count grid; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, MetricsError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MetricsError::NotSquare(rows.iter().map(Vec::len).sum()));
        }
        Ok(Self {
            classes: n,
            counts: rows.iter().flatten().copied().collect(),
        })
    }

    /// Tallies `(true, predicted)` label pairs.
    pub fn from_predictions(
        classes: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MetricsError> {
        let mut cm = Self::new(classes);
        for (t, p) in pairs {
            cm.record(t, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<(), MetricsError> {
        for index in [truth, predicted] {
            if index >= self.classes {
                return Err(MetricsError::ClassIndex {
                    index,
                    classes: self.classes,
                });
            }
        }
        self.counts[truth * self.classes + predicted] += 1;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (0..self.classes).map(|j| self.get(truth, j)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|i| self.get(i, predicted)).sum()
    }

    /// Reorders classes so that new class `i` is old class `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut out = Self::new(self.classes);
        for (ni, &oi) in order.iter().enumerate() {
            for (nj, &oj) in order.iter().enumerate() {
                out.counts[ni * self.classes + nj] = self.get(oi, oj);
            }
        }
        out
    }
}

/// Fraction of correct classifications, `trace / total`.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(cm.trace() as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when any denominator was zero and a metric defaulted to 0.
    pub degenerate: bool,
}

/// One-vs-rest precision, recall and F1 for `class`.
pub fn precision_recall_f1(
    cm: &ConfusionMatrix,
    class: usize,
) -> Result<ClassMetrics, MetricsError> {
    if class >= cm.classes() {
        return Err(MetricsError::ClassIndex {
            index: class,
            classes: cm.classes(),
        });
    }
    let tp = cm.get(class, class) as f64;
    let actual = cm.row_sum(class);
    let predicted = cm.col_sum(class);
    let mut degenerate = false;
    let recall = if actual == 0 {
        degenerate = true;
        0.0
    } else {
        tp / actual as f64
    };
    let precision = if predicted == 0 {
        degenerate = true;
        0.0
    } else {
        tp / predicted as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassMetrics {
        precision,
        recall,
        f1,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Which scalar of a [`QualityReport`] drives the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QualityMetric {
    #[default]
    Accuracy,
    Precision(usize),
    Recall(usize),
    F1(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassReport>,
    pub roc: Option<Vec<RocCurve>>,
}

impl QualityReport {
    /// Full report from a confusion matrix; `labels` names the classes in
    /// order.
    pub fn from_confusion(cm: &ConfusionMatrix, labels: &[String]) -> Result<Self, MetricsError> {
        let accuracy = accuracy(cm)?;
        let per_class = (0..cm.classes())
            .map(|c| {
                let m = precision_recall_f1(cm, c)?;
                Ok(ClassReport {
                    label: labels
                        .get(c)
                        .cloned()
                        .unwrap_or_else(|| alloc::format!("class{c}")),
                    precision: m.precision,
                    recall: m.recall,
                    f1: m.f1,
                })
            })
            .collect::<Result<_, MetricsError>>()?;
        Ok(Self {
            accuracy,
            per_class,
            roc: None,
        })
    }

    /// A report carrying only an accuracy value.
    pub fn accuracy_only(accuracy: f64) -> Self {
        Self {
            accuracy,
            per_class: Vec::new(),
            roc: None,
        }
    }

    /// Extracts the selected scalar; `None` when the class is absent.
    pub fn select(&self, metric: QualityMetric) -> Option<f64> {
        match metric {
            QualityMetric::Accuracy => Some(self.accuracy),
            QualityMetric::Precision(c) => self.per_class.get(c).map(|r| r.precision),
            QualityMetric::Recall(c) => self.per_class.get(c).map(|r| r.recall),
            QualityMetric::F1(c) => self.per_class.get(c).map(|r| r.f1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive. The first point uses
    /// `+inf` (nothing positive).
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Binary ROC by sweeping the distinct scores from high to low.
/// Tied scores move in one step, so ties contribute a diagonal segment.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Result<RocCurve, MetricsError> {
    if scores.len() != positive.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: positive.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFinite(i));
    }
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = positive.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }

    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// One-vs-rest ROC for every class. `scores[i][c]` is sample i's score for
/// class c. Classes absent from (or covering all of) `labels` yield errors.
pub fn roc_per_class(
    scores: &[Vec<f64>],
    labels: &[usize],
    classes: usize,
) -> Result<Vec<RocCurve>, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    (0..classes)
        .map(|c| {
            let s: Vec<f64> = scores
                .iter()
                .map(|row| {
                    row.get(c).copied().ok_or(MetricsError::ClassIndex {
                        index: c,
                        classes: row.len(),
                    })
                })
                .collect::<Result<_, _>>()?;
            let p: Vec<bool> = labels.iter().map(|&l| l == c).collect();
            roc_curve(&s, &p)
        })
        .collect()
}
