//! Confusion matrix, macro one-vs-rest rates and ROC AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::argmax;

/// Above this many samples AUC is integrated from the ROC curve instead of
/// counted over all positive/negative pairs.
pub const PAIR_COUNT_LIMIT: usize = 10_000;

/// `matrix[true][predicted]`.
pub type Confusion = Vec<Vec<u64>>;

pub fn confusion(preds: &[Vec<f64>], truths: &[usize], num_classes: usize) -> Result<Confusion> {
    if preds.len() != truths.len() {
        return Err(Error::domain(format!(
            "{} predictions for {} truths",
            preds.len(),
            truths.len()
        )));
    }
    let mut m = vec![vec![0u64; num_classes]; num_classes];
    for (p, &t) in preds.iter().zip(truths) {
        let j = argmax(p).ok_or_else(|| Error::domain("empty prediction"))?;
        if t >= num_classes || j >= num_classes {
            return Err(Error::domain(format!("class pair ({t}, {j}) outside 0..{num_classes}")));
        }
        m[t][j] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: usize,
    pub support: u64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: u64,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_specificity: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassStats>,
    /// Classes absent from the truth; they count as F1 = 0 in the macro mean.
    pub zero_support: Vec<usize>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn summary(matrix: &Confusion) -> Result<Summary> {
    let k = matrix.len();
    let total: u64 = matrix.iter().flatten().sum();
    if total == 0 || matrix.iter().any(|row| row.len() != k) {
        return Err(Error::Evaluation("confusion matrix is empty or not square".into()));
    }
    let mut per_class = Vec::with_capacity(k);
    let mut zero_support = Vec::new();
    for c in 0..k {
        let tp = matrix[c][c];
        let support: u64 = matrix[c].iter().sum();
        let predicted: u64 = matrix.iter().map(|row| row[c]).sum();
        let fn_ = support - tp;
        let fp = predicted - tp;
        let tn = total - tp - fn_ - fp;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if support == 0 {
            zero_support.push(c);
        }
        per_class.push(ClassStats {
            class: c,
            support,
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            specificity: ratio(tn, tn + fp),
            f1: if support == 0 { 0.0 } else { f1 },
        });
    }
    let mean = |f: fn(&ClassStats) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    Ok(Summary {
        total,
        accuracy: ratio((0..k).map(|c| matrix[c][c]).sum(), total),
        macro_precision: mean(|s| s.precision),
        macro_recall: mean(|s| s.recall),
        macro_specificity: mean(|s| s.specificity),
        macro_f1: mean(|s| s.f1),
        per_class,
        zero_support,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AucReport {
    /// Mean over the classes that have both positives and negatives.
    pub macro_auc: Option<f64>,
    pub per_class: Vec<Option<f64>>,
    pub excluded: Vec<usize>,
    pub roc: Vec<Vec<RocPoint>>,
}

/// `P(pos > neg) + P(pos = neg) / 2` by counting every pair.
pub fn auc_pair_count(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() as f64 * neg.len() as f64)
}

/// ROC curve from the highest threshold down; tied scores form one step.
/// The first point sits at threshold `+inf` with both rates zero.
pub fn roc_points(scores: &[f64], positive: &[bool]) -> Vec<RocPoint> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let p = positive.iter().filter(|&&x| x).count() as f64;
    let n = positive.len() as f64 - p;
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if positive[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: if n > 0.0 { fp / n } else { 0.0 },
            tpr: if p > 0.0 { tp / p } else { 0.0 },
        });
    }
    points
}

/// Area under [`roc_points`] by the trapezoid rule.
pub fn auc_trapezoid(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Macro one-vs-rest AUC. With `strict`, a class lacking positives or
/// negatives is an error rather than an exclusion.
pub fn auc_ovr(scores: &[Vec<f64>], truths: &[usize], strict: bool) -> Result<AucReport> {
    if scores.len() != truths.len() || scores.is_empty() {
        return Err(Error::Evaluation(format!(
            "{} score rows for {} truths",
            scores.len(),
            truths.len()
        )));
    }
    let k = scores[0].len();
    if scores.iter().any(|s| s.len() != k) || truths.iter().any(|&t| t >= k) {
        return Err(Error::Evaluation("ragged scores or out-of-range truth".into()));
    }
    let mut per_class = Vec::with_capacity(k);
    let mut excluded = Vec::new();
    let mut roc = Vec::with_capacity(k);
    for c in 0..k {
        let col: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        let positive: Vec<bool> = truths.iter().map(|&t| t == c).collect();
        let points = roc_points(&col, &positive);
        let npos = positive.iter().filter(|&&x| x).count();
        if npos == 0 || npos == positive.len() {
            if strict {
                return Err(Error::Evaluation(format!("class {c} lacks positives or negatives")));
            }
            excluded.push(c);
            per_class.push(None);
        } else if scores.len() <= PAIR_COUNT_LIMIT {
            let (pos, neg): (Vec<(f64, bool)>, Vec<(f64, bool)>) =
                col.iter().copied().zip(positive.iter().copied()).partition(|x| x.1);
            let pos: Vec<f64> = pos.into_iter().map(|x| x.0).collect();
            let neg: Vec<f64> = neg.into_iter().map(|x| x.0).collect();
            per_class.push(Some(auc_pair_count(&pos, &neg)));
        } else {
            per_class.push(Some(auc_trapezoid(&points)));
        }
        roc.push(points);
    }
    let included: Vec<f64> = per_class.iter().flatten().copied().collect();
    let macro_auc = (!included.is_empty()).then(|| included.iter().sum::<f64>() / included.len() as f64);
    Ok(AucReport {
        macro_auc,
        per_class,
        excluded,
        roc,
    })
}

/// Everything written to a run's metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_specificity: f64,
    pub macro_auc: Option<f64>,
    pub per_class_auc: Vec<Option<f64>>,
    pub auc_excluded: Vec<usize>,
    pub summary: Summary,
    pub confusion: Confusion,
}

impl MetricsReport {
    pub fn new(scores: &[Vec<f64>], truths: &[usize]) -> Result<(Self, Vec<Vec<RocPoint>>)> {
        let k = scores.first().map_or(0, Vec::len);
        let confusion = confusion(scores, truths, k)?;
        let summary = summary(&confusion)?;
        let auc = auc_ovr(scores, truths, false)?;
        Ok((
            Self {
                accuracy: summary.accuracy,
                macro_f1: summary.macro_f1,
                macro_precision: summary.macro_precision,
                macro_recall: summary.macro_recall,
                macro_specificity: summary.macro_specificity,
                macro_auc: auc.macro_auc,
                per_class_auc: auc.per_class,
                auc_excluded: auc.excluded,
                summary,
                confusion,
            },
            auc.roc,
        ))
    }

    pub fn recall_of(&self, class: usize) -> f64 {
        self.summary.per_class[class].recall
    }
}

/// `true\pred` header row, then one row per true class.
pub fn confusion_to_csv(m: &Confusion) -> String {
    let mut out = String::from("true\\pred");
    for j in 0..m.len() {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for (i, row) in m.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn confusion_from_csv(text: &str) -> Result<Confusion> {
    let bad = |line: usize, msg: &str| Error::Parse {
        path: "confusion.csv".into(),
        line,
        msg: msg.into(),
    };
    let mut lines = text.lines();
    let k = lines.next().ok_or_else(|| bad(1, "missing header"))?.split(',').count() - 1;
    let mut m = Vec::with_capacity(k);
    for (i, line) in lines.enumerate() {
        let row: Vec<u64> = line
            .split(',')
            .skip(1)
            .map(|v| v.parse().map_err(|_| bad(i + 2, "non-integer count")))
            .collect::<Result<_>>()?;
        if row.len() != k {
            return Err(bad(i + 2, "wrong column count"));
        }
        m.push(row);
    }
    if m.len() != k {
        return Err(bad(k + 1, "matrix is not square"));
    }
    Ok(m)
}

pub fn roc_to_csv(roc: &[Vec<RocPoint>]) -> String {
    let mut out = String::from("class,threshold,fpr,tpr\n");
    for (c, points) in roc.iter().enumerate() {
        for p in points {
            out.push_str(&format!("{c},{:?},{:?},{:?}\n", p.threshold, p.fpr, p.tpr));
        }
    }
    out
}
