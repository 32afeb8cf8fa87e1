//! Ranking quality (ROC and precision-recall areas) and external
//! clustering-validity metrics.

use std::collections::BTreeMap;

use crate::cluster::Partition;
use crate::data::ScoreTable;
use crate::error::{Result, SdcorError};

fn class_counts(labels: &[u8]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(SdcorError::invalid(
            "ranking metrics need at least one outlier and one inlier label",
        ));
    }
    Ok((pos, neg))
}

/// Cumulative (false positives, true positives) after each group of tied
/// scores, visiting scores from highest to lowest.
fn sweep(scores: &[f64], labels: &[u8]) -> Result<Vec<(usize, usize)>> {
    if scores.len() != labels.len() {
        return Err(SdcorError::DimensionMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(SdcorError::invalid("scores contain NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::new();
    let (mut fp, mut tp) = (0, 0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp, tp));
    }
    Ok(points)
}

/// (FPR, TPR) points starting at (0, 0).
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>> {
    let (pos, neg) = class_counts(labels)?;
    let mut out = vec![(0.0, 0.0)];
    out.extend(
        sweep(scores, labels)?
            .into_iter()
            .map(|(fp, tp)| (fp as f64 / neg as f64, tp as f64 / pos as f64)),
    );
    Ok(out)
}

/// (recall, precision) at each distinct threshold.
pub fn pr_points(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>> {
    let (pos, _) = class_counts(labels)?;
    Ok(sweep(scores, labels)?
        .into_iter()
        .map(|(fp, tp)| (tp as f64 / pos as f64, tp as f64 / (tp + fp) as f64))
        .collect())
}

/// Trapezoidal area under the ROC curve; tied scores form one step.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = class_counts(labels)?;
    let mut area = 0.0;
    let (mut pfp, mut ptp) = (0usize, 0usize);
    for (fp, tp) in sweep(scores, labels)? {
        area += (fp - pfp) as f64 * (tp + ptp) as f64 / 2.0;
        pfp = fp;
        ptp = tp;
    }
    Ok(area / (pos as f64 * neg as f64))
}

/// Step-wise area under the precision-recall curve, Σ (R_i − R_{i−1})·P_i.
pub fn auprc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let mut area = 0.0;
    let mut prev_r = 0.0;
    for (r, p) in pr_points(scores, labels)? {
        area += (r - prev_r) * p;
        prev_r = r;
    }
    Ok(area)
}

/// Relabels arbitrary ids as contiguous `1..=k`, in ascending id order.
pub fn partition_from_ids(ids: &[usize]) -> Partition {
    let mut map = BTreeMap::new();
    for &c in ids {
        map.entry(c).or_insert(0);
    }
    for (next, v) in map.values_mut().enumerate() {
        *v = next + 1;
    }
    Partition {
        assignments: ids.iter().map(|c| map[c]).collect(),
        k: map.len(),
    }
}

/// Splits off the `o` highest-scoring rows as one anomaly cluster (ties at
/// the cut go to the lowest row index). Other rows keep their final-cluster
/// ids, renumbered to `1..=m`; the anomaly cluster is `m + 1`. The result is
/// indexed by row.
pub fn extract_outlier_partition(st: &ScoreTable, o: usize) -> Result<Partition> {
    let n = st.len();
    if o == 0 || o >= n {
        return Err(SdcorError::invalid(format!("top-o must satisfy 0 < o < {n}, got {o}")));
    }
    if !st.is_permutation() {
        return Err(SdcorError::invalid("score table row indices are not 0..n"));
    }
    let mut by_row = st.entries.clone();
    by_row.sort_by_key(|e| e.index);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| by_row[b].score.total_cmp(&by_row[a].score).then(a.cmp(&b)));
    let mut anomalous = vec![false; n];
    for &i in &order[..o] {
        anomalous[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !anomalous[i]).map(|i| by_row[i].cluster).collect();
    let normal = partition_from_ids(&rest);
    let mut it = normal.assignments.into_iter();
    let assignments = (0..n)
        .map(|i| if anomalous[i] { normal.k + 1 } else { it.next().unwrap() })
        .collect();
    Ok(Partition {
        assignments,
        k: normal.k + 1,
    })
}

/// Cluster-by-class intersection counts.
#[derive(Clone, Debug)]
pub struct Contingency {
    pub n: usize,
    /// counts[r][s] = |C_r ∩ D_s|
    pub counts: Vec<Vec<usize>>,
    pub cluster_sizes: Vec<usize>,
    pub class_sizes: Vec<usize>,
}

impl Contingency {
    pub fn new(predicted: &Partition, truth: &Partition) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(SdcorError::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        if predicted.is_empty() {
            return Err(SdcorError::invalid("empty partitions"));
        }
        if predicted.assignments.iter().chain(&truth.assignments).any(|&c| c == 0) {
            return Err(SdcorError::invalid("validity metrics need every element assigned"));
        }
        let mut counts = vec![vec![0; truth.k]; predicted.k];
        for (&r, &s) in predicted.assignments.iter().zip(&truth.assignments) {
            counts[r - 1][s - 1] += 1;
        }
        let cluster_sizes = counts.iter().map(|row| row.iter().sum()).collect();
        let class_sizes = (0..truth.k).map(|s| counts.iter().map(|row| row[s]).sum()).collect();
        Ok(Contingency {
            n: predicted.len(),
            counts,
            cluster_sizes,
            class_sizes,
        })
    }
}

pub fn purity(c: &Contingency) -> f64 {
    let hits: usize = c.counts.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    hits as f64 / c.n as f64
}

pub fn mirkin(c: &Contingency) -> f64 {
    let sq = |v: &[usize]| v.iter().map(|&x| (x * x) as f64).sum::<f64>();
    let cross: f64 = c.counts.iter().map(|row| sq(row)).sum();
    (sq(&c.cluster_sizes) + sq(&c.class_sizes) - 2.0 * cross) / (c.n as f64).powi(2)
}

pub fn f_measure(c: &Contingency) -> f64 {
    let mut total = 0.0;
    for (r, row) in c.counts.iter().enumerate() {
        let best = row
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(s, &x)| {
                let p = x as f64 / c.cluster_sizes[r] as f64;
                let rc = x as f64 / c.class_sizes[s] as f64;
                2.0 * p * rc / (p + rc)
            })
            .fold(0.0, f64::max);
        total += c.cluster_sizes[r] as f64 / c.n as f64 * best;
    }
    total
}

/// Size-weighted cluster entropy normalized by log(l); zero when l = 1.
pub fn entropy(c: &Contingency) -> f64 {
    let l = c.class_sizes.len();
    if l < 2 {
        return 0.0;
    }
    let norm = (l as f64).ln();
    let mut total = 0.0;
    for (r, row) in c.counts.iter().enumerate() {
        let size = c.cluster_sizes[r] as f64;
        let h: f64 = row
            .iter()
            .filter(|&&x| x > 0)
            .map(|&x| {
                let q = x as f64 / size;
                -q * q.ln()
            })
            .sum();
        total += size / c.n as f64 * h / norm;
    }
    total
}

/// Variation of information scaled by 1/(n·log n); zero when n = 1.
pub fn vi(c: &Contingency) -> f64 {
    if c.n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (r, row) in c.counts.iter().enumerate() {
        for (s, &x) in row.iter().enumerate() {
            if x > 0 {
                let x = x as f64;
                sum += x * ((c.cluster_sizes[r] as f64 * c.class_sizes[s] as f64) / (x * x)).ln();
            }
        }
    }
    let n = c.n as f64;
    sum / (n * n.ln())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityReport {
    pub purity: f64,
    pub mirkin: f64,
    pub f_measure: f64,
    pub entropy: f64,
    pub vi: f64,
}

pub fn validity(predicted: &Partition, truth: &Partition) -> Result<ValidityReport> {
    let c = Contingency::new(predicted, truth)?;
    Ok(ValidityReport {
        purity: purity(&c),
        mirkin: mirkin(&c),
        f_measure: f_measure(&c),
        entropy: entropy(&c),
        vi: vi(&c),
    })
}
