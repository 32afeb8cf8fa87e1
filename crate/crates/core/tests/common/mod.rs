//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sdcor::data::RowMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` draws of mean + L·z with row-major lower factor `l`.
pub fn gaussian(n: usize, mean: &[f64], l: &[f64], rng: &mut ChaCha8Rng) -> RowMatrix {
    let p = mean.len();
    let mut m = RowMatrix::new(p);
    let mut z = vec![0.0; p];
    let mut x = vec![0.0; p];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for r in 0..p {
            x[r] = mean[r] + (0..p).map(|c| l[r * p + c] * z[c]).sum::<f64>();
        }
        m.push(&x);
    }
    m
}

pub fn identity(p: usize, scale: f64) -> Vec<f64> {
    let mut m = vec![0.0; p * p];
    (0..p).for_each(|i| m[i * p + i] = scale);
    m
}

/// Random SPD matrix BᵀB + δI.
pub fn random_spd(p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let b: Vec<f64> = (0..p * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut s = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            s[i * p + j] = (0..p).map(|k| b[k * p + i] * b[k * p + j]).sum::<f64>();
        }
        s[i * p + i] += 0.1;
    }
    s
}

/// Lower Cholesky factor, row-major.
pub fn cholesky(a: &[f64], p: usize) -> Vec<f64> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum();
            if i == j {
                l[i * p + i] = (a[i * p + i] - s).sqrt();
            } else {
                l[i * p + j] = (a[i * p + j] - s) / l[j * p + j];
            }
        }
    }
    l
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &[f64], p: usize) -> Vec<f64> {
    let w = 2 * p;
    let mut m = vec![0.0; p * w];
    for i in 0..p {
        m[i * w..i * w + p].copy_from_slice(&a[i * p..i * p + p]);
        m[i * w + p + i] = 1.0;
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&x, &y| m[x * w + c].abs().total_cmp(&m[y * w + c].abs())).unwrap();
        for k in 0..w {
            m.swap(c * w + k, piv * w + k);
        }
        let d = m[c * w + c];
        for k in 0..w {
            m[c * w + k] /= d;
        }
        for r in 0..p {
            if r != c {
                let f = m[r * w + c];
                for k in 0..w {
                    m[r * w + k] -= f * m[c * w + k];
                }
            }
        }
    }
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        inv[i * p..i * p + p].copy_from_slice(&m[i * w + p..i * w + w]);
    }
    inv
}

/// sqrt((x−μ) Σ⁻¹ (x−μ)ᵀ) through an explicit inverse.
pub fn explicit_mahalanobis(x: &[f64], mu: &[f64], cov: &[f64]) -> f64 {
    let p = x.len();
    let inv = inverse(cov, p);
    let d: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    let mut q = 0.0;
    for i in 0..p {
        for j in 0..p {
            q += d[i] * inv[i * p + j] * d[j];
        }
    }
    q.max(0.0).sqrt()
}

/// Two-pass mean and unbiased covariance.
pub fn batch_mean_cov(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let p = rows[0].len();
    let m = rows.len() as f64;
    let mut mu = vec![0.0; p];
    for r in rows {
        for j in 0..p {
            mu[j] += r[j] / m;
        }
    }
    let mut cov = vec![0.0; p * p];
    for r in rows {
        for i in 0..p {
            for j in 0..p {
                cov[i * p + j] += (r[i] - mu[i]) * (r[j] - mu[j]) / (m - 1.0);
            }
        }
    }
    (mu, cov)
}

pub fn rows_of(m: &RowMatrix) -> Vec<Vec<f64>> {
    m.rows().map(|r| r.to_vec()).collect()
}

/// Textbook DBSCAN by full quadratic scans: clusters are opened in index
/// order at unvisited core points and grown breadth-first; a border point
/// keeps the first cluster that reaches it. Returns 0 for noise, else 1-based ids.
pub fn reference_dbscan(points: &RowMatrix, eps: f64, min_pts: usize) -> Vec<usize> {
    let n = points.len();
    let region = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| {
                let d: f64 = points.row(i).iter().zip(points.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                d <= eps * eps
            })
            .collect()
    };
    const UNSEEN: usize = usize::MAX;
    let mut label = vec![UNSEEN; n];
    let mut next = 0;
    for i in 0..n {
        if label[i] != UNSEEN {
            continue;
        }
        let nb = region(i);
        if nb.len() < min_pts {
            label[i] = 0;
            continue;
        }
        next += 1;
        label[i] = next;
        let mut queue: VecDeque<usize> = nb.into_iter().collect();
        while let Some(q) = queue.pop_front() {
            if label[q] == 0 {
                label[q] = next;
            }
            if label[q] != UNSEEN {
                continue;
            }
            label[q] = next;
            let qn = region(q);
            if qn.len() >= min_pts {
                queue.extend(qn);
            }
        }
    }
    label
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting ½.
pub fn pair_auroc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut good = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                good += 1.0;
            } else if scores[i] == scores[j] {
                good += 0.5;
            }
        }
    }
    good / pairs
}

/// Step-wise PR area by enumerating every distinct threshold.
pub fn threshold_auprc(scores: &[f64], labels: &[u8]) -> f64 {
    let pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let mut cuts: Vec<f64> = scores.to_vec();
    cuts.sort_by(|a, b| b.total_cmp(a));
    cuts.dedup();
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for t in cuts {
        let flagged: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= t).collect();
        let tp = flagged.iter().filter(|&&i| labels[i] == 1).count() as f64;
        let recall = tp / pos;
        area += (recall - prev_recall) * tp / flagged.len() as f64;
        prev_recall = recall;
    }
    area
}

/// The five validity metrics computed element by element.
pub struct MetricOracle {
    pub purity: f64,
    pub mirkin: f64,
    pub f_measure: f64,
    pub entropy: f64,
    pub vi: f64,
}

fn shannon(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum()
}

pub fn metric_oracle(pred: &[usize], truth: &[usize]) -> MetricOracle {
    let n = pred.len();
    let nf = n as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut csize: HashMap<usize, usize> = HashMap::new();
    let mut dsize: HashMap<usize, usize> = HashMap::new();
    for (&c, &d) in pred.iter().zip(truth) {
        *joint.entry((c, d)).or_default() += 1;
        *csize.entry(c).or_default() += 1;
        *dsize.entry(d).or_default() += 1;
    }

    let mut purity = 0.0;
    let mut f_measure = 0.0;
    let mut entropy = 0.0;
    let l = dsize.len();
    for (&c, &nc) in &csize {
        let cell = |d: usize| joint.get(&(c, d)).copied().unwrap_or(0);
        purity += dsize.keys().map(|&d| cell(d)).max().unwrap() as f64;
        let best_f = dsize
            .iter()
            .map(|(&d, &nd)| {
                let x = cell(d) as f64;
                if x == 0.0 {
                    0.0
                } else {
                    2.0 * x / (nc as f64 + nd as f64)
                }
            })
            .fold(0.0, f64::max);
        f_measure += nc as f64 / nf * best_f;
        if l > 1 {
            let h = shannon(dsize.keys().map(|&d| cell(d)), nc as f64);
            entropy += nc as f64 / nf * h / (l as f64).ln();
        }
    }
    purity /= nf;

    let mut disagree = 0usize;
    for i in 0..n {
        for j in 0..n {
            if (pred[i] == pred[j]) != (truth[i] == truth[j]) {
                disagree += 1;
            }
        }
    }
    let mirkin = disagree as f64 / (nf * nf);

    let vi = if n < 2 {
        0.0
    } else {
        let hc = shannon(csize.values().copied(), nf);
        let hd = shannon(dsize.values().copied(), nf);
        let hcd = shannon(joint.values().copied(), nf);
        (2.0 * hcd - hc - hd) / nf.ln()
    };
    MetricOracle {
        purity,
        mirkin,
        f_measure,
        entropy,
        vi,
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
