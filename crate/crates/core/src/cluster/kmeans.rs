use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Partition;
use crate::data::RowMatrix;
use crate::error::{Result, SdcorError};
use crate::numeric::sq_dist;

pub const KMEANS_RESTARTS: usize = 3;
pub const KMEANS_MAX_ITER: usize = 100;

#[derive(Clone, Debug)]
pub struct KMeansResult {
    /// Ids `1..=k`; k-means never produces noise.
    pub partition: Partition,
    pub centroids: RowMatrix,
    pub sse: f64,
    /// SSE after each assignment step of the winning restart.
    pub sse_history: Vec<f64>,
}

/// Lloyd's algorithm from k-means++ seeds, best of [`KMEANS_RESTARTS`].
pub fn kmeans(points: &RowMatrix, k: usize, seed: u64) -> Result<KMeansResult> {
    let s = points.len();
    if k == 0 || k > s {
        return Err(SdcorError::invalid(format!("k-means needs 1 <= k <= {s}, got k={k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..KMEANS_RESTARTS {
        let run = lloyd(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn seed_plus_plus(points: &RowMatrix, k: usize, rng: &mut ChaCha8Rng) -> RowMatrix {
    let s = points.len();
    let mut centroids = RowMatrix::with_capacity(points.dim(), k);
    centroids.push(points.row(rng.gen_range(0..s)));
    let mut d2: Vec<f64> = points.rows().map(|r| sq_dist(r, centroids.row(0))).collect();
    while centroids.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // All remaining mass is zero: every point coincides with a centroid.
            Err(_) => rng.gen_range(0..s),
        };
        centroids.push(points.row(next));
        let c = centroids.row(centroids.len() - 1).to_vec();
        for (d, r) in d2.iter_mut().zip(points.rows()) {
            *d = d.min(sq_dist(r, &c));
        }
    }
    centroids
}

fn assign(points: &RowMatrix, centroids: &RowMatrix, labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut sse = 0.0;
    for (i, r) in points.rows().enumerate() {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (c, cr) in centroids.rows().enumerate() {
            let d = sq_dist(r, cr);
            if d < bd {
                bd = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = bd;
        sse += bd;
    }
    sse
}

fn lloyd(points: &RowMatrix, k: usize, rng: &mut ChaCha8Rng) -> KMeansResult {
    let s = points.len();
    let p = points.dim();
    let mut centroids = seed_plus_plus(points, k, rng);
    let mut labels = vec![0usize; s];
    let mut dists = vec![0.0; s];
    let mut history = Vec::new();
    let mut sse = assign(points, &centroids, &mut labels, &mut dists);
    history.push(sse);

    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![0.0; k * p];
        let mut counts = vec![0usize; k];
        for (i, r) in points.rows().enumerate() {
            let c = labels[i];
            counts[c] += 1;
            for j in 0..p {
                sums[c * p + j] += r[j];
            }
        }
        let mut next = RowMatrix::with_capacity(p, k);
        let mut taken = vec![false; s];
        for c in 0..k {
            if counts[c] > 0 {
                let row: Vec<f64> = (0..p).map(|j| sums[c * p + j] / counts[c] as f64).collect();
                next.push(&row);
            } else {
                // Re-seed an empty cluster at the point farthest from its centroid.
                let far = (0..s)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                dists[far] = 0.0;
                next.push(points.row(far));
            }
        }
        centroids = next;
        let prev = labels.clone();
        let new_sse = assign(points, &centroids, &mut labels, &mut dists);
        debug_assert!(
            new_sse <= sse * (1.0 + 1e-12) + 1e-12,
            "k-means SSE increased: {sse} -> {new_sse}"
        );
        history.push(new_sse);
        sse = new_sse;
        if labels == prev {
            break;
        }
    }

    // Compact ids in case a cluster ended up empty.
    let mut remap = vec![usize::MAX; k];
    let mut next_id = 0;
    let mut compact = RowMatrix::with_capacity(p, k);
    let mut assignments = vec![0; s];
    for i in 0..s {
        let c = labels[i];
        if remap[c] == usize::MAX {
            next_id += 1;
            remap[c] = next_id;
        }
        assignments[i] = remap[c];
    }
    let mut order: Vec<(usize, usize)> = (0..k).filter(|&c| remap[c] != usize::MAX).map(|c| (remap[c], c)).collect();
    order.sort_unstable();
    for (_, c) in order {
        compact.push(centroids.row(c));
    }
    KMeansResult {
        partition: Partition {
            assignments,
            k: next_id,
        },
        centroids: compact,
        sse,
        sse_history: history,
    }
}
