//! Cost of a DBSCAN configuration on the sample: Davies-Bouldin plus CS
//! index plus the noise share, with the noise set counted as one more cluster.

use crate::cluster::{dbscan_with, neighbors::Auto, DbscanParams, NeighborSearch, Partition};
use crate::data::RowMatrix;
use crate::numeric::{is_singular, sq_dist, SuffStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Infeasible {
    AllNoise,
    NoNoise,
    SingularCluster,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitnessReport {
    pub value: f64,
    pub clusters: usize,
    pub noise: usize,
    pub davies_bouldin: f64,
    pub cs: f64,
    pub infeasible: Option<Infeasible>,
}

pub fn fitness(sample: &RowMatrix, params: DbscanParams) -> f64 {
    fitness_report(sample, params, &Auto).value
}

pub fn fitness_report(sample: &RowMatrix, params: DbscanParams, search: &dyn NeighborSearch) -> FitnessReport {
    let part = dbscan_with(sample, params, search);
    score_partition(sample, &part)
}

pub fn score_partition(sample: &RowMatrix, part: &Partition) -> FitnessReport {
    let noise = part.noise_count();
    let infeasible = |why| FitnessReport {
        value: f64::INFINITY,
        clusters: part.k,
        noise,
        davies_bouldin: f64::NAN,
        cs: f64::NAN,
        infeasible: Some(why),
    };
    if part.k == 0 {
        return infeasible(Infeasible::AllNoise);
    }
    if noise == 0 {
        return infeasible(Infeasible::NoNoise);
    }
    let mut groups = part.clusters();
    for g in &groups {
        if is_singular(&SuffStats::from_indexed(sample, g)) {
            return infeasible(Infeasible::SingularCluster);
        }
    }
    groups.push(part.noise());
    let db = davies_bouldin(sample, &groups);
    let cs = cs_index(sample, &groups);
    let ratio = noise as f64 / sample.len() as f64;
    FitnessReport {
        value: db + cs + ratio,
        clusters: part.k,
        noise,
        davies_bouldin: db,
        cs,
        infeasible: None,
    }
}

fn centroid(points: &RowMatrix, idx: &[usize]) -> Vec<f64> {
    let p = points.dim();
    let mut c = vec![0.0; p];
    for &i in idx {
        for (acc, v) in c.iter_mut().zip(points.row(i)) {
            *acc += v;
        }
    }
    c.iter_mut().for_each(|v| *v /= idx.len() as f64);
    c
}

/// Mean over clusters of the worst (S_i + S_j) / d(c_i, c_j) ratio, where S
/// is the mean distance of members to their centroid.
pub fn davies_bouldin(points: &RowMatrix, groups: &[Vec<usize>]) -> f64 {
    let k = groups.len();
    if k < 2 {
        return f64::INFINITY;
    }
    let cents: Vec<Vec<f64>> = groups.iter().map(|g| centroid(points, g)).collect();
    let spread: Vec<f64> = groups
        .iter()
        .zip(&cents)
        .map(|(g, c)| g.iter().map(|&i| sq_dist(points.row(i), c).sqrt()).sum::<f64>() / g.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i != j {
                let d = sq_dist(&cents[i], &cents[j]).sqrt();
                let r = (spread[i] + spread[j]) / d;
                worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
            }
        }
        total += worst;
    }
    total / k as f64
}

/// Sum of per-cluster mean "distance to the farthest co-member" over the sum
/// of nearest-centroid separations.
pub fn cs_index(points: &RowMatrix, groups: &[Vec<usize>]) -> f64 {
    let k = groups.len();
    if k < 2 {
        return f64::INFINITY;
    }
    let cents: Vec<Vec<f64>> = groups.iter().map(|g| centroid(points, g)).collect();
    let num: f64 = groups
        .iter()
        .zip(&cents)
        .map(|(g, c)| mean_farthest(points, g, c))
        .sum();
    let den: f64 = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| sq_dist(&cents[i], &cents[j]).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Mean over members x of max_y d(x, y). Candidates are visited by
/// decreasing distance to the centroid; once d(x,c) + d(c,y) cannot beat the
/// current best, the scan stops.
fn mean_farthest(points: &RowMatrix, g: &[usize], c: &[f64]) -> f64 {
    let mut by_radius: Vec<(f64, usize)> = g.iter().map(|&i| (sq_dist(points.row(i), c).sqrt(), i)).collect();
    by_radius.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let mut total = 0.0;
    for &(rx, x) in &by_radius {
        let xr = points.row(x);
        let mut best = 0.0f64;
        for &(ry, y) in &by_radius {
            if rx + ry <= best {
                break;
            }
            best = best.max(sq_dist(xr, points.row(y)).sqrt());
        }
        total += best;
    }
    total / g.len() as f64
}
