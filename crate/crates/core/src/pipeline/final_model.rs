use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::{FinalCluster, FinalModel, ModelSettings, TemporaryModel};
use crate::cluster::{dbscan_with, NeighborSearch};
use crate::data::RowMatrix;
use crate::error::{Result, SdcorError};
use crate::numeric::{covariance_sqrt, cov_determinant, derive_basis, is_singular, EigenBasis, SuffStats};
use crate::params::TunedParams;

use super::scalable::minicluster_make;

/// Clusters the sample and turns every cluster into an initial minicluster.
pub fn build_initial_model(
    sample: &RowMatrix,
    params: &TunedParams,
    energy: f64,
    alpha: f64,
    search: &dyn NeighborSearch,
) -> Result<TemporaryModel> {
    if sample.is_empty() {
        return Err(SdcorError::invalid("empty sample"));
    }
    let part = dbscan_with(sample, params.sample_params, search);
    if part.k == 0 {
        return Err(SdcorError::Infeasible(
            "DBSCAN labelled the whole sample as noise; raise the sampling rate or Eps".into(),
        ));
    }
    let mut groups = Vec::with_capacity(part.k);
    let mut dets = Vec::with_capacity(part.k);
    for (i, members) in part.clusters().iter().enumerate() {
        let stats = SuffStats::from_indexed(sample, members);
        if is_singular(&stats) {
            return Err(SdcorError::Infeasible(format!(
                "sampled cluster {} ({} points in {} dimensions) has a singular covariance; raise the sampling rate",
                i + 1,
                members.len(),
                sample.dim()
            )));
        }
        dets.push(cov_determinant(&stats)?);
        groups.push(stats);
    }
    let mut model = TemporaryModel {
        miniclusters: Vec::new(),
        t_initial: part.k,
        det_thresholds: dets,
        energy,
        alpha,
    };
    minicluster_make(&mut model, groups, None)?;
    Ok(model)
}

/// Merges the miniclusters attached to each initial cluster into one
/// Gaussian: the mean is the size-weighted mean, the covariance comes from
/// regenerated points pruned at `beta·√p`.
pub fn build_final_model(model: &TemporaryModel, eta: f64, beta: f64, seed: u64) -> Result<FinalModel> {
    let t = model.t_initial;
    let p = model.dim();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); t];
    for (i, mc) in model.miniclusters.iter().enumerate() {
        groups[mc.nearest_initial].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters = Vec::with_capacity(t);
    for (h, members) in groups.iter().enumerate() {
        if members.is_empty() {
            return Err(SdcorError::Infeasible(format!(
                "initial cluster {} has no associated miniclusters",
                h + 1
            )));
        }
        if members.len() == 1 {
            let stats = &model.miniclusters[members[0]].stats;
            clusters.push(FinalCluster::new(stats.mean(), stats.covariance()?)?);
            continue;
        }

        let total: usize = members.iter().map(|&i| model.miniclusters[i].stats.count()).sum();
        let mut mu = vec![0.0; p];
        for &i in members {
            let s = &model.miniclusters[i].stats;
            let w = s.count() as f64 / total as f64;
            for (acc, v) in mu.iter_mut().zip(s.mean()) {
                *acc += w * v;
            }
        }

        let mut pool = RowMatrix::new(p);
        let mut z = vec![0.0; p];
        let mut x = vec![0.0; p];
        for &i in members {
            let s = &model.miniclusters[i].stats;
            let count = ((eta * s.count() as f64).round() as usize).max(p + 1);
            let mean = s.mean();
            let l = covariance_sqrt(&s.covariance()?, p)?;
            for _ in 0..count {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                for r in 0..p {
                    x[r] = mean[r] + (0..p).map(|c| l[r * p + c] * z[c]).sum::<f64>();
                }
                pool.push(&x);
            }
        }
        let pooled = SuffStats::from_rows(&pool);
        let frame = derive_basis(&pooled, 1.0)?;
        let cut = beta * (p as f64).sqrt();
        let mut kept = SuffStats::new(p);
        for r in pool.rows() {
            if frame.distance(r) <= cut {
                kept.insert(r);
            }
        }
        if kept.count() < p + 1 {
            return Err(SdcorError::Numerical(format!(
                "only {} regenerated points survive pruning for final cluster {}",
                kept.count(),
                h + 1
            )));
        }
        clusters.push(FinalCluster::new(mu, kept.covariance()?)?);
    }
    Ok(FinalModel {
        clusters,
        settings: ModelSettings {
            eta,
            lambda: model.energy,
            alpha: model.alpha,
            beta,
        },
    })
}

/// Smallest distance to any final cluster and the 1-based id of that cluster.
#[inline]
pub fn score_point(x: &[f64], bases: &[&EigenBasis]) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut id = 0;
    for (i, b) in bases.iter().enumerate() {
        let d = b.distance(x);
        if d < best {
            best = d;
            id = i;
        }
    }
    (best, id + 1)
}
