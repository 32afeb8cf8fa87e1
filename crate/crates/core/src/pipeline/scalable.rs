//! Phase-two operations on the temporary model: absorbing points into
//! miniclusters, sweeping the retained set, and clustering what is left.

use crate::cluster::{coherence_check_with, dbscan_with, kmeans, DbscanParams, NeighborSearch};
use crate::data::RowMatrix;
use crate::error::Result;
use crate::numeric::{cov_determinant, is_singular, SuffStats};

use super::model::{Minicluster, TemporaryModel};

/// Counters confirming the membership and determinant guards.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GuardStats {
    pub absorptions: u64,
    pub absorption_violations: u64,
    pub creations: u64,
    pub creation_violations: u64,
}

impl GuardStats {
    pub fn clean(&self) -> bool {
        self.absorption_violations == 0 && self.creation_violations == 0
    }

    pub fn add(&mut self, other: &GuardStats) {
        self.absorptions += other.absorptions;
        self.absorption_violations += other.absorption_violations;
        self.creations += other.creations;
        self.creation_violations += other.creation_violations;
    }
}

/// Shared state for the clustering steps of one pass.
pub struct ClusterContext<'a> {
    pub params: DbscanParams,
    pub search: &'a dyn NeighborSearch,
    pub seed: u64,
    pub guard: GuardStats,
    kmeans_calls: u64,
}

impl<'a> ClusterContext<'a> {
    pub fn new(params: DbscanParams, search: &'a dyn NeighborSearch, seed: u64) -> Self {
        ClusterContext {
            params,
            search,
            seed,
            guard: GuardStats::default(),
            kmeans_calls: 0,
        }
    }

    fn next_kmeans_seed(&mut self) -> u64 {
        self.kmeans_calls += 1;
        self.seed ^ self.kmeans_calls.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Appends one minicluster per group. With `nu = None` (sampling stage) each
/// new minicluster is its own nearest initial cluster; otherwise all of them
/// point at `nu`. Returns the new indices.
pub fn minicluster_make(model: &mut TemporaryModel, groups: Vec<SuffStats>, nu: Option<usize>) -> Result<Vec<usize>> {
    let start = model.miniclusters.len();
    for (i, stats) in groups.into_iter().enumerate() {
        let nearest = nu.unwrap_or(start + i);
        model.miniclusters.push(Minicluster::new(stats, model.energy, nearest)?);
    }
    Ok((start..model.miniclusters.len()).collect())
}

#[derive(Clone, Debug)]
pub struct UpdateOutcome {
    /// Miniclusters that accepted at least one point, ascending.
    pub updated: Vec<usize>,
    pub leftover: RowMatrix,
    pub absorbed: usize,
}

/// Assigns each point to its closest candidate minicluster if it falls in
/// the accepted radius, then refreshes the frames of every minicluster that
/// grew.
pub fn minicluster_update(
    model: &mut TemporaryModel,
    points: &RowMatrix,
    candidates: &[usize],
    guard: &mut GuardStats,
) -> UpdateOutcome {
    let mut leftover = RowMatrix::new(points.dim());
    if candidates.is_empty() {
        leftover.extend(points);
        return UpdateOutcome {
            updated: Vec::new(),
            leftover,
            absorbed: 0,
        };
    }
    let alpha = model.alpha;
    let radii: Vec<f64> = candidates.iter().map(|&i| model.miniclusters[i].radius(alpha)).collect();
    let mut grew = vec![false; candidates.len()];
    let mut absorbed = 0;
    for x in points.rows() {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (slot, &i) in candidates.iter().enumerate() {
            let d = model.miniclusters[i].basis.distance(x);
            if d < bd {
                bd = d;
                best = slot;
            }
        }
        if bd <= radii[best] {
            let mc = &mut model.miniclusters[candidates[best]];
            guard.absorptions += 1;
            if !(mc.basis.distance(x) <= mc.radius(alpha)) {
                guard.absorption_violations += 1;
            }
            mc.stats.insert(x);
            grew[best] = true;
            absorbed += 1;
        } else {
            leftover.push(x);
        }
    }
    let mut updated = Vec::new();
    for (slot, &i) in candidates.iter().enumerate() {
        if grew[slot] {
            let mc = &mut model.miniclusters[i];
            if let Err(e) = mc.refresh(model.energy) {
                log::warn!("keeping previous frame of minicluster {}: {e}", i + 1);
            }
            updated.push(i);
        }
    }
    updated.sort_unstable();
    UpdateOutcome {
        updated,
        leftover,
        absorbed,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MembOutcome {
    pub rounds: usize,
    pub absorbed: usize,
}

/// Repeats membership checks over the retained set against the miniclusters
/// updated in the previous round until no minicluster changes.
pub fn retset_memb(
    model: &mut TemporaryModel,
    retained: &mut RowMatrix,
    candidates: Vec<usize>,
    guard: &mut GuardStats,
) -> MembOutcome {
    let mut out = MembOutcome::default();
    let mut gamma = candidates;
    while !gamma.is_empty() && !retained.is_empty() {
        let up = minicluster_update(model, retained, &gamma, guard);
        out.rounds += 1;
        out.absorbed += up.absorbed;
        *retained = up.leftover;
        gamma = up.updated;
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClustOutcome {
    /// DBSCAN clusters found in the retained set.
    pub found: usize,
    pub created: usize,
    /// Irregular clusters that were accepted after a k-means split.
    pub split: usize,
    pub rejected_singular: usize,
    pub rejected_irregular: usize,
    pub absorbed: usize,
}

/// Clusters the retained set and turns acceptable clusters into new
/// miniclusters. Clusters whose covariance determinant exceeds the threshold
/// of their nearest initial cluster are split with k-means, taking the
/// smallest k for which every piece is coherent, non-singular and within the
/// threshold.
pub fn retset_clust(model: &mut TemporaryModel, retained: &mut RowMatrix, ctx: &mut ClusterContext) -> Result<ClustOutcome> {
    let mut out = ClustOutcome::default();
    if retained.is_empty() {
        return Ok(out);
    }
    let p = retained.dim();
    let part = dbscan_with(retained, ctx.params, ctx.search);
    out.found = part.k;
    let mut keep = vec![true; retained.len()];

    for members in part.clusters() {
        let stats = SuffStats::from_indexed(retained, &members);
        if is_singular(&stats) {
            out.rejected_singular += 1;
            continue;
        }
        let nu = model.nearest_initial(&stats.mean());
        let limit = model.det_thresholds[nu];
        let det = cov_determinant(&stats)?;
        let groups = if det <= limit {
            vec![(stats, det)]
        } else {
            let rows = retained.select(&members);
            match split_search(&rows, limit, ctx)? {
                Some(pieces) => {
                    out.split += 1;
                    pieces
                }
                None => {
                    out.rejected_irregular += 1;
                    continue;
                }
            }
        };
        for (_, det) in &groups {
            ctx.guard.creations += 1;
            if !(*det <= limit) {
                ctx.guard.creation_violations += 1;
            }
        }
        out.created += groups.len();
        minicluster_make(model, groups.into_iter().map(|(s, _)| s).collect(), Some(nu))?;
        for &i in &members {
            keep[i] = false;
        }
        out.absorbed += members.len();
    }

    if out.absorbed > 0 {
        let mut rest = RowMatrix::with_capacity(p, retained.len() - out.absorbed);
        for (i, r) in retained.rows().enumerate() {
            if keep[i] {
                rest.push(r);
            }
        }
        *retained = rest;
    }
    Ok(out)
}

fn split_search(rows: &RowMatrix, limit: f64, ctx: &mut ClusterContext) -> Result<Option<Vec<(SuffStats, f64)>>> {
    let p = rows.dim();
    let upper = rows.len() / (p + 1);
    'k: for k in 2..=upper {
        let km = kmeans(rows, k, ctx.next_kmeans_seed())?;
        if km.partition.k != k {
            continue;
        }
        let mut pieces = Vec::with_capacity(k);
        let clusters = km.partition.clusters();
        for members in &clusters {
            let stats = SuffStats::from_indexed(rows, members);
            if is_singular(&stats) {
                continue 'k;
            }
            let det = cov_determinant(&stats)?;
            if !(det <= limit) {
                continue 'k;
            }
            pieces.push((stats, det));
        }
        for members in &clusters {
            if !coherence_check_with(&rows.select(members), ctx.params, ctx.search) {
                continue 'k;
            }
        }
        return Ok(Some(pieces));
    }
    Ok(None)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChunkOutcome {
    pub rows: usize,
    /// Rows folded into existing or new miniclusters during this chunk.
    pub absorbed: usize,
    pub created: usize,
    pub split: usize,
    pub memb_rounds: usize,
}

/// Processes one chunk: direct assignment, retained-set sweep, retained-set
/// clustering, and a final sweep against the newly created miniclusters.
pub fn process_chunk(
    model: &mut TemporaryModel,
    chunk: &RowMatrix,
    retained: &mut RowMatrix,
    ctx: &mut ClusterContext,
) -> Result<ChunkOutcome> {
    let mut out = ChunkOutcome {
        rows: chunk.len(),
        ..Default::default()
    };
    let all: Vec<usize> = (0..model.len()).collect();
    let up = minicluster_update(model, chunk, &all, &mut ctx.guard);
    out.absorbed += up.absorbed;
    retained.extend(&up.leftover);

    if !retained.is_empty() {
        let m = retset_memb(model, retained, up.updated, &mut ctx.guard);
        out.absorbed += m.absorbed;
        out.memb_rounds += m.rounds;
        if !retained.is_empty() {
            let before = model.len();
            let c = retset_clust(model, retained, ctx)?;
            out.absorbed += c.absorbed;
            out.created += c.created;
            out.split += c.split;
            if !retained.is_empty() {
                let fresh: Vec<usize> = (before..model.len()).collect();
                let m = retset_memb(model, retained, fresh, &mut ctx.guard);
                out.absorbed += m.absorbed;
                out.memb_rounds += m.rounds;
            }
        }
    }
    Ok(out)
}
