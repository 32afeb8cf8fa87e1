//! DBSCAN, k-means and the coherence check.

mod dbscan;
mod kmeans;
pub mod neighbors;

pub use dbscan::{coherence_check, coherence_check_with, dbscan, dbscan_with};
pub use kmeans::{kmeans, KMeansResult, KMEANS_MAX_ITER, KMEANS_RESTARTS};
pub use neighbors::{neighbor_registry, NeighborIndex, NeighborSearch};

use crate::error::{Result, SdcorError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbscanParams {
    pub eps: f64,
    /// Neighbors required for a core point, the point itself included.
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(SdcorError::invalid(format!("eps must be positive, got {eps}")));
        }
        if min_pts < 1 {
            return Err(SdcorError::invalid("min_pts must be at least 1"));
        }
        Ok(DbscanParams { eps, min_pts })
    }
}

pub const NOISE: usize = 0;

/// Cluster labels: ids `1..=k`, with 0 for noise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub assignments: Vec<usize>,
    pub k: usize,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Member indices of each cluster, in id order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            if c != NOISE {
                out[c - 1].push(i);
            }
        }
        out
    }

    pub fn noise(&self) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == NOISE)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn noise_count(&self) -> usize {
        self.assignments.iter().filter(|&&c| c == NOISE).count()
    }
}
