use std::collections::VecDeque;

use super::neighbors::{Auto, NeighborSearch};
use super::{DbscanParams, Partition, NOISE};
use crate::data::RowMatrix;

const UNVISITED: usize = usize::MAX;

pub fn dbscan(points: &RowMatrix, params: DbscanParams) -> Partition {
    dbscan_with(points, params, &Auto)
}

/// DBSCAN with an explicit neighborhood index. Clusters are grown breadth
/// first from seeds taken in index order; a border point reachable from
/// several clusters stays with the first one that claims it.
pub fn dbscan_with(points: &RowMatrix, params: DbscanParams, search: &dyn NeighborSearch) -> Partition {
    let s = points.len();
    let index = search.index(points, params.eps);
    let mut labels = vec![UNVISITED; s];
    let mut k = 0;
    let mut nbrs = Vec::new();
    let mut queue = VecDeque::new();

    for i in 0..s {
        if labels[i] != UNVISITED {
            continue;
        }
        index.query(i, &mut nbrs);
        if nbrs.len() < params.min_pts {
            labels[i] = NOISE;
            continue;
        }
        k += 1;
        labels[i] = k;
        queue.extend(nbrs.iter().copied().filter(|&j| j != i));
        while let Some(j) = queue.pop_front() {
            if labels[j] == NOISE {
                labels[j] = k;
                continue;
            }
            if labels[j] != UNVISITED {
                continue;
            }
            labels[j] = k;
            index.query(j, &mut nbrs);
            if nbrs.len() >= params.min_pts {
                queue.extend(nbrs.iter().copied().filter(|&n| labels[n] == UNVISITED || labels[n] == NOISE));
            }
        }
    }
    Partition { assignments: labels, k }
}

/// True when DBSCAN finds exactly one cluster; noise is ignored.
pub fn coherence_check(points: &RowMatrix, params: DbscanParams) -> bool {
    coherence_check_with(points, params, &Auto)
}

pub fn coherence_check_with(points: &RowMatrix, params: DbscanParams, search: &dyn NeighborSearch) -> bool {
    !points.is_empty() && dbscan_with(points, params, search).k == 1
}
