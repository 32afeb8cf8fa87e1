//! Fixed-radius neighborhood queries.
//!
//! Every index answers the same question, "which points lie in the closed
//! Euclidean ball of radius eps around point i", using the same squared
//! distance comparison, so all implementations return identical sets.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::data::RowMatrix;
use crate::numeric::sq_dist;
use crate::registry::Registry;

pub trait NeighborIndex {
    /// Clears `out` and fills it with the indices (ascending) of every point
    /// within `eps` of point `i`, including `i` itself.
    fn query(&self, i: usize, out: &mut Vec<usize>);
}

pub trait NeighborSearch: Send + Sync {
    fn name(&self) -> &'static str;
    fn index<'a>(&self, points: &'a RowMatrix, eps: f64) -> Box<dyn NeighborIndex + 'a>;
}

pub struct BruteForce;

struct BruteIndex<'a> {
    points: &'a RowMatrix,
    eps2: f64,
}

impl NeighborIndex for BruteIndex<'_> {
    fn query(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let q = self.points.row(i);
        for (j, r) in self.points.rows().enumerate() {
            if sq_dist(q, r) <= self.eps2 {
                out.push(j);
            }
        }
    }
}

impl NeighborSearch for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn index<'a>(&self, points: &'a RowMatrix, eps: f64) -> Box<dyn NeighborIndex + 'a> {
        Box::new(BruteIndex {
            points,
            eps2: eps * eps,
        })
    }
}

/// Uniform grid with cell side `eps`; used for p ≤ 3 and falls back to the
/// brute-force scan otherwise.
pub struct Grid;

pub const GRID_MAX_DIM: usize = 3;

struct GridIndex<'a> {
    points: &'a RowMatrix,
    eps2: f64,
    inv_cell: f64,
    cells: HashMap<[i64; GRID_MAX_DIM], Vec<usize>>,
}

impl GridIndex<'_> {
    fn key(&self, x: &[f64]) -> [i64; GRID_MAX_DIM] {
        let mut k = [0i64; GRID_MAX_DIM];
        for (slot, v) in k.iter_mut().zip(x) {
            *slot = (v * self.inv_cell).floor() as i64;
        }
        k
    }
}

impl NeighborIndex for GridIndex<'_> {
    fn query(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let q = self.points.row(i);
        let p = q.len();
        let base = self.key(q);
        let span = 3usize.pow(p as u32);
        for code in 0..span {
            let mut k = base;
            let mut c = code;
            for slot in k.iter_mut().take(p) {
                *slot += (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(members) = self.cells.get(&k) {
                for &j in members {
                    if sq_dist(q, self.points.row(j)) <= self.eps2 {
                        out.push(j);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

impl NeighborSearch for Grid {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn index<'a>(&self, points: &'a RowMatrix, eps: f64) -> Box<dyn NeighborIndex + 'a> {
        if points.dim() > GRID_MAX_DIM || !(eps > 0.0) {
            return BruteForce.index(points, eps);
        }
        let mut idx = GridIndex {
            points,
            eps2: eps * eps,
            inv_cell: 1.0 / eps,
            cells: HashMap::new(),
        };
        for (i, r) in points.rows().enumerate() {
            let k = idx.key(r);
            idx.cells.entry(k).or_default().push(i);
        }
        Box::new(idx)
    }
}

/// Picks the grid for low-dimensional data and the brute-force scan otherwise.
pub struct Auto;

impl NeighborSearch for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn index<'a>(&self, points: &'a RowMatrix, eps: f64) -> Box<dyn NeighborIndex + 'a> {
        Grid.index(points, eps)
    }
}

pub fn neighbor_registry() -> &'static Registry<dyn NeighborSearch> {
    static REG: OnceLock<Registry<dyn NeighborSearch>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn NeighborSearch> = Registry::new("neighbor index");
        r.register("brute", Arc::new(BruteForce));
        r.register("grid", Arc::new(Grid));
        r.register("auto", Arc::new(Auto));
        r
    })
}
