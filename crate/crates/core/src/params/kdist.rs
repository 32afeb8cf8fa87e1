use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::RowMatrix;
use crate::error::{Result, SdcorError};
use crate::numeric::sq_dist;

/// Distances to each point's k-th nearest neighbor, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct KDistGraph {
    pub k: usize,
    pub values: Vec<f64>,
}

impl KDistGraph {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Writes `rank,distance` rows (rank starts at 1).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| SdcorError::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "rank,distance").map_err(io)?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, v).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// k-th nearest neighbor distance of every point, the point itself excluded.
pub fn kdist_graph(points: &RowMatrix, k: usize) -> Result<KDistGraph> {
    let s = points.len();
    if k == 0 || k >= s {
        return Err(SdcorError::invalid(format!(
            "k-distance needs 1 <= k < {s}, got k={k}"
        )));
    }
    let mut values = Vec::with_capacity(s);
    let mut d = Vec::with_capacity(s - 1);
    for i in 0..s {
        d.clear();
        let q = points.row(i);
        for (j, r) in points.rows().enumerate() {
            if j != i {
                d.push(sq_dist(q, r));
            }
        }
        let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
        values.push(kth.sqrt());
    }
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(KDistGraph { k, values })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knee {
    pub index: usize,
    pub value: f64,
    /// Distance to the chord on axes scaled to [0, 1].
    pub distance: f64,
    pub low_confidence: bool,
}

/// Below this normalized chord distance the curve has no clear bend.
pub const KNEE_CONFIDENCE: f64 = 0.01;

/// Point of the curve farthest from the straight line joining its ends.
pub fn detect_knee(graph: &KDistGraph) -> Result<Knee> {
    let v = &graph.values;
    let n = v.len();
    if n < 3 {
        return Err(SdcorError::invalid(format!(
            "knee detection needs at least 3 values, got {n}"
        )));
    }
    let hi = v[0];
    let lo = v[n - 1];
    let range = hi - lo;
    if !(range > 0.0) {
        return Ok(Knee {
            index: 0,
            value: hi,
            distance: 0.0,
            low_confidence: true,
        });
    }
    // After scaling, the chord runs from (0, 1) to (1, 0), i.e. x + y = 1.
    let mut best = 0;
    let mut best_d = -1.0;
    for (i, &y) in v.iter().enumerate() {
        let x = i as f64 / (n - 1) as f64;
        let y = (y - lo) / range;
        let d = (x + y - 1.0).abs() / std::f64::consts::SQRT_2;
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(Knee {
        index: best,
        value: v[best],
        distance: best_d,
        low_confidence: best_d < KNEE_CONFIDENCE,
    })
}
