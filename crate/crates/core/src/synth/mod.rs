//! Seeded synthetic benchmarks: pruned correlated Gaussian clusters with
//! local outliers injected in a Mahalanobis shell around each cluster.

mod families;
pub mod outliers;

pub use families::{generate_noise_ramp, generate_scaling_family, FamilyMember, NOISE_RAMP_OUTLIERS, SCALING_RATES};
pub use outliers::{outlier_registry, OutlierSampler};

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Cholesky, DMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{write_matrix_csv, ChunkedDataset, RowMatrix};
use crate::error::{Result, SdcorError};
use crate::kv::write_kv;
use crate::numeric::{covariance_sqrt, EigenBasis};
use crate::pipeline::stage_seed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutlierBudget {
    /// Share of outliers among all emitted rows.
    Fraction(f64),
    Count(usize),
}

impl OutlierBudget {
    pub fn count(&self, inliers: usize) -> usize {
        match *self {
            OutlierBudget::Fraction(f) => (f * inliers as f64 / (1.0 - f)).round() as usize,
            OutlierBudget::Count(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub p: usize,
    /// Inliers per cluster; its length is the number of clusters.
    pub points_per_cluster: Vec<usize>,
    pub outliers: OutlierBudget,
    pub inner_radius_mult: f64,
    pub outer_radius_mult: f64,
    pub prune_radius_mult: f64,
    /// Minimum distance between cluster means in units of √(largest trace).
    pub separation_mult: f64,
    pub sampler: String,
    pub seed: u64,
}

impl GenSpec {
    /// `n` inliers split as evenly as possible over `clusters`.
    pub fn balanced(clusters: usize, n: usize, p: usize, outliers: OutlierBudget, seed: u64) -> Self {
        let base = n / clusters.max(1);
        let extra = n % clusters.max(1);
        GenSpec {
            p,
            points_per_cluster: (0..clusters).map(|c| base + usize::from(c < extra)).collect(),
            outliers,
            inner_radius_mult: 4.0,
            outer_radius_mult: 6.0,
            prune_radius_mult: 1.0,
            separation_mult: 10.0,
            sampler: "shell".into(),
            seed,
        }
    }

    pub fn clusters(&self) -> usize {
        self.points_per_cluster.len()
    }

    pub fn inliers(&self) -> usize {
        self.points_per_cluster.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.points_per_cluster.is_empty() || self.points_per_cluster.contains(&0) {
            return Err(SdcorError::invalid("dimension and every cluster size must be positive"));
        }
        if !(self.inner_radius_mult > 0.0 && self.inner_radius_mult < self.outer_radius_mult) {
            return Err(SdcorError::invalid("shell radii must satisfy 0 < inner < outer"));
        }
        if !(self.prune_radius_mult > 0.0 && self.separation_mult > 0.0) {
            return Err(SdcorError::invalid("prune and separation multipliers must be positive"));
        }
        if let OutlierBudget::Fraction(f) = self.outliers {
            if !(0.0..1.0).contains(&f) {
                return Err(SdcorError::invalid(format!("outlier fraction must lie in [0, 1), got {f}")));
            }
        }
        Ok(())
    }

    pub fn manifest(&self) -> Vec<(&'static str, String)> {
        let (kind, amount) = match self.outliers {
            OutlierBudget::Fraction(f) => ("fraction", f.to_string()),
            OutlierBudget::Count(n) => ("count", n.to_string()),
        };
        vec![
            ("p", self.p.to_string()),
            ("clusters", self.clusters().to_string()),
            (
                "points_per_cluster",
                self.points_per_cluster.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
            ),
            ("outlier_budget", kind.to_string()),
            ("outlier_amount", amount),
            ("outliers", self.outliers.count(self.inliers()).to_string()),
            ("inner_radius_mult", self.inner_radius_mult.to_string()),
            ("outer_radius_mult", self.outer_radius_mult.to_string()),
            ("prune_radius_mult", self.prune_radius_mult.to_string()),
            ("separation_mult", self.separation_mult.to_string()),
            ("sampler", self.sampler.clone()),
            ("seed", self.seed.to_string()),
        ]
    }
}

/// Mean, covariance and derived factors of one generating Gaussian.
#[derive(Clone, Debug)]
pub struct ClusterShape {
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
    /// Row-major factor with L·Lᵀ = cov (lower-triangular Cholesky when it exists).
    pub factor: Vec<f64>,
    pub basis: EigenBasis,
}

impl ClusterShape {
    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let p = mean.len();
        let m = DMatrix::from_row_slice(p, p, &cov);
        let factor = match Cholesky::new(m) {
            Some(ch) => {
                let l = ch.l();
                (0..p * p).map(|k| l[(k / p, k % p)]).collect()
            }
            None => covariance_sqrt(&cov, p)?,
        };
        let basis = EigenBasis::from_covariance(&mean, &cov, 1.0)?;
        Ok(ClusterShape { mean, cov, factor, basis })
    }

    /// μ + L·w; the Mahalanobis distance of the result equals |w|.
    pub fn map_whitened(&self, w: &[f64]) -> Vec<f64> {
        let p = self.mean.len();
        (0..p)
            .map(|r| self.mean[r] + (0..p).map(|c| self.factor[r * p + c] * w[c]).sum::<f64>())
            .collect()
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.mean.len()).map(|_| rng.sample(StandardNormal)).collect();
        self.map_whitened(&z)
    }

    pub fn trace(&self) -> f64 {
        let p = self.mean.len();
        (0..p).map(|j| self.cov[j * p + j]).sum()
    }
}

/// Σ = AᵀA with A uniform on [0,1] and a random half of its entries negated.
pub fn random_covariance(p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut a: Vec<f64> = (0..p * p).map(|_| rng.gen::<f64>()).collect();
    let mut cells: Vec<usize> = (0..p * p).collect();
    cells.shuffle(rng);
    for &c in &cells[..p * p / 2] {
        a[c] = -a[c];
    }
    let mut s = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            s[i * p + j] = (0..p).map(|k| a[k * p + i] * a[k * p + j]).sum();
        }
    }
    s
}

/// Inliers of every cluster plus their generating shapes.
#[derive(Clone, Debug)]
pub struct Manifold {
    pub shapes: Vec<ClusterShape>,
    pub rows: RowMatrix,
    /// 1-based cluster of each inlier.
    pub classes: Vec<usize>,
}

/// A finished dataset: rows with outlier labels and per-row classes
/// (0 for outliers, otherwise the 1-based generating cluster).
#[derive(Clone, Debug)]
pub struct GeneratedData {
    pub rows: RowMatrix,
    pub labels: Vec<u8>,
    pub classes: Vec<usize>,
    pub shapes: Vec<ClusterShape>,
}

impl GeneratedData {
    pub fn outliers(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

pub fn generate_manifold(spec: &GenSpec) -> Result<Manifold> {
    spec.validate()?;
    let p = spec.p;
    let k = spec.clusters();
    let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(spec.seed, 11));
    let covs: Vec<Vec<f64>> = (0..k).map(|_| random_covariance(p, &mut rng)).collect();

    // Keep means far enough apart that neither inliers nor the outer shells
    // of two clusters meet.
    let max_trace = covs.iter().map(|c| (0..p).map(|j| c[j * p + j]).sum::<f64>()).fold(0.0, f64::max);
    let max_eig = covs
        .iter()
        .map(|c| crate::numeric::sym_eigen(c, p).map(|(v, _)| v[0]))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let shell_reach = spec.outer_radius_mult * (p as f64).sqrt() * max_eig.sqrt();
    let min_sep = (spec.separation_mult * max_trace.sqrt()).max(2.5 * shell_reach);
    let side = min_sep * (k as f64).max(2.0);
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(k);
    for c in 0..k {
        let mut placed = false;
        for _ in 0..100_000 {
            let m: Vec<f64> = (0..p).map(|_| rng.gen_range(-side..=side)).collect();
            if means.iter().all(|o| crate::numeric::sq_dist(o, &m).sqrt() >= min_sep) {
                means.push(m);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SdcorError::Infeasible(format!("could not place cluster {} mean", c + 1)));
        }
    }

    let shapes = means
        .into_iter()
        .zip(covs)
        .map(|(m, c)| ClusterShape::new(m, c))
        .collect::<Result<Vec<_>>>()?;
    let cut = spec.prune_radius_mult * (p as f64).sqrt();
    let mut rows = RowMatrix::with_capacity(p, spec.inliers());
    let mut classes = Vec::with_capacity(spec.inliers());
    for (c, (shape, &count)) in shapes.iter().zip(&spec.points_per_cluster).enumerate() {
        let mut crng = ChaCha8Rng::seed_from_u64(stage_seed(spec.seed, 100 + c as u64));
        let mut kept = 0;
        while kept < count {
            let x = shape.draw(&mut crng);
            if shape.basis.distance(&x) <= cut {
                rows.push(&x);
                classes.push(c + 1);
                kept += 1;
            }
        }
    }
    Ok(Manifold { shapes, rows, classes })
}

/// Draws `count` shell outliers, spread round-robin over the clusters.
pub fn draw_outliers(spec: &GenSpec, shapes: &[ClusterShape], count: usize, seed: u64) -> Result<RowMatrix> {
    let sampler = outlier_registry().get(&spec.sampler)?;
    let p = spec.p;
    let lo = spec.inner_radius_mult * (p as f64).sqrt();
    let hi = spec.outer_radius_mult * (p as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = RowMatrix::with_capacity(p, count);
    for i in 0..count {
        let x = sampler.sample(&shapes[i % shapes.len()], lo, hi, &mut rng)?;
        rows.push(&x);
    }
    Ok(rows)
}

/// Concatenates inliers and outliers and shuffles the rows.
pub fn assemble(inliers: &RowMatrix, classes: &[usize], outliers: &RowMatrix, shapes: &[ClusterShape], seed: u64) -> GeneratedData {
    let n = inliers.len() + outliers.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut rows = RowMatrix::with_capacity(inliers.dim(), n);
    let mut labels = Vec::with_capacity(n);
    let mut cls = Vec::with_capacity(n);
    for i in order {
        if i < inliers.len() {
            rows.push(inliers.row(i));
            labels.push(0);
            cls.push(classes[i]);
        } else {
            rows.push(outliers.row(i - inliers.len()));
            labels.push(1);
            cls.push(0);
        }
    }
    GeneratedData {
        rows,
        labels,
        classes: cls,
        shapes: shapes.to_vec(),
    }
}

pub fn generate(spec: &GenSpec) -> Result<GeneratedData> {
    let manifold = generate_manifold(spec)?;
    let count = spec.outliers.count(spec.inliers());
    let outliers = draw_outliers(spec, &manifold.shapes, count, stage_seed(spec.seed, 12))?;
    Ok(assemble(
        &manifold.rows,
        &manifold.classes,
        &outliers,
        &manifold.shapes,
        stage_seed(spec.seed, 13),
    ))
}

/// Sidecar paths written next to a generated CSV.
pub fn classes_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".classes");
    PathBuf::from(s)
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Writes the CSV (label as last column), the class sidecar and a manifest.
pub fn write_generated(data: &GeneratedData, path: impl AsRef<Path>, manifest: &[(&str, String)]) -> Result<()> {
    let path = path.as_ref();
    write_matrix_csv(path, &data.rows, Some(&data.labels))?;
    let cpath = classes_path(path);
    let body: String = data.classes.iter().map(|c| format!("{c}\n")).collect();
    fs::write(&cpath, body).map_err(|e| SdcorError::io(&cpath, e))?;
    let mut pairs: Vec<(&str, String)> = manifest.to_vec();
    pairs.push(("rows", data.rows.len().to_string()));
    pairs.push(("outliers_emitted", data.outliers().to_string()));
    write_kv(manifest_path(path), &pairs)
}

pub fn read_classes(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| SdcorError::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| SdcorError::Parse {
                path: path.to_path_buf(),
                row: i + 1,
                column: 1,
                message: format!("invalid class '{l}'"),
            })
        })
        .collect()
}

/// Generates per `spec` and writes it to `path`, returning the on-disk handle.
pub fn generate_to(spec: &GenSpec, path: impl AsRef<Path>, chunk_rows: usize) -> Result<(ChunkedDataset, Vec<u8>)> {
    let data = generate(spec)?;
    write_generated(&data, path.as_ref(), &spec.manifest())?;
    let ds = ChunkedDataset::open(path, chunk_rows, true)?;
    Ok((ds, data.labels))
}
