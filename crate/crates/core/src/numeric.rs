//! Sufficient statistics, eigenspace bases and the Mahalanobis distance.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::data::RowMatrix;
use crate::error::{Result, SdcorError};

/// Relative eigenvalue floor below which a direction counts as degenerate.
pub const SINGULARITY_FLOOR: f64 = 1e-10;

/// Exact incremental sufficient statistics `(m, Σx, Σxᵀx)`.
///
/// Sums are accumulated relative to a fixed origin (the first inserted
/// point) to avoid cancellation when deriving the covariance of data far
/// from zero. The raw moments are available through [`linear_sum`] and
/// [`second_moment`].
///
/// [`linear_sum`]: SuffStats::linear_sum
/// [`second_moment`]: SuffStats::second_moment
#[derive(Clone, Debug, PartialEq)]
pub struct SuffStats {
    p: usize,
    m: usize,
    origin: Vec<f64>,
    ls: Vec<f64>,
    ss: Vec<f64>,
}

impl SuffStats {
    pub fn new(p: usize) -> Self {
        SuffStats {
            p,
            m: 0,
            origin: vec![0.0; p],
            ls: vec![0.0; p],
            ss: vec![0.0; p * p],
        }
    }

    pub fn from_rows(rows: &RowMatrix) -> Self {
        let mut s = SuffStats::new(rows.dim());
        for r in rows.rows() {
            s.insert(r);
        }
        s
    }

    pub fn from_indexed(rows: &RowMatrix, indices: &[usize]) -> Self {
        let mut s = SuffStats::new(rows.dim());
        for &i in indices {
            s.insert(rows.row(i));
        }
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.m
    }

    pub fn insert(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.p);
        if self.m == 0 {
            self.origin.copy_from_slice(x);
        }
        self.m += 1;
        let p = self.p;
        let mut d = [0.0f64; 64];
        let mut heap;
        let d: &mut [f64] = if p <= 64 {
            &mut d[..p]
        } else {
            heap = vec![0.0; p];
            &mut heap
        };
        for j in 0..p {
            d[j] = x[j] - self.origin[j];
            self.ls[j] += d[j];
        }
        for i in 0..p {
            let di = d[i];
            if di == 0.0 {
                continue;
            }
            let row = &mut self.ss[i * p..(i + 1) * p];
            for j in 0..p {
                row[j] += di * d[j];
            }
        }
    }

    /// Adds `other` into `self`.
    pub fn merge(&mut self, other: &SuffStats) {
        assert_eq!(self.p, other.p, "dimension mismatch in merge");
        if other.m == 0 {
            return;
        }
        if self.m == 0 {
            *self = other.clone();
            return;
        }
        let p = self.p;
        let mo = other.m as f64;
        let d: Vec<f64> = (0..p).map(|j| other.origin[j] - self.origin[j]).collect();
        for i in 0..p {
            for j in 0..p {
                self.ss[i * p + j] += other.ss[i * p + j]
                    + other.ls[i] * d[j]
                    + d[i] * other.ls[j]
                    + mo * d[i] * d[j];
            }
        }
        for j in 0..p {
            self.ls[j] += other.ls[j] + mo * d[j];
        }
        self.m += other.m;
    }

    pub fn merged(&self, other: &SuffStats) -> SuffStats {
        let mut s = self.clone();
        s.merge(other);
        s
    }

    /// Raw linear sum Σx.
    pub fn linear_sum(&self) -> Vec<f64> {
        let m = self.m as f64;
        (0..self.p).map(|j| self.ls[j] + m * self.origin[j]).collect()
    }

    /// Raw second moment Σxᵀx, row-major p×p.
    pub fn second_moment(&self) -> Vec<f64> {
        let p = self.p;
        let m = self.m as f64;
        let o = &self.origin;
        let mut out = self.ss.clone();
        for i in 0..p {
            for j in 0..p {
                out[i * p + j] += o[i] * self.ls[j] + self.ls[i] * o[j] + m * o[i] * o[j];
            }
        }
        out
    }

    pub fn mean(&self) -> Vec<f64> {
        let m = self.m.max(1) as f64;
        (0..self.p).map(|j| self.origin[j] + self.ls[j] / m).collect()
    }

    /// Centered scatter matrix 𝕊 = Σ(x−μ)ᵀ(x−μ), row-major.
    pub fn scatter(&self) -> Vec<f64> {
        let p = self.p;
        let m = self.m.max(1) as f64;
        let mut out = self.ss.clone();
        for i in 0..p {
            for j in 0..p {
                out[i * p + j] -= self.ls[i] * self.ls[j] / m;
            }
        }
        out
    }

    /// Unbiased covariance 𝕊/(m−1); requires m ≥ 2.
    pub fn covariance(&self) -> Result<Vec<f64>> {
        if self.m < 2 {
            return Err(SdcorError::Numerical(format!(
                "covariance needs at least 2 objects, have {}",
                self.m
            )));
        }
        let denom = (self.m - 1) as f64;
        let mut c = self.scatter();
        c.iter_mut().for_each(|v| *v /= denom);
        Ok(c)
    }
}

/// Symmetric eigendecomposition with values sorted descending and clamped at
/// zero. Column `j` of the returned vectors (row-major p×p) pairs with value `j`.
/// Each eigenvector is signed so its largest-magnitude component is positive.
pub fn sym_eigen(cov: &[f64], p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if cov.len() != p * p {
        return Err(SdcorError::DimensionMismatch {
            expected: p * p,
            found: cov.len(),
        });
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(SdcorError::Numerical("non-finite covariance entry".into()));
    }
    let sym = DMatrix::from_fn(p, p, |i, j| 0.5 * (cov[i * p + j] + cov[j * p + i]));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut values = Vec::with_capacity(p);
    let mut vectors = vec![0.0; p * p];
    for (col, &k) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        if !lambda.is_finite() {
            return Err(SdcorError::Numerical("non-finite eigenvalue".into()));
        }
        values.push(lambda.max(0.0));
        let v = eig.eigenvectors.column(k);
        let mut pivot = 0;
        for i in 1..p {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            vectors[i * p + col] = sign * v[i];
        }
    }
    Ok((values, vectors))
}

/// Principal-component frame of one cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    p: usize,
    p_prime: usize,
    mean: Vec<f64>,
    /// Kept eigenvectors, stored column after column (p values each).
    coeffs: Vec<f64>,
    sqrt_vars: Vec<f64>,
    transformed_mean: Vec<f64>,
}

impl EigenBasis {
    /// Builds a basis from an explicit mean and covariance (row-major p×p).
    pub fn from_covariance(mean: &[f64], cov: &[f64], energy: f64) -> Result<Self> {
        if !(energy > 0.0 && energy <= 1.0) {
            return Err(SdcorError::invalid(format!(
                "energy fraction must lie in (0, 1], got {energy}"
            )));
        }
        let p = mean.len();
        let (values, vectors) = sym_eigen(cov, p)?;
        let largest = values[0];
        if !(largest > 0.0) {
            return Err(SdcorError::Numerical(
                "all eigenvalues are at or below the singularity floor".into(),
            ));
        }
        let floor = SINGULARITY_FLOOR * largest;
        let above_floor = values.iter().take_while(|&&v| v > floor).count();
        let total: f64 = values.iter().sum();
        let target = energy * total;
        let mut cum = 0.0;
        let mut by_energy = p;
        for (i, v) in values.iter().enumerate() {
            cum += v;
            if cum >= target {
                by_energy = i + 1;
                break;
            }
        }
        let p_prime = by_energy.min(above_floor).max(1);

        let mut coeffs = Vec::with_capacity(p * p_prime);
        for j in 0..p_prime {
            coeffs.extend((0..p).map(|i| vectors[i * p + j]));
        }
        let sqrt_vars: Vec<f64> = values[..p_prime].iter().map(|v| v.sqrt()).collect();
        let transformed_mean = (0..p_prime)
            .map(|j| dot(&coeffs[j * p..(j + 1) * p], mean))
            .collect();
        Ok(EigenBasis {
            p,
            p_prime,
            mean: mean.to_vec(),
            coeffs,
            sqrt_vars,
            transformed_mean,
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn p_prime(&self) -> usize {
        self.p_prime
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Eigenvector `j` (unit norm, length p).
    pub fn component(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.p..(j + 1) * self.p]
    }

    pub fn sqrt_vars(&self) -> &[f64] {
        &self.sqrt_vars
    }

    pub fn transformed_mean(&self) -> &[f64] {
        &self.transformed_mean
    }

    /// Projection z = x·𝒜 onto the kept components.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (0..self.p_prime).map(|j| dot(self.component(j), x)).collect()
    }

    /// Unchecked distance for hot loops; `x` must have length p.
    #[inline]
    pub fn distance(&self, x: &[f64]) -> f64 {
        let p = self.p;
        let mut acc = 0.0;
        for j in 0..self.p_prime {
            let e = &self.coeffs[j * p..(j + 1) * p];
            let mut t = 0.0;
            for i in 0..p {
                t += (x[i] - self.mean[i]) * e[i];
            }
            let s = t / self.sqrt_vars[j];
            acc += s * s;
        }
        acc.sqrt()
    }
}

pub fn derive_basis(stats: &SuffStats, energy: f64) -> Result<EigenBasis> {
    let cov = stats.covariance()?;
    EigenBasis::from_covariance(&stats.mean(), &cov, energy)
}

/// Eigenspace Mahalanobis distance, square-rooted so it compares directly
/// against radii such as `α·√p′`.
pub fn mahalanobis(x: &[f64], basis: &EigenBasis) -> Result<f64> {
    if x.len() != basis.p {
        return Err(SdcorError::DimensionMismatch {
            expected: basis.p,
            found: x.len(),
        });
    }
    Ok(basis.distance(x))
}

pub fn cov_determinant(stats: &SuffStats) -> Result<f64> {
    let cov = stats.covariance()?;
    determinant_of(&cov, stats.dim())
}

/// Determinant of a covariance matrix as the product of its (clamped) eigenvalues.
pub fn determinant_of(cov: &[f64], p: usize) -> Result<f64> {
    let (values, _) = sym_eigen(cov, p)?;
    Ok(values.iter().product())
}

pub fn is_singular(stats: &SuffStats) -> bool {
    if stats.count() <= stats.dim() {
        return true;
    }
    match stats.covariance().and_then(|c| sym_eigen(&c, stats.dim())) {
        Ok((values, _)) => singular_spectrum(&values),
        Err(_) => true,
    }
}

/// Singularity test on an eigenvalue list sorted descending.
pub fn singular_spectrum(values: &[f64]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return true;
    }
    let largest = values[0];
    let smallest = values[values.len() - 1];
    !(largest > 0.0) || smallest <= SINGULARITY_FLOOR * largest
}

/// Returns L (row-major) with L·Lᵀ = cov, via the eigen square root; works
/// for positive semi-definite input.
pub fn covariance_sqrt(cov: &[f64], p: usize) -> Result<Vec<f64>> {
    let (values, vectors) = sym_eigen(cov, p)?;
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let s = values[j].sqrt();
        for i in 0..p {
            l[i * p + j] = vectors[i * p + j] * s;
        }
    }
    Ok(l)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
