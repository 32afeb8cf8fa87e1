//! Samplers for points in the Mahalanobis shell `lo <= d(x) <= hi` around a
//! Gaussian cluster.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ClusterShape;
use crate::error::{Result, SdcorError};
use crate::registry::Registry;

pub trait OutlierSampler: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, shape: &ClusterShape, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
}

/// Attempts per outlier before the hypercube sampler gives up.
pub const REJECTION_BUDGET: usize = 10_000;

/// Uniform proposals in the axis-aligned box enclosing the outer ellipsoid,
/// kept when they land in the shell. The acceptance rate collapses as the
/// dimension grows, so this is only practical for small p.
pub struct Hypercube;

impl OutlierSampler for Hypercube {
    fn name(&self) -> &'static str {
        "hypercube"
    }

    fn sample(&self, shape: &ClusterShape, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let p = shape.mean.len();
        let half: Vec<f64> = (0..p).map(|j| hi * shape.cov[j * p + j].sqrt()).collect();
        let mut x = vec![0.0; p];
        for _ in 0..REJECTION_BUDGET {
            for j in 0..p {
                x[j] = shape.mean[j] + rng.gen_range(-half[j]..=half[j]);
            }
            let d = shape.basis.distance(&x);
            if d >= lo && d <= hi {
                return Ok(x);
            }
        }
        Err(SdcorError::Infeasible(format!(
            "no point of the [{lo:.3}, {hi:.3}] shell found in {REJECTION_BUDGET} attempts (p={p}); \
             widen the shell or use the 'shell' sampler"
        )))
    }
}

/// Direct draw from the uniform distribution on the shell: a uniform
/// direction in whitened space, a radius with density proportional to
/// r^(p-1) on [lo, hi], mapped back through the covariance factor. This is
/// the distribution the hypercube sampler targets.
pub struct Shell;

impl OutlierSampler for Shell {
    fn name(&self) -> &'static str {
        "shell"
    }

    fn sample(&self, shape: &ClusterShape, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let p = shape.mean.len();
        let pf = p as f64;
        let mut u: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Work relative to hi^p so large p does not overflow.
        let ratio = (lo / hi).powf(pf);
        let t: f64 = rng.gen();
        let r = hi * (ratio + t * (1.0 - ratio)).powf(1.0 / pf);
        u.iter_mut().for_each(|v| *v *= r / norm);
        Ok(shape.map_whitened(&u))
    }
}

pub fn outlier_registry() -> &'static Registry<dyn OutlierSampler> {
    static REG: OnceLock<Registry<dyn OutlierSampler>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn OutlierSampler> = Registry::new("outlier sampler");
        r.register("hypercube", Arc::new(Hypercube));
        r.register("shell", Arc::new(Shell));
        r
    })
}
