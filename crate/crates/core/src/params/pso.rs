use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SdcorError};

#[derive(Clone, Debug, PartialEq)]
pub struct PsoConfig {
    pub swarm: usize,
    pub iters: usize,
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    /// Stop after this many iterations without a gbest improvement (0 disables).
    pub stagnation: usize,
    /// Explicit search bounds; derived from the sample when absent.
    pub eps_bounds: Option<(f64, f64)>,
    pub minpts_bounds: Option<(usize, usize)>,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm: 30,
            iters: 50,
            w: 0.72,
            c1: 1.49,
            c2: 1.49,
            seed: 0,
            stagnation: 10,
            eps_bounds: None,
            minpts_bounds: None,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm < 2 {
            return Err(SdcorError::invalid("swarm size must be at least 2"));
        }
        if !(self.w > 0.0 && self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(SdcorError::invalid("w, c1 and c2 must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PsoResult {
    pub position: Vec<f64>,
    pub value: f64,
    /// gbest value after initialization and after each iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Inertial particle swarm minimization over a box.
///
/// Coordinates leaving the box are clamped onto the violated bound. Ties in
/// the gbest reduction go to the lowest particle index.
pub fn minimize<F>(bounds: &[(f64, f64)], cfg: &PsoConfig, mut f: F) -> Result<PsoResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let d = bounds.len();
    for &(lo, hi) in bounds {
        if !(lo < hi) {
            return Err(SdcorError::invalid(format!("empty search interval [{lo}, {hi}]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x: Vec<Vec<f64>> = (0..cfg.swarm)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cfg.swarm)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| 0.1 * (hi - lo) * rng.gen_range(-1.0..=1.0))
                .collect()
        })
        .collect();
    let mut pbest = x.clone();
    let mut pbest_val: Vec<f64> = x.iter().map(|p| f(p)).collect();
    let mut g = 0;
    for i in 1..cfg.swarm {
        if pbest_val[i] < pbest_val[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];
    let mut history = vec![gbest_val];
    let mut stagnant = 0;
    let mut iterations = 0;

    for _ in 0..cfg.iters {
        iterations += 1;
        for i in 0..cfg.swarm {
            for j in 0..d {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                v[i][j] = cfg.w * v[i][j]
                    + cfg.c1 * r1 * (pbest[i][j] - x[i][j])
                    + cfg.c2 * r2 * (gbest[j] - x[i][j]);
                x[i][j] = (x[i][j] + v[i][j]).clamp(bounds[j].0, bounds[j].1);
            }
            let val = f(&x[i]);
            if val < pbest_val[i] {
                pbest_val[i] = val;
                pbest[i].clone_from(&x[i]);
            }
        }
        let mut improved = false;
        for i in 0..cfg.swarm {
            if pbest_val[i] < gbest_val {
                gbest_val = pbest_val[i];
                gbest.clone_from(&pbest[i]);
                improved = true;
            }
        }
        debug_assert!(gbest_val <= *history.last().unwrap());
        history.push(gbest_val);
        stagnant = if improved { 0 } else { stagnant + 1 };
        if cfg.stagnation > 0 && stagnant >= cfg.stagnation {
            break;
        }
    }
    Ok(PsoResult {
        position: gbest,
        value: gbest_val,
        history,
        iterations,
    })
}
