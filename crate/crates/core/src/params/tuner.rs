use std::sync::{Arc, OnceLock};

use super::fitness::fitness_report;
use super::kdist::{detect_knee, kdist_graph, KDistGraph, Knee};
use super::pso::{minimize, PsoConfig};
use crate::cluster::{neighbors::Auto, DbscanParams, NeighborSearch};
use crate::data::RowMatrix;
use crate::error::{Result, SdcorError};
use crate::registry::Registry;

/// DBSCAN parameters for the sample and, by halving Eps, for the full data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TunedParams {
    pub sample_params: DbscanParams,
    pub original_params: DbscanParams,
    pub fitness: f64,
}

impl TunedParams {
    pub fn from_sample(sample_params: DbscanParams, fitness: f64) -> Self {
        TunedParams {
            sample_params,
            original_params: DbscanParams {
                eps: sample_params.eps / 2.0,
                min_pts: sample_params.min_pts,
            },
            fitness,
        }
    }
}

#[derive(Clone)]
pub struct TuneContext {
    /// k of the k-distance graph; the knee tuner uses MinPts = k + 1.
    pub k: usize,
    /// Replaces the tuned sample Eps when set.
    pub eps_override: Option<f64>,
    pub minpts_upper: Option<usize>,
    pub pso: PsoConfig,
    pub search: Arc<dyn NeighborSearch>,
}

impl Default for TuneContext {
    fn default() -> Self {
        TuneContext {
            k: 4,
            eps_override: None,
            minpts_upper: None,
            pso: PsoConfig::default(),
            search: Arc::new(Auto),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TuneOutcome {
    pub method: &'static str,
    pub params: TunedParams,
    pub graph: KDistGraph,
    pub knee: Option<Knee>,
    /// gbest fitness per iteration, empty for non-swarm tuners.
    pub history: Vec<f64>,
}

pub trait ParamTuner: Send + Sync {
    fn name(&self) -> &'static str;
    fn tune(&self, sample: &RowMatrix, ctx: &TuneContext) -> Result<TuneOutcome>;
}

/// Eps at the knee of the sorted k-distance graph, MinPts = k + 1.
pub struct KneeTuner;

impl ParamTuner for KneeTuner {
    fn name(&self) -> &'static str {
        "kdist"
    }

    fn tune(&self, sample: &RowMatrix, ctx: &TuneContext) -> Result<TuneOutcome> {
        let graph = kdist_graph(sample, ctx.k)?;
        let knee = detect_knee(&graph)?;
        if knee.low_confidence {
            log::warn!(
                "k-distance graph has no clear knee (chord distance {:.4}); consider --eps",
                knee.distance
            );
        }
        let eps = ctx.eps_override.unwrap_or(knee.value);
        let params = DbscanParams::new(eps, ctx.k + 1)
            .map_err(|_| SdcorError::Infeasible(format!("knee Eps {eps} is not positive; use an override")))?;
        let report = fitness_report(sample, params, ctx.search.as_ref());
        Ok(TuneOutcome {
            method: self.name(),
            params: TunedParams::from_sample(params, report.value),
            graph,
            knee: Some(knee),
            history: Vec::new(),
        })
    }
}

/// Particle swarm search over (Eps, MinPts) minimizing the clustering cost.
pub struct SwarmTuner;

impl SwarmTuner {
    pub fn bounds(sample: &RowMatrix, graph: &KDistGraph, ctx: &TuneContext) -> Result<((f64, f64), (usize, usize))> {
        let eps = ctx.pso.eps_bounds.unwrap_or((graph.min(), graph.max()));
        let eps = if eps.0 < eps.1 {
            eps
        } else {
            return Err(SdcorError::Infeasible(format!(
                "k-distance values span an empty Eps interval [{}, {}]",
                eps.0, eps.1
            )));
        };
        let minpts = match ctx.pso.minpts_bounds {
            Some(b) => b,
            None => {
                let lo = ((sample.len() as f64).ln().floor() as usize).max(2);
                let hi = ctx.minpts_upper.unwrap_or((2 * sample.dim()).max(lo + 1));
                (lo, hi.max(lo + 1))
            }
        };
        Ok((eps, minpts))
    }
}

impl ParamTuner for SwarmTuner {
    fn name(&self) -> &'static str {
        "pso"
    }

    fn tune(&self, sample: &RowMatrix, ctx: &TuneContext) -> Result<TuneOutcome> {
        let graph = kdist_graph(sample, ctx.k)?;
        let (eps_b, mp_b) = Self::bounds(sample, &graph, ctx)?;
        let bounds = [(eps_b.0, eps_b.1), (mp_b.0 as f64, mp_b.1 as f64)];
        let eval = |x: &[f64]| -> f64 {
            if !(x[0] > 0.0) {
                return f64::INFINITY;
            }
            let params = DbscanParams {
                eps: x[0],
                min_pts: x[1].round() as usize,
            };
            fitness_report(sample, params, ctx.search.as_ref()).value
        };
        let result = minimize(&bounds, &ctx.pso, eval)?;
        if !result.value.is_finite() {
            return Err(SdcorError::Infeasible(
                "every evaluated (Eps, MinPts) pair was infeasible; widen the bounds or raise the sampling rate".into(),
            ));
        }
        let eps = ctx.eps_override.unwrap_or(result.position[0]);
        let params = DbscanParams::new(eps, result.position[1].round() as usize)?;
        let value = if ctx.eps_override.is_some() {
            fitness_report(sample, params, ctx.search.as_ref()).value
        } else {
            result.value
        };
        Ok(TuneOutcome {
            method: self.name(),
            params: TunedParams::from_sample(params, value),
            graph,
            knee: None,
            history: result.history,
        })
    }
}

pub fn tuner_registry() -> &'static Registry<dyn ParamTuner> {
    static REG: OnceLock<Registry<dyn ParamTuner>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn ParamTuner> = Registry::new("tuner");
        r.register("kdist", Arc::new(KneeTuner));
        r.register("pso", Arc::new(SwarmTuner));
        r
    })
}
