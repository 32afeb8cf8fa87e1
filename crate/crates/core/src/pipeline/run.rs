use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use super::final_model::{build_final_model, build_initial_model, score_point};
use super::model::{FinalModel, TemporaryModel};
use super::scalable::{process_chunk, ClusterContext, GuardStats};
use crate::cluster::{neighbors::Auto, DbscanParams, NeighborSearch};
use crate::data::{random_sample, write_indices, write_matrix_csv, ChunkedDataset, RowMatrix, ScoreEntry, ScoreTable};
use crate::error::{Result, SdcorError};
use crate::params::{fitness_report, tuner_registry, TuneContext, TuneOutcome, TunedParams};

#[derive(Clone)]
pub struct RunConfig {
    pub eta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Registered tuner name, used when `params` is absent.
    pub tuner: String,
    pub tune: TuneContext,
    /// Sample-level DBSCAN parameters; skips tuning when set.
    pub params: Option<DbscanParams>,
    pub search: Arc<dyn NeighborSearch>,
    /// Where to dump rows still retained after the last chunk.
    pub retained_path: Option<PathBuf>,
    /// Where to dump the sampled row indices.
    pub sample_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eta: 0.01,
            lambda: 1.0,
            alpha: 2.0,
            beta: 2.0,
            seed: 0,
            tuner: "kdist".into(),
            tune: TuneContext::default(),
            params: None,
            search: Arc::new(Auto),
            retained_path: None,
            sample_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.eta) {
            return Err(SdcorError::invalid(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if !unit(self.lambda) {
            return Err(SdcorError::invalid(format!("lambda must lie in (0, 1], got {}", self.lambda)));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(SdcorError::invalid("alpha and beta must be positive"));
        }
        Ok(())
    }
}

/// Derives an independent stream seed for one stage of the run.
pub fn stage_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChunkLog {
    pub index: usize,
    pub rows: usize,
    pub absorbed: usize,
    pub created: usize,
    pub split: usize,
    pub retained: usize,
    pub miniclusters: usize,
    /// Dataset cells held while this chunk was processed (chunk + retained).
    pub cells: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub n: usize,
    pub p: usize,
    pub chunk_rows: usize,
    pub sample_size: usize,
    pub t_initial: usize,
    pub chunks: Vec<ChunkLog>,
    pub guard: GuardStats,
    pub max_retained: usize,
    pub high_water_cells: usize,
    pub final_retained: usize,
    pub miniclusters: usize,
    pub seconds_sampling: f64,
    pub seconds_clustering: f64,
    pub seconds_scoring: f64,
}

impl RunLog {
    /// Upper bound on dataset cells the pass may hold at once.
    pub fn cell_budget(&self) -> usize {
        (self.chunk_rows + self.max_retained) * self.p
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| SdcorError::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "chunk,rows,absorbed,created,split,retained,miniclusters,cells").map_err(io)?;
        for c in &self.chunks {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                c.index + 1,
                c.rows,
                c.absorbed,
                c.created,
                c.split,
                c.retained,
                c.miniclusters,
                c.cells
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

pub struct RunOutput {
    pub tuned: TunedParams,
    /// Present when parameters were tuned rather than supplied.
    pub tuning: Option<TuneOutcome>,
    pub sample_indices: Vec<usize>,
    pub model: FinalModel,
    pub scores: ScoreTable,
    pub log: RunLog,
}

/// Phase one: sample, tune (unless parameters are given) and build the
/// initial model.
pub fn sampling_phase(
    ds: &ChunkedDataset,
    cfg: &RunConfig,
) -> Result<(TemporaryModel, TunedParams, Option<TuneOutcome>, Vec<usize>)> {
    let sample = random_sample(ds, cfg.eta, stage_seed(cfg.seed, 1))?;
    if let Some(path) = &cfg.sample_path {
        write_indices(path, &sample.source_indices)?;
    }
    let (tuned, tuning) = match cfg.params {
        Some(params) => {
            let f = fitness_report(&sample.rows, params, cfg.search.as_ref()).value;
            (TunedParams::from_sample(params, f), None)
        }
        None => {
            let tuner = tuner_registry().get(&cfg.tuner)?;
            let mut ctx = cfg.tune.clone();
            ctx.search = cfg.search.clone();
            let outcome = tuner.tune(&sample.rows, &ctx)?;
            (outcome.params, Some(outcome))
        }
    };
    log::info!(
        "sample of {} rows; Eps {} (original {}), MinPts {}",
        sample.len(),
        tuned.sample_params.eps,
        tuned.original_params.eps,
        tuned.sample_params.min_pts
    );
    let model = build_initial_model(&sample.rows, &tuned, cfg.lambda, cfg.alpha, cfg.search.as_ref())?;
    Ok((model, tuned, tuning, sample.source_indices))
}

/// Phase two: one chunked pass growing the temporary model.
pub fn clustering_phase(
    ds: &ChunkedDataset,
    model: &mut TemporaryModel,
    params: DbscanParams,
    cfg: &RunConfig,
    log: &mut RunLog,
) -> Result<RowMatrix> {
    let mut ctx = ClusterContext::new(params, cfg.search.as_ref(), stage_seed(cfg.seed, 2));
    let mut retained = RowMatrix::new(ds.p());
    let mut seen = 0usize;
    let mut absorbed = 0usize;
    for (index, chunk) in ds.chunks()?.enumerate() {
        let chunk = chunk?;
        let cells = (chunk.rows.len() + retained.len()) * ds.p();
        log.max_retained = log.max_retained.max(retained.len());
        let out = process_chunk(model, &chunk.rows, &mut retained, &mut ctx)?;
        seen += chunk.rows.len();
        absorbed += out.absorbed;
        if absorbed + retained.len() != seen {
            return Err(SdcorError::Invariant(format!(
                "after chunk {}: {absorbed} absorbed + {} retained != {seen} rows seen",
                index + 1,
                retained.len()
            )));
        }
        log.max_retained = log.max_retained.max(retained.len());
        log.high_water_cells = log.high_water_cells.max(cells).max(retained.len() * ds.p());
        log.chunks.push(ChunkLog {
            index,
            rows: out.rows,
            absorbed: out.absorbed,
            created: out.created,
            split: out.split,
            retained: retained.len(),
            miniclusters: model.len(),
            cells,
        });
        log::debug!(
            "chunk {}: absorbed {}, created {}, split {}, retained {}",
            index + 1,
            out.absorbed,
            out.created,
            out.split,
            retained.len()
        );
    }
    log.guard.add(&ctx.guard);
    if !ctx.guard.clean() {
        return Err(SdcorError::Invariant(format!("guard violations: {:?}", ctx.guard)));
    }
    if log.high_water_cells > log.cell_budget() {
        return Err(SdcorError::Invariant(format!(
            "held {} dataset cells, budget {}",
            log.high_water_cells,
            log.cell_budget()
        )));
    }
    Ok(retained)
}

/// Phase three: a second pass assigning every row its outlier score.
pub fn score_dataset(ds: &ChunkedDataset, fm: &FinalModel) -> Result<ScoreTable> {
    if fm.dim() != ds.p() {
        return Err(SdcorError::DimensionMismatch {
            expected: fm.dim(),
            found: ds.p(),
        });
    }
    let bases: Vec<_> = fm.clusters.iter().map(|c| &c.basis).collect();
    let mut entries = Vec::with_capacity(ds.n());
    for chunk in ds.chunks()? {
        let chunk = chunk?;
        for (i, x) in chunk.rows.rows().enumerate() {
            let (score, cluster) = score_point(x, &bases);
            entries.push(ScoreEntry {
                index: chunk.start + i,
                score,
                cluster,
                label: chunk.labels.as_ref().map(|l| l[i]),
            });
        }
    }
    Ok(ScoreTable { entries })
}

/// Runs all three phases.
pub fn run(ds: &ChunkedDataset, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut log = RunLog {
        n: ds.n(),
        p: ds.p(),
        chunk_rows: ds.chunk_rows(),
        ..Default::default()
    };

    let t0 = Instant::now();
    let (mut model, tuned, tuning, sample_indices) = sampling_phase(ds, cfg)?;
    log.sample_size = sample_indices.len();
    log.t_initial = model.t_initial;
    log.seconds_sampling = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let retained = clustering_phase(ds, &mut model, tuned.original_params, cfg, &mut log)?;
    log.final_retained = retained.len();
    log.miniclusters = model.len();
    if let Some(path) = &cfg.retained_path {
        write_matrix_csv(path, &retained, None)?;
    }
    drop(retained);
    let fm = build_final_model(&model, cfg.eta, cfg.beta, stage_seed(cfg.seed, 3))?;
    log.seconds_clustering = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let scores = score_dataset(ds, &fm)?;
    log.seconds_scoring = t2.elapsed().as_secs_f64();

    Ok(RunOutput {
        tuned,
        tuning,
        sample_indices,
        model: fm,
        scores,
        log,
    })
}
