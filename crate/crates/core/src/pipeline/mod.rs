//! The three-phase outlier detection pipeline: sampling, chunked scalable
//! clustering, and scoring against the final model.

mod final_model;
mod model;
mod run;
mod scalable;

pub use final_model::{build_final_model, build_initial_model, score_point};
pub use model::{FinalCluster, FinalModel, Minicluster, ModelSettings, TemporaryModel, MODEL_FORMAT, MODEL_VERSION};
pub use run::{
    clustering_phase, run, sampling_phase, score_dataset, stage_seed, ChunkLog, RunConfig, RunLog, RunOutput,
};
pub use scalable::{
    minicluster_make, minicluster_update, process_chunk, retset_clust, retset_memb, ChunkOutcome, ClustOutcome,
    ClusterContext, GuardStats, MembOutcome, UpdateOutcome,
};
