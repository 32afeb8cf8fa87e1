//! DBSCAN parameter selection for the sample.

pub mod fitness;
pub mod kdist;
pub mod pso;
mod tuner;

pub use fitness::{fitness, fitness_report, FitnessReport, Infeasible};
pub use kdist::{detect_knee, kdist_graph, KDistGraph, Knee};
pub use pso::{minimize, PsoConfig, PsoResult};
pub use tuner::{tuner_registry, KneeTuner, ParamTuner, SwarmTuner, TuneContext, TuneOutcome, TunedParams};
