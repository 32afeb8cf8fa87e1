//! Out-of-core local outlier detection.
//!
//! A random sample is clustered with DBSCAN to seed a model of dense
//! miniclusters. The full dataset is then streamed in chunks: points inside
//! a minicluster's Mahalanobis radius are folded into its sufficient
//! statistics, the rest are held in a retained set that is periodically
//! re-clustered into new miniclusters. Miniclusters are finally merged into
//! one Gaussian per sampled cluster, and a second pass scores every row by
//! its smallest Mahalanobis distance to those Gaussians.

pub mod cluster;
pub mod data;
pub mod error;
pub mod eval;
pub mod kv;
pub mod numeric;
pub mod params;
pub mod pipeline;
pub mod registry;
pub mod synth;

pub use error::{Result, SdcorError};
