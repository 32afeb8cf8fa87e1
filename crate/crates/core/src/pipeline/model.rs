use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SdcorError};
use crate::numeric::{derive_basis, singular_spectrum, sym_eigen, EigenBasis, SuffStats};

/// A dense group discovered during clustering, with its statistics and
/// principal-component frame.
#[derive(Clone, Debug)]
pub struct Minicluster {
    pub stats: SuffStats,
    pub basis: EigenBasis,
    /// 0-based index of the closest initial minicluster.
    pub nearest_initial: usize,
}

impl Minicluster {
    pub fn new(stats: SuffStats, energy: f64, nearest_initial: usize) -> Result<Self> {
        let basis = derive_basis(&stats, energy)?;
        Ok(Minicluster {
            stats,
            basis,
            nearest_initial,
        })
    }

    /// Accepted Mahalanobis radius α·√p′.
    #[inline]
    pub fn radius(&self, alpha: f64) -> f64 {
        alpha * (self.basis.p_prime() as f64).sqrt()
    }

    pub fn refresh(&mut self, energy: f64) -> Result<()> {
        self.basis = derive_basis(&self.stats, energy)?;
        Ok(())
    }
}

/// The evolving set of miniclusters. The first `t_initial` entries are the
/// clusters found in the sample.
#[derive(Clone, Debug)]
pub struct TemporaryModel {
    pub miniclusters: Vec<Minicluster>,
    pub t_initial: usize,
    /// Covariance determinant of each initial minicluster at sampling time.
    pub det_thresholds: Vec<f64>,
    pub energy: f64,
    pub alpha: f64,
}

impl TemporaryModel {
    pub fn len(&self) -> usize {
        self.miniclusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.miniclusters.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.miniclusters.first().map_or(0, |m| m.stats.dim())
    }

    /// Initial minicluster whose frame is closest to `x`, ties to the lowest index.
    pub fn nearest_initial(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (h, mc) in self.miniclusters[..self.t_initial].iter().enumerate() {
            let d = mc.basis.distance(x);
            if d < bd {
                bd = d;
                best = h;
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct FinalCluster {
    pub mu: Vec<f64>,
    /// Row-major p×p covariance.
    pub sigma: Vec<f64>,
    /// Full-rank frame of `sigma`, used for scoring.
    pub basis: EigenBasis,
}

impl FinalCluster {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let basis = EigenBasis::from_covariance(&mu, &sigma, 1.0)?;
        Ok(FinalCluster { mu, sigma, basis })
    }

    pub fn is_singular(&self) -> bool {
        match sym_eigen(&self.sigma, self.mu.len()) {
            Ok((values, _)) => singular_spectrum(&values),
            Err(_) => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub eta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct FinalModel {
    pub clusters: Vec<FinalCluster>,
    pub settings: ModelSettings,
}

pub const MODEL_FORMAT: &str = "sdcor-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    p: usize,
    t: usize,
    #[serde(flatten)]
    settings: ModelSettings,
    clusters: Vec<ClusterDoc>,
}

#[derive(Serialize, Deserialize)]
struct ClusterDoc {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl FinalModel {
    pub fn dim(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.mu.len())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDoc {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            p: self.dim(),
            t: self.clusters.len(),
            settings: self.settings,
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterDoc {
                    mu: c.mu.clone(),
                    sigma: c.sigma.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| SdcorError::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| SdcorError::Model(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(SdcorError::Model(format!("unexpected format tag '{}'", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(SdcorError::Model(format!("unsupported version {}", doc.version)));
        }
        if doc.clusters.len() != doc.t || doc.t == 0 {
            return Err(SdcorError::Model(format!(
                "declares {} clusters but holds {}",
                doc.t,
                doc.clusters.len()
            )));
        }
        let mut clusters = Vec::with_capacity(doc.t);
        for (i, c) in doc.clusters.into_iter().enumerate() {
            if c.mu.len() != doc.p || c.sigma.len() != doc.p * doc.p {
                return Err(SdcorError::Model(format!("cluster {} has wrong shape for p={}", i + 1, doc.p)));
            }
            clusters.push(FinalCluster::new(c.mu, c.sigma)?);
        }
        Ok(FinalModel {
            clusters,
            settings: doc.settings,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| SdcorError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| SdcorError::io(path, e))?;
        Self::from_json(&text)
    }
}
