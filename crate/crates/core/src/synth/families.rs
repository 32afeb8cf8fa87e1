//! Dataset families for the noise-tolerance and scalability experiments.

use super::{assemble, draw_outliers, generate_manifold, GenSpec, GeneratedData, OutlierBudget};
use crate::data::sample_indices;
use crate::error::Result;
use crate::pipeline::stage_seed;

/// Outlier counts of the noise ramp: 50% to 150% of 20,000 inliers.
pub const NOISE_RAMP_OUTLIERS: [usize; 11] = [
    10_000, 12_000, 14_000, 16_000, 18_000, 20_000, 22_000, 24_000, 26_000, 28_000, 30_000,
];

/// Subset rates of the scaling family, in percent.
pub const SCALING_RATES: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

pub struct FamilyMember {
    pub name: String,
    pub spec: GenSpec,
    pub data: GeneratedData,
}

pub fn noise_ramp_spec(base_seed: u64) -> GenSpec {
    GenSpec::balanced(4, 20_000, 2, OutlierBudget::Count(0), base_seed)
}

/// Eleven 2-D datasets over one fixed set of 20,000 inliers in 4 clusters.
pub fn generate_noise_ramp(base_seed: u64) -> Result<Vec<FamilyMember>> {
    let base = noise_ramp_spec(base_seed);
    let manifold = generate_manifold(&base)?;
    NOISE_RAMP_OUTLIERS
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let spec = GenSpec {
                outliers: OutlierBudget::Count(count),
                ..base.clone()
            };
            let outliers = draw_outliers(&spec, &manifold.shapes, count, stage_seed(base_seed, 200 + i as u64))?;
            let data = assemble(
                &manifold.rows,
                &manifold.classes,
                &outliers,
                &manifold.shapes,
                stage_seed(base_seed, 300 + i as u64),
            );
            Ok(FamilyMember {
                name: format!("noise_{:03}", count * 100 / 20_000),
                spec,
                data,
            })
        })
        .collect()
}

pub const SCALING_BASE_INLIERS: usize = 200_000;
pub const SCALING_OUTLIERS: usize = 200;

pub fn scaling_spec(base_seed: u64) -> GenSpec {
    GenSpec::balanced(4, SCALING_BASE_INLIERS, 10, OutlierBudget::Count(SCALING_OUTLIERS), base_seed)
}

/// Ten 10-D datasets: 10%..100% random subsets of one 200,000-inlier base,
/// each with 200 shell outliers.
pub fn generate_scaling_family(base_seed: u64) -> Result<Vec<FamilyMember>> {
    let base = scaling_spec(base_seed);
    let manifold = generate_manifold(&base)?;
    SCALING_RATES
        .iter()
        .enumerate()
        .map(|(i, &rate)| {
            let keep = SCALING_BASE_INLIERS * rate / 100;
            let mut idx = sample_indices(SCALING_BASE_INLIERS, keep, stage_seed(base_seed, 400 + i as u64));
            idx.sort_unstable();
            let rows = manifold.rows.select(&idx);
            let classes: Vec<usize> = idx.iter().map(|&j| manifold.classes[j]).collect();
            let outliers = draw_outliers(&base, &manifold.shapes, SCALING_OUTLIERS, stage_seed(base_seed, 500 + i as u64))?;
            let data = assemble(&rows, &classes, &outliers, &manifold.shapes, stage_seed(base_seed, 600 + i as u64));
            let mut per_cluster = vec![0; base.clusters()];
            for &c in &classes {
                per_cluster[c - 1] += 1;
            }
            let spec = GenSpec {
                points_per_cluster: per_cluster,
                ..base.clone()
            };
            Ok(FamilyMember {
                name: format!("scale_{rate:03}"),
                spec,
                data,
            })
        })
        .collect()
}
