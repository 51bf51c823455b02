use serde::{Deserialize, Serialize};

use super::pool::SsdPool;

/// Field-comparable statistics of a generated pool. Bad-block statistics are
/// over drives with at least one mission bad block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolValidationReport {
    pub model: String,
    pub pool_size: usize,
    pub drives_with_bb: usize,
    pub drives_with_bc: usize,
    pub drives_with_bc_without_bb: usize,
    pub bc_with_gt5pct_bb: usize,
    /// `bc_with_gt5pct_bb / drives_with_bc`, 0 without bad chips.
    pub bc_gt5pct_ratio: f64,
    pub median_bb: f64,
    pub mean_bb: f64,
    /// (k, median total mission bad blocks among drives reaching k).
    pub conditional_medians: Vec<(u32, f64)>,
}

fn median(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

pub fn validate_pool(pool: &SsdPool) -> PoolValidationReport {
    let threshold = 0.05 * pool.config.blocks_per_element() as f64;
    let mut counts: Vec<u64> = pool
        .drives
        .iter()
        .map(|d| d.mission_bb_times.len() as u64)
        .filter(|&c| c > 0)
        .collect();
    counts.sort_unstable();
    let bc: Vec<_> = pool
        .drives
        .iter()
        .filter(|d| d.bad_chip_time.is_some())
        .collect();
    let bc_gt5 = bc
        .iter()
        .filter(|d| d.mission_bb_times.len() as f64 > threshold)
        .count();
    let conditional_medians = (2u32..=5)
        .map(|k| {
            let from = counts.partition_point(|&c| c < k as u64);
            (k, median(&counts[from..]))
        })
        .collect();
    PoolValidationReport {
        model: pool.profile.name.clone(),
        pool_size: pool.drives.len(),
        drives_with_bb: counts.len(),
        drives_with_bc: bc.len(),
        drives_with_bc_without_bb: bc.iter().filter(|d| d.mission_bb_times.is_empty()).count(),
        bc_with_gt5pct_bb: bc_gt5,
        bc_gt5pct_ratio: if bc.is_empty() {
            0.0
        } else {
            bc_gt5 as f64 / bc.len() as f64
        },
        median_bb: median(&counts),
        mean_bb: if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<u64>() as f64 / counts.len() as f64
        },
        conditional_medians,
    }
}
