use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use super::counts::{marked_counts, stratified_counts, unmarked_cdf};
use super::profile::SsdModelProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub pool_size: usize,
    pub blocks_per_device: u64,
    /// Flash elements (chips) per device; the "more than 5 % of blocks
    /// failed" mark is judged against one element's blocks.
    pub elements_per_device: u64,
    pub seed: u64,
}

impl PoolConfig {
    pub fn new(pool_size: usize, blocks_per_device: u64, seed: u64) -> Self {
        PoolConfig {
            pool_size,
            blocks_per_device,
            elements_per_device: 8,
            seed,
        }
    }

    pub fn blocks_per_element(&self) -> u64 {
        (self.blocks_per_device / self.elements_per_device.max(1)).max(1)
    }

    /// Smallest mission bad-block count exceeding 5 % of an element.
    pub fn marked_threshold(&self) -> u64 {
        (self.blocks_per_element() as f64 * 0.05).floor() as u64 + 1
    }
}

/// One drive of the pool. Times are hours since the drive entered service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledSsd {
    pub factory_bb: u32,
    pub mission_bb_times: Vec<f64>,
    pub bad_chip_time: Option<f64>,
    pub marked_bb_gt_5pct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsdPool {
    pub profile: SsdModelProfile,
    pub config: PoolConfig,
    pub drives: Vec<PooledSsd>,
}

impl SsdPool {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn len(&self) -> usize {
        self.drives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drives.is_empty()
    }
}

/// Bad-chip time for a drive known to fail within `mission`, from an
/// exponential with in-mission probability `p`, conditioned on failing in
/// mission (inverse CDF of the truncated law; `u` uniform in [0, 1)).
pub fn truncated_exponential_time(p: f64, mission: f64, u: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let rate = -(1.0 - p).ln() / mission;
    (-(1.0 - u * p).ln() / rate).min(mission.next_down())
}

/// Arrival times of `n` bad blocks over `mission`: gaps before the
/// `threshold`-th arrival at unit rate, later gaps at `factor` times that,
/// rescaled to the mission (the count-conditioned form of an escalating
/// Poisson schedule).
pub(crate) fn bb_schedule<R: Rng>(
    n: u64,
    threshold: u32,
    factor: f64,
    mission: f64,
    rng: &mut R,
) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut acc = 0.0f64;
    let mut times = Vec::with_capacity(n as usize);
    for i in 0..=n {
        let g: f64 = Exp1.sample(rng);
        acc += if i < threshold as u64 { g } else { g / factor };
        if i < n {
            times.push(acc);
        }
    }
    let scale = mission / acc;
    let mut prev = 0.0f64;
    for t in &mut times {
        *t = (*t * scale).clamp(prev, mission.next_down());
        prev = *t;
    }
    times
}

pub fn generate_pool(profile: &SsdModelProfile, config: &PoolConfig) -> Result<SsdPool> {
    profile.validate().map_err(|e| Error::Model {
        model: profile.name.clone(),
        source: Box::new(e),
    })?;
    if config.pool_size == 0 {
        return Err(Error::validation("pool_size", "must be at least 1"));
    }
    if config.blocks_per_device == 0 {
        return Err(Error::validation("blocks_per_device", "must be at least 1"));
    }
    let n = config.pool_size;
    let mission = profile.mission_hours_basis;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let n_bc = (n as f64 * profile.pct_drives_bad_chip).round() as usize;
    let n_bb = (n as f64 * profile.pct_drives_bad_block).round() as usize;
    let n_marked = ((n_bc as f64 * 2.0 / 3.0).round() as usize).min(n_bb);

    // Drive roles: BC drives first `n_bc` of a shuffled order, the first
    // `n_marked` of them marked; remaining bad-block quota from non-BC
    // drives, spilling into unmarked BC drives only if non-BC run out.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (bc, rest) = order.split_at(n_bc);
    let (marked, unmarked_bc) = bc.split_at(n_marked);
    let spill = (n_bb - n_marked).saturating_sub(rest.len());
    let unmarked_bb: Vec<usize> = rest
        .iter()
        .take(n_bb - n_marked - spill)
        .chain(unmarked_bc.iter().take(spill))
        .copied()
        .collect();

    let threshold = config.marked_threshold();
    let cap = config.blocks_per_device.max(threshold);
    let share = if n_bb > 0 {
        n_marked as f64 / n_bb as f64
    } else {
        0.0
    };
    let cdf = unmarked_cdf(
        profile.median_bb.round() as u64,
        &profile.conditional_median_targets,
        share,
        threshold,
    );
    let mut unmarked_counts = stratified_counts(&cdf, unmarked_bb.len());
    let unmarked_total: u64 = unmarked_counts.iter().sum();
    let marked_target = if n_marked > 0 {
        (profile.mean_bb * n_bb as f64 - unmarked_total as f64) / n_marked as f64
    } else {
        0.0
    };
    let mut marked = marked.to_vec();
    let mut marked_counts = marked_counts(n_marked, threshold, cap, marked_target);
    unmarked_counts.shuffle(&mut rng);
    marked_counts.shuffle(&mut rng);
    marked.sort_unstable();

    let mut counts = vec![0u64; n];
    for (&d, &c) in unmarked_bb.iter().zip(&unmarked_counts) {
        counts[d] = c;
    }
    for (&d, &c) in marked.iter().zip(&marked_counts) {
        counts[d] = c;
    }
    let mut chip_time = vec![None; n];
    let mut is_marked = vec![false; n];
    for &d in bc {
        chip_time[d] = Some(truncated_exponential_time(
            profile.pct_drives_bad_chip,
            mission,
            rng.random(),
        ));
    }
    for &d in &marked {
        is_marked[d] = true;
    }

    let factory = Normal::new(profile.factory_bb_mean, profile.factory_bb_std)
        .map_err(|e| Error::validation("factory_bb_std", e.to_string()))?;
    let drives = (0..n)
        .map(|d| {
            let factory_bb = factory.sample(&mut rng).round().max(0.0) as u32;
            let mission_bb_times = bb_schedule(
                counts[d],
                profile.bb_escalation_threshold,
                profile.bb_escalation_factor,
                mission,
                &mut rng,
            );
            PooledSsd {
                factory_bb,
                mission_bb_times,
                bad_chip_time: chip_time[d],
                marked_bb_gt_5pct: is_marked[d],
            }
        })
        .collect();
    Ok(SsdPool {
        profile: profile.clone(),
        config: *config,
        drives,
    })
}
