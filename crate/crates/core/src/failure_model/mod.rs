//! Field failure statistics per SSD model and calibrated drive pools.

mod counts;
mod pool;
mod profile;
mod rber;
mod validate;

pub use pool::{generate_pool, truncated_exponential_time, PoolConfig, PooledSsd, SsdPool};
pub use profile::{default_profiles, load_profiles, parse_profiles, SsdModelProfile, Technology};
pub use rber::{bad_symbol_rate, rber_at, RberCurve};
pub use validate::{validate_pool, PoolValidationReport};

/// Four years of continuous operation.
pub const DEFAULT_MISSION_HOURS: f64 = 35_040.0;
