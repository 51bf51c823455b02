//! Discrete-event simulation of one array over its mission.

mod engine;
mod event;
mod geometry;
mod record;

pub use engine::{run_simulation, ArraySim, SimContext, SimParams};
pub use event::{EventKind, SimEvent};
pub use geometry::{affected_stripe_range, ArrayGeometry};
pub use record::{Cause, DataLossRecord, LossScope, ScopeTotals, SimConfigEcho, SimResult, Tally};

/// Exponential inter-arrival time for `rate` events per hour; `u` uniform in
/// [0, 1). A zero rate never fires.
pub fn next_failure_offset(rate: f64, u: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    -(1.0 - u).ln() / rate
}

/// Uniform index in [0, n_units) from `u` in [0, 1).
pub fn next_failure_location(n_units: u64, u: f64) -> u64 {
    ((u * n_units as f64) as u64).min(n_units.saturating_sub(1))
}
