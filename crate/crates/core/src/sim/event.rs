use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Scrub,
    ReconstructComplete { device: usize },
    WearOutReplace { device: usize },
    BadChip { device: usize },
    BadBlock { device: usize, block: u64 },
    BadSymbol { device: usize, symbol: u64 },
}

impl EventKind {
    /// Tie-break at equal timestamps: repairs before faults.
    pub fn priority(&self) -> u8 {
        match self {
            EventKind::Scrub => 0,
            EventKind::ReconstructComplete { .. } => 1,
            EventKind::WearOutReplace { .. } => 2,
            EventKind::BadChip { .. } => 3,
            EventKind::BadBlock { .. } => 4,
            EventKind::BadSymbol { .. } => 5,
        }
    }

    pub fn device(&self) -> Option<usize> {
        match *self {
            EventKind::Scrub => None,
            EventKind::ReconstructComplete { device }
            | EventKind::WearOutReplace { device }
            | EventKind::BadChip { device }
            | EventKind::BadBlock { device, .. }
            | EventKind::BadSymbol { device, .. } => Some(device),
        }
    }

    pub fn is_fault(&self) -> bool {
        self.priority() >= 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
}

/// Queue entry; `epoch` ties device events to the drive identity that
/// scheduled them so events of a replaced drive can be dropped.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Queued {
    pub event: SimEvent,
    pub epoch: u32,
    pub seq: u64,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    /// Reversed so `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .event
            .time
            .total_cmp(&self.event.time)
            .then_with(|| other.event.kind.priority().cmp(&self.event.kind.priority()))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
