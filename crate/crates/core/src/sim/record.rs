use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::erasure::{ChunkFaults, ErasureCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LossScope {
    #[serde(rename = "ADL")]
    Adl,
    #[serde(rename = "BDL")]
    Bdl,
    #[serde(rename = "SDL")]
    Sdl,
}

/// Fault types co-located in the lost stripe(s), one entry per faulty chunk
/// named by its widest fault.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Cause {
    pub bc: u8,
    pub bb: u8,
    pub bs: u8,
}

impl Cause {
    pub fn of_chunks<'a>(chunks: impl IntoIterator<Item = &'a ChunkFaults>) -> Self {
        let mut c = Cause::default();
        for ch in chunks {
            c.add(ch);
        }
        c
    }

    pub fn add(&mut self, ch: &ChunkFaults) {
        if ch.device_failed {
            self.bc += 1;
        } else if ch.bad_block {
            self.bb += 1;
        } else if ch.bad_symbols != 0 {
            self.bs += 1;
        }
    }

    /// Canonical label, e.g. `BC+BB`, types ordered BC < BB < BS.
    pub fn label(&self) -> String {
        let parts: Vec<&str> = std::iter::repeat_n("BC", self.bc as usize)
            .chain(std::iter::repeat_n("BB", self.bb as usize))
            .chain(std::iter::repeat_n("BS", self.bs as usize))
            .collect();
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataLossRecord {
    pub time: f64,
    pub scope: LossScope,
    pub cause: Cause,
    pub stripes_lost: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub records: u64,
    pub stripes_lost: u64,
}

impl Tally {
    pub fn add(&mut self, other: Tally) {
        self.records += other.records;
        self.stripes_lost += other.stripes_lost;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeTotals {
    pub adl: Tally,
    pub bdl: Tally,
    pub sdl: Tally,
}

impl ScopeTotals {
    pub fn of(records: &[DataLossRecord]) -> Self {
        let mut t = ScopeTotals::default();
        for r in records {
            let slot = match r.scope {
                LossScope::Adl => &mut t.adl,
                LossScope::Bdl => &mut t.bdl,
                LossScope::Sdl => &mut t.sdl,
            };
            slot.add(Tally {
                records: 1,
                stripes_lost: r.stripes_lost,
            });
        }
        t
    }

    pub fn add(&mut self, other: &ScopeTotals) {
        self.adl.add(other.adl);
        self.bdl.add(other.bdl);
        self.sdl.add(other.sdl);
    }

    pub fn stripes_lost(&self) -> u64 {
        self.adl.stripes_lost + self.bdl.stripes_lost + self.sdl.stripes_lost
    }

    pub fn records(&self) -> u64 {
        self.adl.records + self.bdl.records + self.sdl.records
    }
}

/// What a simulation ran with; results only merge when echoes agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfigEcho {
    pub model: String,
    pub code: ErasureCode,
    pub n_devices: usize,
    pub stripe_size: u64,
    pub tts: f64,
    pub ttr: f64,
    pub mission_hours: f64,
    pub mirror_copy_hours: f64,
    pub pool_size: usize,
    pub pool_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfigEcho,
    pub seed: u64,
    pub records: Vec<DataLossRecord>,
    pub totals: ScopeTotals,
    /// Keyed by canonical cause label.
    pub causes: BTreeMap<String, Tally>,
    pub ddf: u64,
    pub tdf: u64,
}

impl SimResult {
    pub fn new(
        config: SimConfigEcho,
        seed: u64,
        records: Vec<DataLossRecord>,
        ddf: u64,
        tdf: u64,
    ) -> Self {
        let mut causes: BTreeMap<String, Tally> = BTreeMap::new();
        for r in &records {
            causes.entry(r.cause.label()).or_default().add(Tally {
                records: 1,
                stripes_lost: r.stripes_lost,
            });
        }
        SimResult {
            totals: ScopeTotals::of(&records),
            config,
            seed,
            records,
            causes,
            ddf,
            tdf,
        }
    }

    pub fn stripes_lost(&self) -> u64 {
        self.totals.stripes_lost()
    }
}
