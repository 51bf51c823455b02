//! Stripe correctability judge and the analytic cost model of the three
//! supported erasure-code classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// `Pmds11` stands for the whole PMDS(1,1) / SD(1,1) / STAIR(1,1) class: one
/// parity chunk per stripe plus one global parity symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErasureCode {
    #[serde(rename = "RAID5")]
    Raid5,
    #[serde(rename = "RAID6")]
    Raid6,
    #[serde(rename = "PMDS11")]
    Pmds11,
}

impl ErasureCode {
    pub const ALL: [ErasureCode; 3] = [ErasureCode::Raid5, ErasureCode::Raid6, ErasureCode::Pmds11];

    /// Whole-device failures the code survives.
    pub fn device_tolerance(self) -> usize {
        match self {
            ErasureCode::Raid5 | ErasureCode::Pmds11 => 1,
            ErasureCode::Raid6 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErasureCode::Raid5 => "RAID5",
            ErasureCode::Raid6 => "RAID6",
            ErasureCode::Pmds11 => "PMDS11",
        }
    }
}

impl fmt::Display for ErasureCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErasureCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s
            .to_ascii_uppercase()
            .replace(['(', ')', ',', '-', '_'], "")
            .as_str()
        {
            "RAID5" => Ok(ErasureCode::Raid5),
            "RAID6" => Ok(ErasureCode::Raid6),
            "PMDS11" | "PMDS" | "SD11" | "STAIR11" => Ok(ErasureCode::Pmds11),
            _ => Err(Error::validation(
                "code",
                format!("unknown erasure code {s:?}"),
            )),
        }
    }
}

/// Faults landing on one chunk (one device's share of a stripe).
/// `bad_symbols` is a bitmask over symbol positions within the chunk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChunkFaults {
    pub device_failed: bool,
    pub bad_block: bool,
    pub bad_symbols: u64,
}

impl ChunkFaults {
    pub fn whole(&self) -> bool {
        self.device_failed || self.bad_block
    }

    pub fn is_faulty(&self) -> bool {
        self.whole() || self.bad_symbols != 0
    }

    /// A failed device or bad block erases every symbol of the chunk.
    pub fn is_multi_symbol(&self) -> bool {
        self.whole() || self.bad_symbols.count_ones() > 1
    }

    /// Erased symbols, counting a whole-chunk erasure as `chunk_pages`.
    pub fn erased_symbols(&self, chunk_pages: u32) -> u32 {
        if self.whole() {
            chunk_pages
        } else {
            self.bad_symbols.count_ones()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeFaultState {
    pub chunk_pages: u32,
    pub chunks: Vec<ChunkFaults>,
}

impl StripeFaultState {
    pub fn new(n: usize, chunk_pages: u32) -> Self {
        assert!(
            (1..=64).contains(&chunk_pages),
            "chunk_pages must be in 1..=64"
        );
        StripeFaultState {
            chunk_pages,
            chunks: vec![ChunkFaults::default(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.chunks.len()
    }

    pub fn fail_device(&mut self, chunk: usize) -> &mut Self {
        self.chunks[chunk].device_failed = true;
        self
    }

    pub fn bad_block(&mut self, chunk: usize) -> &mut Self {
        self.chunks[chunk].bad_block = true;
        self
    }

    pub fn bad_symbol(&mut self, chunk: usize, symbol: u32) -> &mut Self {
        assert!(
            symbol < self.chunk_pages,
            "symbol {symbol} outside chunk of {}",
            self.chunk_pages
        );
        self.chunks[chunk].bad_symbols |= 1 << symbol;
        self
    }

    pub fn clear(&mut self) {
        self.chunks.fill(ChunkFaults::default());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossHint {
    None,
    Sdl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionOutcome {
    pub correctable: bool,
    pub loss_scope_if_triggered: LossHint,
}

pub fn faulty_chunk_count(state: &StripeFaultState) -> usize {
    state.chunks.iter().filter(|c| c.is_faulty()).count()
}

pub fn multi_symbol_faulty_chunk_count(state: &StripeFaultState) -> usize {
    state.chunks.iter().filter(|c| c.is_multi_symbol()).count()
}

/// Decision rule on the two chunk counts; shared with the simulator's hot path.
pub fn uncorrectable(code: ErasureCode, faulty: usize, multi: usize) -> bool {
    match code {
        ErasureCode::Raid5 => faulty > 1,
        ErasureCode::Raid6 => faulty > 2,
        ErasureCode::Pmds11 => faulty > 2 || multi > 1,
    }
}

pub fn check_stripe_dl(code: ErasureCode, state: &StripeFaultState) -> CorrectionOutcome {
    let lost = uncorrectable(
        code,
        faulty_chunk_count(state),
        multi_symbol_faulty_chunk_count(state),
    );
    CorrectionOutcome {
        correctable: !lost,
        loss_scope_if_triggered: if lost { LossHint::Sdl } else { LossHint::None },
    }
}

// ---- cost model -------------------------------------------------------------

fn check_shape(n: u64, r: u64) {
    assert!(n >= 2, "device count must be at least 2, got {n}");
    assert!(r >= 1, "rows per stripe must be at least 1, got {r}");
}

/// Effective replication factor: physical over logical capacity of a stripe.
pub fn erf(code: ErasureCode, n: u64, r: u64) -> f64 {
    check_shape(n, r);
    let (n, r) = (n as f64, r as f64);
    match code {
        ErasureCode::Raid5 => (n + 1.0) / n,
        ErasureCode::Raid6 => (n + 2.0) / n,
        ErasureCode::Pmds11 => (n + 1.0) * r / (n * r - 1.0),
    }
}

/// XORs needed to encode one stripe from scratch.
pub fn encode_xor_count(code: ErasureCode, n: u64, r: u64) -> u64 {
    check_shape(n, r);
    match code {
        ErasureCode::Raid5 => (n - 1) * r,
        ErasureCode::Raid6 => 2 * (n - 1) * r,
        ErasureCode::Pmds11 => 2 * (n - 1) * r + (r - 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateGranularity {
    Sector,
    Row,
    Stripe,
}

impl UpdateGranularity {
    pub const ALL: [UpdateGranularity; 3] = [
        UpdateGranularity::Sector,
        UpdateGranularity::Row,
        UpdateGranularity::Stripe,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoPenalty {
    pub writes: u64,
    pub reads: u64,
}

/// Device I/Os (with read-before-write) to update one sector, row or stripe.
pub fn update_penalty(
    code: ErasureCode,
    n: u64,
    r: u64,
    granularity: UpdateGranularity,
) -> IoPenalty {
    use ErasureCode::*;
    use UpdateGranularity::*;
    check_shape(n, r);
    let (writes, reads) = match (granularity, code) {
        (Sector, Raid5) => (2, 2),
        (Sector, Raid6) => (3, 3),
        (Sector, Pmds11) => (4, 4),
        (Row, Raid5) => (n + 1, 0),
        (Row, Raid6) => (n + 2, 0),
        (Row, Pmds11) => (n + 3, n + 2),
        (Stripe, Raid5) => ((n + 1) * r, 0),
        (Stripe, Raid6) => ((n + 2) * r, 0),
        (Stripe, Pmds11) => ((n + 1) * r, 0),
    };
    IoPenalty { writes, reads }
}
