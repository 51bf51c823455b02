use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::event::EventKind;
use crate::error::{Error, Result};

/// Array layout: one chunk per device per stripe, chunks of whole pages,
/// blocks aligned across devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_devices: usize,
    pub page_size: u64,
    pub pages_per_block: u64,
    pub blocks_per_device: u64,
    pub stripe_size: u64,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        ArrayGeometry {
            n_devices: 8,
            page_size: 4096,
            pages_per_block: 64,
            blocks_per_device: 131_072,
            stripe_size: 128 * 1024,
        }
    }
}

impl ArrayGeometry {
    pub fn new(
        n_devices: usize,
        page_size: u64,
        pages_per_block: u64,
        blocks_per_device: u64,
        stripe_size: u64,
    ) -> Result<Self> {
        let g = ArrayGeometry {
            n_devices,
            page_size,
            pages_per_block,
            blocks_per_device,
            stripe_size,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_stripe_kb(self, kb: u64) -> Result<Self> {
        let g = ArrayGeometry {
            stripe_size: kb * 1024,
            ..self
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: String| Err(Error::validation(f, m));
        if self.n_devices < 2 {
            return bad(
                "n_devices",
                format!("need at least 2 devices, got {}", self.n_devices),
            );
        }
        if self.page_size == 0 || self.pages_per_block == 0 || self.blocks_per_device == 0 {
            return bad(
                "geometry",
                "page size, pages per block and blocks per device must be positive".into(),
            );
        }
        let row = self.n_devices as u64 * self.page_size;
        if self.stripe_size == 0 || !self.stripe_size.is_multiple_of(row) {
            return bad(
                "stripe_size",
                format!(
                    "{} is not a positive multiple of devices × page size ({row})",
                    self.stripe_size
                ),
            );
        }
        let cp = self.stripe_size / row;
        if !self.pages_per_block.is_multiple_of(cp) {
            return bad(
                "stripe_size",
                format!(
                    "chunk of {cp} pages does not divide a {}-page block",
                    self.pages_per_block
                ),
            );
        }
        if cp > 64 {
            return bad(
                "stripe_size",
                format!("chunk of {cp} pages exceeds the 64-symbol limit"),
            );
        }
        Ok(())
    }

    /// Symbols (pages) each device contributes to a stripe.
    pub fn chunk_pages(&self) -> u64 {
        self.stripe_size / (self.n_devices as u64 * self.page_size)
    }

    /// Stripes spanned by one block.
    pub fn cpb(&self) -> u64 {
        self.pages_per_block / self.chunk_pages()
    }

    pub fn array_stripes(&self) -> u64 {
        self.blocks_per_device * self.cpb()
    }

    pub fn symbols_per_device(&self) -> u64 {
        self.blocks_per_device * self.pages_per_block
    }

    pub fn stripe_of_block(&self, block: u64) -> Range<u64> {
        block * self.cpb()..(block + 1) * self.cpb()
    }

    /// (stripe, symbol within chunk) of a device-local page.
    pub fn locate_symbol(&self, symbol: u64) -> (u64, u32) {
        let cp = self.chunk_pages();
        (symbol / cp, (symbol % cp) as u32)
    }
}

/// Stripes touched by a fault event.
pub fn affected_stripe_range(geometry: &ArrayGeometry, event: &EventKind) -> Result<Range<u64>> {
    match *event {
        EventKind::BadChip { .. } => Ok(0..geometry.array_stripes()),
        EventKind::BadBlock { block, .. } => {
            if block >= geometry.blocks_per_device {
                return Err(Error::Range(format!(
                    "block {block} beyond {} blocks per device",
                    geometry.blocks_per_device
                )));
            }
            Ok(geometry.stripe_of_block(block))
        }
        EventKind::BadSymbol { symbol, .. } => {
            if symbol >= geometry.symbols_per_device() {
                return Err(Error::Range(format!(
                    "symbol {symbol} beyond {} symbols per device",
                    geometry.symbols_per_device()
                )));
            }
            let (s, _) = geometry.locate_symbol(symbol);
            Ok(s..s + 1)
        }
        _ => Err(Error::Range(format!("{event:?} is not a fault event"))),
    }
}
