//! Per-device hourly usage: bits read and written, cumulative P/E cycles.
//!
//! Logs shorter than the mission are replayed cyclically; P/E cycles keep
//! accumulating by the log's first-to-last increment on every replay.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::failure_model::DEFAULT_MISSION_HOURS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageSample {
    pub hour: u64,
    pub bits_read: u64,
    pub bits_written: u64,
    pub pe_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageLog {
    pub device_id: u32,
    pub samples: Vec<UsageSample>,
}

impl UsageLog {
    /// Replay period in hours (hours are indexed from 0).
    pub fn cycle_hours(&self) -> u64 {
        self.samples.last().map_or(0, |s| s.hour + 1)
    }

    fn sample_at(&self, hour: u64) -> Option<&UsageSample> {
        let cycle = self.cycle_hours();
        if cycle == 0 {
            return None;
        }
        let h = hour % cycle;
        self.samples
            .binary_search_by_key(&h, |s| s.hour)
            .ok()
            .map(|i| &self.samples[i])
    }

    /// P/E added by one full replay of the log.
    pub fn pe_per_cycle(&self) -> u64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.pe_cycles - a.pe_cycles,
            _ => 0,
        }
    }

    /// Cumulative P/E at `hour`; hours missing from the log carry the last
    /// recorded value forward.
    pub fn pe_cycles_at(&self, hour: u64) -> u64 {
        let cycle = self.cycle_hours();
        if cycle == 0 {
            return 0;
        }
        let h = hour % cycle;
        let i = self.samples.partition_point(|s| s.hour <= h);
        let within = if i == 0 {
            self.samples[0].pe_cycles
        } else {
            self.samples[i - 1].pe_cycles
        };
        within + (hour / cycle) * self.pe_per_cycle()
    }
}

/// Bits read plus written at `hour` (cyclic replay; 0 for an empty log or a
/// missing hour).
pub fn bits_accessed(log: &UsageLog, hour: u64) -> u64 {
    log.sample_at(hour)
        .map_or(0, |s| s.bits_read + s.bits_written)
}

#[derive(Deserialize)]
struct Row {
    device_id: u32,
    hour: u64,
    bits_read: u64,
    bits_written: u64,
    pe_cycles: u64,
}

/// Parses `device_id,hour,bits_read,bits_written,pe_cycles`; rows may
/// interleave devices but each device's hours must increase.
pub fn parse_usage_csv<R: Read>(reader: R, source: &str) -> Result<Vec<UsageLog>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut logs: Vec<UsageLog> = Vec::new();
    let err = |e: csv::Error| crate::error::csv_error(source, &e);
    let headers = rdr.headers().map_err(err)?.clone();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec).map_err(err)? {
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec.deserialize(Some(&headers)).map_err(err)?;
        let idx = match logs.iter().position(|l| l.device_id == row.device_id) {
            Some(i) => i,
            None => {
                logs.push(UsageLog {
                    device_id: row.device_id,
                    samples: Vec::new(),
                });
                logs.len() - 1
            }
        };
        let log = &mut logs[idx];
        if let Some(prev) = log.samples.last() {
            let fail = |msg: String| Error::Parse {
                path: source.to_string(),
                line,
                msg,
            };
            if row.hour <= prev.hour {
                return Err(fail(format!(
                    "device {}: hour {} not after {}",
                    row.device_id, row.hour, prev.hour
                )));
            }
            if row.pe_cycles < prev.pe_cycles {
                return Err(fail(format!(
                    "device {}: pe_cycles decreased from {} to {}",
                    row.device_id, prev.pe_cycles, row.pe_cycles
                )));
            }
        }
        log.samples.push(UsageSample {
            hour: row.hour,
            bits_read: row.bits_read,
            bits_written: row.bits_written,
            pe_cycles: row.pe_cycles,
        });
    }
    logs.sort_by_key(|l| l.device_id);
    Ok(logs)
}

pub fn parse_usage_log(path: impl AsRef<Path>) -> Result<Vec<UsageLog>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_usage_csv(f, &path.display().to_string())
}

pub fn write_usage_csv<W: std::io::Write>(logs: &[UsageLog], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Config(format!("writing usage log: {e}"));
    w.write_record([
        "device_id",
        "hour",
        "bits_read",
        "bits_written",
        "pe_cycles",
    ])
    .map_err(io)?;
    for log in logs {
        for s in &log.samples {
            w.serialize((
                log.device_id,
                s.hour,
                s.bits_read,
                s.bits_written,
                s.pe_cycles,
            ))
            .map_err(io)?;
        }
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing usage log: {e}")))
}

/// Synthetic workload knobs, in bytes per hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthWorkloadParams {
    pub write_rate: f64,
    pub read_rate: f64,
    pub device_capacity: f64,
    pub write_amplification: f64,
    pub duration: u64,
    pub jitter: f64,
}

impl Default for SynthWorkloadParams {
    /// Scaled exposure: the rates stand for the bytes exposed to
    /// uncorrectable raw errors, and the capacity is sized so an MLC device
    /// reaches about a third of its wear-out limit over a four-year mission.
    fn default() -> Self {
        let write_rate = 2_000.0;
        SynthWorkloadParams {
            write_rate,
            read_rate: 6_000.0,
            device_capacity: write_rate * DEFAULT_MISSION_HOURS / 1_000.0,
            write_amplification: 1.0,
            duration: 24 * 7 * 4,
            jitter: 0.1,
        }
    }
}

impl SynthWorkloadParams {
    // negated comparisons so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(Error::validation(f, m));
        if !(self.device_capacity > 0.0) {
            return bad("device_capacity", "must be positive");
        }
        if self.duration < 1 {
            return bad("duration", "must be at least one hour");
        }
        if !(self.write_rate >= 0.0 && self.read_rate >= 0.0) {
            return bad("write_rate/read_rate", "must be non-negative");
        }
        if !(self.write_amplification >= 1.0) {
            return bad("write_amplification", "must be ≥ 1");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return bad("jitter", "must be in [0, 1)");
        }
        Ok(())
    }
}

/// Hourly samples for hours 0..duration; P/E at an hour counts the writes
/// completed before it.
pub fn synthesize_usage_log(
    params: &SynthWorkloadParams,
    device_id: u32,
    seed: u64,
) -> Result<UsageLog> {
    params.validate()?;
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (device_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut jittered = |rate: f64| {
        let f = if params.jitter > 0.0 {
            1.0 + params.jitter * (2.0 * rng.random::<f64>() - 1.0)
        } else {
            1.0
        };
        rate * f
    };
    let mut written = 0.0f64;
    let samples = (0..params.duration)
        .map(|hour| {
            let pe_cycles =
                (params.write_amplification * written / params.device_capacity).floor() as u64;
            let w = jittered(params.write_rate);
            let r = jittered(params.read_rate);
            written += w;
            UsageSample {
                hour,
                bits_read: (r * 8.0).round() as u64,
                bits_written: (w * 8.0).round() as u64,
                pe_cycles,
            }
        })
        .collect();
    Ok(UsageLog { device_id, samples })
}

/// Dense per-hour view of a log over a mission, as the simulator consumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageSeries {
    pub bits: Vec<f64>,
    pub pe: Vec<u64>,
}

impl UsageSeries {
    pub fn new(log: Option<&UsageLog>, hours: usize) -> Self {
        match log {
            Some(log) if !log.samples.is_empty() => UsageSeries {
                bits: (0..hours as u64)
                    .map(|h| bits_accessed(log, h) as f64)
                    .collect(),
                pe: (0..hours as u64).map(|h| log.pe_cycles_at(h)).collect(),
            },
            _ => UsageSeries {
                bits: vec![0.0; hours],
                pe: vec![0; hours],
            },
        }
    }

    pub fn hours(&self) -> usize {
        self.bits.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "device_id,hour,bits_read,bits_written,pe_cycles\n";

    #[test]
    fn parses_two_devices() {
        let text =
            format!("{HEADER}0,0,1,2,0\n1,0,1,2,0\n0,1,1,2,1\n1,1,1,2,0\n0,2,1,2,1\n1,2,1,2,3\n");
        let logs = parse_usage_csv(text.as_bytes(), "u.csv").unwrap();
        assert_eq!(logs.len(), 2);
        assert!(logs.iter().all(|l| l.samples.len() == 3));
    }

    #[test]
    fn decreasing_pe_is_rejected_with_row() {
        let text = format!("{HEADER}0,0,1,2,5\n0,1,1,2,4\n");
        let err = parse_usage_csv(text.as_bytes(), "u.csv").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("pe_cycles"), "{msg}");
    }

    #[test]
    fn missing_column_is_parse_error() {
        let err =
            parse_usage_csv("device_id,hour,bits_read\n0,0,1\n".as_bytes(), "u.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse_usage_csv(HEADER.as_bytes(), "u.csv")
            .unwrap()
            .is_empty());
        assert!(parse_usage_csv("".as_bytes(), "u.csv").unwrap().is_empty());
    }

    #[test]
    fn access_sum_and_cycle() {
        let log = UsageLog {
            device_id: 0,
            samples: (0..100)
                .map(|h| UsageSample {
                    hour: h,
                    bits_read: 8_000_000_000 + h,
                    bits_written: 2_000_000_000,
                    pe_cycles: h,
                })
                .collect(),
        };
        assert_eq!(bits_accessed(&log, 0), 10_000_000_000);
        assert_eq!(bits_accessed(&log, 250), bits_accessed(&log, 50));
        assert_eq!(log.pe_cycles_at(250), 50 + 2 * 99);
        let empty = UsageLog {
            device_id: 0,
            samples: vec![],
        };
        assert_eq!(bits_accessed(&empty, 7), 0);
        assert_eq!(empty.pe_cycles_at(7), 0);
    }

    #[test]
    fn synthetic_pe_closed_form() {
        let p = SynthWorkloadParams {
            write_rate: 1e9,
            read_rate: 0.0,
            device_capacity: 1e9,
            write_amplification: 1.0,
            duration: 20,
            jitter: 0.0,
        };
        let log = synthesize_usage_log(&p, 0, 1).unwrap();
        assert_eq!(log.samples[10].pe_cycles, 10);
        assert!(log.samples.iter().all(|s| s.bits_read == 0));
        assert_eq!(log, synthesize_usage_log(&p, 0, 1).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let logs: Vec<_> = (0..3)
            .map(|d| synthesize_usage_log(&SynthWorkloadParams::default(), d, 5).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_usage_csv(&logs, &mut buf).unwrap();
        assert_eq!(parse_usage_csv(buf.as_slice(), "mem").unwrap(), logs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn synthesis_keeps_pe_monotone(
            w in 0.0f64..1e10, r in 0.0f64..1e10, cap in 1e3f64..1e12, wa in 1.0f64..5.0,
            dur in 1u64..500, jitter in 0.0f64..0.99, seed in any::<u64>(),
        ) {
            let p = SynthWorkloadParams { write_rate: w, read_rate: r, device_capacity: cap, write_amplification: wa, duration: dur, jitter };
            let log = synthesize_usage_log(&p, 3, seed).unwrap();
            prop_assert!(log.samples.windows(2).all(|s| s[0].pe_cycles <= s[1].pe_cycles));
            let series = UsageSeries::new(Some(&log), 3 * dur as usize + 7);
            prop_assert!(series.pe.windows(2).all(|s| s[0] <= s[1]));
        }

        #[test]
        fn cyclic_mean_equals_single_cycle_mean(dur in 1u64..200, k in 1u64..6, seed in any::<u64>()) {
            let p = SynthWorkloadParams { duration: dur, ..Default::default() };
            let log = synthesize_usage_log(&p, 0, seed).unwrap();
            let one: u128 = (0..dur).map(|h| bits_accessed(&log, h) as u128).sum();
            let many: u128 = (0..k * dur).map(|h| bits_accessed(&log, h) as u128).sum();
            prop_assert_eq!(many, one * k as u128);
        }
    }
}
