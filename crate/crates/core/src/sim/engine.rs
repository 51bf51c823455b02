use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rustc_hash::{FxHashMap, FxHashSet};

use super::event::{EventKind, Queued, SimEvent};
use super::geometry::ArrayGeometry;
use super::next_failure_location;
use super::record::{Cause, DataLossRecord, LossScope, SimConfigEcho, SimResult};
use crate::erasure::{uncorrectable, ChunkFaults, ErasureCode};
use crate::error::{Error, Result};
use crate::failure_model::{bad_symbol_rate, rber_at, RberCurve, SsdPool};
use crate::workload::{UsageLog, UsageSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub tts: f64,
    pub ttr: f64,
    pub mission: f64,
    /// Duration of the mirror copy onto a replacement for a worn-out drive.
    pub mirror_copy_hours: f64,
}

impl SimParams {
    pub fn new(tts: f64, ttr: f64, mission: f64) -> Self {
        SimParams {
            tts,
            ttr,
            mission,
            mirror_copy_hours: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("tts", self.tts),
            ("ttr", self.ttr),
            ("mission_hours", self.mission),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    field,
                    format!("{v} must be a positive number of hours"),
                ));
            }
        }
        if !(self.mirror_copy_hours >= 0.0 && self.mirror_copy_hours.is_finite()) {
            return Err(Error::validation(
                "mirror_copy_hours",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Cumulative bad-symbol hazard of one drive identity, hourly steps from its
/// install hour; P/E counts from zero at install.
#[derive(Debug)]
struct Hazard {
    start: usize,
    rate: Vec<f64>,
    cum: Vec<f64>,
}

impl Hazard {
    fn build(curve: &RberCurve, usage: &UsageSeries, install: f64) -> Hazard {
        let start = (install.floor() as usize).min(usage.hours());
        let pe0 = usage.pe.get(start).copied().unwrap_or(0);
        let rate: Vec<f64> = (start..usage.hours())
            .map(|h| {
                let bits = usage.bits[h];
                if bits > 0.0 {
                    bad_symbol_rate(rber_at(curve, usage.pe[h].saturating_sub(pe0)), bits)
                } else {
                    0.0
                }
            })
            .collect();
        let mut cum = Vec::with_capacity(rate.len() + 1);
        let mut acc = 0.0;
        cum.push(acc);
        for &r in &rate {
            acc += r;
            cum.push(acc);
        }
        Hazard { start, rate, cum }
    }

    fn at(&self, t: f64) -> f64 {
        let k = (t.floor() as usize).saturating_sub(self.start);
        match self.rate.get(k) {
            Some(&r) => self.cum[k] + (t - (self.start + k) as f64).max(0.0) * r,
            None => *self.cum.last().unwrap(),
        }
    }

    /// First time the cumulative hazard reaches `target`.
    fn invert(&self, target: f64) -> Option<f64> {
        if target >= *self.cum.last().unwrap() {
            return None;
        }
        let k = self.cum.partition_point(|&c| c <= target) - 1;
        Some((self.start + k) as f64 + (target - self.cum[k]) / self.rate[k])
    }
}

/// Inputs shared by every simulation of one (pool, usage logs, mission)
/// setting, independent of code, geometry and seed.
pub struct SimContext<'a> {
    pool: &'a SsdPool,
    usage: Vec<UsageSeries>,
    fresh: Vec<Arc<Hazard>>,
}

impl<'a> SimContext<'a> {
    /// Array slot `i` replays `logs[i % logs.len()]`; no logs means idle drives.
    pub fn new(
        pool: &'a SsdPool,
        logs: &[UsageLog],
        n_devices: usize,
        mission: f64,
    ) -> Result<Self> {
        if pool.len() < n_devices {
            return Err(Error::validation(
                "pool_size",
                format!(
                    "pool of {} drives cannot fill an array of {n_devices}",
                    pool.len()
                ),
            ));
        }
        let hours = mission.ceil() as usize;
        let usage: Vec<UsageSeries> = (0..n_devices)
            .map(|i| {
                UsageSeries::new(
                    if logs.is_empty() {
                        None
                    } else {
                        Some(&logs[i % logs.len()])
                    },
                    hours,
                )
            })
            .collect();
        let fresh = usage
            .iter()
            .map(|u| Arc::new(Hazard::build(&pool.profile.rber_curve, u, 0.0)))
            .collect();
        Ok(SimContext { pool, usage, fresh })
    }

    pub fn pool(&self) -> &SsdPool {
        self.pool
    }

    pub fn n_devices(&self) -> usize {
        self.usage.len()
    }

    /// Mean bad-symbol arrivals per hour of a fresh drive in `slot` over the
    /// usage horizon.
    pub fn mean_bad_symbol_rate(&self, slot: usize) -> f64 {
        let h = &self.fresh[slot];
        h.cum.last().unwrap() / h.rate.len().max(1) as f64
    }

    fn hazard(&self, slot: usize, install: f64) -> Arc<Hazard> {
        if install == 0.0 {
            Arc::clone(&self.fresh[slot])
        } else {
            Arc::new(Hazard::build(
                &self.pool.profile.rber_curve,
                &self.usage[slot],
                install,
            ))
        }
    }

    /// Hour at which a drive installed at `install` in `slot` reaches its
    /// wear-out limit, if within the usage horizon.
    fn wear_out_time(&self, slot: usize, install: f64) -> Option<f64> {
        let pe = &self.usage[slot].pe;
        let start = install.floor() as usize;
        let limit = pe.get(start)?.saturating_add(self.pool.profile.wol);
        let h = start + pe[start..].partition_point(|&p| p < limit);
        (h < pe.len()).then(|| (h as f64).max(install))
    }
}

struct Device {
    identity: usize,
    install: f64,
    epoch: u32,
    failed: bool,
    hazard: Arc<Hazard>,
    next_bb: usize,
    latent_bb: FxHashSet<u64>,
    latent_bs: FxHashMap<u64, u64>,
    rng_identity: ChaCha8Rng,
    rng_bb: ChaCha8Rng,
    rng_bs: ChaCha8Rng,
}

impl Device {
    fn clear_latent(&mut self) {
        self.latent_bb.clear();
        self.latent_bs.clear();
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// State of one simulated array. Every device draws its faults from its own
/// random streams, so the fault history of a seed does not depend on the
/// erasure code, stripe size or repair timings being compared.
pub struct ArraySim<'a> {
    ctx: &'a SimContext<'a>,
    code: ErasureCode,
    geometry: ArrayGeometry,
    params: SimParams,
    seed: u64,
    devices: Vec<Device>,
    queue: BinaryHeap<Queued>,
    seq: u64,
    clock: f64,
    /// Stripes already recorded since the last scrub or reconstruction.
    lost: FxHashSet<u64>,
    /// Set while more devices are down than the code tolerates; the whole
    /// array is already counted lost.
    adl_active: bool,
    records: Vec<DataLossRecord>,
    ddf: u64,
    tdf: u64,
}

impl<'a> ArraySim<'a> {
    pub fn new(
        ctx: &'a SimContext<'a>,
        code: ErasureCode,
        geometry: ArrayGeometry,
        params: SimParams,
        seed: u64,
    ) -> Result<Self> {
        geometry.validate()?;
        params.validate()?;
        let n = geometry.n_devices;
        if ctx.n_devices() != n {
            return Err(Error::validation(
                "n_devices",
                format!(
                    "context prepared for {} devices, geometry has {n}",
                    ctx.n_devices()
                ),
            ));
        }
        let initial = index::sample(&mut stream(seed, 0), ctx.pool.len(), n).into_vec();
        let devices = (0..n)
            .map(|d| {
                let base = 1 + 3 * d as u64;
                Device {
                    identity: initial[d],
                    install: 0.0,
                    epoch: 0,
                    failed: false,
                    hazard: ctx.hazard(d, 0.0),
                    next_bb: 0,
                    latent_bb: FxHashSet::default(),
                    latent_bs: FxHashMap::default(),
                    rng_identity: stream(seed, base),
                    rng_bb: stream(seed, base + 1),
                    rng_bs: stream(seed, base + 2),
                }
            })
            .collect();
        let mut sim = ArraySim {
            ctx,
            code,
            geometry,
            params,
            seed,
            devices,
            queue: BinaryHeap::new(),
            seq: 0,
            clock: 0.0,
            lost: FxHashSet::default(),
            adl_active: false,
            records: Vec::new(),
            ddf: 0,
            tdf: 0,
        };
        for (d, &drive) in initial.iter().enumerate() {
            sim.install(d, drive, 0.0);
        }
        sim.push(params.tts, EventKind::Scrub, 0);
        Ok(sim)
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn records(&self) -> &[DataLossRecord] {
        &self.records
    }

    pub fn ddf(&self) -> u64 {
        self.ddf
    }

    pub fn tdf(&self) -> u64 {
        self.tdf
    }

    pub fn failed_devices(&self) -> usize {
        self.devices.iter().filter(|d| d.failed).count()
    }

    pub fn latent_fault_count(&self) -> usize {
        self.devices
            .iter()
            .map(|d| d.latent_bb.len() + d.latent_bs.len())
            .sum()
    }

    fn push(&mut self, time: f64, kind: EventKind, epoch: u32) {
        if time < self.params.mission {
            self.seq += 1;
            self.queue.push(Queued {
                event: SimEvent { time, kind },
                epoch,
                seq: self.seq,
            });
        }
    }

    /// Queues an externally chosen event against the device's current identity.
    pub fn inject(&mut self, event: SimEvent) {
        let epoch = event.kind.device().map_or(0, |d| self.devices[d].epoch);
        self.push(event.time, event.kind, epoch);
    }

    /// Puts drive `identity` into `slot` at time `at` and schedules its faults.
    fn install(&mut self, slot: usize, identity: usize, at: f64) {
        let hazard = self.ctx.hazard(slot, at);
        let dev = &mut self.devices[slot];
        dev.identity = identity;
        dev.install = at;
        dev.epoch += 1;
        dev.hazard = hazard;
        dev.next_bb = 0;
        dev.clear_latent();
        let epoch = dev.epoch;
        if let Some(t) = self.ctx.pool.drives[identity].bad_chip_time {
            self.push(at + t, EventKind::BadChip { device: slot }, epoch);
        }
        self.schedule_bad_block(slot);
        self.schedule_bad_symbol(slot, at);
        if let Some(t) = self.ctx.wear_out_time(slot, at) {
            self.push(
                t + self.params.mirror_copy_hours,
                EventKind::WearOutReplace { device: slot },
                epoch,
            );
        }
    }

    fn schedule_bad_block(&mut self, slot: usize) {
        let dev = &mut self.devices[slot];
        let times = &self.ctx.pool.drives[dev.identity].mission_bb_times;
        let Some(&t) = times.get(dev.next_bb) else {
            return;
        };
        dev.next_bb += 1;
        let block = next_failure_location(self.geometry.blocks_per_device, dev.rng_bb.random());
        let (time, epoch) = (dev.install + t, dev.epoch);
        self.push(
            time,
            EventKind::BadBlock {
                device: slot,
                block,
            },
            epoch,
        );
    }

    fn schedule_bad_symbol(&mut self, slot: usize, from: f64) {
        let dev = &mut self.devices[slot];
        let gap: f64 = Exp1.sample(&mut dev.rng_bs);
        let u: f64 = dev.rng_bs.random();
        let target = dev.hazard.at(from) + gap;
        if let Some(time) = dev.hazard.invert(target) {
            let symbol = next_failure_location(self.geometry.symbols_per_device(), u);
            let epoch = dev.epoch;
            self.push(
                time.max(from),
                EventKind::BadSymbol {
                    device: slot,
                    symbol,
                },
                epoch,
            );
        }
    }

    fn chunk(&self, device: usize, stripe: u64, cpb: u64) -> ChunkFaults {
        let dev = &self.devices[device];
        if dev.failed {
            return ChunkFaults {
                device_failed: true,
                ..Default::default()
            };
        }
        ChunkFaults {
            device_failed: false,
            bad_block: !dev.latent_bb.is_empty() && dev.latent_bb.contains(&(stripe / cpb)),
            bad_symbols: if dev.latent_bs.is_empty() {
                0
            } else {
                dev.latent_bs.get(&stripe).copied().unwrap_or(0)
            },
        }
    }

    /// Judges `stripes` and records the newly lost ones. A lost stripe that
    /// stays lost on whole-chunk faults alone is a block loss, grouped per
    /// block; anything needing symbol faults to fail is a stripe loss.
    fn judge(&mut self, stripes: impl IntoIterator<Item = u64>) -> Vec<DataLossRecord> {
        if self.adl_active {
            return Vec::new();
        }
        let cpb = self.geometry.cpb();
        let mut blocks: BTreeMap<(u64, Cause), u64> = BTreeMap::new();
        let mut singles: Vec<(u64, Cause)> = Vec::new();
        for s in stripes {
            if self.lost.contains(&s) {
                continue;
            }
            let (mut faulty, mut multi, mut whole) = (0, 0, 0);
            let (mut cause, mut whole_cause) = (Cause::default(), Cause::default());
            for d in 0..self.devices.len() {
                let c = self.chunk(d, s, cpb);
                if !c.is_faulty() {
                    continue;
                }
                faulty += 1;
                multi += c.is_multi_symbol() as usize;
                cause.add(&c);
                if c.whole() {
                    whole += 1;
                    whole_cause.add(&c);
                }
            }
            if !uncorrectable(self.code, faulty, multi) {
                continue;
            }
            self.lost.insert(s);
            if uncorrectable(self.code, whole, whole) {
                *blocks.entry((s / cpb, whole_cause)).or_default() += 1;
            } else {
                singles.push((s, cause));
            }
        }
        let time = self.clock;
        let new: Vec<DataLossRecord> = blocks
            .into_iter()
            .map(|((_, cause), n)| DataLossRecord {
                time,
                scope: LossScope::Bdl,
                cause,
                stripes_lost: n,
            })
            .chain(singles.into_iter().map(|(_, cause)| DataLossRecord {
                time,
                scope: LossScope::Sdl,
                cause,
                stripes_lost: 1,
            }))
            .collect();
        self.records.extend_from_slice(&new);
        new
    }

    /// Stripes holding latent faults on non-failed devices, ascending.
    fn latent_stripes(&self, skip: Option<usize>) -> Vec<u64> {
        let cpb = self.geometry.cpb();
        let mut out: Vec<u64> = Vec::new();
        for (i, dev) in self.devices.iter().enumerate() {
            if Some(i) == skip || dev.failed {
                continue;
            }
            for &b in &dev.latent_bb {
                out.extend(b * cpb..(b + 1) * cpb);
            }
            out.extend(dev.latent_bs.keys().copied());
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Registers a fault event and records any loss it causes.
    pub fn handle_failure(&mut self, kind: EventKind) -> Vec<DataLossRecord> {
        match kind {
            EventKind::BadChip { device } => self.bad_chip(device),
            EventKind::BadBlock { device, block } => {
                self.schedule_bad_block(device);
                let dev = &mut self.devices[device];
                if dev.failed || !dev.latent_bb.insert(block) {
                    return Vec::new();
                }
                self.judge(self.geometry.stripe_of_block(block))
            }
            EventKind::BadSymbol { device, symbol } => {
                self.schedule_bad_symbol(device, self.clock);
                let block = symbol / self.geometry.pages_per_block;
                let (stripe, bit) = self.geometry.locate_symbol(symbol);
                let dev = &mut self.devices[device];
                if dev.failed || dev.latent_bb.contains(&block) {
                    return Vec::new();
                }
                let mask = dev.latent_bs.entry(stripe).or_insert(0);
                if *mask & (1 << bit) != 0 {
                    return Vec::new();
                }
                *mask |= 1 << bit;
                self.judge([stripe])
            }
            other => panic!("{other:?} is not a fault event"),
        }
    }

    fn bad_chip(&mut self, device: usize) -> Vec<DataLossRecord> {
        let dev = &mut self.devices[device];
        if dev.failed {
            return Vec::new();
        }
        dev.failed = true;
        dev.clear_latent();
        // Pending faults of the dead drive are void.
        dev.epoch += 1;
        let epoch = dev.epoch;
        self.push(
            self.clock + self.params.ttr,
            EventKind::ReconstructComplete { device },
            epoch,
        );
        let failed = self.failed_devices();
        if failed >= 2 {
            self.ddf += 1;
        }
        if failed >= 3 {
            self.tdf += 1;
        }
        if failed > self.code.device_tolerance() {
            if self.adl_active {
                return Vec::new();
            }
            self.adl_active = true;
            let rec = DataLossRecord {
                time: self.clock,
                scope: LossScope::Adl,
                cause: Cause {
                    bc: failed as u8,
                    bb: 0,
                    bs: 0,
                },
                stripes_lost: self.geometry.array_stripes(),
            };
            self.records.push(rec);
            return vec![rec];
        }
        let stripes = self.latent_stripes(Some(device));
        self.judge(stripes)
    }

    /// Full-array scrub: records what is unrecoverable, then repairs every
    /// latent fault on surviving devices.
    pub fn apply_scrub(&mut self) -> Vec<DataLossRecord> {
        let stripes = self.latent_stripes(None);
        let new = self.judge(stripes);
        for dev in self.devices.iter_mut().filter(|d| !d.failed) {
            dev.clear_latent();
        }
        self.lost.clear();
        self.push(self.clock + self.params.tts, EventKind::Scrub, 0);
        new
    }

    /// Rebuild of `device` onto a fresh drive is complete. The rebuild reads
    /// every surviving device, so their latent faults are repaired as well.
    pub fn apply_reconstruct(&mut self, device: usize) -> Vec<DataLossRecord> {
        let stripes = self.latent_stripes(Some(device));
        let new = self.judge(stripes);
        self.devices[device].failed = false;
        for dev in self.devices.iter_mut().filter(|d| !d.failed) {
            dev.clear_latent();
        }
        self.lost.clear();
        if self.failed_devices() <= self.code.device_tolerance() {
            self.adl_active = false;
        }
        let identity = self.devices[device]
            .rng_identity
            .random_range(0..self.ctx.pool.len());
        self.install(device, identity, self.clock);
        new
    }

    /// Mirror-copy replacement of a worn-out drive; the array is never
    /// degraded by it.
    pub fn replace_worn_out(&mut self, device: usize) {
        if self.devices[device].failed {
            return;
        }
        let identity = self.devices[device]
            .rng_identity
            .random_range(0..self.ctx.pool.len());
        self.install(device, identity, self.clock);
    }

    /// Processes the next live event before `until`; false once none is left.
    pub fn step(&mut self, until: f64) -> bool {
        while let Some(top) = self.queue.peek() {
            if top.event.time >= until.min(self.params.mission) {
                return false;
            }
            let q = self.queue.pop().unwrap();
            if let Some(d) = q.event.kind.device() {
                if q.epoch != self.devices[d].epoch {
                    continue;
                }
            }
            self.clock = q.event.time;
            match q.event.kind {
                EventKind::Scrub => {
                    self.apply_scrub();
                }
                EventKind::ReconstructComplete { device } => {
                    self.apply_reconstruct(device);
                }
                EventKind::WearOutReplace { device } => self.replace_worn_out(device),
                kind => {
                    self.handle_failure(kind);
                }
            }
            return true;
        }
        false
    }

    pub fn run_until(&mut self, until: f64) {
        while self.step(until) {}
        self.clock = self.clock.max(until.min(self.params.mission));
    }

    pub fn finish(mut self) -> SimResult {
        self.run_until(self.params.mission);
        let pool = self.ctx.pool;
        let echo = SimConfigEcho {
            model: pool.profile.name.clone(),
            code: self.code,
            n_devices: self.geometry.n_devices,
            stripe_size: self.geometry.stripe_size,
            tts: self.params.tts,
            ttr: self.params.ttr,
            mission_hours: self.params.mission,
            mirror_copy_hours: self.params.mirror_copy_hours,
            pool_size: pool.len(),
            pool_seed: pool.seed(),
        };
        SimResult::new(echo, self.seed, self.records, self.ddf, self.tdf)
    }
}

/// One array over its mission. Builds a fresh context; use [`SimContext`]
/// with [`ArraySim`] to share it across many runs.
pub fn run_simulation(
    geometry: &ArrayGeometry,
    code: ErasureCode,
    pool: &SsdPool,
    usage_logs: &[UsageLog],
    params: &SimParams,
    seed: u64,
) -> Result<SimResult> {
    geometry.validate()?;
    let ctx = SimContext::new(pool, usage_logs, geometry.n_devices, params.mission)?;
    Ok(ArraySim::new(&ctx, code, *geometry, *params, seed)?.finish())
}
