//! Experiment grids: configuration, seed derivation, parallel fan-out and
//! report files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::erasure::ErasureCode;
use crate::error::{Error, Result};
use crate::failure_model::{
    default_profiles, generate_pool, load_profiles, PoolConfig, SsdModelProfile, SsdPool,
    DEFAULT_MISSION_HOURS,
};
use crate::report::{aggregate_results, emit_report, AggregateReport, ReportFormat};
use crate::sim::{ArrayGeometry, ArraySim, SimContext, SimParams, SimResult};
use crate::workload::{parse_usage_log, synthesize_usage_log, SynthWorkloadParams, UsageLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub codes: Vec<ErasureCode>,
    pub models: Vec<String>,
    pub stripe_kb: Vec<u64>,
    pub tts: Vec<f64>,
    pub ttr: Vec<f64>,
    pub mission_hours: f64,
    pub num_sims: usize,
    pub pool_size: usize,
    pub seed: u64,
    pub n_devices: usize,
    pub page_size: u64,
    pub pages_per_block: u64,
    pub blocks_per_device: u64,
    pub mirror_copy_hours: f64,
    /// Profile CSV; the shipped profiles when absent.
    pub profiles: Option<PathBuf>,
    /// Usage-log CSV; synthetic logs from `synth` when absent.
    pub usage_logs: Option<PathBuf>,
    pub synth: SynthWorkloadParams,
    /// Number of synthetic logs (array slots cycle through them).
    pub synth_logs: usize,
    pub out_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
    /// Worker threads; all available cores when absent.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let g = ArrayGeometry::default();
        ExperimentConfig {
            codes: vec![ErasureCode::Raid5],
            models: vec!["MLC-A".into()],
            stripe_kb: vec![g.stripe_size / 1024],
            tts: vec![10_000.0],
            ttr: vec![10.0],
            mission_hours: DEFAULT_MISSION_HOURS,
            num_sims: 1_000,
            pool_size: 10_000,
            seed: 1,
            n_devices: g.n_devices,
            page_size: g.page_size,
            pages_per_block: g.pages_per_block,
            blocks_per_device: g.blocks_per_device,
            mirror_copy_hours: 1.0,
            profiles: None,
            usage_logs: None,
            synth: SynthWorkloadParams::default(),
            synth_logs: g.n_devices,
            out_dir: PathBuf::from("out"),
            formats: vec![ReportFormat::Json, ReportFormat::Csv],
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, source: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("{source}: {}", e.to_string().trim_end())))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        // Relative input paths resolve against the config file.
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.profiles, &mut cfg.usage_logs]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let non_empty = |ok: bool, field: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::validation(field, "list must not be empty"))
            }
        };
        non_empty(!self.codes.is_empty(), "codes")?;
        non_empty(!self.models.is_empty(), "models")?;
        non_empty(!self.stripe_kb.is_empty(), "stripe_kb")?;
        non_empty(!self.tts.is_empty(), "tts")?;
        non_empty(!self.ttr.is_empty(), "ttr")?;
        non_empty(!self.formats.is_empty(), "formats")?;
        if self.num_sims < 1 {
            return Err(Error::validation("num_sims", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::validation("workers", "must be at least 1"));
        }
        if self.usage_logs.is_none() {
            self.synth.validate()?;
            if self.synth_logs < 1 {
                return Err(Error::validation("synth_logs", "must be at least 1"));
            }
        }
        for &kb in &self.stripe_kb {
            self.geometry(kb)?;
        }
        for &t in self.tts.iter().chain(&self.ttr) {
            SimParams::new(t, t, self.mission_hours).validate()?;
        }
        Ok(())
    }

    pub fn geometry(&self, stripe_kb: u64) -> Result<ArrayGeometry> {
        ArrayGeometry::new(
            self.n_devices,
            self.page_size,
            self.pages_per_block,
            self.blocks_per_device,
            stripe_kb * 1024,
        )
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for model in &self.models {
            for &stripe_kb in &self.stripe_kb {
                for &code in &self.codes {
                    for &tts in &self.tts {
                        for &ttr in &self.ttr {
                            out.push(GridPoint {
                                model: model.clone(),
                                code,
                                stripe_kb,
                                tts,
                                ttr,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn load_profiles(&self) -> Result<Vec<SsdModelProfile>> {
        match &self.profiles {
            Some(p) => load_profiles(p),
            None => Ok(default_profiles()),
        }
    }

    pub fn load_usage_logs(&self) -> Result<Vec<UsageLog>> {
        match &self.usage_logs {
            Some(p) => parse_usage_log(p),
            None => (0..self.synth_logs)
                .map(|i| {
                    synthesize_usage_log(
                        &self.synth,
                        i as u32,
                        derive_seed(self.seed, "usage-log", i as u64),
                    )
                })
                .collect(),
        }
    }

    pub fn profile(&self, model: &str) -> Result<SsdModelProfile> {
        self.load_profiles()?
            .into_iter()
            .find(|p| p.name == model)
            .ok_or_else(|| Error::Model {
                model: model.into(),
                source: Box::new(Error::Config("no such model".into())),
            })
    }

    pub fn build_pool(&self, profile: &SsdModelProfile) -> Result<SsdPool> {
        let cfg = PoolConfig::new(
            self.pool_size,
            self.blocks_per_device,
            derive_seed(self.seed, "pool", fnv1a(&profile.name)),
        );
        generate_pool(profile, &cfg).map_err(|e| match e {
            e @ Error::Model { .. } => e,
            e => Error::Model {
                model: profile.name.clone(),
                source: Box::new(e),
            },
        })
    }

    fn sim_params(&self, point: &GridPoint) -> SimParams {
        SimParams {
            tts: point.tts,
            ttr: point.ttr,
            mission: self.mission_hours,
            mirror_copy_hours: self.mirror_copy_hours,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub model: String,
    pub code: ErasureCode,
    pub stripe_kb: u64,
    pub tts: f64,
    pub ttr: f64,
}

impl GridPoint {
    /// Report id and file stem.
    pub fn id(&self) -> String {
        format!(
            "{}_{}_stripe{}k_tts{}_ttr{}",
            self.model, self.code, self.stripe_kb, self.tts, self.ttr
        )
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit seed from the master seed, a purpose tag and an index.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    splitmix(splitmix(master ^ fnv1a(tag)).wrapping_add(index))
}

/// Seed of simulation `index` for `model`. It deliberately ignores code,
/// stripe size and repair timings so that grid points of one model compare
/// the same fault histories.
pub fn sim_seed(master: u64, model: &str, index: u64) -> u64 {
    derive_seed(master, &format!("sim/{model}"), index)
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `num_sims` simulations of one grid point on a prepared context.
pub fn run_point(
    ctx: &SimContext<'_>,
    config: &ExperimentConfig,
    point: &GridPoint,
    workers: &rayon::ThreadPool,
) -> Result<Vec<SimResult>> {
    let geometry = config.geometry(point.stripe_kb)?;
    let params = config.sim_params(point);
    workers.install(|| {
        (0..config.num_sims as u64)
            .into_par_iter()
            .map(|i| {
                let seed = sim_seed(config.seed, &point.model, i);
                Ok(ArraySim::new(ctx, point.code, geometry, params, seed)?.finish())
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub point: GridPoint,
    pub outputs: Vec<PathBuf>,
    pub pool_seed: u64,
    pub first_sim_seed: u64,
    pub num_sims: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFailure {
    pub point: GridPoint,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub master_seed: u64,
    /// How every simulation seed is derived.
    pub seed_rule: String,
    pub config: ExperimentConfig,
    pub reports: Vec<ManifestEntry>,
    pub failures: Vec<ManifestFailure>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub reports: Vec<(GridPoint, AggregateReport)>,
    pub failures: Vec<(GridPoint, Error)>,
    pub manifest_path: PathBuf,
}

/// Runs every grid point, writing one report per point and format plus
/// `manifest.json`. A failing point is recorded and the rest still run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_progress(config, |_, _| {})
}

pub fn run_experiment_with_progress(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&GridPoint, &Result<AggregateReport>),
) -> Result<ExperimentOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let profiles = config.load_profiles()?;
    let logs = config.load_usage_logs()?;
    let workers = thread_pool(config.workers)?;

    let mut by_model: BTreeMap<&str, Vec<GridPoint>> = BTreeMap::new();
    let grid = config.grid();
    for p in &grid {
        by_model
            .entry(p.model.as_str())
            .or_default()
            .push(p.clone());
    }

    let mut done: BTreeMap<String, (AggregateReport, Vec<PathBuf>, u64)> = BTreeMap::new();
    let mut failed: BTreeMap<String, Error> = BTreeMap::new();
    for model in config.models.iter().map(String::as_str) {
        let Some(points) = by_model.remove(model) else {
            continue;
        };
        let pool = profiles
            .iter()
            .find(|p| p.name == model)
            .ok_or_else(|| Error::Model {
                model: model.into(),
                source: Box::new(Error::Config("no such model".into())),
            })
            .and_then(|p| config.build_pool(p));
        let pool = match pool {
            Ok(p) => p,
            Err(e) => {
                for p in points {
                    let msg = e.to_string();
                    progress(&p, &Err(Error::Config(msg.clone())));
                    failed.insert(p.id(), Error::Config(msg));
                }
                continue;
            }
        };
        let ctx = SimContext::new(&pool, &logs, config.n_devices, config.mission_hours);
        for p in points {
            let report = ctx
                .as_ref()
                .map_err(|e| Error::Config(e.to_string()))
                .and_then(|ctx| {
                    let results = run_point(ctx, config, &p, &workers)?;
                    aggregate_results(&p.id(), &results)
                });
            let report = report.and_then(|r| {
                let mut outputs = Vec::new();
                for &f in &config.formats {
                    let path = config.out_dir.join(format!("{}.{}", p.id(), f.extension()));
                    emit_report(&r, f, &path)?;
                    outputs.push(path);
                }
                Ok((r, outputs))
            });
            match report {
                Ok((r, outputs)) => {
                    progress(&p, &Ok(r.clone()));
                    done.insert(p.id(), (r, outputs, pool.seed()));
                }
                Err(e) => {
                    progress(&p, &Err(Error::Config(e.to_string())));
                    failed.insert(p.id(), e);
                }
            }
        }
    }

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut manifest = Manifest {
        schema_version: crate::report::SCHEMA_VERSION,
        master_seed: config.seed,
        seed_rule: "sim seed = derive_seed(master_seed, \"sim/<model>\", sim_index); pool seed = \
                    derive_seed(master_seed, \"pool\", fnv1a(<model>))"
            .into(),
        config: config.clone(),
        reports: Vec::new(),
        failures: Vec::new(),
    };
    for p in grid {
        if let Some((r, outputs, pool_seed)) = done.remove(&p.id()) {
            manifest.reports.push(ManifestEntry {
                point: p.clone(),
                outputs: outputs
                    .iter()
                    .map(|o| PathBuf::from(o.file_name().unwrap()))
                    .collect(),
                pool_seed,
                first_sim_seed: sim_seed(config.seed, &p.model, 0),
                num_sims: config.num_sims,
            });
            reports.push((p, r));
        } else if let Some(e) = failed.remove(&p.id()) {
            manifest.failures.push(ManifestFailure {
                point: p.clone(),
                error: e.to_string(),
            });
            failures.push((p, e));
        }
    }
    let manifest_path = config.out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(ExperimentOutcome {
        reports,
        failures,
        manifest_path,
    })
}
