use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ssdrel::erasure::{encode_xor_count, erf, update_penalty, ErasureCode, UpdateGranularity};
use ssdrel::experiment::{run_experiment_with_progress, ExperimentConfig};
use ssdrel::failure_model::{generate_pool, validate_pool, PoolConfig};
use ssdrel::workload::{synthesize_usage_log, write_usage_csv, SynthWorkloadParams};

#[derive(Parser)]
#[command(
    name = "ssdrel",
    version,
    about = "Monte Carlo reliability simulator for erasure-coded SSD arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write reports plus a manifest.
    Run(RunArgs),
    /// Generate a drive pool per model and print its field statistics.
    ValidatePool(PoolArgs),
    /// Storage overhead, encoding and update cost of each code.
    Cost(CostArgs),
    /// Write a synthetic usage log CSV.
    SynthLog(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    code: Vec<ErasureCode>,
    #[arg(long, value_delimiter = ',')]
    model: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    tts: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    ttr: Vec<f64>,
    #[arg(long = "stripe-kb", value_delimiter = ',')]
    stripe_kb: Vec<u64>,
    #[arg(long)]
    sims: Option<usize>,
    #[arg(long = "mission-hours")]
    mission_hours: Option<f64>,
    #[arg(long = "pool-size")]
    pool_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct PoolArgs {
    /// Models to generate; all profiles when omitted.
    #[arg(long, value_delimiter = ',')]
    model: Vec<String>,
    #[arg(long = "pool-size", default_value_t = 10_000)]
    pool_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Profile CSV; the shipped profiles when omitted.
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CostArgs {
    /// Data devices per stripe.
    #[arg(long, default_value_t = 8)]
    n: u64,
    /// Rows (symbols per chunk) per stripe.
    #[arg(long, default_value_t = 4)]
    r: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    devices: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Log length in hours.
    #[arg(long)]
    hours: Option<u64>,
    /// Bytes written per hour.
    #[arg(long = "write-rate")]
    write_rate: Option<f64>,
    /// Bytes read per hour.
    #[arg(long = "read-rate")]
    read_rate: Option<f64>,
    /// Device capacity in bytes.
    #[arg(long)]
    capacity: Option<f64>,
    #[arg(long = "write-amplification")]
    write_amplification: Option<f64>,
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if !args.code.is_empty() {
        cfg.codes = args.code;
    }
    if !args.model.is_empty() {
        cfg.models = args.model;
    }
    if !args.tts.is_empty() {
        cfg.tts = args.tts;
    }
    if !args.ttr.is_empty() {
        cfg.ttr = args.ttr;
    }
    if !args.stripe_kb.is_empty() {
        cfg.stripe_kb = args.stripe_kb;
    }
    cfg.num_sims = args.sims.unwrap_or(cfg.num_sims);
    cfg.mission_hours = args.mission_hours.unwrap_or(cfg.mission_hours);
    cfg.pool_size = args.pool_size.unwrap_or(cfg.pool_size);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.out_dir = args.out.unwrap_or(cfg.out_dir);
    cfg.workers = args.workers.or(cfg.workers);

    let started = Instant::now();
    let mut last = Instant::now();
    let outcome = run_experiment_with_progress(&cfg, |point, result| {
        let secs = last.elapsed().as_secs_f64();
        last = Instant::now();
        match result {
            Ok(r) => eprintln!(
                "{}: mean lost stripes {:.3} over {} sims ({secs:.1} s)",
                point.id(),
                r.mean_stripes_lost,
                r.num_sims
            ),
            Err(e) => eprintln!("{}: FAILED: {e}", point.id()),
        }
    })?;
    eprintln!(
        "{} report(s), {} failure(s), manifest {} ({:.1} s)",
        outcome.reports.len(),
        outcome.failures.len(),
        outcome.manifest_path.display(),
        started.elapsed().as_secs_f64()
    );
    if outcome.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for (p, e) in &outcome.failures {
            eprintln!("error: {}: {e}", p.id());
        }
        Ok(ExitCode::FAILURE)
    }
}

fn validate(args: PoolArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig {
        profiles: args.profiles,
        ..ExperimentConfig::default()
    };
    let profiles = cfg.load_profiles()?;
    let selected: Vec<_> = if args.model.is_empty() {
        profiles
    } else {
        args.model
            .iter()
            .map(|m| {
                profiles
                    .iter()
                    .find(|p| &p.name == m)
                    .cloned()
                    .with_context(|| format!("model {m}: no such profile"))
            })
            .collect::<Result<_>>()?
    };
    let mut reports = Vec::new();
    for p in &selected {
        let pool = generate_pool(
            p,
            &PoolConfig::new(args.pool_size, cfg.blocks_per_device, args.seed),
        )?;
        reports.push(validate_pool(&pool));
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        println!("model,pool_size,drives_with_bb,drives_with_bc,bc_with_gt5pct_bb,bc_gt5pct_ratio,median_bb,mean_bb,cond_median_2,cond_median_3,cond_median_4,cond_median_5");
        for r in &reports {
            let cond: Vec<String> = r
                .conditional_medians
                .iter()
                .map(|(_, m)| format!("{m}"))
                .collect();
            println!(
                "{},{},{},{},{},{:.6},{},{:.6},{}",
                r.model,
                r.pool_size,
                r.drives_with_bb,
                r.drives_with_bc,
                r.bc_with_gt5pct_bb,
                r.bc_gt5pct_ratio,
                r.median_bb,
                r.mean_bb,
                cond.join(",")
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cost(args: CostArgs) -> Result<ExitCode> {
    if args.n < 2 || args.r < 1 {
        bail!("need n ≥ 2 and r ≥ 1");
    }
    println!("code,erf,encode_xors,sector_writes,sector_reads,row_writes,row_reads,stripe_writes,stripe_reads");
    for code in ErasureCode::ALL {
        let p: Vec<String> = UpdateGranularity::ALL
            .iter()
            .map(|&g| {
                let pen = update_penalty(code, args.n, args.r, g);
                format!("{},{}", pen.writes, pen.reads)
            })
            .collect();
        println!(
            "{code},{:.6},{},{}",
            erf(code, args.n, args.r),
            encode_xor_count(code, args.n, args.r),
            p.join(",")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(args: SynthArgs) -> Result<ExitCode> {
    let mut params = SynthWorkloadParams::default();
    params.duration = args.hours.unwrap_or(params.duration);
    params.write_rate = args.write_rate.unwrap_or(params.write_rate);
    params.read_rate = args.read_rate.unwrap_or(params.read_rate);
    params.device_capacity = args.capacity.unwrap_or(params.device_capacity);
    params.write_amplification = args
        .write_amplification
        .unwrap_or(params.write_amplification);
    let logs = (0..args.devices)
        .map(|d| synthesize_usage_log(&params, d, args.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let file = std::fs::File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_usage_csv(&logs, std::io::BufWriter::new(file))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::ValidatePool(a) => validate(a),
        Command::Cost(a) => cost(a),
        Command::SynthLog(a) => synth(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
