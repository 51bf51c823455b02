//! Aggregation of simulation results and report serialization.
//!
//! Everything in a report is derived from integer tallies, so merging partial
//! reports in any order gives identical output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{DataLossRecord, ScopeTotals, SimConfigEcho, SimResult, Tally};

pub const SCHEMA_VERSION: u32 = 1;
pub const LEGEND: &str =
    "BC = bad chip (whole device, a.k.a. bad disk); BB = bad block; BS = bad symbol (page)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub label: String,
    pub records: u64,
    pub stripes_lost: u64,
    /// Share of all lost stripes.
    pub fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BreakdownTable {
    pub rows: Vec<BreakdownRow>,
}

impl BreakdownTable {
    /// Rows by descending stripes lost, ties by label.
    pub fn from_tallies(tallies: &BTreeMap<String, Tally>) -> Self {
        let total: u64 = tallies.values().map(|t| t.stripes_lost).sum();
        let mut rows: Vec<BreakdownRow> = tallies
            .iter()
            .map(|(label, t)| BreakdownRow {
                label: label.clone(),
                records: t.records,
                stripes_lost: t.stripes_lost,
                fraction: if total > 0 {
                    t.stripes_lost as f64 / total as f64
                } else {
                    0.0
                },
            })
            .collect();
        rows.sort_by(|a, b| {
            b.stripes_lost
                .cmp(&a.stripes_lost)
                .then_with(|| a.label.cmp(&b.label))
        });
        BreakdownTable { rows }
    }

    pub fn tallies(&self) -> BTreeMap<String, Tally> {
        self.rows
            .iter()
            .map(|r| {
                (
                    r.label.clone(),
                    Tally {
                        records: r.records,
                        stripes_lost: r.stripes_lost,
                    },
                )
            })
            .collect()
    }

    pub fn fraction(&self, label: &str) -> f64 {
        self.rows
            .iter()
            .find(|r| r.label == label)
            .map_or(0.0, |r| r.fraction)
    }

    pub fn stripes_lost(&self) -> u64 {
        self.rows.iter().map(|r| r.stripes_lost).sum()
    }

    /// Folds rows under `min_fraction` into one `other (<x%)` row, for display.
    pub fn with_minor_bucket(&self, min_fraction: f64) -> Self {
        let (major, minor): (Vec<_>, Vec<_>) = self
            .rows
            .iter()
            .cloned()
            .partition(|r| r.fraction >= min_fraction);
        let mut rows = major;
        if !minor.is_empty() {
            rows.push(BreakdownRow {
                label: format!("other (<{}%)", min_fraction * 100.0),
                records: minor.iter().map(|r| r.records).sum(),
                stripes_lost: minor.iter().map(|r| r.stripes_lost).sum(),
                fraction: minor.iter().map(|r| r.fraction).sum(),
            });
        }
        BreakdownTable { rows }
    }
}

/// Groups records by canonical cause label, weighted by stripes lost.
pub fn loss_breakdown(records: &[DataLossRecord]) -> BreakdownTable {
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    for r in records {
        tallies.entry(r.cause.label()).or_default().add(Tally {
            records: 1,
            stripes_lost: r.stripes_lost,
        });
    }
    BreakdownTable::from_tallies(&tallies)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTotals {
    pub seed: u64,
    pub stripes_lost: u64,
    pub records: u64,
    pub ddf: u64,
    pub tdf: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub schema_version: u32,
    pub legend: String,
    pub experiment_id: String,
    pub config: SimConfigEcho,
    pub num_sims: u64,
    pub total_stripes_lost: u64,
    pub mean_stripes_lost: f64,
    pub median_stripes_lost: f64,
    pub stddev_stripes_lost: f64,
    pub scopes: ScopeTotals,
    pub breakdown: BreakdownTable,
    pub ddf: u64,
    pub tdf: u64,
    /// Sorted by seed.
    pub per_seed: Vec<SeedTotals>,
}

impl AggregateReport {
    fn build(
        experiment_id: String,
        config: SimConfigEcho,
        mut per_seed: Vec<SeedTotals>,
        scopes: ScopeTotals,
        causes: &BTreeMap<String, Tally>,
    ) -> Self {
        per_seed.sort_by_key(|s| (s.seed, s.stripes_lost, s.records, s.ddf, s.tdf));
        let n = per_seed.len();
        let total: u64 = per_seed.iter().map(|s| s.stripes_lost).sum();
        let mean = if n > 0 { total as f64 / n as f64 } else { 0.0 };
        let mut sorted: Vec<u64> = per_seed.iter().map(|s| s.stripes_lost).collect();
        sorted.sort_unstable();
        let median = match n {
            0 => 0.0,
            _ if n % 2 == 1 => sorted[n / 2] as f64,
            _ => (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0,
        };
        let stddev = if n > 1 {
            (sorted
                .iter()
                .map(|&x| (x as f64 - mean).powi(2))
                .sum::<f64>()
                / (n - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        AggregateReport {
            schema_version: SCHEMA_VERSION,
            legend: LEGEND.to_string(),
            experiment_id,
            config,
            num_sims: n as u64,
            total_stripes_lost: total,
            mean_stripes_lost: mean,
            median_stripes_lost: median,
            stddev_stripes_lost: stddev,
            scopes,
            breakdown: BreakdownTable::from_tallies(causes),
            ddf: per_seed.iter().map(|s| s.ddf).sum(),
            tdf: per_seed.iter().map(|s| s.tdf).sum(),
            per_seed,
        }
    }
}

/// Merges results of one configuration.
pub fn aggregate_results(experiment_id: &str, results: &[SimResult]) -> Result<AggregateReport> {
    let first = results
        .first()
        .ok_or_else(|| Error::Config("no simulation results to aggregate".into()))?;
    let mut scopes = ScopeTotals::default();
    let mut causes: BTreeMap<String, Tally> = BTreeMap::new();
    let mut per_seed = Vec::with_capacity(results.len());
    for r in results {
        if r.config != first.config {
            return Err(Error::Config(format!(
                "cannot aggregate results of different configurations ({:?} vs {:?})",
                first.config, r.config
            )));
        }
        scopes.add(&r.totals);
        for (label, t) in &r.causes {
            causes.entry(label.clone()).or_default().add(*t);
        }
        per_seed.push(SeedTotals {
            seed: r.seed,
            stripes_lost: r.stripes_lost(),
            records: r.totals.records(),
            ddf: r.ddf,
            tdf: r.tdf,
        });
    }
    Ok(AggregateReport::build(
        experiment_id.to_string(),
        first.config.clone(),
        per_seed,
        scopes,
        &causes,
    ))
}

/// Combines two partial reports of the same configuration.
pub fn merge(a: &AggregateReport, b: &AggregateReport) -> Result<AggregateReport> {
    if a.config != b.config || a.experiment_id != b.experiment_id {
        return Err(Error::Config(format!(
            "cannot merge reports {} and {}",
            a.experiment_id, b.experiment_id
        )));
    }
    let mut scopes = a.scopes;
    scopes.add(&b.scopes);
    let mut causes = a.breakdown.tallies();
    for (label, t) in b.breakdown.tallies() {
        causes.entry(label).or_default().add(t);
    }
    let per_seed = a.per_seed.iter().chain(&b.per_seed).copied().collect();
    Ok(AggregateReport::build(
        a.experiment_id.clone(),
        a.config.clone(),
        per_seed,
        scopes,
        &causes,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

pub fn report_to_json(report: &AggregateReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Summary block (`key,value`), a blank line, the breakdown block
/// (`cause,records,stripes_lost,fraction`), a blank line, and the per-seed
/// block (`seed,stripes_lost,records,ddf,tdf`).
pub fn report_to_csv(report: &AggregateReport) -> String {
    let c = &report.config;
    let summary: Vec<(&str, String)> = vec![
        ("schema_version", report.schema_version.to_string()),
        ("legend", report.legend.clone()),
        ("experiment_id", report.experiment_id.clone()),
        ("model", c.model.clone()),
        ("code", c.code.to_string()),
        ("n_devices", c.n_devices.to_string()),
        ("stripe_size", c.stripe_size.to_string()),
        ("tts", c.tts.to_string()),
        ("ttr", c.ttr.to_string()),
        ("mission_hours", c.mission_hours.to_string()),
        ("pool_size", c.pool_size.to_string()),
        ("pool_seed", c.pool_seed.to_string()),
        ("num_sims", report.num_sims.to_string()),
        ("total_stripes_lost", report.total_stripes_lost.to_string()),
        (
            "mean_stripes_lost",
            format!("{:.6}", report.mean_stripes_lost),
        ),
        (
            "median_stripes_lost",
            format!("{:.6}", report.median_stripes_lost),
        ),
        (
            "stddev_stripes_lost",
            format!("{:.6}", report.stddev_stripes_lost),
        ),
        ("adl_records", report.scopes.adl.records.to_string()),
        ("adl_stripes", report.scopes.adl.stripes_lost.to_string()),
        ("bdl_records", report.scopes.bdl.records.to_string()),
        ("bdl_stripes", report.scopes.bdl.stripes_lost.to_string()),
        ("sdl_records", report.scopes.sdl.records.to_string()),
        ("sdl_stripes", report.scopes.sdl.stripes_lost.to_string()),
        ("ddf", report.ddf.to_string()),
        ("tdf", report.tdf.to_string()),
    ];
    // csv quotes an empty record, so blocks are written separately and joined by blank lines
    let block = |rows: Vec<Vec<String>>| {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    };
    let strs = |fields: &[&str]| fields.iter().map(|f| f.to_string()).collect::<Vec<_>>();
    let summary_rows = std::iter::once(strs(&["key", "value"]))
        .chain(summary.into_iter().map(|(k, v)| vec![k.to_string(), v]))
        .collect();
    let cause_rows = std::iter::once(strs(&["cause", "records", "stripes_lost", "fraction"]))
        .chain(report.breakdown.rows.iter().map(|r| {
            vec![
                r.label.clone(),
                r.records.to_string(),
                r.stripes_lost.to_string(),
                format!("{:.6}", r.fraction),
            ]
        }))
        .collect();
    let seed_rows = std::iter::once(strs(&["seed", "stripes_lost", "records", "ddf", "tdf"]))
        .chain(report.per_seed.iter().map(|s| {
            vec![
                s.seed.to_string(),
                s.stripes_lost.to_string(),
                s.records.to_string(),
                s.ddf.to_string(),
                s.tdf.to_string(),
            ]
        }))
        .collect();
    [block(summary_rows), block(cause_rows), block(seed_rows)].join("\n")
}

pub fn emit_report(report: &AggregateReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Csv => report_to_csv(report),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json_report(path: &Path) -> Result<AggregateReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}
