use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rber::RberCurve;
use super::DEFAULT_MISSION_HOURS;
use crate::error::{csv_error, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Technology {
    #[serde(rename = "SLC")]
    Slc,
    #[serde(rename = "MLC")]
    Mlc,
}

impl Technology {
    pub fn default_wol(self) -> u64 {
        match self {
            Technology::Mlc => 3_000,
            Technology::Slc => 100_000,
        }
    }

    /// Prior bad blocks after which a drive's bad-block rate escalates.
    pub fn default_escalation_threshold(self) -> u32 {
        match self {
            Technology::Mlc => 2,
            Technology::Slc => 4,
        }
    }

    /// Field medians of total mission bad blocks among drives that already
    /// saw 2, 3, 4 and 5 bad blocks.
    pub fn conditional_median_targets(self) -> [f64; 4] {
        match self {
            Technology::Mlc => [143.0, 155.0, 159.0, 183.0],
            Technology::Slc => [5.0, 20.0, 43.0, 77.0],
        }
    }

    /// Jump in bad-block rate once the threshold is crossed, read off the
    /// conditional medians: a drive at the threshold ends its mission with
    /// `median / threshold` times as many bad blocks as it had.
    pub fn default_escalation_factor(self) -> f64 {
        let t = self.default_escalation_threshold();
        (self.conditional_median_targets()[t as usize - 2] / t as f64).round()
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technology::Slc => "SLC",
            Technology::Mlc => "MLC",
        })
    }
}

impl FromStr for Technology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SLC" => Ok(Technology::Slc),
            "MLC" => Ok(Technology::Mlc),
            other => Err(Error::validation(
                "technology",
                format!("expected SLC or MLC, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsdModelProfile {
    pub name: String,
    pub technology: Technology,
    pub pct_drives_bad_chip: f64,
    pub pct_drives_bad_block: f64,
    /// Over drives with at least one mission bad block.
    pub median_bb: f64,
    pub mean_bb: f64,
    pub factory_bb_mean: f64,
    pub factory_bb_std: f64,
    pub rber_curve: RberCurve,
    pub wol: u64,
    pub bb_escalation_threshold: u32,
    pub bb_escalation_factor: f64,
    pub conditional_median_targets: [f64; 4],
    pub mission_hours_basis: f64,
}

impl SsdModelProfile {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::validation(field, msg))
            }
        };
        for (field, v) in [
            ("pct_bad_chip", self.pct_drives_bad_chip),
            ("pct_bad_block", self.pct_drives_bad_block),
        ] {
            check(
                (0.0..=1.0).contains(&v),
                field,
                format!("{v} is not a fraction in [0, 1]"),
            )?;
        }
        for (field, v) in [
            ("median_bb", self.median_bb),
            ("mean_bb", self.mean_bb),
            ("factory_bb_mean", self.factory_bb_mean),
            ("factory_bb_std", self.factory_bb_std),
        ] {
            check(
                v >= 0.0 && v.is_finite(),
                field,
                format!("{v} must be a non-negative count"),
            )?;
        }
        check(self.wol > 0, "wol", "must be positive".into())?;
        check(
            self.bb_escalation_threshold >= 1,
            "bb_escalation_threshold",
            "must be at least 1".into(),
        )?;
        check(
            self.bb_escalation_factor >= 1.0 && self.bb_escalation_factor.is_finite(),
            "bb_escalation_factor",
            format!("{} must be ≥ 1", self.bb_escalation_factor),
        )?;
        check(
            self.mission_hours_basis > 0.0 && self.mission_hours_basis.is_finite(),
            "mission_hours_basis",
            "must be positive".into(),
        )?;
        check(
            self.conditional_median_targets.iter().all(|&m| m >= 1.0),
            "conditional_median_targets",
            "must be positive counts".into(),
        )
    }
}

#[derive(Deserialize)]
struct ProfileRow {
    name: String,
    technology: String,
    pct_bad_chip: f64,
    pct_bad_block: f64,
    median_bb: f64,
    mean_bb: f64,
    factory_bb_mean: f64,
    factory_bb_std: f64,
    wol: Option<u64>,
    bb_escalation_threshold: Option<u32>,
    bb_escalation_factor: Option<f64>,
    rber_curve_path: String,
}

/// Parses a profile CSV. Curve paths are handed to `curve` for resolution;
/// blank `wol` / escalation columns fall back to technology defaults.
pub fn parse_profiles<R: Read>(
    reader: R,
    source: &str,
    mut curve: impl FnMut(&str) -> Result<RberCurve>,
) -> Result<Vec<SsdModelProfile>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<ProfileRow>() {
        let row = rec.map_err(|e| csv_error(source, &e))?;
        let name = row.name.clone();
        let in_model = |e: Error| Error::Model {
            model: name.clone(),
            source: Box::new(e),
        };
        let technology: Technology = row.technology.parse().map_err(in_model)?;
        let rber_curve = curve(&row.rber_curve_path).map_err(in_model)?;
        let profile = SsdModelProfile {
            name: row.name,
            technology,
            pct_drives_bad_chip: row.pct_bad_chip,
            pct_drives_bad_block: row.pct_bad_block,
            median_bb: row.median_bb,
            mean_bb: row.mean_bb,
            factory_bb_mean: row.factory_bb_mean,
            factory_bb_std: row.factory_bb_std,
            rber_curve,
            wol: row.wol.unwrap_or(technology.default_wol()),
            bb_escalation_threshold: row
                .bb_escalation_threshold
                .unwrap_or(technology.default_escalation_threshold()),
            bb_escalation_factor: row
                .bb_escalation_factor
                .unwrap_or(technology.default_escalation_factor()),
            conditional_median_targets: technology.conditional_median_targets(),
            mission_hours_basis: DEFAULT_MISSION_HOURS,
        };
        profile.validate().map_err(in_model)?;
        out.push(profile);
    }
    Ok(out)
}

/// Loads a profile CSV; curve paths resolve relative to the CSV's directory.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<SsdModelProfile>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    parse_profiles(file, &path.display().to_string(), |rel| {
        let p = dir.join(rel);
        let f = std::fs::File::open(&p).map_err(|e| Error::io(&p, e))?;
        RberCurve::from_csv(f, &p.display().to_string())
    })
}

const DEFAULT_PROFILES: &str = include_str!("../../data/profiles.csv");
const MLC_CURVE: &str = include_str!("../../data/rber_mlc_synthetic.csv");
const SLC_CURVE: &str = include_str!("../../data/rber_slc_synthetic.csv");

/// The six shipped models with their synthetic RBER curves, compiled in.
pub fn default_profiles() -> Vec<SsdModelProfile> {
    parse_profiles(DEFAULT_PROFILES.as_bytes(), "profiles.csv", |rel| {
        let text = match rel {
            "rber_mlc_synthetic.csv" => MLC_CURVE,
            "rber_slc_synthetic.csv" => SLC_CURVE,
            other => return Err(Error::Config(format!("no embedded curve {other}"))),
        };
        RberCurve::from_csv(text.as_bytes(), rel)
    })
    .expect("embedded profiles are valid")
}
