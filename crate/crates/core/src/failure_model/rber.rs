use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{csv_error, Error, Result};

/// Raw bit error rate as a function of program/erase cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RberCurve {
    points: Vec<(u64, f64)>,
}

impl RberCurve {
    pub fn new(points: Vec<(u64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::validation(
                "rber_curve",
                "RberCurve requires ≥2 points",
            ));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::validation(
                    "rber_curve",
                    format!(
                        "pe_cycles must be strictly increasing ({} then {})",
                        w[0].0, w[1].0
                    ),
                ));
            }
        }
        if let Some(&(pe, r)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
            return Err(Error::validation(
                "rber_curve",
                format!("rber at {pe} P/E must be positive, got {r}"),
            ));
        }
        Ok(RberCurve { points })
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    /// Reads a `pe_cycles,rber` CSV; `source` names the input in errors.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            pe_cycles: u64,
            rber: f64,
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for rec in rdr.deserialize::<Row>() {
            let row = rec.map_err(|e| csv_error(source, &e))?;
            points.push((row.pe_cycles, row.rber));
        }
        RberCurve::new(points)
    }
}

/// Piecewise-linear in P/E, clamped to the end points.
pub fn rber_at(curve: &RberCurve, pe_cycles: u64) -> f64 {
    let pts = &curve.points;
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if pe_cycles <= first.0 {
        return first.1;
    }
    if pe_cycles >= last.0 {
        return last.1;
    }
    let i = pts.partition_point(|p| p.0 <= pe_cycles);
    let (x0, y0) = pts[i - 1];
    let (x1, y1) = pts[i];
    y0 + (y1 - y0) * (pe_cycles - x0) as f64 / (x1 - x0) as f64
}

/// Bad-symbol arrivals per hour for a device reading/writing `bits_accessed`
/// bits in that hour.
pub fn bad_symbol_rate(rber: f64, bits_accessed: f64) -> f64 {
    rber * bits_accessed
}
