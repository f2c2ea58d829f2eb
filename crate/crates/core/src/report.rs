//! Flat check records, serialized as JSON arrays or CSV rows.

use serde::{Deserialize, Serialize};

use crate::delta::OptimizerOptions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizerMeta {
    pub restarts: usize,
    pub seed: u64,
}

impl From<&OptimizerOptions> for OptimizerMeta {
    fn from(o: &OptimizerOptions) -> Self {
        OptimizerMeta {
            restarts: o.restarts,
            seed: o.seed,
        }
    }
}

/// One evaluated check; `passed` is always `margin >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub check: String,
    pub name: String,
    pub point: Vec<f64>,
    pub tuple: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
    pub tolerance: f64,
    pub certified: bool,
    pub optimizer: OptimizerMeta,
    pub timestamp: Option<String>,
}

impl ReportRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        check: impl Into<String>,
        name: impl Into<String>,
        point: &[f64],
        tuple: Option<String>,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
        certified: bool,
        optimizer: OptimizerMeta,
    ) -> Self {
        ReportRecord {
            check: check.into(),
            name: name.into(),
            point: point.to_vec(),
            tuple,
            lhs,
            rhs,
            margin,
            passed: margin >= -tolerance,
            tolerance,
            certified,
            optimizer,
            timestamp: None,
        }
    }

    pub fn stamped(mut self, timestamp: Option<&str>) -> Self {
        self.timestamp = timestamp.map(str::to_string);
        self
    }

    fn consistent(&self) -> bool {
        self.passed == (self.margin >= -self.tolerance)
    }
}

pub fn now_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn to_json(records: &[ReportRecord]) -> Result<String> {
    for r in records {
        for v in [r.lhs, r.rhs, r.margin, r.tolerance].iter().chain(&r.point) {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("non-finite value in `{}` record", r.check)));
            }
        }
    }
    serde_json::to_string_pretty(records).map_err(|e| Error::Invalid(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Vec<ReportRecord>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let records: Vec<ReportRecord> = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: format!("$.{}", e.path()),
        message: e.into_inner().to_string(),
    })?;
    if let Some((i, _)) = records.iter().enumerate().find(|(_, r)| !r.consistent()) {
        return Err(Error::Schema {
            path: format!("$[{i}].passed"),
            message: "disagrees with margin and tolerance".into(),
        });
    }
    Ok(records)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    name: &'a str,
    point: String,
    tuple: &'a str,
    lhs: f64,
    rhs: f64,
    margin: f64,
    passed: bool,
    tolerance: f64,
    certified: bool,
    restarts: usize,
    seed: u64,
    timestamp: &'a str,
}

/// One row per record; the point is a `;`-separated list.
pub fn to_csv(records: &[ReportRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        let point = r.point.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        w.serialize(CsvRow {
            check: &r.check,
            name: &r.name,
            point,
            tuple: r.tuple.as_deref().unwrap_or(""),
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            passed: r.passed,
            tolerance: r.tolerance,
            certified: r.certified,
            restarts: r.optimizer.restarts,
            seed: r.optimizer.seed,
            timestamp: r.timestamp.as_deref().unwrap_or(""),
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ReportRecord> {
        let meta = OptimizerMeta { restarts: 32, seed: 7 };
        vec![
            ReportRecord::new("chen", "sphere:3", &[0.1, 0.2, 1.0 / 3.0], Some("(2)".into()), 2.0, 2.25, 0.25, 1e-6, true, meta),
            ReportRecord::new("chen", "x", &[], None, 1.0, 0.5, -0.5, 1e-6, false, meta).stamped(Some("2026-01-01T00:00:00.000Z")),
        ]
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let recs = sample();
        assert!(recs[0].passed && !recs[1].passed);
        let text = to_json(&recs).unwrap();
        assert_eq!(from_json(&text).unwrap(), recs);
        let tampered = text.replacen("\"passed\": true", "\"passed\": false", 1);
        assert!(from_json(&tampered).is_err());
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let text = to_csv(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("check,name,point,tuple,lhs"));
        assert!(lines[1].contains("0.1;0.2;"));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut recs = sample();
        recs[0].lhs = f64::NAN;
        assert!(to_json(&recs).is_err());
    }
}
