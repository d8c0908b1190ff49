//! CSV row types and atomic artifact I/O.

use std::io::Write;
use std::path::Path;

use polarmem::EstimateWithCI;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub use polarmem::ratebounds::TrendRecord;

pub const METRICS_CSV: &str = "metrics.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const AVERAGE_CSV: &str = "average.csv";
pub const TREND_CSV: &str = "trend.csv";
pub const LOWER_TREND_CSV: &str = "trend_lower.csv";
pub const PROCESSES_CSV: &str = "processes.csv";
pub const THEOREM4_CSV: &str = "theorem4.csv";
pub const BER_CSV: &str = "ber.csv";
pub const FIG3_CSV: &str = "fig3.csv";
pub const FIG4_CSV: &str = "fig4.csv";
pub const SUMMARY_JSON: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub quantity: String,
    pub model_id: String,
    pub params_hash: String,
    pub value: f64,
    pub stderr: f64,
    pub method: String,
    pub nodes: usize,
}

impl MetricRow {
    pub fn new(quantity: &str, model_id: &str, params_hash: &str, e: &EstimateWithCI) -> Self {
        Self {
            quantity: quantity.into(),
            model_id: model_id.into(),
            params_hash: params_hash.into(),
            value: e.value,
            stderr: e.stderr,
            method: e.method.as_str().into(),
            nodes: e.samples,
        }
    }
}

/// Per-index subchannel metrics; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "i")]
    pub index: usize,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "Z_stderr")]
    pub z_stderr: f64,
    #[serde(rename = "I")]
    pub mi: f64,
    #[serde(rename = "I_stderr")]
    pub mi_stderr: f64,
    pub method: String,
}

/// Block-averaged mutual information at one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    #[serde(rename = "L")]
    pub len: usize,
    pub mean_mi: f64,
    pub stderr: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Row {
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "i")]
    pub index: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessRow {
    pub l: u32,
    pub upper_fraction: f64,
    pub upper_stderr: f64,
    pub lower_fraction: f64,
    pub lower_stderr: f64,
    pub mean_upper: f64,
    pub mean_lower: f64,
    pub upper_log_threshold: f64,
    pub lower_log_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    #[serde(rename = "L")]
    pub len: usize,
    pub rate: f64,
    pub blocks: usize,
    pub decoder: String,
    pub info_bits: usize,
    pub ber: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub amplitude: f64,
    pub mi_w: f64,
    pub mi_children_sum: f64,
    pub gap: f64,
    pub noise_minus_output: f64,
    pub output_pair_mi: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig4Row {
    pub t0: f64,
    pub genie_z: f64,
    pub stderr: f64,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::artifact(path, format!("{other:?}")),
    })?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::artifact(path, e.to_string()))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.tmp"));
    let io = |e| CliError::io(path, e);
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_rows_round_trip_with_one_based_header() {
        let rows = vec![ReportRow {
            len: 4,
            index: 1,
            z: 0.9147821290495075,
            z_stderr: 0.0,
            mi: 0.12113525261069619,
            mi_stderr: 0.0,
            method: "enumeration".into(),
        }];
        let bytes = to_csv(&rows).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("L,i,Z,Z_stderr,I,I_stderr,method\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(REPORT_CSV);
        write_atomic(&path, &bytes).unwrap();
        assert_eq!(read_csv::<ReportRow>(&path).unwrap(), rows);
    }

    #[test]
    fn trend_header_matches_schema() {
        let rows = vec![TrendRecord {
            len: 16,
            threshold: 0.5,
            fraction: 0.25,
            stderr: 0.1,
            target: 0.4,
        }];
        let text = String::from_utf8(to_csv(&rows).unwrap()).unwrap();
        assert!(text.starts_with("L,threshold,fraction,stderr,target\n"));
    }

    #[test]
    fn metric_header_matches_schema() {
        let row = MetricRow::new("z", "gaussian", "0123456789abcdef", &EstimateWithCI::enumeration(0.5, 4));
        let text = String::from_utf8(to_csv(&[row]).unwrap()).unwrap();
        assert!(text.starts_with("quantity,model_id,params_hash,value,stderr,method,nodes\n"));
    }
}
