//! CSV records, the JSON sidecar and tidy summaries for plotting.

use std::path::Path;

use serde::Serialize;

use crate::experiment::{ExperimentSpec, RunRecord};
use crate::{io_err, LabError, Result};

/// Writes `records` with a header row in [`RunRecord`] field order.
pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let csv_err = |source| LabError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let csv_err = |source| LabError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec_hash: String,
    spec: &'a ExperimentSpec,
    crate_version: &'static str,
    records: usize,
}

/// Full configuration next to a CSV file.
pub fn write_sidecar(path: &Path, spec: &ExperimentSpec, records: usize) -> Result<()> {
    let sidecar = Sidecar {
        spec_hash: spec.hash(),
        spec,
        crate_version: env!("CARGO_PKG_VERSION"),
        records,
    };
    let text = serde_json::to_string_pretty(&sidecar).map_err(|source| LabError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text).map_err(io_err(path))
}

/// One row of the long-format summary.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SummaryRow {
    pub spec_hash: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub metric: String,
    pub statistic: String,
    pub value: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Mean and median of the headline metrics per spec, skipping failed runs.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|(h, _)| *h == r.spec_hash) {
            Some((_, g)) => g.push(r),
            None => groups.push((r.spec_hash.clone(), vec![r])),
        }
    }
    type Metric = (&'static str, fn(&RunRecord) -> f64);
    let metrics: [Metric; 5] = [
        ("l2_error_ratio", |r| r.l2_error_ratio),
        ("support_recall", |r| r.support_recall),
        ("samples_total", |r| r.samples_total as f64),
        ("samples_location", |r| r.samples_location as f64),
        ("wall_time_ms", |r| r.wall_time_ms),
    ];
    let mut rows = Vec::new();
    for (hash, group) in groups {
        let ok: Vec<&RunRecord> = group.iter().copied().filter(|r| r.status == "ok").collect();
        let first = group[0];
        let row = |metric: &str, statistic: &str, value: f64| SummaryRow {
            spec_hash: hash.clone(),
            n: first.n,
            d: first.d,
            k: first.k,
            metric: metric.into(),
            statistic: statistic.into(),
            value,
        };
        rows.push(row("runs", "count", group.len() as f64));
        rows.push(row("failed", "count", (group.len() - ok.len()) as f64));
        if ok.is_empty() {
            continue;
        }
        for (name, f) in metrics {
            let values: Vec<f64> = ok.iter().map(|r| f(r)).collect();
            rows.push(row(
                name,
                "mean",
                values.iter().sum::<f64>() / values.len() as f64,
            ));
            rows.push(row(name, "median", median(values)));
        }
    }
    rows
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let csv_err = |source| LabError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}
