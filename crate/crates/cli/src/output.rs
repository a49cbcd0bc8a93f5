//! File formats: JSON, CSV and reading inputs.

use std::path::Path;

use combkit::backbone::FiniteUms;
use combkit::partition::{CoalescentTrajectory, NestedCompositionTrajectory};
use combkit::stats::TestReport;
use combkit::Comb;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    writer.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// One row per component per event: `t,left,right`.
pub fn comb_csv(comb: &Comb) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "left", "right"]).map_err(csv_err)?;
    for e in comb.events() {
        for c in e.partition.components() {
            w.write_record([e.time.to_string(), c.left.to_string(), c.right.to_string()])
                .map_err(csv_err)?;
        }
    }
    finish(w)
}

fn labels_csv(n: usize, rows: impl Iterator<Item = (f64, Vec<usize>)>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| i.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (t, labels) in rows {
        let mut record = vec![t.to_string()];
        record.extend(labels.iter().map(|l| (l + 1).to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    finish(w)
}

/// One row per event: the time, then the block label of each element.
pub fn trajectory_csv(traj: &CoalescentTrajectory) -> Result<Vec<u8>, CliError> {
    labels_csv(
        traj.n(),
        traj.events().iter().map(|(t, p)| (*t, p.labels().to_vec())),
    )
}

/// As [`trajectory_csv`], labels numbering blocks in composition order.
pub fn nested_csv(traj: &NestedCompositionTrajectory) -> Result<Vec<u8>, CliError> {
    let n = traj.n();
    labels_csv(
        n,
        traj.events().iter().map(|(t, c)| {
            let mut labels = vec![0; n];
            for (i, block) in c.blocks().iter().enumerate() {
                for &x in block {
                    labels[x] = i;
                }
            }
            (*t, labels)
        }),
    )
}

pub fn matrix_csv(rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_err)?;
    }
    finish(w)
}

pub fn reports_csv(reports: &[TestReport]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "statistic", "threshold", "pass"]).map_err(csv_err)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.statistic.to_string(),
            r.threshold.to_string(),
            r.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// A space as JSON `{"dist", "weights"}`, or as CSV when the file name ends
/// in `.csv`: the `n` rows of the distance matrix, then a row of weights.
pub fn read_space(path: &Path) -> Result<FiniteUms, CliError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            let row = record
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| CliError::Runtime(format!("{}: row {}: {e}", path.display(), i + 1)))?;
            rows.push(row);
        }
        let weights = rows
            .pop()
            .ok_or_else(|| CliError::Runtime(format!("{}: empty file", path.display())))?;
        FiniteUms::new(rows, weights).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    } else {
        read_json(path)
    }
}

pub fn space_csv(space: &FiniteUms) -> Result<Vec<u8>, CliError> {
    let mut rows = space.dist().to_vec();
    rows.push(space.weights().to_vec());
    matrix_csv(&rows)
}
