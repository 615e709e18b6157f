//! CSV and manifest artefacts of a run.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::runner::{SummaryRow, SummaryTable};
use super::spec::ExperimentSpec;
use crate::blocks::DataMatrix;
use crate::error::{Error, Result};
use crate::estimators::Grid;

pub const SUMMARY_HEADER: [&str; 5] = ["model", "estimator", "m", "stat", "value"];
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PER_POINT_FILE: &str = "per_point.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn write_csv(path: &Path, header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in records {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes the long-format summary; an empty row set gives a header-only file.
pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    write_csv(
        path,
        &SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.model.clone(),
                r.estimator.clone(),
                r.m.to_string(),
                r.stat.name().to_string(),
                r.value.to_string(),
            ]
        }),
    )
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(Error::Parse(format!("{}: unexpected header", path.display())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let bad = |what: &str| Error::Parse(format!("{}: bad {what} '{}'", path.display(), rec.as_slice()));
        rows.push(SummaryRow {
            model: field(0).to_string(),
            estimator: field(1).to_string(),
            m: field(2).parse().map_err(|_| bad("m"))?,
            stat: field(3).parse()?,
            value: field(4).parse().map_err(|_| bad("value"))?,
        });
    }
    Ok(rows)
}

pub fn write_per_point_csv(table: &SummaryTable, path: &Path) -> Result<()> {
    let records = table.cells.iter().flat_map(|c| {
        c.points.iter().enumerate().map(move |(i, p)| {
            let u: Vec<String> = p.u.iter().map(f64::to_string).collect();
            vec![
                table.model.clone(),
                c.estimator.clone(),
                c.m.to_string(),
                i.to_string(),
                u.join(";"),
                p.bias2.to_string(),
                p.var.to_string(),
                p.mse.to_string(),
            ]
        })
    });
    write_csv(
        path,
        &["model", "estimator", "m", "point", "u", "bias2", "var", "mse"],
        records,
    )
}

pub fn write_failures_csv(table: &SummaryTable, path: &Path) -> Result<()> {
    let records = table.cells.iter().map(|c| {
        vec![
            table.model.clone(),
            c.estimator.clone(),
            c.m.to_string(),
            c.successes.to_string(),
            c.failures.to_string(),
            c.flagged.to_string(),
        ]
    });
    write_csv(
        path,
        &["model", "estimator", "m", "successes", "failures", "flagged"],
        records,
    )
}

/// Specification, seed and library version; free of timestamps so that
/// repeated runs produce identical files.
pub fn manifest(spec: &ExperimentSpec) -> serde_json::Value {
    let kv = spec.to_kv();
    let entries: serde_json::Map<String, serde_json::Value> =
        kv.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    json!({
        "name": spec.name,
        "seed": spec.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "spec": entries,
    })
}

/// Reads a header row followed by one real-valued column per coordinate.
pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let d = rdr.headers().map_err(|e| csv_err(path, e))?.len();
    let mut columns = vec![Vec::new(); d];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let x: f64 = field.trim().parse().map_err(|_| {
                Error::Parse(format!("{}: row {}: '{field}' is not a number", path.display(), line + 2))
            })?;
            col.push(x);
        }
    }
    DataMatrix::from_columns(columns)
}

pub fn write_data_csv(data: &DataMatrix, path: &Path) -> Result<()> {
    let header: Vec<String> = (1..=data.d()).map(|j| format!("x{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        (0..data.n()).map(|i| data.row(i).iter().map(f64::to_string).collect()),
    )
}

/// One row per grid point: coordinates `u1..ud` then the estimate.
pub fn write_estimates_csv(grid: &Grid, values: &[f64], path: &Path) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let mut header: Vec<String> = (1..=grid.d()).map(|j| format!("u{j}")).collect();
    header.push("estimate".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        grid.points().iter().zip(values).map(|(u, v)| {
            let mut r: Vec<String> = u.iter().map(f64::to_string).collect();
            r.push(v.to_string());
            r
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    pub per_point: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self { per_point: true }
    }
}

/// Writes summary, failures, optional per-point CSV and the manifest into
/// `dir`, overwriting earlier output. Returns the written paths.
pub fn emit(table: &SummaryTable, spec: &ExperimentSpec, dir: &Path, opts: EmitOptions) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let path = dir.join(SUMMARY_FILE);
    write_summary_csv(&table.rows(), &path)?;
    written.push(path);
    let path = dir.join(FAILURES_FILE);
    write_failures_csv(table, &path)?;
    written.push(path);
    if opts.per_point {
        let path = dir.join(PER_POINT_FILE);
        write_per_point_csv(table, &path)?;
        written.push(path);
    }
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest(spec)).expect("json values serialise");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}
