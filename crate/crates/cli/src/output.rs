//! Data-file and manifest emission. CSV cells carry at least 12 significant
//! digits; JSON stores IEEE-754 doubles row-major. Data files are
//! byte-identical across reruns with the same seed (manifests carry wall
//! time, so they are not).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use riqs_core::hilbert::TimeSeries;

/// One table cell; integers print exactly, floats with 13 significant digits.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => format!("{v}"),
            Cell::Float(v) => format!("{v:.12e}"),
        }
    }
}

/// Column-labeled numeric table.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width vs columns");
        self.rows.push(row);
    }

    /// Time series as a table with the given time-column label, columns
    /// optionally reordered by `order` (labels not listed keep their order).
    pub fn from_series(series: &TimeSeries, time_label: &str, order: &[&str]) -> Self {
        let mut labels: Vec<String> = Vec::new();
        for want in order {
            if series.labels().iter().any(|l| l == want) {
                labels.push((*want).to_string());
            }
        }
        for l in series.labels() {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
        let mut columns = vec![time_label.to_string()];
        columns.extend(labels.iter().cloned());
        let mut table = Table::new(columns);
        let index_of: Vec<usize> = labels
            .iter()
            .map(|l| series.labels().iter().position(|s| s == l).expect("label"))
            .collect();
        for (t, record) in series.times().iter().zip(series.records()) {
            let mut row = vec![Cell::Float(*t)];
            row.extend(index_of.iter().map(|&i| Cell::Float(record[i])));
            table.push_row(row);
        }
        table
    }
}

/// Output data format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::validation(format!(
                "unknown format '{other}' (expected csv|json)"
            ))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn write_table(path: &Path, table: &Table, format: Format) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut file = fs::File::create(path).map_err(|e| {
        CliError::validation(format!("cannot write output {}: {e}", path.display()))
    })?;
    match format {
        Format::Csv => {
            let mut buf = String::new();
            buf.push_str(&table.columns.join(","));
            buf.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                buf.push_str(&cells.join(","));
                buf.push('\n');
            }
            file.write_all(buf.as_bytes())?;
        }
        Format::Json => {
            let payload = serde_json::json!({
                "columns": table.columns,
                "rows": table.rows,
            });
            serde_json::to_writer_pretty(&mut file, &payload)
                .map_err(|e| CliError::validation(format!("json write: {e}")))?;
            file.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reproducibility sidecar written next to each output file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub code_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub results: serde_json::Value,
}

impl Manifest {
    pub fn new(command: impl Into<String>, parameters: serde_json::Value, seed: u64) -> Self {
        Manifest {
            command: command.into(),
            parameters,
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            outputs: Vec::new(),
            results: serde_json::Value::Null,
        }
    }

    pub fn manifest_path(data_path: &Path) -> PathBuf {
        let mut name = data_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".into());
        name.push_str(".manifest.json");
        data_path.with_file_name(name)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut file = fs::File::create(path).map_err(|e| {
            CliError::validation(format!("cannot write manifest {}: {e}", path.display()))
        })?;
        serde_json::to_writer_pretty(&mut file, self)
            .map_err(|e| CliError::validation(format!("manifest write: {e}")))?;
        file.write_all(b"\n")?;
        Ok(())
    }
}
