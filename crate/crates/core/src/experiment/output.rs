use crate::error::Result;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// One CSV data point; a missing `y_value` is written as an empty field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub x_value: f64,
    pub y_value: Option<f64>,
    pub series_label: String,
}

impl Row {
    pub fn new(x_value: f64, y_value: Option<f64>, series_label: impl Into<String>) -> Self {
        Row {
            x_value,
            y_value: y_value.filter(|y| y.is_finite()),
            series_label: series_label.into(),
        }
    }
}

/// Everything a command writes: `<name>.csv`, `<name>_summary.json` and,
/// when present, `<name>_trace.csv`.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub name: &'static str,
    pub rows: Vec<Row>,
    pub summary: serde_json::Value,
    pub trace_csv: Option<String>,
}

impl CommandOutput {
    pub fn csv(&self) -> Result<String> {
        to_csv(&self.rows)
    }

    /// Writes the files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let csv_path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&csv_path, self.csv()?)?;
        written.push(csv_path);
        let summary_path = dir.join(format!("{}_summary.json", self.name));
        std::fs::write(&summary_path, serde_json::to_string_pretty(&self.summary)? + "\n")?;
        written.push(summary_path);
        if let Some(solver) = &self.trace_csv {
            let path = dir.join(format!("{}_trace.csv", self.name));
            std::fs::write(&path, solver)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Serializes records with a header row.
pub fn to_csv<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Like [`to_csv`] but keeps the header when there are no records.
pub fn to_csv_with_header<T: Serialize>(header: &[&str], records: &[T]) -> Result<String> {
    if records.is_empty() {
        return Ok(header.join(",") + "\n");
    }
    to_csv(records)
}
