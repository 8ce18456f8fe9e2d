//! Deterministic output files: CSV tables, the JSON summary and the
//! manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::config::ExperimentConfig;

pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Num(x.unwrap_or(f64::NAN))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// A table with named, unit-annotated columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub title: String,
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: &str, title: &str, columns: &[(&str, &str)]) -> Self {
        Table {
            file_name: file_name.to_string(),
            title: title.to_string(),
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {}", self.title).unwrap();
        writeln!(
            s,
            "# angular frequencies are written as omega/2pi in Hz (suffix _over_2pi_hz)"
        )
        .unwrap();
        for (name, unit) in &self.columns {
            writeln!(s, "# {name}: {unit}").unwrap();
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.0.as_str()).collect();
        writeln!(s, "{}", names.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_f64(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(t) => t.clone(),
    }
}

pub fn manifest_text(cfg: &ExperimentConfig, command: &str) -> String {
    format!(
        "# rydthz {} manifest\n# command: {command}\n# rerun: rydthz {command} --config {MANIFEST_FILE} --out <dir>\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_canonical_toml()
    )
}

/// Writes the tables, `summary.json` and `manifest.toml` into `dir`.
pub fn write_all(
    dir: &Path,
    cfg: &ExperimentConfig,
    command: &str,
    tables: &[Table],
    summary: &serde_json::Value,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for t in tables {
        fs::write(dir.join(&t.file_name), t.to_csv())?;
    }
    let mut json = serde_json::to_string_pretty(summary).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(dir.join(SUMMARY_FILE), json)?;
    fs::write(dir.join(MANIFEST_FILE), manifest_text(cfg, command))?;
    Ok(())
}
