use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde_json::Value;

use bsdkit::Error;

use crate::Options;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows for CSV output; the first row is the header.
pub struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self::with_header(header.iter().map(ToString::to_string).collect())
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self { rows: vec![header] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn emit(opts: &Options, mut body: Value, table: &Table) -> Result<(), Error> {
    let text = match opts.format {
        Format::Csv => table.render(),
        Format::Json => {
            if !opts.no_timestamp {
                if let Value::Object(map) = &mut body {
                    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
                    map.insert("timestamp".into(), Value::from(secs));
                }
            }
            let mut s = serde_json::to_string_pretty(&body).map_err(|e| Error::Configuration(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &opts.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Configuration(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Configuration(e.to_string())),
    }
}
