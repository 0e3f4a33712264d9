//! CSV and JSON writers.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Table {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| num(v)).collect());
    }

    pub fn write<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }
}

/// Everything a subcommand produced. The first table is the one printed to
/// stdout in CSV mode; with an output directory all tables are written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: &'static str,
    pub json: Value,
    pub tables: Vec<Table>,
}

pub fn emit<W: Write>(
    o: &Outcome,
    format: Format,
    out_dir: Option<&Path>,
    stdout: &mut W,
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::numeric(format!("write failed: {e}"));
    match (format, out_dir) {
        (Format::Json, None) => {
            writeln!(stdout, "{}", o.json).map_err(io)?;
        }
        (Format::Json, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(io)?;
            let mut f = std::fs::File::create(dir.join(format!("{}.json", o.name))).map_err(io)?;
            writeln!(f, "{}", o.json).map_err(io)?;
        }
        (Format::Csv, None) => {
            if let Some(t) = o.tables.first() {
                t.write(stdout).map_err(io)?;
            }
        }
        (Format::Csv, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(io)?;
            for t in &o.tables {
                let mut f = std::fs::File::create(dir.join(format!("{}.csv", t.name))).map_err(io)?;
                t.write(&mut f).map_err(io)?;
            }
        }
    }
    Ok(())
}
