//! Report serialization: CSV (config echoed as `#` lines before the header),
//! JSON (stable key order) and raw fields with a JSON sidecar.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pam_core::evolver::io::{fmt17, sidecar_json, write_field_bin, write_field_csv, Sidecar};
use pam_core::evolver::Field;
use pam_core::ModelParams;
use serde_json::{json, Value as Json};
use toml::Value;

use crate::config::{echo_json, echo_lines};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Bin,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "bin" => Ok(Format::Bin),
            _ => Err(CliError::Usage(format!("format must be csv, json or bin, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt17(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Rows of named columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = serde_json::Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        m.insert(c.clone(), v.json());
                    }
                    Json::Object(m)
                })
                .collect(),
        )
    }
}

/// Where and how a command writes its report.
pub struct Sink {
    pub format: Format,
    pub path: Option<PathBuf>,
}

fn open(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn preamble(w: &mut dyn Write, command: &str, used: &BTreeMap<String, Value>) -> Result<(), CliError> {
    writeln!(w, "# pam-kit {} {command}", env!("CARGO_PKG_VERSION"))?;
    for line in echo_lines(used) {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn envelope(command: &str, used: &BTreeMap<String, Value>, extra: Json) -> Json {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("config".into(), echo_json(used));
    if let Json::Object(e) = extra {
        m.extend(e);
    }
    Json::Object(m)
}

impl Sink {
    /// Writes a table; `summary` goes into the JSON envelope or the CSV preamble.
    pub fn table(&self, command: &str, used: &BTreeMap<String, Value>, table: &Table, summary: Json) -> Result<(), CliError> {
        let mut w = open(&self.path)?;
        match self.format {
            Format::Csv => {
                preamble(&mut *w, command, used)?;
                if let Json::Object(m) = &summary {
                    for (k, v) in m {
                        writeln!(w, "# {k} = {v}")?;
                    }
                }
                writeln!(w, "{}", table.columns.join(","))?;
                for r in &table.rows {
                    let cells: Vec<String> = r.iter().map(Cell::csv).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let mut extra = summary;
                if let Json::Object(m) = &mut extra {
                    m.insert("results".into(), table.json_rows());
                } else {
                    extra = json!({ "results": table.json_rows() });
                }
                let doc = envelope(command, used, extra);
                writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
            }
            Format::Bin => {
                return Err(CliError::Usage(format!("'{command}' produces a table; use csv or json")));
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes a field snapshot. JSON carries the summary only.
    pub fn field(
        &self,
        command: &str,
        used: &BTreeMap<String, Value>,
        field: &Field,
        t: f64,
        params: &ModelParams,
        summary: Json,
    ) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let mut w = open(&self.path)?;
                preamble(&mut *w, command, used)?;
                if let Json::Object(m) = &summary {
                    for (k, v) in m {
                        writeln!(w, "# {k} = {v}")?;
                    }
                }
                write_field_csv(field, &mut w)?;
                w.flush()?;
            }
            Format::Json => {
                let mut w = open(&self.path)?;
                let doc = envelope(command, used, summary);
                writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
                w.flush()?;
            }
            Format::Bin => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("binary output needs --output".into()))?;
                let mut w = BufWriter::new(File::create(path)?);
                write_field_bin(field, &mut w)?;
                w.flush()?;
                std::fs::write(sidecar_path(path), sidecar_json(&Sidecar::new(field, t, params)) + "\n")?;
                // the run record goes to stdout
                let doc = envelope(command, used, summary);
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            }
        }
        Ok(())
    }
}

/// `<path>.json` next to a binary field.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_format() {
        assert_eq!(Cell::Num(0.1).csv(), "1.0000000000000001e-1");
        assert_eq!(Cell::Text("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Cell::Num(f64::NAN).json(), json!("NaN"));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("/tmp/v.bin")), PathBuf::from("/tmp/v.bin.json"));
    }
}
