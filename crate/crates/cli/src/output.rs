//! Report emission: CSV or JSON to stdout or a file.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use momentlab::real::{report_digits, to_decimal};
use momentlab::BigReal;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Sink {
    pub format: Format,
    pub digits: usize,
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(format: Format, precision_bits: u32, path: Option<PathBuf>) -> Self {
        Sink { format, digits: report_digits(precision_bits), path }
    }

    pub fn real(&self, x: &BigReal) -> String {
        to_decimal(x, self.digits)
    }

    /// Writes `csv` or `json` depending on the format. JSON documents get a
    /// `timestamp` field, the only part of any output that varies between runs.
    pub fn emit(&self, csv: impl FnOnce() -> String, json: impl FnOnce() -> Value) -> io::Result<()> {
        let text = match self.format {
            Format::Csv => csv(),
            Format::Json => {
                let mut doc = match json() {
                    Value::Object(m) => m,
                    other => {
                        let mut m = Map::new();
                        m.insert("result".into(), other);
                        m
                    }
                };
                doc.insert("timestamp".into(), Value::from(unix_seconds()));
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).map_err(io::Error::other)?;
                s.push('\n');
                s
            }
        };
        match &self.path {
            Some(p) => fs::write(p, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// `None` becomes JSON null.
pub fn opt_f64(x: Option<f64>) -> Value {
    x.filter(|v| v.is_finite()).map(Value::from).unwrap_or(Value::Null)
}
