use std::collections::BTreeMap;
use std::io::Write;

use num_traits::ToPrimitive;
use poisson_moments::Rat;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Everything a command prints. `timing_ms` is filled in by the caller and
/// only appears in JSON.
#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub result: Value,
    pub timing_ms: f64,
    #[serde(skip)]
    pub table: Table,
    #[serde(skip)]
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            result: Value::Null,
            timing_ms: 0.0,
            table: Table::default(),
            text: String::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.table.header)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                w.flush()
            }
            Format::Text => write!(out, "{}", self.text),
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn approx(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Lossless JSON form of a rational; the decimal is labeled approximate.
pub fn rat_json(r: &Rat) -> Value {
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "decimal_approx": fmt_f64(approx(r)),
    })
}

pub fn rat_text(r: &Rat) -> String {
    format!("{}/{} (~ {})", r.numer(), r.denom(), fmt_f64(approx(r)))
}
