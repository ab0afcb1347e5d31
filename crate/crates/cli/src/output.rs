//! Output sink: canonical JSON or CSV on stdout, hashed as it is written, and
//! the run manifest on stderr.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Forwards writes and feeds every byte to a SHA-256 state.
pub struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> HashingWriter<W> {
    pub fn new(inner: W) -> Self {
        Self {
            inner,
            hasher: Sha256::new(),
        }
    }

    pub fn digest_hex(&self) -> String {
        self.hasher
            .clone()
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Key-sorted JSON with shortest round-trip floats.
pub fn canonical<T: Serialize>(v: &T) -> String {
    // serde_json's map is a BTreeMap, so converting through Value sorts keys
    let value = serde_json::to_value(v).expect("serializable output");
    serde_json::to_string(&value).expect("json")
}

pub struct Sink<W: Write> {
    pub format: Format,
    out: HashingWriter<W>,
}

impl<W: Write> Sink<W> {
    pub fn new(format: Format, out: W) -> Self {
        Self {
            format,
            out: HashingWriter::new(out),
        }
    }

    pub fn digest(&self) -> String {
        self.out.digest_hex()
    }

    pub fn json(&mut self, v: &Value) -> io::Result<()> {
        writeln!(self.out, "{}", canonical(v))?;
        self.out.flush()
    }

    /// A row-oriented CSV writer over the sink; rows are flushed as written.
    pub fn csv(&mut self) -> RowWriter<'_, W> {
        RowWriter {
            w: csv::WriterBuilder::new().from_writer(&mut self.out),
        }
    }

    /// Emit `value` in the selected format; CSV falls back to `key,value` rows
    /// unless `table` supplies a header and rows.
    pub fn emit(&mut self, value: &Value, table: Option<Table>) -> io::Result<()> {
        match self.format {
            Format::Json => self.json(value),
            Format::Csv => {
                let table = table.unwrap_or_else(|| flatten(value));
                let mut w = self.csv();
                w.row(&table.header)?;
                for r in &table.rows {
                    w.row(r)?;
                }
                Ok(())
            }
        }
    }
}

pub struct RowWriter<'a, W: Write> {
    w: csv::Writer<&'a mut HashingWriter<W>>,
}

impl<W: Write> RowWriter<'_, W> {
    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> io::Result<()> {
        self.w
            .write_record(fields.iter().map(|s| s.as_ref()))
            .map_err(io::Error::other)?;
        self.w.flush()
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => canonical(other),
    }
}

/// `key,value` rows for the top level of an object, nested values as JSON.
fn flatten(value: &Value) -> Table {
    let mut t = Table::new(&["key", "value"]);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                t.push(vec![k.clone(), cell(v)]);
            }
        }
        other => t.push(vec!["value".into(), cell(other)]),
    }
    t
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub version: &'static str,
    pub wall_time_ms: f64,
    pub threads: usize,
    pub digest: String,
    pub exit_code: i32,
}
