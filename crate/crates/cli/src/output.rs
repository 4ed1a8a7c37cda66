//! Row encoding (CSV or JSON Lines) and the resumable chunk journal.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "jsonl",
        }
    }
}

/// One cell of an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    /// Shortest round-trip representation.
    Float(f64),
    /// Fixed number of decimals.
    Fixed(f64, usize),
    Str(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Fixed(v, d) => format!("{v:.d$}"),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Fixed(v, d) => format!("{v:.d$}")
                .parse::<serde_json::Number>()
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Str(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Formats rows of a fixed column set.
#[derive(Debug, Clone)]
pub struct Encoder {
    format: Format,
    columns: Vec<&'static str>,
}

impl Encoder {
    pub fn new(format: Format, columns: &[&'static str]) -> Self {
        Encoder {
            format,
            columns: columns.to_vec(),
        }
    }

    pub fn header(&self) -> String {
        match self.format {
            Format::Csv => format!("{}\n", self.columns.join(",")),
            Format::Json => String::new(),
        }
    }

    pub fn row(&self, cells: &[Cell]) -> String {
        debug_assert_eq!(cells.len(), self.columns.len());
        match self.format {
            Format::Csv => {
                let mut line = cells.iter().map(Cell::csv).collect::<Vec<_>>().join(",");
                line.push('\n');
                line
            }
            Format::Json => {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(cells)
                    .map(|(k, c)| (k.to_string(), c.json()))
                    .collect();
                let mut line = Value::Object(obj).to_string();
                line.push('\n');
                line
            }
        }
    }

    /// Splits an encoded row back into textual fields, in column order.
    pub fn parse_row(&self, line: &str) -> Option<Vec<String>> {
        match self.format {
            Format::Csv => Some(line.split(',').map(str::to_string).collect()),
            Format::Json => {
                let v: Value = serde_json::from_str(line).ok()?;
                self.columns
                    .iter()
                    .map(|c| match v.get(*c)? {
                        Value::String(s) => Some(s.clone()),
                        Value::Null => Some(String::new()),
                        other => Some(other.to_string()),
                    })
                    .collect()
            }
        }
    }

    /// Lines of `text` that are data rows (header skipped).
    pub fn data_lines<'a>(&self, text: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let skip = matches!(self.format, Format::Csv) as usize;
        let header = self.header();
        let header = header.trim_end().to_string();
        text.lines().enumerate().filter_map(move |(i, l)| {
            if l.is_empty() || (i < skip && l == header) {
                None
            } else {
                Some(l)
            }
        })
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> io::Result<(String, u64)> {
    let bytes = fs::read(path)?;
    Ok((sha256_hex(&bytes), bytes.len() as u64))
}

/// Append-only data file with a checksum journal beside it.
///
/// Every chunk is appended and synced before its `index length sha256` line
/// goes into `<file>.chunks`. On resume the journal is replayed against the
/// data: chunks whose bytes still match are kept, and the data file is cut
/// back to the end of the last one. Anything after it, such as a chunk
/// written without its journal line, is discarded.
pub struct ChunkedWriter {
    data: File,
    journal: File,
    chunks: u64,
}

impl ChunkedWriter {
    /// Opens `path` for writing. With `resume`, returns the payloads of the
    /// chunks already on disk; otherwise starts from an empty file.
    pub fn open(path: &Path, resume: bool) -> io::Result<(Self, Vec<String>)> {
        let journal_path = journal_path(path);
        let mut kept = Vec::new();
        let mut valid_len = 0u64;
        let mut journal_text = String::new();

        if resume && path.exists() && journal_path.exists() {
            let mut data = File::open(path)?;
            let journal = fs::read_to_string(&journal_path)?;
            for (expected_index, line) in journal.lines().enumerate() {
                let mut parts = line.split_whitespace();
                let (Some(idx), Some(len), Some(sum)) = (parts.next(), parts.next(), parts.next()) else {
                    break;
                };
                let (Ok(idx), Ok(len)) = (idx.parse::<u64>(), len.parse::<u64>()) else {
                    break;
                };
                if idx != expected_index as u64 {
                    break;
                }
                let mut buf = vec![0u8; len as usize];
                data.seek(SeekFrom::Start(valid_len))?;
                if data.read_exact(&mut buf).is_err() || sha256_hex(&buf) != sum {
                    break;
                }
                let Ok(text) = String::from_utf8(buf) else { break };
                kept.push(text);
                valid_len += len;
                journal_text.push_str(line);
                journal_text.push('\n');
            }
        }

        let data = OpenOptions::new().create(true).write(true).truncate(false).open(path)?;
        data.set_len(valid_len)?;
        let mut data = OpenOptions::new().append(true).open(path)?;
        data.flush()?;
        fs::write(&journal_path, &journal_text)?;
        let journal = OpenOptions::new().append(true).open(&journal_path)?;

        Ok((
            ChunkedWriter {
                data,
                journal,
                chunks: kept.len() as u64,
            },
            kept,
        ))
    }

    #[cfg(test)]
    fn chunks(&self) -> u64 {
        self.chunks
    }

    pub fn write_chunk(&mut self, payload: &str) -> io::Result<()> {
        self.data.write_all(payload.as_bytes())?;
        self.data.sync_data()?;
        writeln!(
            self.journal,
            "{} {} {}",
            self.chunks,
            payload.len(),
            sha256_hex(payload.as_bytes())
        )?;
        self.journal.sync_data()?;
        self.chunks += 1;
        Ok(())
    }
}

pub fn journal_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".chunks");
    PathBuf::from(s)
}

/// Writes a small file in one go (tables, histograms, sidecars).
pub fn write_whole(path: &Path, text: &str) -> io::Result<()> {
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.sync_data()
}
