//! Output directory, manifest, and the chunked prime-range scheduler.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use selfpower::arith::{Factorizer, PrimeSegments};

use crate::args::Command;
use crate::output::{file_digest, write_whole, Cell, ChunkedWriter, Encoder, Format};

/// Bad flag combinations found after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Primes per chunk of a streamed file.
pub const PRIMES_PER_CHUNK: usize = 4096;

pub struct Run {
    pub dir: PathBuf,
    pub format: Format,
    pub resume: bool,
    pub seed: u64,
    pub segment: u64,
    /// `SELFPOWER_BUDGET`, when set.
    pub budget: Option<u64>,
    outputs: Vec<PathBuf>,
    config_json: String,
    started: Instant,
}

impl Run {
    pub fn start(command: &Command) -> Result<Self> {
        let common = command.common();
        let budget = match std::env::var("SELFPOWER_BUDGET") {
            Ok(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| usage(format!("SELFPOWER_BUDGET=`{v}` is not a non-negative integer")))?,
            ),
            Err(_) => None,
        };
        if common.segment == 0 {
            return Err(usage("--segment must be positive"));
        }
        fs::create_dir_all(&common.output)
            .with_context(|| format!("creating output directory {}", common.output.display()))?;

        // Everything that determines the output bytes; workers and resume do not.
        let config_json = serde_json::to_string_pretty(&json!({
            "subcommand": command.name(),
            "config": command,
        }))?;
        let config_path = common.output.join("config.json");
        if common.resume && config_path.exists() {
            let previous = fs::read_to_string(&config_path)?;
            if previous.trim_end() != config_json {
                return Err(usage(format!(
                    "{} was written with a different configuration; resume needs identical flags",
                    common.output.display()
                )));
            }
        }
        write_whole(&config_path, &format!("{config_json}\n"))?;

        Ok(Run {
            dir: common.output.clone(),
            format: common.format,
            resume: common.resume,
            seed: common.seed,
            segment: common.segment,
            budget,
            outputs: Vec::new(),
            config_json,
            started: Instant::now(),
        })
    }

    fn file_name(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}.{}", self.format.extension()))
    }

    /// Writes a whole table in the run's format.
    pub fn write_table(&mut self, stem: &str, columns: &[&'static str], rows: &[Vec<Cell>]) -> Result<PathBuf> {
        let enc = Encoder::new(self.format, columns);
        let mut text = enc.header();
        for r in rows {
            text.push_str(&enc.row(r));
        }
        let path = self.file_name(stem);
        write_whole(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_whole(&path, &format!("{}\n", serde_json::to_string_pretty(value)?))
            .with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    /// Streams rows in resumable chunks. `units` lists the work items of each
    /// chunk; `rows_of` turns one item into rows (in parallel); `observe` sees
    /// the fields of every row in order, including rows kept from an earlier
    /// interrupted run.
    pub fn stream<U, R, O>(&mut self, stem: &str, columns: &[&'static str], units: Vec<Vec<U>>, rows_of: R, mut observe: O) -> Result<()>
    where
        U: Sync,
        R: Fn(&U) -> Result<Vec<Vec<Cell>>> + Sync,
        O: FnMut(&[String]) -> Result<()>,
    {
        let enc = Encoder::new(self.format, columns);
        let path = self.file_name(stem);
        let (mut writer, kept) =
            ChunkedWriter::open(&path, self.resume).with_context(|| format!("opening {}", path.display()))?;
        let replay = |text: &str, observe: &mut O| -> Result<()> {
            for line in enc.data_lines(text) {
                let fields = enc
                    .parse_row(line)
                    .with_context(|| format!("unreadable row in {}: {line}", path.display()))?;
                observe(&fields)?;
            }
            Ok(())
        };

        if kept.is_empty() {
            writer.write_chunk(&enc.header())?;
        }
        for text in kept.iter().skip(1) {
            replay(text, &mut observe)?;
        }
        let done = kept.len().saturating_sub(1).max(0);
        for unit in units.iter().skip(done) {
            let rows: Vec<Vec<Vec<Cell>>> = unit.par_iter().with_min_len(8).map(&rows_of).collect::<Result<_>>()?;
            let mut text = String::new();
            for r in rows.iter().flatten() {
                text.push_str(&enc.row(r));
            }
            writer
                .write_chunk(&text)
                .with_context(|| format!("writing {}", path.display()))?;
            replay(&text, &mut observe)?;
        }
        self.outputs.push(path);
        Ok(())
    }

    /// Writes `manifest.json` listing every output with its digest.
    pub fn finish(self, summary: serde_json::Value) -> Result<()> {
        let mut outputs = Vec::new();
        for path in &self.outputs {
            let (sha256, bytes) = file_digest(path)?;
            outputs.push(json!({
                "file": path.file_name().map(|n| n.to_string_lossy().into_owned()),
                "sha256": sha256,
                "bytes": bytes,
            }));
        }
        let config: serde_json::Value = serde_json::from_str(&self.config_json)?;
        let config_digest: String = Sha256::digest(format!("{}\n", self.config_json).as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        let manifest = json!({
            "config": config,
            "versions": {
                "selfpower": selfpower::VERSION,
                "selfpower-cli": env!("CARGO_PKG_VERSION"),
            },
            "workers": rayon::current_num_threads(),
            "resumed": self.resume,
            "budget_override": self.budget,
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
            "input_digests": { "config.json": config_digest },
            "outputs": outputs,
            "summary": summary,
        });
        let path = self.dir.join("manifest.json");
        write_whole(&path, &format!("{}\n", serde_json::to_string_pretty(&manifest)?))?;
        Ok(())
    }
}

/// Primes of `[lo, hi]` grouped into chunks of at most `per_chunk`, never
/// straddling a sieve window.
pub fn prime_chunks(lo: u64, hi: u64, segment: u64, per_chunk: usize) -> Vec<Vec<u64>> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    PrimeSegments::new(lo, hi, segment)
        .flat_map(|w| w.chunks(per_chunk.max(1)).map(<[u64]>::to_vec).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Factorizer for `p - 1` over primes up to `hi`.
pub fn factorizer(hi: u64) -> Factorizer {
    Factorizer::new(hi.max(2))
}

pub fn field<T: std::str::FromStr>(fields: &[String], i: usize, what: &str) -> Result<T> {
    fields
        .get(i)
        .and_then(|s| s.parse().ok())
        .with_context(|| format!("row is missing a valid `{what}` field"))
}
