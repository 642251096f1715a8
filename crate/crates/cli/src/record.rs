//! Append-only JSON-lines persistence of run results.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use homramsey_core::ramsey::SearchReport;

pub const SCHEMA_VERSION: u32 = 1;

/// One self-describing line in a results file.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub unix_ts: u64,
    pub command: String,
    pub params: serde_json::Value,
    pub engine: String,
    pub solver: String,
    pub report: SearchReport,
}

impl RunRecord {
    pub fn new(
        command: &str,
        params: serde_json::Value,
        engine: String,
        solver: String,
        report: SearchReport,
    ) -> Self {
        RunRecord {
            schema: SCHEMA_VERSION,
            unix_ts: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            command: command.to_string(),
            params,
            engine,
            solver,
            report,
        }
    }
}

/// Appends one JSON line to `path`, or writes it to stdout when `path` is
/// `-`. Existing unparseable lines trigger a warning but never block the
/// append.
pub fn persist(record: &RunRecord, path: &str) -> Result<()> {
    let line = serde_json::to_string(record).context("serializing run record")?;
    if path == "-" {
        println!("{line}");
        return Ok(());
    }
    if Path::new(path).exists() {
        let file = std::fs::File::open(path)
            .with_context(|| format!("reading existing results file {path}"))?;
        let bad = BufReader::new(file)
            .lines()
            .map_while(Result::ok)
            .filter(|l| !l.trim().is_empty())
            .filter(|l| serde_json::from_str::<serde_json::Value>(l).is_err())
            .count();
        if bad > 0 {
            eprintln!("warning: {bad} unparseable line(s) already in {path}; appending anyway");
        }
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening results file {path}"))?;
    writeln!(file, "{line}").with_context(|| format!("appending to {path}"))?;
    Ok(())
}
