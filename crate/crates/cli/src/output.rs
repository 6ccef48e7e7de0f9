//! CSV emission shared by the sweep and figure commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// What produced a file: written as the first line of every CSV.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self { command: command.into(), seed }
    }

    pub fn comment_line(&self) -> String {
        let command = self.command.replace(['\n', '\r'], " ");
        format!(
            "# uofdm {} | command: {} | seed: {}\n",
            env!("CARGO_PKG_VERSION"),
            command,
            self.seed
        )
    }
}

/// Shortest decimal that round-trips, `0` for negative zero.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn write_csv<W: Write>(out: W, prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = out;
    out.write_all(prov.comment_line().as_bytes())?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_csv(BufWriter::new(file), prov, header, rows)
        .with_context(|| format!("cannot write {}", path.display()))
}
