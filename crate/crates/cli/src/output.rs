//! Output plumbing: provenance preamble, CSV tables (RFC-4180 quoting via
//! the csv crate) and JSON documents, to stdout or a file.

use std::io::Write;

use anyhow::{Context, Result};

use crate::config::RunConfig;

/// Destination selected by `--out`.
pub fn sink(config: &RunConfig) -> Result<Box<dyn Write>> {
    match &config.out {
        Some(path) => {
            let f = std::fs::File::create(path)
                .with_context(|| format!("creating output file {path}"))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// Comment preamble carried by every CSV table: provenance hash, units and
/// the configuration the numbers came from.
pub fn write_preamble(
    w: &mut dyn Write,
    config: &RunConfig,
    command: &str,
    extra: &[String],
) -> Result<()> {
    writeln!(w, "# command: {command}")?;
    writeln!(w, "# config_hash: {}", config.hash())?;
    writeln!(
        w,
        "# units: energy_hbar_units = energy / hbar; energy_raw carries hbar = N^(-1/3)"
    )?;
    for line in config.canonical().lines() {
        writeln!(w, "# config: {line}")?;
    }
    for line in extra {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Write one CSV table (header + rows) after the preamble.
pub fn write_csv(
    w: &mut dyn Write,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().from_writer(w);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Deterministic float formatting used in CSV cells.
pub fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

/// Wrap a serializable document with the provenance hash and emit JSON.
pub fn write_json<T: serde::Serialize>(
    w: &mut dyn Write,
    config: &RunConfig,
    command: &str,
    payload: &T,
) -> Result<()> {
    let doc = serde_json::json!({
        "command": command,
        "config_hash": config.hash(),
        "config": config.canonical().lines().collect::<Vec<_>>(),
        "data": payload,
    });
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    Ok(())
}
