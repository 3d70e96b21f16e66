//! CSV tables and JSON sidecars.
//!
//! Tables are plain RFC-4180 CSV with a header row. Everything else about a
//! run (seed, generator, resolved config and its hash, schema version) goes
//! into a `<name>.json` sidecar next to the table, so the CSV bytes depend
//! only on the computation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use spinmarket::analytics::MartingaleRegions;
use spinmarket::sim::GENERATOR;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

pub type TableWriter = csv::Writer<Box<dyn Write>>;

/// Where a command's artifacts go: files under `dir`, or stdout for the
/// primary table when no directory is given.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> CliResult<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Sink { dir: dir.map(Path::to_path_buf) })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn writer(&self, name: &str, primary: bool) -> CliResult<Option<Box<dyn Write>>> {
        match &self.dir {
            Some(d) => {
                let path = d.join(format!("{name}.csv"));
                let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
                Ok(Some(Box::new(BufWriter::new(file))))
            }
            None if primary => Ok(Some(Box::new(BufWriter::new(std::io::stdout())))),
            None => Ok(None),
        }
    }

    /// The command's main table.
    pub fn primary(&self, name: &str, header: &[String]) -> CliResult<TableWriter> {
        let w = self.writer(name, true)?.expect("primary tables always have a destination");
        start(w, header)
    }

    /// A secondary table; only written when an output directory is set.
    pub fn secondary(&self, name: &str, header: &[String]) -> CliResult<Option<TableWriter>> {
        self.writer(name, false)?.map(|w| start(w, header)).transpose()
    }

    pub fn sidecar(&self, name: &str, meta: &Metadata) -> CliResult<()> {
        if let Some(d) = &self.dir {
            let path = d.join(format!("{name}.json"));
            let mut bytes = serde_json::to_vec_pretty(meta)?;
            bytes.push(b'\n');
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

fn start(w: Box<dyn Write>, header: &[String]) -> CliResult<TableWriter> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
    writer.write_record(header)?;
    Ok(writer)
}

pub fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Hex SHA-256 of the canonical JSON form of the config.
pub fn config_hash(config: &RunConfig) -> CliResult<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub generator: &'static str,
    pub config: RunConfig,
    pub config_hash: String,
    pub tables: Vec<String>,
    pub details: serde_json::Value,
}

impl Metadata {
    pub fn new(
        command: &'static str,
        config: &RunConfig,
        tables: &[&str],
        details: serde_json::Value,
    ) -> CliResult<Self> {
        Ok(Metadata {
            schema_version: SCHEMA_VERSION,
            tool: "spinmarket",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.seed,
            generator: GENERATOR,
            config: config.clone(),
            config_hash: config_hash(config)?,
            tables: tables.iter().map(|t| format!("{t}.csv")).collect(),
            details,
        })
    }
}

pub fn regions_json(r: &MartingaleRegions) -> serde_json::Value {
    serde_json::json!({
        "kind": r.kind.as_str(),
        "g1": r.g1,
        "g2": r.g2,
        "g3": r.g3,
        "g4": r.g4,
        "intervals": r.intervals(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -0.5, 4.1, 1e-300, 123456.789, 2.5e20, -3.0e-7, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x, "{}", num(x));
        }
        assert_eq!(num(43.0), "43");
        assert_eq!(num(1e-7), "1e-7");
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let b = RunConfig { out: Some("elsewhere".into()), ..RunConfig::default() };
        let c = RunConfig { seed: 7, ..RunConfig::default() };
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_ne!(config_hash(&a).unwrap(), config_hash(&c).unwrap());
    }

    #[test]
    fn secondary_tables_need_a_directory() {
        let sink = Sink::new(None).unwrap();
        assert!(sink.secondary("x", &header(&["a"])).unwrap().is_none());
    }
}
