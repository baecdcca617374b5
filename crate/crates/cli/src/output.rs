//! Output files. CSVs open with a `#` block holding the version and the full
//! run configuration; JSON files carry the same data under `metadata`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use iomarkov_core::Error;
use serde::Serialize;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header(config: &RunConfig, notes: &[String]) -> String {
    let mut s = String::new();
    writeln!(s, "# iomarkov {VERSION}").unwrap();
    writeln!(s, "# config: {}", serde_json::to_string(config).expect("serializable")).unwrap();
    for note in notes {
        writeln!(s, "# {note}").unwrap();
    }
    s
}

#[derive(Serialize)]
pub struct Metadata<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
}

pub fn out_path(config: &RunConfig, name: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(&config.out).map_err(|e| Error::Io {
        path: config.out.display().to_string(),
        source: e,
    })?;
    Ok(config.out.join(name))
}

pub fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Shortest round-trip decimal; empty for missing values.
pub fn num(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV field with quoting when needed.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
