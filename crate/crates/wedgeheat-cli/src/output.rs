//! Output artifacts: atomic file writes, CSV tables, JSON reports, and
//! the run manifest.
//!
//! Files are written through a temporary name and renamed into place, and
//! a failed run removes everything it produced, so an output directory
//! never retains partial artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wedgeheat_core::spectrum::SpectrumSet;
use wedgeheat_core::trace::TraceEvaluation;

use crate::{CliError, Result};

/// Writes the artifacts of one run into a target directory.
pub struct RunWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl RunWriter {
    /// Create the target directory (and parents) if needed.
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// The target directory.
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Paths written so far, in write order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Serialize a report as pretty-printed JSON.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io {
            path: self.dir.join(name),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Write a text artifact (CSV tables).
    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        self.write_bytes(name, text.as_bytes())
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &target).map_err(|e| CliError::io(&target, e))?;
        self.written.push(target.clone());
        Ok(target)
    }

    /// Remove everything this run wrote.
    pub fn cleanup(&mut self) {
        for path in self.written.drain(..) {
            let _ = fs::remove_file(path);
        }
    }

    /// Consume the writer, returning the written paths.
    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }
}

/// Render a spectrum as CSV with columns `nu,n,k,lambda,multiplicity`.
pub fn spectrum_csv(spec: &SpectrumSet) -> String {
    let mut out = String::from("nu,n,k,lambda,multiplicity\n");
    for mode in spec.modes() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            mode.nu, mode.n, mode.k, mode.lambda, mode.multiplicity
        );
    }
    out
}

/// Render a trace table as CSV with columns `t,trace,tail_bound`.
pub fn trace_csv(grid: &[f64], traces: &[TraceEvaluation]) -> String {
    let mut out = String::from("t,trace,tail_bound\n");
    for (&t, eval) in grid.iter().zip(traces) {
        let _ = writeln!(out, "{},{},{}", t, eval.value, eval.tail_bound);
    }
    out
}

/// The run manifest written alongside every command's outputs: the echoed
/// configuration, versions, run settings, and timing.
#[derive(Debug, Serialize)]
pub struct Manifest {
    /// Subcommand that produced the run.
    pub command: String,
    /// Version of the `wedgeheat` crates.
    pub version: String,
    /// Seed used for any test-point sampling.
    pub seed: u64,
    /// Worker threads used for trace evaluation.
    pub threads: usize,
    /// Artifact file names written by the run, in write order.
    pub outputs: Vec<String>,
    /// Wall-clock duration of the computation.
    pub timing_seconds: f64,
    /// Verbatim text of the configuration file.
    pub config: String,
}

/// File name of the manifest.
pub const MANIFEST_NAME: &str = "manifest.json";
