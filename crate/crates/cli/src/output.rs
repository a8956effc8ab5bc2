//! Run directories: CSV tables and the `summary.json` that describes them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::CliError;

/// Hash of the result-determining settings and the bytes of every input file.
pub fn input_hash(cfg: &Config, inputs: &[(&Path, &[u8])]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&cfg.fingerprint()).expect("config serialises"));
    for (path, bytes) in inputs {
        h.update(path.as_os_str().as_encoded_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct RunDir {
    path: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&path).map_err(|e| output_error(&path, e))?;
        Ok(RunDir { path, files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes a file through `fill` and records it for the summary.
    pub fn write(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let path = self.path.join(name);
        let file = File::create(&path).map_err(|e| output_error(&path, e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w)?;
        w.flush().map_err(|e| output_error(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// A CSV table with the given header and preformatted rows.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.path.join(name);
        self.write(name, |w| {
            let io = |e| output_error(&path, e);
            writeln!(w, "{}", header.join(",")).map_err(io)?;
            for r in rows {
                writeln!(w, "{}", r.join(",")).map_err(io)?;
            }
            Ok(())
        })
    }

    /// Writes `summary.json` and returns its contents.
    pub fn finish(self, cfg: &Config, hash: &str, results: Value) -> Result<Value, CliError> {
        let summary = json!({
            "experiment": cfg.experiment.name(),
            "config": cfg,
            "input_sha256": hash,
            "results": results,
            "files": self.files,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let path = self.path.join("summary.json");
        let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
        std::fs::write(&path, text + "\n").map_err(|e| output_error(&path, e))?;
        Ok(summary)
    }
}

pub fn output_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Output { path: path.display().to_string(), source }
}

/// Maps a library writer failure onto the file it was writing.
pub fn lib_write(path: &Path) -> impl Fn(zetalab::Error) -> CliError + '_ {
    move |e| match e {
        zetalab::Error::Io(source) => output_error(path, source),
        other => CliError::Compute(other),
    }
}
