//! Output directory, run manifest and machine-readable errors.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rsn_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use rsn_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) => "config",
            CliError::Io { .. } | CliError::Core(E::Io(_)) => "io",
            CliError::Core(E::Diverged { .. }) => "divergence",
            CliError::Core(
                E::NeedsBarrierRaising { .. }
                | E::StressOutOfRange { .. }
                | E::UnreachableDevices(_)
                | E::RetentionBelowAttempt { .. }
                | E::NegativeBarrier(_),
            ) => "infeasible",
            CliError::Core(_) => "input",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "divergence" => 2,
            "infeasible" => 3,
            "io" => 4,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let (line, key) = match self {
            CliError::Config(c) => (c.line, c.key.clone()),
            _ => (None, None),
        };
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "line": line,
                "key": key,
            }
        })
        .to_string()
    }
}

/// Every file a run writes goes through here, so nothing lands outside
/// the output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `name` (a bare file name) through a buffered writer.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let bare = Path::new(name).file_name().and_then(|n| n.to_str()) == Some(name);
        if !bare || name == "." || name == ".." {
            return Err(CliError::Usage(format!("refusing to write `{name}` outside the output directory")));
        }
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        body(&mut out)?;
        out.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        self.write(name, |out| out.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e)))
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub output_dir: String,
    pub workers: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    /// Full resolved config; `--config manifest.json` replays the run.
    pub config: String,
}
