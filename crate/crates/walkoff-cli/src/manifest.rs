//! Run manifests: every report carries the command, configuration, input
//! digests, seed, and tool version of the run that produced it, so reruns
//! are verifiable. Wall-clock duration goes to stderr only: report bytes
//! must be identical across reruns with the same inputs and seed.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub inputs: Vec<(String, String)>, // (path, sha256)
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config: Vec::new(),
            inputs: Vec::new(),
            seed,
            version: format!("walkoff {}", env!("CARGO_PKG_VERSION")),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("cannot read input {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.inputs.push((path.display().to_string(), hex::encode(digest)));
        Ok(self)
    }

    /// Block for text reports.
    pub fn text_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "run manifest");
        let _ = writeln!(s, "  command : {}", self.command);
        let _ = writeln!(s, "  version : {}", self.version);
        let _ = writeln!(s, "  seed    : {}", self.seed);
        for (k, v) in &self.config {
            let _ = writeln!(s, "  config  : {k} = {v}");
        }
        for (path, digest) in &self.inputs {
            let _ = writeln!(s, "  input   : {path} sha256={digest}");
        }
        s
    }

    /// `#`-prefixed header for CSV artifacts.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# version: {}", self.version);
        let _ = writeln!(s, "# seed: {}", self.seed);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# config: {k} = {v}");
        }
        for (path, digest) in &self.inputs {
            let _ = writeln!(s, "# input: {path} sha256={digest}");
        }
        s
    }
}
