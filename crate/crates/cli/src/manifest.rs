use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::formats::write_toml;

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Record of one command run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub runtime_seconds: f64,
    /// Fully resolved configuration of the run.
    pub config: toml::Table,
}

/// Collects what a command reads and writes while it runs.
pub struct ManifestBuilder {
    command: String,
    seed: Option<u64>,
    jobs: Option<usize>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    config: toml::Table,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new<C: Serialize>(command: &str, config: &C) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            seed: None,
            jobs: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: toml::Table::try_from(config)?,
            started: Instant::now(),
        })
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = Some(jobs);
        self
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn finish(self, dir: &Path) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            jobs: self.jobs,
            inputs: self.inputs,
            outputs: self.outputs,
            runtime_seconds: self.started.elapsed().as_secs_f64(),
            config: self.config,
        };
        write_toml(&dir.join(MANIFEST_FILE), &manifest)?;
        Ok(manifest)
    }
}
