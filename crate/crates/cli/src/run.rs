//! Output directory bookkeeping: hash-tagged file names, timings, manifest.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use serde::Serialize;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct Run {
    pub cfg: RunConfig,
    pub hash: String,
    pub subcommand: &'static str,
    outputs: Vec<String>,
    timings: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config_hash: &'a str,
    seed: u64,
    reproducible: bool,
    status: &'a str,
    outputs: &'a [String],
    /// Wall-clock seconds per stage; the only field that varies between reruns.
    timings: Vec<Timing<'a>>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Timing<'a> {
    stage: &'a str,
    seconds: f64,
}

impl Run {
    pub fn new(cfg: RunConfig, subcommand: &'static str) -> Result<Self> {
        std::fs::create_dir_all(&cfg.output)
            .with_context(|| format!("cannot create output directory {}", cfg.output.display()))?;
        Ok(Self {
            hash: cfg.hash(),
            cfg,
            subcommand,
            outputs: Vec::new(),
            timings: Vec::new(),
        })
    }

    /// Short form of the config hash used in file names.
    pub fn tag(&self) -> &str {
        &self.hash[..12]
    }

    pub fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.cfg.output.join(format!("{stem}-{}.{ext}", self.tag()))
    }

    pub fn note_output(&mut self, path: &Path) {
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !self.outputs.contains(&name) {
            self.outputs.push(name);
        }
    }

    pub fn create(&mut self, stem: &str, ext: &str) -> Result<BufWriter<File>> {
        let path = self.path(stem, ext);
        let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        self.note_output(&path);
        Ok(BufWriter::new(f))
    }

    pub fn write_json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(stem, "json");
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        self.note_output(&path);
        Ok(path)
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        self.timings.push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    pub fn write_manifest(&mut self, status: &str) -> Result<PathBuf> {
        let path = self.path(&format!("manifest-{}", self.subcommand), "json");
        self.note_output(&path);
        let m = Manifest {
            tool: "choquard",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            config_hash: &self.hash,
            seed: self.cfg.seed,
            reproducible: self.cfg.reproducible,
            status,
            outputs: &self.outputs,
            timings: self
                .timings
                .iter()
                .map(|(s, t)| Timing { stage: s, seconds: *t })
                .collect(),
            config: &self.cfg,
        };
        let text = serde_json::to_string_pretty(&m)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
