//! Input tracking, staged atomic outputs and run manifests.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub subcommand: &'a str,
    pub tool_version: &'static str,
    pub core_version: &'static str,
    pub config_hash: String,
    pub config: &'a PipelineConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_clock_secs: f64,
    pub workers: usize,
    pub summary: serde_json::Value,
}

pub fn digest(path: &Path) -> std::io::Result<FileDigest> {
    let mut f = BufReader::new(File::open(path)?);
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        bytes += n as u64;
        h.update(&buf[..n]);
    }
    Ok(FileDigest {
        path: path.display().to_string(),
        bytes,
        sha256: hex::encode(h.finalize()),
    })
}

/// One subcommand run: records inputs, stages outputs in temp files next to
/// their targets and renames them into place only on [`Run::commit`]. A
/// dropped run leaves no partial outputs behind.
pub struct Run<'a> {
    name: &'a str,
    cfg: &'a PipelineConfig,
    started: Instant,
    inputs: Vec<PathBuf>,
    staged: Vec<(PathBuf, NamedTempFile)>,
}

impl<'a> Run<'a> {
    pub fn new(name: &'a str, cfg: &'a PipelineConfig) -> CliResult<Self> {
        std::fs::create_dir_all(&cfg.paths.out_dir)
            .with_context(|| format!("creating {}", cfg.paths.out_dir.display()))
            .input()?;
        Ok(Self {
            name,
            cfg,
            started: Instant::now(),
            inputs: Vec::new(),
            staged: Vec::new(),
        })
    }

    /// Opens a recorded input.
    pub fn open(&mut self, path: &Path) -> CliResult<BufReader<File>> {
        let f = File::open(path)
            .with_context(|| format!("opening {}", path.display()))
            .input()?;
        self.inputs.push(path.to_owned());
        Ok(BufReader::new(f))
    }

    pub fn open_optional(&mut self, path: &Path) -> CliResult<Option<BufReader<File>>> {
        if path.exists() {
            self.open(path).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Stages `name` under the output directory.
    pub fn write<F>(&mut self, name: &str, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<&mut NamedTempFile>) -> anyhow::Result<()>,
    {
        let target = self.cfg.out(name);
        if self.inputs.iter().any(|p| same_file(p, &target)) {
            return Err(CliError::Usage(anyhow::anyhow!(
                "output {} would overwrite an input",
                target.display()
            )));
        }
        let mut tmp = NamedTempFile::new_in(&self.cfg.paths.out_dir)
            .context("creating temp file")
            .input()?;
        {
            let mut w = BufWriter::new(&mut tmp);
            f(&mut w)
                .with_context(|| format!("writing {name}"))
                .invariant()?;
            w.flush().context("flushing").input()?;
        }
        self.staged.push((target, tmp));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    /// Renames staged outputs into place, then writes the manifest.
    pub fn commit(self, summary: serde_json::Value) -> CliResult<PathBuf> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| digest(p))
            .collect::<Result<Vec<_>, _>>()
            .input()?;
        let mut outputs = Vec::new();
        for (target, tmp) in self.staged {
            tmp.persist(&target)
                .with_context(|| format!("renaming into {}", target.display()))
                .input()?;
            outputs.push(digest(&target).input()?);
        }
        let manifest = Manifest {
            subcommand: self.name,
            tool_version: env!("CARGO_PKG_VERSION"),
            core_version: agenda_core::VERSION,
            config_hash: self.cfg.hash(),
            config: self.cfg,
            inputs,
            outputs,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
            workers: rayon::current_num_threads(),
            summary,
        };
        let path = self.cfg.out(&format!("{}.manifest.json", self.name));
        let mut tmp = NamedTempFile::new_in(&self.cfg.paths.out_dir).input()?;
        serde_json::to_writer_pretty(&mut tmp, &manifest).input()?;
        tmp.write_all(b"\n").input()?;
        tmp.persist(&path).input()?;
        log::info!(
            "{}: {} outputs in {:.2}s",
            self.name,
            manifest.outputs.len(),
            manifest.wall_clock_secs
        );
        Ok(path)
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}
