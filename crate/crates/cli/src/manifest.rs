//! Output bookkeeping: stage timings, file inventory and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST_SCHEMA: &str = "qdissect.manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub code_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub inputs: Vec<InputFile>,
    pub timings: Vec<StageTiming>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(anyhow!("unsupported manifest schema '{}'", m.schema));
        }
        Ok(m)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Collects timings and written files for one command.
pub struct Run {
    command: String,
    config: ExperimentConfig,
    out: PathBuf,
    inputs: Vec<InputFile>,
    timings: Vec<StageTiming>,
    outputs: Vec<OutputFile>,
}

impl Run {
    pub fn new(command: &str, config: &ExperimentConfig) -> anyhow::Result<Self> {
        fs::create_dir_all(&config.out)
            .with_context(|| format!("cannot create output directory {}", config.out.display()))?;
        Ok(Self {
            command: command.to_string(),
            config: config.clone(),
            out: config.out.clone(),
            inputs: Vec::new(),
            timings: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Times `f` and tags its error with the stage name.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> anyhow::Result<T>) -> anyhow::Result<T> {
        let start = Instant::now();
        let r = f().with_context(|| format!("stage '{name}' failed"));
        self.timings.push(StageTiming {
            stage: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        r
    }

    pub fn record_input(&mut self, path: &Path) -> anyhow::Result<()> {
        self.inputs.push(InputFile {
            path: path.to_path_buf(),
            sha256: hash_file(path)?,
        });
        Ok(())
    }

    pub fn write(&mut self, file: &str, contents: &[u8]) -> anyhow::Result<()> {
        let path = self.out.join(file);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(OutputFile {
            file: file.to_string(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(file, text.as_bytes())
    }

    /// Writes `manifest.json`; called last, also after a failed stage.
    pub fn finish(self) -> anyhow::Result<RunManifest> {
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA.to_string(),
            command: self.command,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.config.seed,
            config: self.config,
            inputs: self.inputs,
            timings: self.timings,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.out.join(MANIFEST_FILE);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(manifest)
    }
}

/// Files whose hash in `produced` differs from `expected`, or that are
/// missing from either side.
pub fn diff_outputs(expected: &[OutputFile], produced: &[OutputFile]) -> Vec<String> {
    let mut bad = Vec::new();
    for e in expected {
        match produced.iter().find(|p| p.file == e.file) {
            Some(p) if p.sha256 == e.sha256 => {}
            Some(_) => bad.push(format!("{} differs", e.file)),
            None => bad.push(format!("{} was not produced", e.file)),
        }
    }
    for p in produced {
        if !expected.iter().any(|e| e.file == p.file) {
            bad.push(format!("{} is not in the manifest", p.file));
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_outputs_and_stages() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out: dir.path().to_path_buf(),
            ..Default::default()
        };
        let mut run = Run::new("exact", &cfg).unwrap();
        run.stage("write", || Ok(())).unwrap();
        run.write("a.txt", b"abc").unwrap();
        let err = run.stage("boom", || Err::<(), _>(anyhow!("bad input"))).unwrap_err();
        assert!(format!("{err:#}").contains("stage 'boom' failed: bad input"));
        let m = run.finish().unwrap();
        assert_eq!(m.timings.len(), 2);
        assert_eq!(m.outputs[0].bytes, 3);
        let back = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn diff_reports_each_kind() {
        let f = |name: &str, h: &str| OutputFile {
            file: name.into(),
            bytes: 0,
            sha256: h.into(),
        };
        let expected = [f("a", "1"), f("b", "2")];
        let produced = [f("a", "1"), f("b", "3"), f("c", "4")];
        assert_eq!(
            diff_outputs(&expected, &produced),
            vec!["b differs".to_string(), "c is not in the manifest".to_string()]
        );
        assert!(diff_outputs(&expected, &expected).is_empty());
    }
}
