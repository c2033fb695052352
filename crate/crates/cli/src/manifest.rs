//! Run manifests: what was run, with which inputs, producing which bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub littlewood: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub c: f64,
    /// Where `littlewood` came from: `config` or the Dirichlet sweep that produced it.
    pub littlewood_source: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub config_path: Option<String>,
    pub constants: Option<ConstantsRecord>,
    pub seed: Option<u64>,
    pub oversample: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// The flag that names this output on the command line.
    pub flag: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub wpset_cli: String,
    pub wpset_core: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Arguments after the program name, with any config override made explicit.
    pub args: Vec<String>,
    pub config: ConfigSnapshot,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<OutputRecord>,
    pub versions: Versions,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Bookkeeping for one run; every read and write goes through here.
#[derive(Debug)]
pub struct Run {
    pub subcommand: String,
    pub args: Vec<String>,
    pub config: ConfigSnapshot,
    inputs: Vec<FileDigest>,
    outputs: Vec<OutputRecord>,
}

impl Run {
    pub fn new(subcommand: &str, args: Vec<String>) -> Run {
        Run { subcommand: subcommand.into(), args, config: ConfigSnapshot::default(), inputs: vec![], outputs: vec![] }
    }

    pub fn read_input(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(FileDigest { role: role.into(), path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    pub fn write_output(&mut self, flag: &str, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
        }
        fs::write(path, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputRecord { flag: flag.into(), path: path.display().to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, flag: &str, path: &Path, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(format!("serialize: {e}")))?;
        bytes.push(b'\n');
        self.write_output(flag, path, &bytes)
    }

    pub fn write_csv<T: Serialize>(&mut self, flag: &str, path: &Path, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        self.write_output(flag, path, &bytes)
    }

    pub fn outputs(&self) -> &[OutputRecord] {
        &self.outputs
    }

    /// Writes the manifest next to the first output unless a path is given.
    pub fn finish(self, manifest: Option<PathBuf>) -> Result<(PathBuf, RunManifest), CliError> {
        let path = match manifest {
            Some(p) => p,
            None => default_manifest_path(
                self.outputs.first().map(|o| Path::new(&o.path)).unwrap_or(Path::new(&self.subcommand)),
            ),
        };
        let m = RunManifest {
            subcommand: self.subcommand,
            args: self.args,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            versions: Versions { wpset_cli: env!("CARGO_PKG_VERSION").into(), wpset_core: wpset_core::VERSION.into() },
        };
        let mut bytes = serde_json::to_vec_pretty(&m).map_err(|e| CliError::Internal(format!("serialize: {e}")))?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        Ok((path, m))
    }
}

/// `out/coeffs.json` -> `out/coeffs.manifest.json`.
pub fn default_manifest_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    output.with_file_name(format!("{stem}.manifest.json"))
}

/// Replaces the value of `flag` in `args`, appending the flag when absent.
pub fn set_flag(args: &mut Vec<String>, flag: &str, value: &str) {
    let prefix = format!("{flag}=");
    if let Some(i) = args.iter().position(|a| a == flag) {
        if i + 1 < args.len() {
            args[i + 1] = value.into();
            return;
        }
    }
    if let Some(a) = args.iter_mut().find(|a| a.starts_with(&prefix)) {
        *a = format!("{prefix}{value}");
        return;
    }
    args.push(flag.into());
    args.push(value.into());
}
