use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ldpc_noc::codes::ParityCheckMatrix;

use crate::Global;

/// Everything that determines a command's outputs. Thread count and the
/// output directory are left out: they do not change results.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: String,
    pub code: String,
    pub code_digest: String,
    pub format: Option<crate::Format>,
    pub torus_n: usize,
    pub pes: usize,
    pub seed: u64,
    pub alpha: f64,
    pub itmax: u32,
    pub quant: String,
    pub pe_delay: u64,
    pub snr: Vec<f64>,
    pub min_errors: u64,
    pub max_frames: u64,
    pub extra: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, g: &Global, h: Option<&ParityCheckMatrix>, extra: serde_json::Value) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            code: g.code.clone(),
            code_digest: h.map(code_digest).unwrap_or_default(),
            format: g.format,
            torus_n: g.torus_n,
            pes: g.torus_n * g.torus_n,
            seed: g.seed,
            alpha: g.alpha,
            itmax: g.itmax,
            quant: g.quant.clone(),
            pe_delay: g.pe_delay,
            snr: g.snr.clone(),
            min_errors: g.min_errors,
            max_frames: g.max_frames,
            extra,
        }
    }

    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest serializes");
        hex(&Sha256::digest(&bytes))
    }
}

pub fn code_digest(h: &ParityCheckMatrix) -> String {
    let bytes = serde_json::to_vec(&(h.n_cols(), h.rows(), h.layers())).expect("code serializes");
    hex(&Sha256::digest(&bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    manifest: &'a RunManifest,
    manifest_sha256: String,
    result: &'a T,
}

/// Writes `result` under `dir/name` wrapped with the manifest and its hash.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, manifest: &RunManifest, result: &T) -> Result<()> {
    let doc = Stamped {
        manifest,
        manifest_sha256: manifest.sha256(),
        result,
    };
    write(dir, name, serde_json::to_string_pretty(&doc)?.as_bytes())
}

pub fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}
