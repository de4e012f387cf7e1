//! Output files are written to a temporary sibling and renamed into place,
//! so a failed run never leaves a partial file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pmqkd::ProtocolParams;
use serde::Serialize;

use crate::sweep::SweepSpec;

pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Path of the configuration sidecar for an output file: `rates.csv` →
/// `rates.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

/// Resolved configuration written next to every sweep output.
#[derive(Debug, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub params: &'a ProtocolParams,
    pub sweep: &'a SweepSpec,
}

impl<'a> Provenance<'a> {
    pub fn new(params: &'a ProtocolParams, sweep: &'a SweepSpec) -> Self {
        Provenance {
            tool: "pmqkd",
            version: env!("CARGO_PKG_VERSION"),
            params,
            sweep,
        }
    }
}
