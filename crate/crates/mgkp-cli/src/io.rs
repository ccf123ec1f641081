//! Reproducible output plumbing: run manifests, CSV/JSON writers with a
//! fixed float format, flat key-value config files, SHA-256 input hashes,
//! and the flat little-endian binary field format.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use mgkp::field2d::{Field2D, Grid2D};
use mgkp::{Error, Result};

/// Fixed float formatting for CSV cells: 17 significant digits,
/// '.' decimal separator, no grouping — bit-exact f64 round trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Flat key-value config file: `key = value` (or `key value`) per line,
/// `#` comments, UTF-8. Values stay strings; the flag resolver parses.
#[derive(Debug, Default, Clone)]
pub struct Config {
    pub values: BTreeMap<String, String>,
    #[allow(dead_code)]
    pub source: Option<PathBuf>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = fs::read_to_string(path)?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = if let Some((k, v)) = line.split_once('=') {
                (k, v)
            } else if let Some((k, v)) = line.split_once(char::is_whitespace) {
                (k, v)
            } else {
                return Err(Error::InvalidParams(format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config {
            values,
            source: Some(path.to_path_buf()),
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Record of one command invocation: everything needed to reproduce the
/// run and an exhaustive list of what it wrote.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Full parameter echo (post-config-merge) of the wrapped operation.
    pub parameters: serde_json::Value,
    pub crate_version: String,
    /// Seconds since the Unix epoch at invocation.
    pub unix_time_s: u64,
    /// PRNG seed in effect (all random test fields derive from it).
    pub seed: u64,
    /// SHA-256 of every input file consumed (config, field files).
    pub input_hashes: BTreeMap<String, String>,
    /// Every file this run wrote, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            parameters,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            unix_time_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            seed,
            input_hashes: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn hash_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.input_hashes
            .insert(path.display().to_string(), format!("{digest:x}"));
        Ok(())
    }

    pub fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write `manifest.json` into the output directory (always the last
    /// file written, listing every other one).
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self).unwrap() + "\n")?;
        Ok(())
    }
}

/// Ensure the output directory exists and return it.
pub fn prepare_out_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

/// Write a CSV file with the fixed float format; `rows` are already
/// stringified cells. Records the file in the manifest.
pub fn write_csv(
    out_dir: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<String>],
    manifest: &mut RunManifest,
) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(out_dir.join(name), text)?;
    manifest.record_output(name);
    Ok(())
}

/// Write pretty JSON and record it in the manifest.
pub fn write_json<T: Serialize>(
    out_dir: &Path,
    name: &str,
    value: &T,
    manifest: &mut RunManifest,
) -> Result<()> {
    fs::write(
        out_dir.join(name),
        serde_json::to_string_pretty(value).unwrap() + "\n",
    )?;
    manifest.record_output(name);
    Ok(())
}

/// Sidecar metadata of a binary field snapshot.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct FieldSidecar {
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Ny")]
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub t: f64,
}

/// Write a field as flat little-endian f64 (row-major, x fastest) with a
/// JSON sidecar `{Nx, Ny, Lx, Ly, t}`.
pub fn write_field(
    out_dir: &Path,
    stem: &str,
    u: &Field2D,
    t: f64,
    manifest: &mut RunManifest,
) -> Result<()> {
    let mut bytes = Vec::with_capacity(u.data.len() * 8);
    for &v in &u.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let bin = format!("{stem}.bin");
    fs::write(out_dir.join(&bin), bytes)?;
    manifest.record_output(&bin);
    let sidecar = FieldSidecar {
        nx: u.grid.nx,
        ny: u.grid.ny,
        lx: u.grid.lx,
        ly: u.grid.ly,
        t,
    };
    write_json(out_dir, &format!("{stem}.json"), &sidecar, manifest)?;
    Ok(())
}

/// Read a field written by [`write_field`] (sidecar path; the binary sits
/// next to it with the `.bin` extension).
pub fn read_field(sidecar_path: &Path) -> Result<(Field2D, f64)> {
    let sidecar: FieldSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?)
        .map_err(|e| Error::InvalidParams(format!("bad field sidecar: {e}")))?;
    let grid = Grid2D::new(sidecar.nx, sidecar.ny, sidecar.lx, sidecar.ly)?;
    let bin_path = sidecar_path.with_extension("bin");
    let bytes = fs::read(&bin_path)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::InvalidParams(format!(
            "{}: expected {} bytes for a {}x{} field, found {}",
            bin_path.display(),
            grid.len() * 8,
            sidecar.nx,
            sidecar.ny,
            bytes.len()
        )));
    }
    let mut u = Field2D::zeros(grid);
    for (k, chunk) in bytes.chunks_exact(8).enumerate() {
        u.data[k] = f64::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok((u, sidecar.t))
}
