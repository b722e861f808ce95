//! Grid dumps: raw little-endian `f64` values, `i` fastest, with a JSON sidecar.
//!
//! `name.f64` holds the values and `name.json` the [`GridMeta`]. Kinetic grids
//! add `nth`/`dth`; y-independent data uses `ny = 1`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io, json, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub nx: usize,
    pub ny: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nth: Option<usize>,
    pub dx: f64,
    pub dy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dth: Option<f64>,
    pub field_name: String,
    pub time: f64,
    /// Coordinates of the first sample, when not at the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
}

impl GridMeta {
    /// Unit-box spatial field.
    pub fn spatial(name: &str, nx: usize, ny: usize, time: f64) -> Self {
        Self {
            nx,
            ny,
            nth: None,
            dx: 1.0 / nx as f64,
            dy: 1.0 / ny as f64,
            dth: None,
            field_name: name.to_owned(),
            time,
            x0: None,
            theta0: None,
        }
    }

    /// Unit-box kinetic field on `nx × ny × nth`.
    pub fn kinetic(name: &str, nx: usize, ny: usize, nth: usize, time: f64) -> Self {
        Self {
            nth: Some(nth),
            dth: Some(std::f64::consts::TAU / nth as f64),
            ..Self::spatial(name, nx, ny, time)
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nth.unwrap_or(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("f64"), stem.with_extension("json"))
}

/// Writes `stem.f64` and `stem.json`.
pub fn write_grid(stem: &Path, meta: &GridMeta, data: &[f64]) -> Result<()> {
    if data.len() != meta.len() {
        return Err(Error::Format(format!(
            "{}: {} values for a {} grid",
            stem.display(),
            data.len(),
            meta.len()
        )));
    }
    let (raw, side) = paths(stem);
    if let Some(dir) = raw.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&raw, bytes).map_err(io(&raw))?;
    let text = serde_json::to_string_pretty(meta).map_err(json(&side))?;
    fs::write(&side, text + "\n").map_err(io(&side))?;
    Ok(())
}

/// Reads a dump written by [`write_grid`].
pub fn read_grid(stem: &Path) -> Result<(GridMeta, Vec<f64>)> {
    let (raw, side) = paths(stem);
    let text = fs::read_to_string(&side).map_err(io(&side))?;
    let meta: GridMeta = serde_json::from_str(&text).map_err(json(&side))?;
    let bytes = fs::read(&raw).map_err(io(&raw))?;
    if bytes.len() != 8 * meta.len() {
        return Err(Error::Format(format!(
            "{}: {} bytes, sidecar expects {}",
            raw.display(),
            bytes.len(),
            8 * meta.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((meta, data))
}
