//! CSV row types and writers.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use antfield_core::particles::TrajectoryRecord;

use crate::error::{csv, io, Result};

/// Writes rows with a header derived from the row type.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let mut w = ::csv::Writer::from_path(path).map_err(csv(path))?;
    for r in rows {
        w.serialize(r).map_err(csv(path))?;
    }
    w.flush().map_err(io(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = ::csv::Reader::from_path(path).map_err(csv(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv(path))
}

/// `t,i,x,y,theta` plus unwrapped coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub i: usize,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub x_unwrapped: f64,
    pub y_unwrapped: f64,
    pub theta_unwrapped: f64,
}

pub fn trajectory_rows(rec: &TrajectoryRecord) -> Vec<TrajectoryRow> {
    rec.frames
        .iter()
        .flat_map(|fr| {
            (0..fr.positions.len()).map(move |i| TrajectoryRow {
                t: fr.t,
                i,
                x: fr.positions[i].x,
                y: fr.positions[i].y,
                theta: fr.angles[i],
                x_unwrapped: fr.unwrapped[i].x,
                y_unwrapped: fr.unwrapped[i].y,
                theta_unwrapped: fr.angles_unwrapped[i],
            })
        })
        .collect()
}

/// `t,mass,min_f,max_f,d_fstar,P2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub mass: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub d_fstar: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
}

/// `gamma,Pe,seed,d_fstar,P2,label`; failed runs carry `NaN` and label `failed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    #[serde(rename = "Pe")]
    pub pe: f64,
    pub seed: u64,
    pub d_fstar: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    pub label: String,
}

/// Per-pair aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub gamma: f64,
    #[serde(rename = "Pe")]
    pub pe: f64,
    pub d_fstar_max: f64,
    #[serde(rename = "P2_mean")]
    pub p2_mean: f64,
    pub label: String,
    pub n_runs: usize,
    pub n_failed: usize,
}

/// `Pe,gamma_star,n`; `gamma_star` is empty without a sign change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineRow {
    #[serde(rename = "Pe")]
    pub pe: f64,
    pub gamma_star: Option<f64>,
    pub n: usize,
}

/// Phase row joined with the instability line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub gamma: f64,
    #[serde(rename = "Pe")]
    pub pe: f64,
    pub d_fstar_max: f64,
    #[serde(rename = "P2_mean")]
    pub p2_mean: f64,
    pub label: String,
    pub gamma_star: Option<f64>,
}
