//! JSON configuration files. Every field is a named key.

use std::fs;
use std::path::Path;

use antfield_core::fv::Stepping;
use antfield_core::observables::Thresholds;
use antfield_core::particles::{ParticleModel, SimConfig};
use antfield_core::stationary::StationaryConfig;
use antfield_core::{PhysicalParams, ScaledParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io, json, Error, Result};

/// Reads and parses a JSON file.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(json(path))
}

/// Pretty JSON with a trailing newline.
pub fn save<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    let text = serde_json::to_string_pretty(value).map_err(json(path))?;
    fs::write(path, text + "\n").map_err(io(path))
}

/// `{"physical": {...}}` or `{"scaled": {"params": {...}, "n": 8}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ParticleParams {
    Physical(PhysicalParams),
    Scaled {
        params: ScaledParams,
        n: usize,
        #[serde(default = "one")]
        box_len: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticlesConfig {
    pub params: ParticleParams,
    pub dt: f64,
    pub t_max: f64,
    pub record_every: u64,
    pub seed: u64,
}

impl ParticlesConfig {
    pub fn sim_config(&self) -> Result<SimConfig> {
        let model = match &self.params {
            ParticleParams::Physical(p) => ParticleModel::from_physical(p)?,
            ParticleParams::Scaled { params, n, box_len } => ParticleModel::from_scaled(params, *n, *box_len)?,
        };
        let cfg = SimConfig {
            model,
            dt: self.dt,
            t_max: self.t_max,
            record_every: self.record_every,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Kinetic grid size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
    pub nth: usize,
}

impl Default for GridSize {
    fn default() -> Self {
        Self { nx: 31, ny: 31, nth: 21 }
    }
}

fn default_stepping() -> Stepping {
    Stepping::Fixed { dt: 1e-5 }
}

fn default_seed() -> u64 {
    706
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanfieldConfig {
    pub params: ScaledParams,
    #[serde(default)]
    pub grid: GridSize,
    pub t_max: f64,
    #[serde(default = "default_stepping")]
    pub stepping: Stepping,
    /// Time between time-series rows; `None` gives only the first and last.
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    /// Also write a grid dump at every snapshot.
    #[serde(default)]
    pub dump_snapshots: bool,
    /// Overridden by `--seed`.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryFileConfig {
    pub params: ScaledParams,
    #[serde(default = "default_stationary_n")]
    pub nx: usize,
    #[serde(default = "default_stationary_n")]
    pub nth: usize,
    #[serde(default = "default_stationary_tol")]
    pub tol: f64,
    #[serde(default = "default_stationary_iter")]
    pub max_iter: usize,
}

fn default_stationary_n() -> usize {
    StationaryConfig::default().nx
}

fn default_stationary_tol() -> f64 {
    StationaryConfig::default().tol
}

fn default_stationary_iter() -> usize {
    StationaryConfig::default().max_iter
}

impl StationaryFileConfig {
    pub fn solver_config(&self) -> StationaryConfig {
        StationaryConfig { nx: self.nx, nth: self.nth, tol: self.tol, max_iter: self.max_iter }
    }
}

/// Seeds of the reference sweep.
pub const DEFAULT_SEEDS: [u64; 8] = [706, 1001, 4472, 5555, 6061, 8154, 9437, 9956];

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}

fn default_sweep_t() -> f64 {
    5.0
}

fn yes() -> bool {
    true
}

/// A (γ, Pe, seed) sweep. `base.gamma` and `base.pe` are replaced per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub gammas: Vec<f64>,
    pub pes: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_sweep_t")]
    pub t_max: f64,
    #[serde(default)]
    pub grid: GridSize,
    pub base: ScaledParams,
    #[serde(default = "default_stepping")]
    pub stepping: Stepping,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Keep the final `f` of every run.
    #[serde(default = "yes")]
    pub dump_grids: bool,
}

impl SweepSpec {
    pub fn new(gammas: Vec<f64>, pes: Vec<f64>, base: ScaledParams) -> Self {
        Self {
            gammas,
            pes,
            seeds: default_seeds(),
            t_max: default_sweep_t(),
            grid: GridSize::default(),
            base,
            stepping: default_stepping(),
            thresholds: Thresholds::default(),
            dump_grids: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.pes.is_empty() || self.seeds.is_empty() {
            return Err(Error::Format("sweep lists must be non-empty".into()));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.seeds.len() {
            return Err(Error::Format("sweep seeds must be distinct".into()));
        }
        if self.t_max.is_nan() || self.t_max <= 0.0 {
            return Err(Error::Format("sweep t_max must be positive".into()));
        }
        for &gamma in &self.gammas {
            for &pe in &self.pes {
                ScaledParams { gamma, pe, ..self.base }.validate()?;
            }
        }
        Ok(())
    }
}
