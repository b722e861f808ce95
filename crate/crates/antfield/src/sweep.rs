//! Seeded (γ, Pe) sweeps, per-pair aggregation and the instability-line join.
//!
//! Each run lives in `out/runs/<hash>/`, the hash taken over the run's
//! parameters, seed, grid, horizon and stepping. A directory holding a
//! `result.json` with a matching key is reused, so interrupted sweeps resume.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use antfield_core::fv::{EvolveConfig, Stepping};
use antfield_core::observables::{classify, second_moment_total, ObservableSet, Thresholds};
use antfield_core::ScaledParams;

use crate::config::{load, save, GridSize, SweepSpec};
use crate::error::{Error, Result};
use crate::runs::{dump_state, meanfield_evolve};
use crate::tables::{write_csv, LineRow, OverlayRow, PhaseRow, SweepRow};

pub const FAILED: &str = "failed";

/// Everything that determines a run's output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunKey {
    pub params: ScaledParams,
    pub seed: u64,
    pub grid: GridSize,
    pub t_max: f64,
    pub stepping: Stepping,
}

impl RunKey {
    /// First 16 hex digits of the SHA-256 of the key's JSON.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("run key serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub key: RunKey,
    pub time: f64,
    pub d_fstar: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    pub p2_total: [f64; 2],
    pub label: String,
    pub error: Option<String>,
}

impl RunResult {
    pub fn row(&self) -> SweepRow {
        SweepRow {
            gamma: self.key.params.gamma,
            pe: self.key.params.pe,
            seed: self.key.seed,
            d_fstar: self.d_fstar,
            p2: self.p2,
            label: self.label.clone(),
        }
    }

    fn failed(key: RunKey, msg: String) -> Self {
        Self {
            key,
            time: f64::NAN,
            d_fstar: f64::NAN,
            p2: f64::NAN,
            p2_total: [f64::NAN; 2],
            label: FAILED.to_owned(),
            error: Some(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// γ outermost, then Pe, then seed.
    pub runs: Vec<RunResult>,
    pub pairs: Vec<PhaseRow>,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.runs.iter().map(RunResult::row).collect()
    }
}

pub fn run_keys(spec: &SweepSpec) -> Vec<RunKey> {
    let mut keys = Vec::with_capacity(spec.gammas.len() * spec.pes.len() * spec.seeds.len());
    for &gamma in &spec.gammas {
        for &pe in &spec.pes {
            for &seed in &spec.seeds {
                keys.push(RunKey {
                    params: ScaledParams { gamma, pe, ..spec.base },
                    seed,
                    grid: spec.grid,
                    t_max: spec.t_max,
                    stepping: spec.stepping,
                });
            }
        }
    }
    keys
}

/// Runs one key, reusing `dir/result.json` when present and matching.
pub fn run_one(key: &RunKey, thresholds: Thresholds, dir: Option<&Path>, dump: bool) -> RunResult {
    if let Some(d) = dir {
        if let Ok(prev) = load::<RunResult>(&d.join("result.json")) {
            if prev.key == *key {
                return prev;
            }
        }
    }
    let cfg = EvolveConfig {
        t_max: key.t_max,
        stepping: key.stepping,
        snapshot_every: None,
    };
    let res = match meanfield_evolve(key.params, key.grid, &cfg, key.seed, |_| {}) {
        Ok(g) => {
            let o = ObservableSet::of(&g);
            let tot = second_moment_total(g.dx() * g.dy(), &o.p2);
            if !(o.d_fstar.is_finite() && o.p2_scalar.is_finite()) {
                RunResult::failed(*key, "non-finite observables".into())
            } else {
                if let (Some(d), true) = (dir, dump) {
                    if let Err(e) = dump_state(d, "", &g, key.params.alpha) {
                        return RunResult::failed(*key, e.to_string());
                    }
                }
                RunResult {
                    key: *key,
                    time: g.time,
                    d_fstar: o.d_fstar,
                    p2: o.p2_scalar,
                    p2_total: [tot.x, tot.y],
                    label: classify(o.d_fstar, o.p2_scalar, thresholds).label.to_string(),
                    error: None,
                }
            }
        }
        Err(e) => RunResult::failed(*key, e.to_string()),
    };
    if let Some(d) = dir {
        // an unwritable cache only costs a rerun
        let _ = save(&d.join("result.json"), &res);
    }
    res
}

/// Max of `d_fstar` and mean of `P₂` over the successful seeds of each pair.
pub fn aggregate(runs: &[RunResult], thresholds: Thresholds) -> Vec<PhaseRow> {
    let mut out: Vec<PhaseRow> = Vec::new();
    let mut sums: Vec<(f64, f64, usize)> = Vec::new();
    for r in runs {
        let (g, pe) = (r.key.params.gamma, r.key.params.pe);
        let idx = match out.iter().position(|p| p.gamma == g && p.pe == pe) {
            Some(i) => i,
            None => {
                out.push(PhaseRow {
                    gamma: g,
                    pe,
                    d_fstar_max: f64::NAN,
                    p2_mean: f64::NAN,
                    label: FAILED.to_owned(),
                    n_runs: 0,
                    n_failed: 0,
                });
                sums.push((f64::NEG_INFINITY, 0.0, 0));
                out.len() - 1
            }
        };
        out[idx].n_runs += 1;
        if r.error.is_some() {
            out[idx].n_failed += 1;
        } else {
            let s = &mut sums[idx];
            s.0 = s.0.max(r.d_fstar);
            s.1 += r.p2;
            s.2 += 1;
        }
    }
    for (row, (dmax, p2sum, n)) in out.iter_mut().zip(sums) {
        if n > 0 {
            row.d_fstar_max = dmax;
            row.p2_mean = p2sum / n as f64;
            row.label = classify(dmax, row.p2_mean, thresholds).label.to_string();
        }
    }
    out
}

/// Runs every (γ, Pe, seed) on `jobs` worker threads. With `out`, results are
/// cached per run and `sweep.csv` and `phase.csv` are written.
pub fn run_sweep(spec: &SweepSpec, jobs: usize, out: Option<&Path>) -> Result<SweepResult> {
    spec.validate()?;
    let keys = run_keys(spec);
    let dirs: Vec<Option<PathBuf>> = keys
        .iter()
        .map(|k| out.map(|o| o.join("runs").join(k.hash())))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Format(format!("thread pool: {e}")))?;
    let runs: Vec<RunResult> = pool.install(|| {
        keys.par_iter()
            .zip(dirs.par_iter())
            .map(|(k, d)| run_one(k, spec.thresholds, d.as_deref(), spec.dump_grids))
            .collect()
    });
    let pairs = aggregate(&runs, spec.thresholds);
    let result = SweepResult { runs, pairs };
    if let Some(o) = out {
        write_csv(&o.join("sweep.csv"), &result.rows())?;
        write_csv(&o.join("phase.csv"), &result.pairs)?;
    }
    Ok(result)
}

/// `γ*` at `pe` by linear interpolation between line points with a value;
/// `None` outside their Pe range.
pub fn interpolate_gamma_star(line: &[LineRow], pe: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = line.iter().filter_map(|r| r.gamma_star.map(|g| (r.pe, g))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(&(_, g)) = pts.iter().find(|p| p.0 == pe) {
        return Some(g);
    }
    pts.windows(2).find(|w| w[0].0 < pe && pe < w[1].0).map(|w| {
        let s = (pe - w[0].0) / (w[1].0 - w[0].0);
        w[0].1 + s * (w[1].1 - w[0].1)
    })
}

pub fn overlay_instability_line(pairs: &[PhaseRow], line: &[LineRow]) -> Vec<OverlayRow> {
    pairs
        .iter()
        .map(|p| OverlayRow {
            gamma: p.gamma,
            pe: p.pe,
            d_fstar_max: p.d_fstar_max,
            p2_mean: p.p2_mean,
            label: p.label.clone(),
            gamma_star: interpolate_gamma_star(line, p.pe),
        })
        .collect()
}
