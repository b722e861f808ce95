//! Single-run drivers behind the CLI subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};

use antfield_core::field::{solve_chemical, Grid2};
use antfield_core::fv::{evolve, EvolveConfig, KineticGrid};
use antfield_core::linstab::{
    adiabatic_growth_rate, bisect, dispersion, reconstruct_eigenfunction, trace_instability_line, Bracket,
    DispersionParams, DispersionResult,
};
use antfield_core::observables::{classify, second_moment_total, ObservableSet, Thresholds};
use antfield_core::particles::{run_trajectory, TrajectoryRecord, RNG_ALGORITHM};
use antfield_core::stationary::{initial_chemical, solve_stationary_from, StationaryState};
use antfield_core::{Error as CoreError, ScaledParams};

use crate::config::{save, GridSize, MeanfieldConfig, ParticlesConfig, StationaryFileConfig};
use crate::error::Result;
use crate::gridio::{write_grid, GridMeta};
use crate::tables::{trajectory_rows, write_csv, LineRow, SeriesRow};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub seed: u64,
    pub parameters: ParticlesConfig,
    pub rng_algorithm: String,
    pub code_version: String,
    pub frames: usize,
    pub near_singular: u64,
}

/// Runs the particle system and writes `trajectory.csv` and `trajectory.json`.
pub fn run_particles(cfg: &ParticlesConfig, out: &Path) -> Result<TrajectoryRecord> {
    let rec = run_trajectory(&cfg.sim_config()?)?;
    write_csv(&out.join("trajectory.csv"), &trajectory_rows(&rec))?;
    let meta = TrajectoryMeta {
        seed: cfg.seed,
        parameters: *cfg,
        rng_algorithm: RNG_ALGORITHM.to_owned(),
        code_version: CODE_VERSION.to_owned(),
        frames: rec.frames.len(),
        near_singular: rec.near_singular,
    };
    save(&out.join("trajectory.json"), &meta)?;
    Ok(rec)
}

pub fn series_row(g: &KineticGrid) -> SeriesRow {
    let o = ObservableSet::of(g);
    SeriesRow {
        t: g.time,
        mass: g.mass(),
        min_f: g.min(),
        max_f: g.max(),
        d_fstar: o.d_fstar,
        p2: o.p2_scalar,
    }
}

/// Evolves from the seeded uniform-random initial condition. `on_snapshot`
/// sees every observed state.
pub fn meanfield_evolve(
    params: ScaledParams,
    grid: GridSize,
    evolve_cfg: &EvolveConfig,
    seed: u64,
    mut on_snapshot: impl FnMut(&KineticGrid),
) -> Result<KineticGrid> {
    let f0 = KineticGrid::random_uniform(grid.nx, grid.ny, grid.nth, seed)?;
    Ok(evolve(f0, params, evolve_cfg, |s| on_snapshot(s.grid))?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanfieldSummary {
    pub seed: u64,
    pub config: MeanfieldConfig,
    pub time: f64,
    pub mass: f64,
    pub min_f: f64,
    pub max_f: f64,
    pub d_fstar: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    /// `Σ p₂ ΔxΔy`; a negative first component means lanes along y.
    pub p2_total: [f64; 2],
    pub label: String,
    pub code_version: String,
}

/// Writes `f`, `rho` and `c` dumps of a kinetic state into `dir`, each name
/// followed by `suffix`.
pub fn dump_state(dir: &Path, suffix: &str, g: &KineticGrid, alpha: f64) -> Result<()> {
    let o = ObservableSet::of(g);
    let grid = Grid2::unit(g.nx, g.ny);
    let c = solve_chemical(&o.rho, grid, alpha)?;
    write_grid(&dir.join(format!("f{suffix}")), &GridMeta::kinetic("f", g.nx, g.ny, g.nth, g.time), &g.f)?;
    write_grid(&dir.join(format!("rho{suffix}")), &GridMeta::spatial("rho", g.nx, g.ny, g.time), &o.rho)?;
    write_grid(&dir.join(format!("c{suffix}")), &GridMeta::spatial("c", g.nx, g.ny, g.time), &c.values)?;
    Ok(())
}

/// Runs the kinetic solver; writes `series.csv`, final `f`/`rho`/`c` dumps and
/// `summary.json`.
pub fn run_meanfield(cfg: &MeanfieldConfig, out: &Path) -> Result<MeanfieldSummary> {
    let evolve_cfg = EvolveConfig {
        t_max: cfg.t_max,
        stepping: cfg.stepping,
        snapshot_every: cfg.snapshot_every,
    };
    let mut series = Vec::new();
    let mut dump_err = None;
    let mut count = 0usize;
    let last = meanfield_evolve(cfg.params, cfg.grid, &evolve_cfg, cfg.seed, |g| {
        series.push(series_row(g));
        if cfg.dump_snapshots && dump_err.is_none() {
            if let Err(e) = dump_state(&out.join("snapshots"), &format!("_{count:05}"), g, cfg.params.alpha) {
                dump_err = Some(e);
            }
        }
        count += 1;
    })?;
    if let Some(e) = dump_err {
        return Err(e);
    }
    write_csv(&out.join("series.csv"), &series)?;
    dump_state(out, "", &last, cfg.params.alpha)?;
    let o = ObservableSet::of(&last);
    let tot = second_moment_total(last.dx() * last.dy(), &o.p2);
    let summary = MeanfieldSummary {
        seed: cfg.seed,
        config: *cfg,
        time: last.time,
        mass: last.mass(),
        min_f: last.min(),
        max_f: last.max(),
        d_fstar: o.d_fstar,
        p2: o.p2_scalar,
        p2_total: [tot.x, tot.y],
        label: classify(o.d_fstar, o.p2_scalar, Thresholds::default()).label.to_string(),
        code_version: CODE_VERSION.to_owned(),
    };
    save(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct XcRow {
    x: f64,
    c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ResidualRow {
    iteration: usize,
    residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarySummary {
    pub config: StationaryFileConfig,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub mass: f64,
    pub min_f: f64,
    pub code_version: String,
}

/// Solves for a stationary state; writes the `f` dump (`ny = 1`), `c.csv`,
/// `residual.csv` and `summary.json`.
pub fn run_stationary(cfg: &StationaryFileConfig, out: &Path) -> Result<StationaryState> {
    let sc = cfg.solver_config();
    let s = solve_stationary_from(&cfg.params, &sc, initial_chemical(sc.nx))?;
    let meta = GridMeta { ny: 1, dy: 1.0, ..GridMeta::kinetic("f", s.nx, 1, s.nth, 0.0) };
    write_grid(&out.join("f"), &meta, &s.f)?;
    let c: Vec<XcRow> = (0..s.nx).map(|i| XcRow { x: s.x(i), c: s.c[i] }).collect();
    write_csv(&out.join("c.csv"), &c)?;
    let h: Vec<ResidualRow> = s
        .history
        .iter()
        .enumerate()
        .map(|(i, &r)| ResidualRow { iteration: i + 1, residual: r })
        .collect();
    write_csv(&out.join("residual.csv"), &h)?;
    let summary = StationarySummary {
        config: *cfg,
        residual: s.residual,
        iterations: s.iterations,
        converged: s.converged,
        mass: s.mass(),
        min_f: s.f.iter().copied().fold(f64::INFINITY, f64::min),
        code_version: CODE_VERSION.to_owned(),
    };
    save(&out.join("summary.json"), &summary)?;
    Ok(s)
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Instability line of the truncated system.
pub fn line_rows(pes: &[f64], base: &DispersionParams, bracket: Bracket) -> Result<Vec<LineRow>> {
    Ok(trace_instability_line(pes, base, bracket)?
        .into_iter()
        .map(|p| LineRow { pe: p.pe, gamma_star: p.gamma_star, n: p.n })
        .collect())
}

/// Instability line of the adiabatic closure.
pub fn adiabatic_line_rows(pes: &[f64], base: &DispersionParams, bracket: Bracket) -> Result<Vec<LineRow>> {
    let mut rows = Vec::with_capacity(pes.len());
    for &pe in pes {
        let gamma_star = match bisect(|g| adiabatic_growth_rate(g, pe, base), bracket) {
            Ok(g) => Some(g),
            Err(CoreError::NoSignChange { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(LineRow { pe, gamma_star, n: base.n });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenInfo {
    pub params: DispersionParams,
    pub sigma_re: f64,
    pub sigma_im: f64,
    pub coefficients_re: Vec<f64>,
    pub coefficients_im: Vec<f64>,
    pub residual: f64,
}

/// Writes the leading eigenfunction on `x ∈ [−½, ½)`, `θ ∈ [−π, π)` to
/// `stem.f64`/`stem.json` and the eigenpair to `stem.eigen.json`.
pub fn write_eigenfunction(stem: &Path, dp: &DispersionParams, nx: usize, nth: usize) -> Result<DispersionResult> {
    let dr = dispersion(dp)?;
    let data = reconstruct_eigenfunction(&dr, dp, nx, nth);
    let meta = GridMeta {
        ny: 1,
        dy: 1.0,
        x0: Some(-0.5),
        theta0: Some(-std::f64::consts::PI),
        ..GridMeta::kinetic("eigenfunction", nx, 1, nth, 0.0)
    };
    write_grid(stem, &meta, &data)?;
    let info = EigenInfo {
        params: *dp,
        sigma_re: dr.sigma_max.re,
        sigma_im: dr.sigma_max.im,
        coefficients_re: dr.coefficients.iter().map(|c| c.re).collect(),
        coefficients_im: dr.coefficients.iter().map(|c| c.im).collect(),
        residual: dr.residual,
    };
    let mut info_path = stem.as_os_str().to_owned();
    info_path.push(".eigen.json");
    save(Path::new(&info_path), &info)?;
    Ok(dr)
}
