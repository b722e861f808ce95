//! Upwind finite-volume scheme for the kinetic mean-field equation on the
//! periodic `x–y–θ` lattice.
//!
//! The equation is written in mobility form `∂_t f + ∇·(U f) = 0` with
//!
//! ```text
//! U^x = -D_T ∂_x log f + Pe cos θ
//! U^y = -D_T ∂_y log f + Pe sin θ
//! U^θ = -∂_θ log f + γ n(θ)·∇c(x + λ e(θ))
//! ```
//!
//! Velocities live on cell faces, fluxes are upwinded, time stepping is
//! forward Euler. Cells are stored with `i` fastest and `k` (angle) slowest.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{gradient_centered_into, ChemicalField, Grid2, ScreenedPoisson, ShiftStencil};
use crate::math::{self, TAU};
use crate::params::ScaledParams;
use crate::vec2::Vec2;

/// Floor applied before taking logarithms of `f`.
pub const LOG_FLOOR: f64 = 1e-12;

/// Homogeneous steady state on the unit torus.
pub const F_STAR: f64 = 1.0 / TAU;

/// Cell averages `f_{i,j,k}` on the unit periodic box times the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticGrid {
    pub nx: usize,
    pub ny: usize,
    pub nth: usize,
    pub f: Vec<f64>,
    pub time: f64,
}

impl KineticGrid {
    pub fn new(nx: usize, ny: usize, nth: usize, f: Vec<f64>) -> Result<Self> {
        if nx < 3 || ny < 3 || nth < 3 {
            return Err(Error::Invalid("grid needs at least 3 points per axis"));
        }
        if f.len() != nx * ny * nth {
            return Err(Error::ShapeMismatch {
                expected: nx * ny * nth,
                found: f.len(),
            });
        }
        Ok(Self {
            nx,
            ny,
            nth,
            f,
            time: 0.0,
        })
    }

    /// `f ≡ 1/(2π)`.
    pub fn uniform(nx: usize, ny: usize, nth: usize) -> Result<Self> {
        Self::new(nx, ny, nth, vec![F_STAR; nx * ny * nth])
    }

    /// I.i.d. uniform `[0, 1)` cell values, rescaled to unit mass.
    pub fn random_uniform(nx: usize, ny: usize, nth: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = (0..nx * ny * nth).map(|_| rng.gen::<f64>()).collect();
        let mut g = Self::new(nx, ny, nth, f)?;
        g.normalize()?;
        Ok(g)
    }

    /// Samples `f(x_i, y_j, θ_k)` at the cell points.
    pub fn from_fn(nx: usize, ny: usize, nth: usize, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let mut g = Self::new(nx, ny, nth, vec![0.0; nx * ny * nth])?;
        for k in 0..nth {
            let th = g.theta(k);
            for j in 0..ny {
                let y = j as f64 * g.dy();
                for i in 0..nx {
                    let idx = g.index(i, j, k);
                    g.f[idx] = f(i as f64 * g.dx(), y, th);
                }
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    #[inline]
    pub fn dth(&self) -> f64 {
        TAU / self.nth as f64
    }

    #[inline]
    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.dth()
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dy() * self.dth()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.f.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn spatial(&self) -> Grid2 {
        Grid2::unit(self.nx, self.ny)
    }

    pub fn mass(&self) -> f64 {
        self.f.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.f.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescales to unit mass.
    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonPositive("mass"));
        }
        for v in &mut self.f {
            *v /= m;
        }
        Ok(())
    }
}

/// `u⁺ f_left + u⁻ f_right`.
#[inline]
pub fn upwind_flux(u: f64, f_left: f64, f_right: f64) -> f64 {
    if u > 0.0 {
        u * f_left
    } else {
        u * f_right
    }
}

/// Face velocities; entry `idx` holds the face on the `+` side of cell `idx`
/// along each axis (`i+½`, `j+½`, `k+½`).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVelocities {
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub uth: Vec<f64>,
}

impl FaceVelocities {
    fn zeros(n: usize) -> Self {
        Self {
            ux: vec![0.0; n],
            uy: vec![0.0; n],
            uth: vec![0.0; n],
        }
    }

    /// `(max|U^x|, max|U^y|, max|U^θ|)`.
    pub fn max_abs(&self) -> (f64, f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (m(&self.ux), m(&self.uy), m(&self.uth))
    }
}

/// Precomputed angular tables and the look-ahead stencils.
#[derive(Debug, Clone)]
struct Angular {
    cos_k: Vec<f64>,
    sin_k: Vec<f64>,
    // n(θ_{k+½}) components
    sin_half: Vec<f64>,
    cos_half: Vec<f64>,
    shifts: Vec<ShiftStencil>,
}

impl Angular {
    fn new(grid: Grid2, nth: usize, lambda: f64) -> Self {
        let dth = TAU / nth as f64;
        let th = |k: f64| k * dth;
        let shifts = if lambda > 0.0 {
            (0..nth)
                .map(|k| ShiftStencil::new(grid, Vec2::unit(th(k as f64)) * lambda))
                .collect()
        } else {
            Vec::new()
        };
        Self {
            cos_k: (0..nth).map(|k| math::cos(th(k as f64))).collect(),
            sin_k: (0..nth).map(|k| math::sin(th(k as f64))).collect(),
            sin_half: (0..nth).map(|k| math::sin(th(k as f64 + 0.5))).collect(),
            cos_half: (0..nth).map(|k| math::cos(th(k as f64 + 0.5))).collect(),
            shifts,
        }
    }
}

/// Reusable state for repeated right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct FvSolver {
    params: ScaledParams,
    nx: usize,
    ny: usize,
    nth: usize,
    poisson: ScreenedPoisson,
    angular: Angular,
    logf: Vec<f64>,
    rho: Vec<f64>,
    c: Vec<f64>,
    gx: Vec<f64>,
    gy: Vec<f64>,
    // c(x_{ij} + λ e(θ_k)), one plane per k
    shifted: Vec<f64>,
    vel: FaceVelocities,
}

impl FvSolver {
    pub fn new(params: ScaledParams, nx: usize, ny: usize, nth: usize) -> Result<Self> {
        let params = params.validate()?;
        if nth < 3 {
            return Err(Error::Invalid("grid needs at least 3 points per axis"));
        }
        let grid = Grid2::unit(nx, ny);
        let poisson = ScreenedPoisson::new(grid, params.alpha)?;
        let n = nx * ny * nth;
        let nxy = nx * ny;
        Ok(Self {
            params,
            nx,
            ny,
            nth,
            poisson,
            angular: Angular::new(grid, nth, params.lambda),
            logf: vec![0.0; n],
            rho: vec![0.0; nxy],
            c: vec![0.0; nxy],
            gx: vec![0.0; nxy],
            gy: vec![0.0; nxy],
            shifted: if params.lambda > 0.0 { vec![0.0; n] } else { Vec::new() },
            vel: FaceVelocities::zeros(n),
        })
    }

    pub fn for_grid(params: ScaledParams, g: &KineticGrid) -> Result<Self> {
        Self::new(params, g.nx, g.ny, g.nth)
    }

    pub fn params(&self) -> ScaledParams {
        self.params
    }

    /// Chemical field from the most recent evaluation.
    pub fn chemical(&self) -> ChemicalField {
        ChemicalField {
            grid: Grid2::unit(self.nx, self.ny),
            values: self.c.clone(),
        }
    }

    /// Face velocities from the most recent evaluation.
    pub fn velocities(&self) -> &FaceVelocities {
        &self.vel
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        let n = self.nx * self.ny * self.nth;
        if f.len() == n {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: n,
                found: f.len(),
            })
        }
    }

    /// Density and chemical field for `f`.
    fn update_chemical(&mut self, f: &[f64]) -> Result<()> {
        let nxy = self.nx * self.ny;
        let dth = TAU / self.nth as f64;
        self.rho.iter_mut().for_each(|r| *r = 0.0);
        for plane in f.chunks_exact(nxy) {
            for (r, v) in self.rho.iter_mut().zip(plane) {
                *r += v;
            }
        }
        self.rho.iter_mut().for_each(|r| *r *= dth);
        self.poisson.solve_into(&self.rho, &mut self.c)
    }

    /// Face velocities for `f` with a given chemical field.
    fn update_velocities(&mut self, f: &[f64]) {
        let (nx, ny, nth) = (self.nx, self.ny, self.nth);
        let nxy = nx * ny;
        let grid = Grid2::unit(nx, ny);
        let p = self.params;
        let (dx, dy, dth) = (1.0 / nx as f64, 1.0 / ny as f64, TAU / nth as f64);
        for (l, v) in self.logf.iter_mut().zip(f) {
            *l = math::ln(v.max(LOG_FLOOR));
        }

        let look_ahead = p.lambda > 0.0;
        if look_ahead {
            for (k, st) in self.angular.shifts.iter().enumerate() {
                st.apply(grid, &self.c, &mut self.shifted[k * nxy..(k + 1) * nxy]);
            }
        } else {
            gradient_centered_into(&self.c, grid, &mut self.gx, &mut self.gy);
        }

        let (ax, ay, ath) = (p.d_t / dx, p.d_t / dy, 1.0 / dth);
        let chem = p.gamma / (p.lambda.max(f64::MIN_POSITIVE) * dth);
        let l = &self.logf;
        for k in 0..nth {
            let kp = (k + 1) % nth;
            let (ck, sk) = (p.pe * self.angular.cos_k[k], p.pe * self.angular.sin_k[k]);
            let (sh, ch) = (p.gamma * self.angular.sin_half[k], p.gamma * self.angular.cos_half[k]);
            for j in 0..ny {
                let jp = (j + 1) % ny;
                let row = nx * (j + ny * k);
                let row_up = nx * (jp + ny * k);
                let row_th = nx * (j + ny * kp);
                for i in 0..nx {
                    let ip = if i + 1 == nx { 0 } else { i + 1 };
                    let idx = row + i;
                    let s = i + nx * j;
                    self.vel.ux[idx] = -ax * (l[row + ip] - l[idx]) + ck;
                    self.vel.uy[idx] = -ay * (l[row_up + i] - l[idx]) + sk;
                    let diff = -ath * (l[row_th + i] - l[idx]);
                    self.vel.uth[idx] = if look_ahead {
                        diff + chem * (self.shifted[kp * nxy + s] - self.shifted[k * nxy + s])
                    } else {
                        diff - sh * self.gx[s] + ch * self.gy[s]
                    };
                }
            }
        }
    }

    /// Conservative divergence of the upwind fluxes, given current velocities.
    fn assemble(&self, f: &[f64], out: &mut [f64]) {
        let (nx, ny, nth) = (self.nx, self.ny, self.nth);
        let (rdx, rdy, rdth) = (nx as f64, ny as f64, nth as f64 / TAU);
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..nth {
            let kp = (k + 1) % nth;
            for j in 0..ny {
                let jp = (j + 1) % ny;
                let row = nx * (j + ny * k);
                let row_up = nx * (jp + ny * k);
                let row_th = nx * (j + ny * kp);
                for i in 0..nx {
                    let ip = if i + 1 == nx { 0 } else { i + 1 };
                    let idx = row + i;
                    let fx = rdx * upwind_flux(self.vel.ux[idx], f[idx], f[row + ip]);
                    out[idx] -= fx;
                    out[row + ip] += fx;
                    let fy = rdy * upwind_flux(self.vel.uy[idx], f[idx], f[row_up + i]);
                    out[idx] -= fy;
                    out[row_up + i] += fy;
                    let ft = rdth * upwind_flux(self.vel.uth[idx], f[idx], f[row_th + i]);
                    out[idx] -= ft;
                    out[row_th + i] += ft;
                }
            }
        }
    }

    /// `df/dt` for the cell values `f`; also refreshes the chemical field and
    /// the face velocities.
    pub fn rhs(&mut self, f: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(f)?;
        self.check(out)?;
        self.update_chemical(f)?;
        self.update_velocities(f);
        self.assemble(f, out);
        Ok(())
    }
}

/// Face velocities for `f` with an externally supplied chemical field.
pub fn face_velocities(f: &KineticGrid, c: &ChemicalField, p: ScaledParams) -> Result<FaceVelocities> {
    let mut s = FvSolver::for_grid(p, f)?;
    if c.grid != f.spatial() {
        return Err(Error::ShapeMismatch {
            expected: f.nx * f.ny,
            found: c.values.len(),
        });
    }
    s.check(&f.f)?;
    s.c.copy_from_slice(&c.values);
    s.update_velocities(&f.f);
    Ok(s.vel)
}

/// One-shot right-hand side.
pub fn fv_rhs(f: &KineticGrid, p: ScaledParams) -> Result<Vec<f64>> {
    let mut s = FvSolver::for_grid(p, f)?;
    let mut out = vec![0.0; f.len()];
    s.rhs(&f.f, &mut out)?;
    Ok(out)
}

/// Lower and upper clamps for the adaptive step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DtBounds {
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for DtBounds {
    fn default() -> Self {
        Self {
            dt_min: 1e-9,
            dt_max: 1e-2,
        }
    }
}

/// Unclamped step bound
/// `cfl · min(Δx/max|U^x|, Δy/max|U^y|, Δθ/max|U^θ|, Δx²/(4D_T), Δθ²/4)`.
pub fn dt_bound(vel: &FaceVelocities, p: ScaledParams, g: &KineticGrid, cfl: f64) -> f64 {
    let (mx, my, mt) = vel.max_abs();
    let adv = |h: f64, u: f64| if u > 0.0 { h / u } else { f64::INFINITY };
    let h = g.dx().min(g.dy());
    let diff_x = if p.d_t > 0.0 { h * h / (4.0 * p.d_t) } else { f64::INFINITY };
    let diff_th = g.dth() * g.dth() / 4.0;
    cfl * adv(g.dx(), mx)
        .min(adv(g.dy(), my))
        .min(adv(g.dth(), mt))
        .min(diff_x)
        .min(diff_th)
}

/// Adaptive step. Clamped above by `dt_max`; a bound below `dt_min` is an error.
pub fn adaptive_dt(vel: &FaceVelocities, p: ScaledParams, g: &KineticGrid, cfl: f64, bounds: DtBounds) -> Result<f64> {
    let dt = dt_bound(vel, p, g, cfl);
    if !(dt >= bounds.dt_min) {
        return Err(Error::TimeStepUnderflow {
            dt,
            dt_min: bounds.dt_min,
            step: 0,
        });
    }
    Ok(dt.min(bounds.dt_max))
}

/// Time-stepping mode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum Stepping {
    Fixed { dt: f64 },
    Adaptive { cfl: f64, dt_min: f64, dt_max: f64 },
}

impl Stepping {
    pub fn adaptive(cfl: f64) -> Self {
        let b = DtBounds::default();
        Self::Adaptive {
            cfl,
            dt_min: b.dt_min,
            dt_max: b.dt_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub t_max: f64,
    pub stepping: Stepping,
    /// Time between snapshots; `None` reports only the initial and final state.
    pub snapshot_every: Option<f64>,
}

/// State handed to the snapshot observer.
#[derive(Debug)]
pub struct Snapshot<'a> {
    pub step: usize,
    pub grid: &'a KineticGrid,
    /// Chemical field of `grid`.
    pub c: &'a ChemicalField,
}

/// Forward Euler time marching from `f0` to `t_max`.
///
/// The observer sees the initial state, every state whose time reaches the
/// next multiple of `snapshot_every`, and the final state.
pub fn evolve(
    f0: KineticGrid,
    p: ScaledParams,
    cfg: &EvolveConfig,
    mut observer: impl FnMut(&Snapshot<'_>),
) -> Result<KineticGrid> {
    if !(cfg.t_max >= 0.0 && cfg.t_max.is_finite()) {
        return Err(Error::Negative("t_max"));
    }
    let mut solver = FvSolver::for_grid(p, &f0)?;
    let mut g = f0;
    let mut rhs = vec![0.0; g.len()];
    let t0 = g.time;
    let t_end = t0 + cfg.t_max;

    // fixed steps count from the start time so long runs do not drift
    let (fixed_dt, n_fixed) = match cfg.stepping {
        Stepping::Fixed { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::NonPositive("dt"));
            }
            (dt, libm::round(cfg.t_max / dt) as usize)
        }
        Stepping::Adaptive { cfl, .. } => {
            if !(cfl > 0.0) {
                return Err(Error::NonPositive("cfl"));
            }
            (0.0, 0)
        }
    };
    let snap_steps = cfg.snapshot_every.map(|s| (libm::round(s / fixed_dt.max(f64::MIN_POSITIVE)) as usize).max(1));
    let mut next_snap = cfg.snapshot_every.map(|s| t0 + s);

    let mut step = 0usize;
    solver.rhs(&g.f, &mut rhs)?;
    observer(&Snapshot {
        step,
        grid: &g,
        c: &solver.chemical(),
    });
    loop {
        let dt = match cfg.stepping {
            Stepping::Fixed { .. } => {
                if step >= n_fixed {
                    break;
                }
                fixed_dt
            }
            Stepping::Adaptive { cfl, dt_min, dt_max } => {
                let remaining = t_end - g.time;
                if remaining <= 1e-14 * t_end.abs().max(1.0) {
                    break;
                }
                let dt = adaptive_dt(solver.velocities(), p, &g, cfl, DtBounds { dt_min, dt_max })
                    .map_err(|e| match e {
                        Error::TimeStepUnderflow { dt, dt_min, .. } => Error::TimeStepUnderflow { dt, dt_min, step: step as u64 },
                        other => other,
                    })?;
                dt.min(remaining)
            }
        };
        let mut finite = true;
        for (v, r) in g.f.iter_mut().zip(&rhs) {
            *v += dt * r;
            finite &= v.is_finite();
        }
        step += 1;
        g.time = match cfg.stepping {
            Stepping::Fixed { .. } => t0 + step as f64 * fixed_dt,
            Stepping::Adaptive { .. } => g.time + dt,
        };
        if !finite {
            return Err(Error::NonFinite { step: step as u64, time: g.time });
        }
        solver.rhs(&g.f, &mut rhs)?;

        let last = match cfg.stepping {
            Stepping::Fixed { .. } => step >= n_fixed,
            Stepping::Adaptive { .. } => t_end - g.time <= 1e-14 * t_end.abs().max(1.0),
        };
        let due = match (cfg.stepping, snap_steps, next_snap.as_mut()) {
            (Stepping::Fixed { .. }, Some(every), _) => step.is_multiple_of(every),
            (Stepping::Adaptive { .. }, _, Some(next))
                if g.time >= *next - 1e-12 => {
                    while *next <= g.time + 1e-12 {
                        *next += cfg.snapshot_every.unwrap_or(f64::INFINITY);
                    }
                    true
                }
            _ => false,
        };
        if due || last {
            observer(&Snapshot {
                step,
                grid: &g,
                c: &solver.chemical(),
            });
        }
    }
    Ok(g)
}
