//! Tamed Euler simulation of N chemotactic active Brownian particles.
//!
//! ```text
//! X_i ← X_i + v0 e(Θ_i) Δt + sqrt(2 D_T Δt) ζ_i
//! Θ_i ← Θ_i + F_i Δt / (1 + |F_i| Δt) + sqrt(2 D_R Δt) ζ_i
//! F_i  = (γ/N) n(Θ_i) · Σ_{j≠i} ∇K(X_i + λ e(Θ_i) − X_j)
//! ```
//!
//! Random numbers: `ChaCha8Rng` seeded from the run seed, stream `0` for the
//! initial condition and stream `i + 1` for particle `i`; normals from
//! `rand_distr::StandardNormal` (ziggurat).

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::math::{self, TAU};
use crate::params::{PhysicalParams, ScaledParams};
use crate::vec2::Vec2;

/// Recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng, stream 0 initial condition, stream i+1 particle i; StandardNormal ziggurat";

/// Coefficients of the particle SDE in whatever units the run uses.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParticleModel {
    pub v0: f64,
    pub d_t: f64,
    pub d_r: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub kernel: KernelSpec,
    pub n: usize,
}

impl ParticleModel {
    /// Physical units: `κ = sqrt(α/D)`, box `L`.
    pub fn from_physical(p: &PhysicalParams) -> Result<Self> {
        p.validate()?;
        Self {
            v0: p.v0,
            d_t: p.d_t,
            d_r: p.d_r,
            gamma: p.gamma,
            lambda: p.lambda,
            kernel: KernelSpec::from_rates(p.alpha, p.d, p.box_len)?,
            n: p.n,
        }
        .validate()
    }

    /// Rescaled units: speed `Pe`, `D_R = 1`, `κ = sqrt(α)`.
    pub fn from_scaled(p: &ScaledParams, n: usize, box_len: f64) -> Result<Self> {
        let p = p.validate()?;
        Self {
            v0: p.pe,
            d_t: p.d_t,
            d_r: 1.0,
            gamma: p.gamma,
            lambda: p.lambda,
            kernel: KernelSpec::new(math::sqrt(p.alpha), box_len)?,
            n,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        let checks = [
            (self.v0, "v0"),
            (self.d_t, "D_T"),
            (self.d_r, "D_R"),
            (self.gamma, "gamma"),
            (self.lambda, "lambda"),
        ];
        for (v, name) in checks {
            if !v.is_finite() {
                return Err(Error::NotFinite(name));
            }
            if v < 0.0 {
                return Err(Error::Negative(name));
            }
        }
        if self.n == 0 {
            return Err(Error::Invalid("particle count must be at least 1"));
        }
        KernelSpec::new(self.kernel.kappa, self.kernel.box_len)?;
        Ok(self)
    }

    #[inline]
    pub fn box_len(&self) -> f64 {
        self.kernel.box_len
    }
}

/// Positions, orientations and per-particle random streams.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    /// Wrapped into `[0, L)²`.
    pub positions: Vec<Vec2>,
    /// Initial position plus cumulative displacement, never wrapped.
    pub unwrapped: Vec<Vec2>,
    /// Wrapped into `[0, 2π)`.
    pub angles: Vec<f64>,
    /// Accumulated angle, never wrapped.
    pub angles_unwrapped: Vec<f64>,
    pub time: f64,
    pub step: u64,
    /// Kernel evaluations skipped because two points (nearly) coincided.
    pub near_singular: u64,
    rngs: Vec<ChaCha8Rng>,
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(s);
    r
}

impl ParticleState {
    /// Uniform random positions and angles.
    pub fn random(n: usize, box_len: f64, seed: u64) -> Self {
        let mut ic = stream(seed, 0);
        let positions: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(ic.gen::<f64>() * box_len, ic.gen::<f64>() * box_len))
            .collect();
        let angles: Vec<f64> = (0..n).map(|_| ic.gen::<f64>() * TAU).collect();
        Self::from_parts(positions, angles, seed)
    }

    /// Given initial positions and angles.
    pub fn from_parts(positions: Vec<Vec2>, angles: Vec<f64>, seed: u64) -> Self {
        let n = positions.len();
        Self {
            unwrapped: positions.clone(),
            angles_unwrapped: angles.clone(),
            positions,
            angles,
            time: 0.0,
            step: 0,
            near_singular: 0,
            rngs: (0..n as u64).map(|i| stream(seed, i + 1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// `F_i` and the number of near-singular kernel encounters.
///
/// The self-term is left out for every λ: at λ = 0 it is singular, at λ > 0 its
/// gradient is parallel to `e(Θ_i)` and projects to zero on `n(Θ_i)`.
pub fn drift_torque(i: usize, state: &ParticleState, model: &ParticleModel) -> (f64, u64) {
    let n = state.len();
    if model.gamma == 0.0 || n < 2 {
        return (0.0, 0);
    }
    let th = state.angles[i];
    let probe = state.positions[i] + Vec2::unit(th) * model.lambda;
    let mut sum = Vec2::ZERO;
    let mut skipped = 0;
    for (j, xj) in state.positions.iter().enumerate() {
        if j == i {
            continue;
        }
        match model.kernel.gradient(probe - *xj) {
            Some(g) => sum += g,
            None => skipped += 1,
        }
    }
    (model.gamma / model.n as f64 * Vec2::normal(th).dot(sum), skipped)
}

/// `FΔt / (1 + |F|Δt)`; its magnitude is below `min(1, |F|Δt)`.
#[inline]
pub fn tamed_increment(f: f64, dt: f64) -> f64 {
    f * dt / (1.0 + f.abs() * dt)
}

/// Step size, horizon and recording cadence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub model: ParticleModel,
    pub dt: f64,
    pub t_max: f64,
    /// Steps between snapshots.
    pub record_every: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::NonPositive("dt"));
        }
        if !(self.t_max >= self.dt) {
            return Err(Error::Invalid("t_max must be at least dt"));
        }
        if self.record_every == 0 {
            return Err(Error::NonPositive("record_every"));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        libm::round(self.t_max / self.dt) as u64
    }
}

/// Advances every particle by one tamed Euler step. Torques are evaluated on
/// the positions at the start of the step.
pub fn step(state: &mut ParticleState, model: &ParticleModel, dt: f64) {
    let n = state.len();
    let mut torque = Vec::with_capacity(n);
    for i in 0..n {
        let (f, skipped) = drift_torque(i, state, model);
        state.near_singular += skipped;
        torque.push(f);
    }
    let sx = math::sqrt(2.0 * model.d_t * dt);
    let sr = math::sqrt(2.0 * model.d_r * dt);
    let l = model.box_len();
    for (i, f) in torque.into_iter().enumerate() {
        let rng = &mut state.rngs[i];
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let zr: f64 = rng.sample(StandardNormal);
        let th = state.angles[i];
        let dx = Vec2::unit(th) * (model.v0 * dt) + Vec2::new(zx, zy) * sx;
        let inc = tamed_increment(f, dt);
        debug_assert!(inc.abs() < 1.0 && inc.abs() <= f.abs() * dt);
        let dth = inc + sr * zr;
        let p = state.positions[i] + dx;
        state.positions[i] = Vec2::new(math::wrap(p.x, l), math::wrap(p.y, l));
        state.unwrapped[i] += dx;
        state.angles[i] = math::wrap_angle(th + dth);
        state.angles_unwrapped[i] += dth;
    }
    state.step += 1;
    state.time = state.step as f64 * dt;
}

/// One recorded frame.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Frame {
    pub t: f64,
    pub positions: Vec<Vec2>,
    pub unwrapped: Vec<Vec2>,
    pub angles: Vec<f64>,
    pub angles_unwrapped: Vec<f64>,
}

impl Frame {
    fn of(s: &ParticleState) -> Self {
        Self {
            t: s.time,
            positions: s.positions.clone(),
            unwrapped: s.unwrapped.clone(),
            angles: s.angles.clone(),
            angles_unwrapped: s.angles_unwrapped.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryRecord {
    pub frames: Vec<Frame>,
    pub near_singular: u64,
    pub seed: u64,
}

impl TrajectoryRecord {
    /// Frame closest in time to `t`.
    pub fn frame_at(&self, t: f64) -> Option<&Frame> {
        self.frames
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// Runs from a uniform random initial condition.
pub fn run_trajectory(cfg: &SimConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let state = ParticleState::random(cfg.model.n, cfg.model.box_len(), cfg.seed);
    run_from(state, cfg)
}

/// Runs from a given state; records step 0, every `record_every` steps and the
/// final step.
pub fn run_from(mut state: ParticleState, cfg: &SimConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if state.len() != cfg.model.n {
        return Err(Error::ShapeMismatch {
            expected: cfg.model.n,
            found: state.len(),
        });
    }
    let steps = cfg.steps();
    let mut frames = Vec::with_capacity((steps / cfg.record_every + 2) as usize);
    frames.push(Frame::of(&state));
    for s in 1..=steps {
        step(&mut state, &cfg.model, cfg.dt);
        if s % cfg.record_every == 0 || s == steps {
            frames.push(Frame::of(&state));
        }
    }
    Ok(TrajectoryRecord {
        frames,
        near_singular: state.near_singular,
        seed: cfg.seed,
    })
}

/// Periodic centroid: circular mean of each coordinate.
pub fn circular_centroid(positions: &[Vec2], box_len: f64) -> Vec2 {
    let k = TAU / box_len;
    let mut acc = [(0.0, 0.0), (0.0, 0.0)];
    for p in positions {
        acc[0].0 += math::cos(k * p.x);
        acc[0].1 += math::sin(k * p.x);
        acc[1].0 += math::cos(k * p.y);
        acc[1].1 += math::sin(k * p.y);
    }
    let ang = |(c, s): (f64, f64)| math::wrap(math::atan2(s, c) / k, box_len);
    Vec2::new(ang(acc[0]), ang(acc[1]))
}

/// `|mean_i (U_i(b) − U_i(a))|` from unwrapped coordinates.
pub fn net_displacement(a: &Frame, b: &Frame) -> f64 {
    let n = a.unwrapped.len().max(1) as f64;
    let s = a
        .unwrapped
        .iter()
        .zip(&b.unwrapped)
        .fold(Vec2::ZERO, |acc, (p, q)| acc + (*q - *p));
    (s * (1.0 / n)).norm()
}

/// Minimal-image distance between the circular centroids of two frames.
pub fn centroid_shift(a: &Frame, b: &Frame, box_len: f64) -> f64 {
    let d = circular_centroid(&b.positions, box_len) - circular_centroid(&a.positions, box_len);
    Vec2::new(math::minimal_image(d.x, box_len), math::minimal_image(d.y, box_len)).norm()
}

/// Cluster net displacement of a record over `[t1, t2]`.
pub fn cluster_displacement(rec: &TrajectoryRecord, t1: f64, t2: f64) -> Option<f64> {
    Some(net_displacement(rec.frame_at(t1)?, rec.frame_at(t2)?))
}
