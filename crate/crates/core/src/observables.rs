//! Angular moments of the kinetic density and the phase classification.

use alloc::vec;
use alloc::vec::Vec;

use crate::fv::{KineticGrid, F_STAR};
use crate::math;
use crate::vec2::Vec2;

/// `ρ_{i,j} = Δθ Σ_k f_{i,j,k}`.
pub fn spatial_density(f: &KineticGrid) -> Vec<f64> {
    let nxy = f.nx * f.ny;
    let mut rho = vec![0.0; nxy];
    for plane in f.f.chunks_exact(nxy) {
        for (r, v) in rho.iter_mut().zip(plane) {
            *r += v;
        }
    }
    let dth = f.dth();
    rho.iter_mut().for_each(|r| *r *= dth);
    rho
}

/// `Δθ Σ_k e(mθ_k) f_{i,j,k}` on every spatial node.
fn angular_moment(f: &KineticGrid, m: f64) -> Vec<Vec2> {
    let nxy = f.nx * f.ny;
    let dth = f.dth();
    let mut out = vec![Vec2::ZERO; nxy];
    for (k, plane) in f.f.chunks_exact(nxy).enumerate() {
        let e = Vec2::unit(m * f.theta(k)) * dth;
        for (o, v) in out.iter_mut().zip(plane) {
            *o += e * *v;
        }
    }
    out
}

/// Polarisation `p_{i,j} = Δθ Σ_k e(θ_k) f_{i,j,k}`.
pub fn polarisation(f: &KineticGrid) -> Vec<Vec2> {
    angular_moment(f, 1.0)
}

/// Second-moment field `p₂` and the scalar `P₂ = |ΔxΔy Σ p₂|`.
pub fn second_moment_scalar(f: &KineticGrid) -> (Vec<Vec2>, f64) {
    let p2 = angular_moment(f, 2.0);
    (p2.clone(), second_moment_total(f.dx() * f.dy(), &p2).norm())
}

/// `ΔxΔy Σ p₂` as a vector. Its sign distinguishes lanes along `y`
/// (negative x component) from lanes along `x`.
pub fn second_moment_total(cell_area: f64, p2: &[Vec2]) -> Vec2 {
    p2.iter().fold(Vec2::ZERO, |a, b| a + *b) * cell_area
}

/// `sqrt(ΔxΔyΔθ Σ (f − 1/(2π))²)`.
pub fn distance_to_homogeneous(f: &KineticGrid) -> f64 {
    let s: f64 = f.f.iter().map(|v| (v - F_STAR) * (v - F_STAR)).sum();
    math::sqrt(s * f.cell_volume())
}

/// Local maxima of a periodic `nx × ny` field (`i` fastest): nodes not
/// exceeded by any of their eight neighbours. Sorted by value, largest first.
pub fn local_maxima_2d(values: &[f64], nx: usize, ny: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = values[i + nx * j];
            let mut is_max = true;
            'n: for dj in [ny - 1, 0, 1] {
                for di in [nx - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if values[(i + di) % nx + nx * ((j + dj) % ny)] > v {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if is_max {
                out.push((i, j, v));
            }
        }
    }
    out.sort_by(|a, b| b.2.total_cmp(&a.2));
    out
}

/// Homogeneous, spot or lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Phase {
    H,
    S,
    L,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::H => "H",
            Phase::S => "S",
            Phase::L => "L",
        }
    }
}

impl core::fmt::Display for Phase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Phase {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "H" => Ok(Phase::H),
            "S" => Ok(Phase::S),
            "L" => Ok(Phase::L),
            _ => Err(crate::Error::Invalid("phase label must be H, S or L")),
        }
    }
}

/// Classification thresholds: homogeneous below `tau_h` in `d_{f*}`, lane at or
/// above `tau_l` in `P₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Thresholds {
    pub tau_h: f64,
    pub tau_l: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { tau_h: 0.05, tau_l: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseLabel {
    pub label: Phase,
    pub d_fstar: f64,
    pub p2_mean: f64,
}

pub fn classify(d_fstar_max: f64, p2_mean: f64, t: Thresholds) -> PhaseLabel {
    let label = if d_fstar_max < t.tau_h {
        Phase::H
    } else if p2_mean >= t.tau_l {
        Phase::L
    } else {
        Phase::S
    };
    PhaseLabel {
        label,
        d_fstar: d_fstar_max,
        p2_mean,
    }
}

/// All observables of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub rho: Vec<f64>,
    pub p: Vec<Vec2>,
    pub p2: Vec<Vec2>,
    pub p2_scalar: f64,
    pub d_fstar: f64,
    pub time: f64,
}

impl ObservableSet {
    pub fn of(f: &KineticGrid) -> Self {
        let (p2, p2_scalar) = second_moment_scalar(f);
        Self {
            rho: spatial_density(f),
            p: polarisation(f),
            p2,
            p2_scalar,
            d_fstar: distance_to_homogeneous(f),
            time: f.time,
        }
    }
}
