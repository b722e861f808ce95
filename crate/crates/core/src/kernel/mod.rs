//! Periodic screened-Poisson kernel `K(x) = K_0(κ |x|)` with `κ = sqrt(α/D)`.
//!
//! Distances are minimal-image distances on the periodic square; no lattice sum
//! over further periodic copies is taken. The neglected images are of relative
//! size `O(exp(-κ L / 2))`.
//!
//! Normalization: the free-space Green's function of `D Δc - α c + ρ = 0` in two
//! dimensions is `K_0(κ|x|) / (2π D)`, so `c = GREEN_NORMALIZATION / D * (K * ρ)`.
//! The particle drift uses the bare sum of `∇K` without that factor.

mod bessel;

use alloc::vec;
use alloc::vec::Vec;

pub use bessel::{bessel_k0, bessel_k1};
pub(crate) use bessel::k0_k1;

use crate::error::{Error, Result};
use crate::math::{self, PI};
use crate::vec2::Vec2;

/// Constant `1/(2π)` relating the kernel convolution to the screened-Poisson solution.
pub const GREEN_NORMALIZATION: f64 = 1.0 / (2.0 * PI);

/// Kernel evaluations closer than this fraction of the box are treated as coincident.
pub const NEAR_SINGULAR_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelSpec {
    /// Screening wavenumber `sqrt(α/D)`.
    pub kappa: f64,
    /// Side of the periodic box.
    pub box_len: f64,
}

impl KernelSpec {
    pub fn new(kappa: f64, box_len: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::NonPositive("kappa"));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return Err(Error::NonPositive("box"));
        }
        Ok(Self { kappa, box_len })
    }

    /// Kernel for pheromone decay `alpha` and diffusivity `d`.
    pub fn from_rates(alpha: f64, d: f64, box_len: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::NonPositive("D"));
        }
        Self::new(math::sqrt(alpha / d), box_len)
    }

    pub fn r_cut(&self) -> f64 {
        NEAR_SINGULAR_FRACTION * self.box_len
    }

    pub fn minimal_image(&self, r: Vec2) -> Vec2 {
        Vec2::new(
            math::minimal_image(r.x, self.box_len),
            math::minimal_image(r.y, self.box_len),
        )
    }

    /// `K_0(κ |r*|)`, or `None` when the minimal image is within `r_cut`.
    pub fn value(&self, r: Vec2) -> Option<f64> {
        let d = self.minimal_image(r).norm();
        (d >= self.r_cut()).then(|| k0_k1(self.kappa * d).0)
    }

    /// `∇K(r) = -κ K_1(κ|r*|) r*/|r*|`, or `None` when `|r*| < r_cut`.
    ///
    /// Callers treat `None` as a zero contribution and count the encounter.
    pub fn gradient(&self, r: Vec2) -> Option<Vec2> {
        let m = self.minimal_image(r);
        let d = m.norm();
        if d < self.r_cut() {
            return None;
        }
        let k1 = k0_k1(self.kappa * d).1;
        Some(m * (-self.kappa * k1 / d))
    }
}

/// Free-function form of [`KernelSpec::gradient`].
pub fn kernel_gradient(r: Vec2, spec: &KernelSpec) -> Option<Vec2> {
    spec.gradient(r)
}

/// `∫ K_0(κ|r|) dA` over the rectangle `[-hx/2, hx/2] × [-hy/2, hy/2]`.
///
/// In polar coordinates the radial integral is exact,
/// `∫_0^R K_0(κr) r dr = (1 - κR K_1(κR)) / κ²`, leaving a smooth angular
/// integral that is done with composite Simpson.
pub fn cell_integral(kappa: f64, hx: f64, hy: f64) -> f64 {
    let (a, b) = (0.5 * hx, 0.5 * hy);
    let radial = |r: f64| (1.0 - kappa * r * k0_k1(kappa * r).1) / (kappa * kappa);
    let split = math::atan2(b, a);
    let simpson = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        let n = 256;
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + k as f64 * h);
        }
        s * h / 3.0
    };
    let lower = simpson(0.0, split, &|phi| radial(a / math::cos(phi)));
    let upper = simpson(split, 0.5 * PI, &|phi| radial(b / math::sin(phi)));
    4.0 * (lower + upper)
}

/// Discrete periodic convolution `(K * ρ)(x_i) ≈ Σ_j K(x_i - x_j) ρ_j Δx Δy`
/// of a nodal field on an `nx × ny` grid over the box of `spec`.
///
/// The singular self-cell term uses [`cell_integral`]. Multiply by
/// [`GREEN_NORMALIZATION`]` / D` to obtain the screened-Poisson solution.
pub fn periodic_convolution(rho: &[f64], nx: usize, ny: usize, spec: &KernelSpec) -> Result<Vec<f64>> {
    if nx == 0 || ny == 0 {
        return Err(Error::Invalid("empty grid"));
    }
    if rho.len() != nx * ny {
        return Err(Error::ShapeMismatch {
            expected: nx * ny,
            found: rho.len(),
        });
    }
    let hx = spec.box_len / nx as f64;
    let hy = spec.box_len / ny as f64;
    let area = hx * hy;
    // Weights indexed by the periodic offset (di, dj).
    let mut weights = vec![0.0; nx * ny];
    for dj in 0..ny {
        for di in 0..nx {
            let r = Vec2::new(di as f64 * hx, dj as f64 * hy);
            weights[di + nx * dj] = if di == 0 && dj == 0 {
                cell_integral(spec.kappa, hx, hy)
            } else {
                spec.value(r).unwrap_or(0.0) * area
            };
        }
    }
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for q in 0..ny {
                let dj = (j + ny - q) % ny;
                let row = &weights[nx * dj..nx * (dj + 1)];
                let src = &rho[nx * q..nx * (q + 1)];
                // split so the inner loops are contiguous
                for (p, &s) in src.iter().enumerate().take(i + 1) {
                    acc += row[i - p] * s;
                }
                for (p, &s) in src.iter().enumerate().skip(i + 1) {
                    acc += row[i + nx - p] * s;
                }
            }
            out[i + nx * j] = acc;
        }
    }
    Ok(out)
}
