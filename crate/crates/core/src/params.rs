//! Physical parameters, the rescaled parameter tuple and the map between them.
//!
//! Time is rescaled by `1/D_R`, length by `sqrt(D/D_R)` and concentration by
//! `η/D_R`. After rescaling the spatial domain of every continuum solver is the
//! unit periodic square and the rotational diffusivity is one.

use crate::error::{Error, Result};
use crate::math;

/// Parameters of the particle model in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PhysicalParams {
    /// Self-propulsion speed.
    pub v0: f64,
    /// Translational diffusivity.
    pub d_t: f64,
    /// Rotational diffusivity.
    pub d_r: f64,
    /// Pheromone diffusivity.
    pub d: f64,
    /// Pheromone decay rate.
    pub alpha: f64,
    /// Pheromone production rate.
    pub eta: f64,
    /// Chemotactic sensitivity.
    pub gamma: f64,
    /// Look-ahead distance.
    pub lambda: f64,
    /// Side length of the periodic box.
    pub box_len: f64,
    /// Number of particles.
    pub n: usize,
}

/// The rescaled tuple `(D_T, Pe, γ, λ, α)` consumed by the continuum solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ScaledParams {
    pub d_t: f64,
    pub pe: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub alpha: f64,
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NotFinite(name))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive(name))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Negative(name))
    }
}

impl PhysicalParams {
    /// All rates and diffusivities equal to one, `N = 1`.
    pub const UNIT: PhysicalParams = PhysicalParams {
        v0: 1.0,
        d_t: 1.0,
        d_r: 1.0,
        d: 1.0,
        alpha: 1.0,
        eta: 1.0,
        gamma: 1.0,
        lambda: 1.0,
        box_len: 1.0,
        n: 1,
    };

    pub fn validate(&self) -> Result<()> {
        positive("D", self.d)?;
        positive("D_R", self.d_r)?;
        positive("D_T", self.d_t)?;
        positive("alpha", self.alpha)?;
        positive("eta", self.eta)?;
        positive("L", self.box_len)?;
        non_negative("v0", self.v0)?;
        non_negative("gamma", self.gamma)?;
        non_negative("lambda", self.lambda)?;
        if self.n == 0 {
            return Err(Error::Invalid("particle count must be at least 1"));
        }
        Ok(())
    }

    /// Length unit `sqrt(D / D_R)` of the rescaled problem.
    pub fn length_scale(&self) -> f64 {
        math::sqrt(self.d / self.d_r)
    }
}

/// Nondimensionalizes `p`:
/// `(D_T/D, v0/sqrt(D D_R), η γ / sqrt(D D_R³), λ / sqrt(D/D_R), α/D_R)`.
pub fn rescale_physical(p: &PhysicalParams) -> Result<ScaledParams> {
    p.validate()?;
    let dd_r = p.d * p.d_r;
    let scaled = ScaledParams {
        d_t: p.d_t / p.d,
        pe: p.v0 / math::sqrt(dd_r),
        gamma: p.eta * p.gamma / math::sqrt(dd_r * p.d_r * p.d_r),
        lambda: p.lambda / p.length_scale(),
        alpha: p.alpha / p.d_r,
    };
    scaled.validate()
}

impl ScaledParams {
    /// Returns `self` unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        positive("D_T", self.d_t)?;
        positive("alpha", self.alpha)?;
        non_negative("Pe", self.pe)?;
        non_negative("gamma", self.gamma)?;
        non_negative("lambda", self.lambda)?;
        Ok(self)
    }
}
