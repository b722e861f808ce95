//! File formats, configuration, single-run drivers and parameter sweeps on top
//! of `antfield-core`.
//!
//! * [`config`] JSON configuration files.
//! * [`gridio`] raw little-endian grid dumps with JSON sidecars.
//! * [`tables`] CSV row types.
//! * [`runs`] particle, kinetic, stationary and linear-stability drivers.
//! * [`sweep`] cached (γ, Pe, seed) sweeps and phase tables.

pub mod config;
mod error;
pub mod gridio;
pub mod runs;
pub mod sweep;
pub mod tables;

pub use error::{Error, Result};
