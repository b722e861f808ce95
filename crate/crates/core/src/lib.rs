//! Numerical core for chemotactic active Brownian particles with look-ahead
//! sensing.
//!
//! The crate is `no_std` (with `alloc`). Enabling the `std` feature only swaps
//! the transcendental functions from `libm` to the platform implementations.
//!
//! Modules:
//!
//! * [`params`] physical and rescaled parameters, nondimensionalization.
//! * [`kernel`] modified Bessel functions and the periodic screened-Poisson kernel.
//! * [`particles`] tamed Euler simulation of the N-particle SDE system.
//! * [`field`] finite-difference screened Poisson solve, gradients, shifted evaluation.
//! * [`fv`] upwind finite-volume scheme for the kinetic mean-field equation.
//! * [`eigen`] dense complex Schur decomposition and eigenvectors.
//! * [`linstab`] truncated banded eigenproblem, instability lines, eigenfunctions.
//! * [`observables`] density, polarisation, second moment, phase labels.
//! * [`stationary`] y-independent stationary states by alternating solves.
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
// `!(x > 0.0)` is the idiom used to reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod eigen;
mod error;
pub mod math;
mod vec2;

pub mod field;
pub mod fv;
pub mod kernel;
mod linalg;
pub mod linstab;
pub mod observables;
pub mod params;
pub mod particles;
pub mod stationary;

pub use error::{Error, Result};
pub use params::{PhysicalParams, ScaledParams};
pub use vec2::Vec2;
