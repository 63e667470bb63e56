//! Spontaneous emission of a two-level emitter into two polarization modes of
//! a planar cavity, and the one-photon state of the field that leaves it.
//!
//! Frequencies and widths are measured in units of the reference linewidth
//! `Γ_k` (the s-mode width in the presets), times in `1/Γ_k`, and lengths in
//! `c/Γ_k`. The crate is `no_std` and only needs an allocator.
//!
//! Pipeline: [`dynamics::solve`] → [`outfield::spectral_amplitude_poleapprox`]
//! (or the full-Green variant) → [`quantum_state`].
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod domain;
pub mod dynamics;
mod error;
pub mod greens;
pub mod numerics;
pub mod outfield;
pub mod quantum_state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
