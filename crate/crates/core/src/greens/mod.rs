//! Per-transverse-wavevector Green tensor of a planar multilayer, and the
//! cavity data derived from it: resonances, coupling profiles and the
//! out-coupling constant of the output half-space.
//!
//! Conventions: `c = 1`, time dependence `e^{−iωt}`, fields
//! `e_s = û × ẑ` and `e_{p±} = (∓β û + k ẑ)/(√ε ω)`.

mod coupling;
mod media;
mod resonance;
mod stack;
mod tensor;

pub(crate) use coupling::outcoupling_in;
pub use coupling::{
    dipole_transfer, exterior_weight, local_coupling_spectrum, outcoupling_closed_form, outcoupling_constant,
    verify_im_identity, verify_im_identity_with, CouplingProfile, Z_TOLERANCE,
};
pub use media::{axial_wavenumber, beta_causal, beta_continued, interface_coefficients, AxialWave, Branch, Transverse};
pub use resonance::{cavity_denominator, find_resonances, fit_mode_params, FittedMode, FIT_RESIDUAL_LIMIT};
pub use stack::{stack_coefficients, stack_coefficients_at, StackCoefficients};
pub use tensor::{green_planar, GreenContext, PlanarGreen, Point};
