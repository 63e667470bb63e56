use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::coupling::CouplingProfile;
use super::media::Branch;
use super::stack::stack_coefficients_at;
use crate::domain::{CavityModeSpec, ComplexResonance, LayerStack, Polarization};
use crate::numerics::{complex_secant, fit_lorentzians};
use crate::{Error, Result};

const SCAN_POINTS: usize = 4001;
const MAX_ITER: usize = 100;
const ROOT_TOLERANCE: f64 = 1e-10;
/// Largest acceptable relative residual of a Lorentzian fit.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.05;

/// Denominator of the emitter layer at complex frequency.
pub fn cavity_denominator(stack: &LayerStack, q: Polarization, k: f64, omega: Complex64) -> Complex64 {
    stack_coefficients_at(stack, q, k, omega, Branch::Causal).d[stack.emitter_layer]
}

/// Complex zeros of the emitter-layer denominator whose real parts lie in
/// `window`, seeded at the minima of `|D|²` on the real axis.
pub fn find_resonances(
    stack: &LayerStack,
    q: Polarization,
    k: f64,
    window: (f64, f64),
) -> Result<Vec<ComplexResonance>> {
    let (lo, hi) = window;
    let h = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mag: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| cavity_denominator(stack, q, k, Complex64::new(lo + h * i as f64, 0.0)).norm_sqr())
        .collect();
    let mut found: Vec<ComplexResonance> = Vec::new();
    for i in 1..SCAN_POINTS - 1 {
        if !(mag[i] < mag[i - 1] && mag[i] <= mag[i + 1]) {
            continue;
        }
        let seed = Complex64::new(lo + h * i as f64, 0.0);
        let root = complex_secant(
            |w| cavity_denominator(stack, q, k, w),
            seed,
            seed - Complex64::new(0.0, h),
            ROOT_TOLERANCE,
            MAX_ITER,
        )?;
        if !(lo..=hi).contains(&root.re) {
            return Err(Error::RootOutsideWindow { omega: root.re, lo, hi });
        }
        let mut gamma = -2.0 * root.im;
        if gamma < 0.0 && gamma.abs() < 1e-9 * root.re {
            gamma = 0.0;
        }
        if found
            .iter()
            .any(|r| (r.omega - root.re).abs() < 1e-8 * root.re && (r.gamma_total - gamma).abs() < 1e-8 * root.re)
        {
            continue;
        }
        found.push(ComplexResonance::new(root.re, gamma));
    }
    found.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok(found)
}

/// Fitted line strength `α` and the mode it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedMode {
    pub alpha: f64,
    pub mode: CavityModeSpec,
}

/// Fits one Lorentzian per entry of `polarizations` to a coupling profile
/// and assembles modes with `R = √(α ω)`. Lines are assigned to the
/// polarizations in order of increasing frequency.
pub fn fit_mode_params(profile: &CouplingProfile, polarizations: &[Polarization]) -> Result<Vec<FittedMode>> {
    let fit = fit_lorentzians(&profile.omega, &profile.value, polarizations.len(), FIT_RESIDUAL_LIMIT)?;
    Ok(fit
        .lines
        .iter()
        .zip(polarizations)
        .map(|(line, &q)| FittedMode {
            alpha: line.alpha,
            mode: CavityModeSpec::new(q, line.center, line.width, (line.alpha * line.center).max(0.0).sqrt()),
        })
        .collect())
}
