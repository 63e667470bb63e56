//! Outgoing-field quantum state at fixed transverse wavevector.
//!
//! Each polarization carries one excited nonmonochromatic mode `F_σ` in a
//! mixture of vacuum and one photon with weight `η_σ`; every other mode is
//! in vacuum. The joint state is not a product of the two polarizations.

use alloc::vec::Vec;
use core::f64::consts::FRAC_2_PI;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::domain::Polarization;
use crate::outfield::SpectralAmplitude;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerKind {
    Vacuum,
    OnePhoton,
}

/// Wigner function of the vacuum or the one-photon Fock state.
pub fn wigner_component(kind: WignerKind, gamma: Complex64) -> f64 {
    let r2 = gamma.norm_sqr();
    let gauss = FRAC_2_PI * (-2.0 * r2).exp();
    match kind {
        WignerKind::Vacuum => gauss,
        WignerKind::OnePhoton => (4.0 * r2 - 1.0) * gauss,
    }
}

/// Rectangular phase-space grid over `γ = re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGridSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        Self { re: (-3.0, 3.0), im: (-3.0, 3.0), n_re: 121, n_im: 121 }
    }
}

impl WignerGridSpec {
    fn step(range: (f64, f64), n: usize) -> f64 {
        if n > 1 {
            (range.1 - range.0) / (n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn re_step(&self) -> f64 {
        Self::step(self.re, self.n_re)
    }

    pub fn im_step(&self) -> f64 {
        Self::step(self.im, self.n_im)
    }

    /// Sample `(i, j)`: `i` along the real axis, `j` along the imaginary axis.
    pub fn gamma(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re.0 + self.re_step() * i as f64, self.im.0 + self.im_step() * j as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub polarization: Option<Polarization>,
    pub spec: WignerGridSpec,
    /// Row-major with the real part running fastest.
    pub values: Vec<f64>,
    pub eta: f64,
}

impl WignerGrid {
    pub fn with_polarization(mut self, q: Polarization) -> Self {
        self.polarization = Some(q);
        self
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.n_re + i]
    }

    /// `(γ, W)` in storage order.
    pub fn samples(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let n = self.spec.n_re;
        self.values.iter().enumerate().map(move |(k, &w)| (self.spec.gamma(k % n, k / n), w))
    }

    /// 2D trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let (nr, ni) = (self.spec.n_re, self.spec.n_im);
        let weight = |k: usize, n: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        let mut total = 0.0;
        for j in 0..ni {
            for i in 0..nr {
                total += weight(i, nr) * weight(j, ni) * self.value(i, j);
            }
        }
        total * self.spec.re_step() * self.spec.im_step()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `W = (1 − η)W⁽⁰⁾ + η W⁽¹⁾` on the grid.
pub fn wigner_sigma(eta: f64, spec: WignerGridSpec) -> Result<WignerGrid> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EfficiencyOutOfRange(eta));
    }
    let mut values = Vec::with_capacity(spec.n_re * spec.n_im);
    for j in 0..spec.n_im {
        for i in 0..spec.n_re {
            values.push(wigner_at(eta, spec.gamma(i, j)));
        }
    }
    Ok(WignerGrid { polarization: None, spec, values, eta })
}

/// Value of the mixed-state Wigner function at one point.
pub fn wigner_at(eta: f64, gamma: Complex64) -> f64 {
    (1.0 - eta) * wigner_component(WignerKind::Vacuum, gamma) + eta * wigner_component(WignerKind::OnePhoton, gamma)
}

/// Overlaps `β_σ` of the test amplitudes with the emitted amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapPair {
    pub beta_s: Complex64,
    pub beta_p: Complex64,
}

/// Characteristic functional of the outgoing state,
/// `exp(−(n_s + n_p)/2)·(1 − |β_s + β_p|²)`, with `n_σ` the squared norms of
/// the test amplitudes. Real by construction.
pub fn characteristic_out(overlaps: OverlapPair, norms: (f64, f64)) -> f64 {
    (-(norms.0 + norms.1) / 2.0).exp() * (1.0 - (overlaps.beta_s + overlaps.beta_p).norm_sqr())
}

/// `|C(β_s, β_p) − C(β_s, 0)·C(0, β_p)|` for test amplitudes `α_σ F_σ`.
pub fn pair_deviation(alpha_s: Complex64, alpha_p: Complex64, eta_s: f64, eta_p: f64) -> f64 {
    let beta_s = alpha_s.conj() * eta_s.sqrt();
    let beta_p = alpha_p.conj() * eta_p.sqrt();
    let (n_s, n_p) = (alpha_s.norm_sqr(), alpha_p.norm_sqr());
    let zero = Complex64::new(0.0, 0.0);
    let joint = characteristic_out(OverlapPair { beta_s, beta_p }, (n_s, n_p));
    let s_only = characteristic_out(OverlapPair { beta_s, beta_p: zero }, (n_s, 0.0));
    let p_only = characteristic_out(OverlapPair { beta_s: zero, beta_p }, (0.0, n_p));
    (joint - s_only * p_only).abs()
}

/// Complex amplitudes on a square lattice clipped to a disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGrid {
    pub radius: f64,
    pub points_per_axis: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self { radius: 2.0, points_per_axis: 21 }
    }
}

impl ProbeGrid {
    pub fn amplitudes(&self) -> Vec<Complex64> {
        let n = self.points_per_axis.max(2);
        let h = 2.0 * self.radius / (n - 1) as f64;
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let a = Complex64::new(-self.radius + h * i as f64, -self.radius + h * j as f64);
                if a.norm() <= self.radius * (1.0 + 1e-12) {
                    out.push(a);
                }
            }
        }
        out
    }
}

/// Largest [`pair_deviation`] over all probe pairs.
pub fn factorization_deviation_eta(eta_s: f64, eta_p: f64, probe: ProbeGrid) -> f64 {
    let amps = probe.amplitudes();
    let mut worst = 0.0f64;
    for &a in &amps {
        for &b in &amps {
            worst = worst.max(pair_deviation(a, b, eta_s, eta_p));
        }
    }
    worst
}

/// Non-factorization of the joint state built from the s and p spectra,
/// which must refer to the same evaluation time.
pub fn factorization_deviation(s: &SpectralAmplitude, p: &SpectralAmplitude, probe: ProbeGrid) -> Result<f64> {
    if s.t != p.t {
        return Err(Error::InvalidConfig(alloc::format!("spectra evaluated at different times ({} and {})", s.t, p.t)));
    }
    Ok(factorization_deviation_eta(s.eta, p.eta, probe))
}
