use num_complex::Complex64;

use crate::domain::{Layer, Permittivity, Polarization};

/// Root choice for the axial wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// `Re β ≥ 0`, `Im β ≥ 0`.
    #[default]
    Causal,
    /// The opposite root; only useful to show what breaks.
    Flipped,
}

/// Axial wavenumber of one layer at one `(k, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialWave {
    pub beta: Complex64,
    pub layer: usize,
    pub k: f64,
    pub omega: f64,
}

/// Transverse wavevector: magnitude and in-plane unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transverse {
    pub k: f64,
    pub u: [f64; 2],
}

impl Transverse {
    pub fn along_x(k: f64) -> Self {
        Self { k, u: [1.0, 0.0] }
    }

    pub fn with_angle(k: f64, phi: f64) -> Self {
        #[allow(unused_imports)] // redundant when std is in the build graph
        use num_traits::Float;
        Self { k, u: [phi.cos(), phi.sin()] }
    }

    /// `−k`; the direction flips even when `k = 0`.
    pub fn neg(self) -> Self {
        Self { k: self.k, u: [-self.u[0], -self.u[1]] }
    }
}

/// `√(ε ω² − k²)` with `Re β ≥ 0`, `Im β ≥ 0` (c = 1).
pub fn beta_causal(eps: Complex64, k: f64, omega: f64) -> Complex64 {
    let b = (eps * (omega * omega) - k * k).sqrt();
    if b.im < 0.0 || (b.im == 0.0 && b.re < 0.0) {
        -b
    } else {
        b
    }
}

/// Continuation of the causal root to complex frequency, avoiding the cut
/// of the principal square root.
pub fn beta_continued(eps: Complex64, k: f64, omega: Complex64) -> Complex64 {
    let arg = eps * omega * omega - k * k;
    let b = arg.sqrt();
    let flip = if arg.re >= 0.0 { b.re < 0.0 } else { b.im < 0.0 };
    if flip {
        -b
    } else {
        b
    }
}

pub fn axial_wavenumber(layer: &Layer, k: f64, omega: f64) -> Complex64 {
    beta_causal(layer.permittivity.at(omega), k, omega)
}

/// Fresnel coefficients of a single interface in terms of the layer data.
pub(crate) fn fresnel(
    q: Polarization,
    eps_a: Complex64,
    beta_a: Complex64,
    kj_a: Complex64,
    eps_b: Complex64,
    beta_b: Complex64,
    kj_b: Complex64,
) -> (Complex64, Complex64) {
    match q {
        Polarization::S => {
            let den = beta_a + beta_b;
            ((beta_a - beta_b) / den, 2.0 * beta_a / den)
        }
        Polarization::P => {
            let num = beta_a * eps_b - beta_b * eps_a;
            let den = beta_a * eps_b + beta_b * eps_a;
            let r = num / den;
            (r, kj_a / kj_b * (1.0 + r))
        }
    }
}

/// Reflection from a perfect conductor in the field basis used here.
pub(crate) fn mirror_reflection(q: Polarization) -> Complex64 {
    match q {
        Polarization::S => Complex64::new(-1.0, 0.0),
        Polarization::P => Complex64::new(1.0, 0.0),
    }
}

/// Single-interface `(r, t)` for a wave in `layer_a` hitting `layer_b`.
pub fn interface_coefficients(
    q: Polarization,
    layer_a: &Layer,
    layer_b: &Layer,
    k: f64,
    omega: f64,
) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    match (&layer_a.permittivity, &layer_b.permittivity) {
        (Permittivity::PerfectConductor, _) => (zero, zero),
        (_, Permittivity::PerfectConductor) => (mirror_reflection(q), zero),
        (pa, pb) => {
            let (ea, eb) = (pa.at(omega), pb.at(omega));
            let kj = |e: Complex64| e.sqrt() * omega;
            fresnel(q, ea, beta_causal(ea, k, omega), kj(ea), eb, beta_causal(eb, k, omega), kj(eb))
        }
    }
}

/// `e_s = û × ẑ`.
pub(crate) fn e_s(u: [f64; 2]) -> [Complex64; 3] {
    [Complex64::new(u[1], 0.0), Complex64::new(-u[0], 0.0), Complex64::new(0.0, 0.0)]
}

/// `e_{p±} = (∓β û + k ẑ)/k_j`.
pub(crate) fn e_p(sign: f64, beta: Complex64, k: f64, kj: Complex64, u: [f64; 2]) -> [Complex64; 3] {
    let inv = kj.inv();
    [-sign * beta * u[0] * inv, -sign * beta * u[1] * inv, k * inv]
}
