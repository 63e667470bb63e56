//! Spectral mode functions of the outgoing field, efficiencies and peaks.
//!
//! In the pole approximation the outgoing amplitude of mode σ is the windowed
//! transform of the intracavity amplitude,
//! `φ(ω, t) = √(γ/2π) ∫₀ᵗ b(t') e^{i(ω−ω21)t'} dt'`.
//! Only a finite window of ω is sampled; the mass of `|φ|²` outside it is
//! obtained from the exact resolvent of the linear mode system so that
//! efficiencies and norms refer to the whole real line.

use alloc::{vec, vec::Vec};
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::domain::{CavityModeSpec, EmitterSpec, LayerStack, Polarization, SimGrid};
use crate::dynamics::{EmissionTrajectory, MAX_MODES};
use crate::greens::{dipole_transfer, find_resonances, outcoupling_in, GreenContext};
use crate::numerics::{adaptive_simpson, solve_complex, trapezoid, Tolerance};
use crate::{Error, Result};

/// Largest admissible `|φ|²` at the window edges relative to the peak.
pub const EDGE_RATIO_LIMIT: f64 = 1e-4;
/// Relative Parseval tolerance of [`efficiency_eta`].
pub const PARSEVAL_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    pub polarization: Polarization,
    pub omega: Vec<f64>,
    pub phi: Vec<Complex64>,
    /// Evaluation time.
    pub t: f64,
    /// `∫|φ|² dω` over the real line.
    pub eta: f64,
    /// Part of `eta` lying outside the sampled window.
    pub tail_mass: f64,
    /// `γ·leaked/Γ` from the trajectory, when the spectrum derives from it.
    pub reference_eta: Option<f64>,
}

impl SpectralAmplitude {
    pub fn omega_step(&self) -> f64 {
        (self.omega[self.omega.len() - 1] - self.omega[0]) / (self.omega.len() - 1) as f64
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.phi.iter().map(|p| p.norm()).collect()
    }

    /// Trapezoidal `∫|φ|²` over the sampled window only.
    pub fn window_mass(&self) -> f64 {
        let sq: Vec<f64> = self.phi.iter().map(|p| p.norm_sqr()).collect();
        trapezoid(&sq, self.omega_step())
    }

    /// `∫|φ|²` over the real line (window plus tail).
    pub fn norm_sqr(&self) -> f64 {
        self.window_mass() + self.tail_mass
    }

    fn zero(polarization: Polarization, omega: Vec<f64>, t: f64, reference_eta: Option<f64>) -> Self {
        let n = omega.len();
        Self { polarization, omega, phi: vec![Complex64::new(0.0, 0.0); n], t, eta: 0.0, tail_mass: 0.0, reference_eta }
    }

    /// Fails when `|φ|²` at either window edge exceeds
    /// [`EDGE_RATIO_LIMIT`] times its maximum.
    pub fn check_window(&self) -> Result<()> {
        let peak = self.phi.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(());
        }
        let edge = self.phi[0].norm_sqr().max(self.phi[self.phi.len() - 1].norm_sqr());
        let ratio = edge / peak;
        if ratio > EDGE_RATIO_LIMIT {
            return Err(Error::WindowTooNarrow { ratio });
        }
        Ok(())
    }
}

/// `∫₀^{t_n} x(s) e^{iΔs} ds` for every `Δ` and every snapshot index `n`:
/// trapezoid plus the first Euler–Maclaurin end correction, which uses the
/// exact derivative `x'`. Returns `[snapshot][Δ]`.
fn windowed_transform(
    x: &[Complex64],
    dx: &dyn Fn(usize) -> Complex64,
    h: f64,
    deltas: &[f64],
    snapshots: &[usize],
) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![vec![zero; deltas.len()]; snapshots.len()];
    let last = snapshots.iter().copied().max().unwrap_or(0);
    let d0 = dx(0);
    let ends: Vec<Complex64> = snapshots.iter().map(|&n| dx(n)).collect();
    const RESYNC: usize = 512;
    for (w, &delta) in deltas.iter().enumerate() {
        let step = Complex64::new(0.0, delta * h).exp();
        let mut phasor = Complex64::new(1.0, 0.0);
        let mut acc = zero;
        let mut next = 0;
        let mut order: Vec<(usize, usize)> = snapshots.iter().copied().enumerate().map(|(i, n)| (n, i)).collect();
        order.sort_unstable();
        for m in 0..=last {
            if m % RESYNC == 0 {
                phasor = Complex64::new(0.0, delta * h * m as f64).exp();
            }
            acc += x[m] * phasor;
            while next < order.len() && order[next].0 == m {
                let (n, slot) = order[next];
                let i_delta = Complex64::new(0.0, delta);
                let f_end = (ends[slot] + i_delta * x[n]) * phasor;
                let f_start = d0 + i_delta * x[0];
                let trap = (acc - 0.5 * (x[0] + x[n] * phasor)) * h;
                out[slot][w] = if n == 0 { zero } else { trap - (f_end - f_start) * (h * h / 12.0) };
                next += 1;
            }
            phasor *= step;
        }
    }
    out
}

const DIM: usize = MAX_MODES + 1;

/// Linear system `y' = M y` with `y = (C2, B_1..B_n)` and `b_σ = c·y`.
struct Resolvent {
    n: usize,
    m: [[Complex64; DIM]; DIM],
    c: [Complex64; DIM],
}

impl Resolvent {
    fn new(modes: &[CavityModeSpec], omega21: f64, target: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let n = modes.len() + 1;
        let mut m = [[zero; DIM]; DIM];
        let mut c = [zero; DIM];
        for (j, mode) in modes.iter().enumerate() {
            m[0][j + 1] = Complex64::new(-0.25 * mode.rabi * mode.rabi, 0.0);
            m[j + 1][0] = Complex64::new(1.0, 0.0);
            m[j + 1][j + 1] = -Complex64::i() * mode.detuned_pole(omega21);
        }
        c[target + 1] = -Complex64::i() * (0.5 * modes[target].rabi);
        Self { n, m, c }
    }

    /// `(M + iΔ)^{-1} v`.
    fn solve(&self, delta: f64, v: &[Complex64; DIM]) -> [Complex64; DIM] {
        let n = self.n;
        let mut a = [Complex64::new(0.0, 0.0); DIM * DIM];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.m[i][j];
            }
            a[i * n + i] += Complex64::new(0.0, delta);
        }
        let mut x = *v;
        solve_complex(&mut a[..n * n], &mut x[..n], n);
        x
    }

    fn project(&self, v: &[Complex64; DIM]) -> Complex64 {
        (0..self.n).map(|i| self.c[i] * v[i]).sum()
    }

    /// `c·R^{k+1} v · k! (−i)^k` for `k = 0, 1, 2`: the amplitude and its
    /// first two Δ-derivatives.
    fn derivatives(&self, delta: f64, v: &[Complex64; DIM]) -> [Complex64; 3] {
        let r1 = self.solve(delta, v);
        let r2 = self.solve(delta, &r1);
        let r3 = self.solve(delta, &r2);
        [self.project(&r1), -Complex64::i() * self.project(&r2), -2.0 * self.project(&r3)]
    }
}

/// Mass of `|φ(Δ)|²` outside `[lo, hi]` (detunings), for
/// `φ = √(γ/2π)·c(M + iΔ)^{-1}(e^{iΔt} y_t − y_0)`.
fn tail_mass(
    res: &Resolvent,
    gamma: f64,
    t: f64,
    y_t: &[Complex64; DIM],
    y_0: &[Complex64; DIM],
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if t == 0.0 || gamma == 0.0 {
        return Ok(0.0);
    }
    let pref = gamma / (2.0 * PI);
    let tol = Tolerance { abs: 1e-300, rel: 1e-9, max_depth: 40 };
    let scale = hi.abs().max(lo.abs()).max(1.0);
    // Non-oscillatory part |A|² + |B|², mapped to u ∈ (0, 1].
    let smooth = |delta: f64| {
        let a = res.project(&res.solve(delta, y_t));
        let b = res.project(&res.solve(delta, y_0));
        pref * (a.norm_sqr() + b.norm_sqr())
    };
    const U0: f64 = 1e-9;
    let right = adaptive_simpson(|u: f64| smooth(hi + scale * (1.0 - u) / u) * scale / (u * u), U0, 1.0, tol)?;
    let left = adaptive_simpson(|u: f64| smooth(lo - scale * (1.0 - u) / u) * scale / (u * u), U0, 1.0, tol)?;

    // Oscillatory part −2 Re(e^{iΔt} A B̄): direct quadrature up to where
    // the asymptotic expansion by parts is accurate, expansion beyond.
    let cross = |delta: f64| -> [Complex64; 3] {
        let a = res.derivatives(delta, y_t);
        let b = res.derivatives(delta, y_0);
        let (b0, b1, b2) = (b[0].conj(), b[1].conj(), b[2].conj());
        let k = -2.0 * pref;
        [k * a[0] * b0, k * (a[1] * b0 + a[0] * b1), k * (a[2] * b0 + 2.0 * a[1] * b1 + a[0] * b2)]
    };
    let reach = 40.0 / t;
    let it = Complex64::new(0.0, t);
    let expansion = |g: [Complex64; 3]| g[0] / it - g[1] / (it * it) + g[2] / (it * it * it);
    let osc = |delta: f64| (Complex64::new(0.0, delta * t).exp() * cross(delta)[0]).re;

    let hi_far = hi.max(reach);
    let mut oscillatory = 0.0;
    if hi_far > hi {
        oscillatory += adaptive_simpson(osc, hi, hi_far, tol)?;
    }
    oscillatory += (-Complex64::new(0.0, hi_far * t).exp() * expansion(cross(hi_far))).re;
    let lo_far = lo.min(-reach);
    if lo_far < lo {
        oscillatory += adaptive_simpson(osc, lo_far, lo, tol)?;
    }
    oscillatory += (Complex64::new(0.0, lo_far * t).exp() * expansion(cross(lo_far))).re;
    Ok(right + left + oscillatory)
}

fn state_at(traj: &EmissionTrajectory, i: usize) -> [Complex64; DIM] {
    let mut y = [Complex64::new(0.0, 0.0); DIM];
    y[0] = traj.c2[i];
    for (j, tr) in traj.traces.iter().enumerate() {
        if tr.mode.rabi > 0.0 {
            y[j + 1] = 2.0 * Complex64::i() * tr.b[i] / tr.mode.rabi;
        }
    }
    y
}

/// Pole-approximation spectra of one mode at the given sample indices.
pub fn pole_spectra(
    traj: &EmissionTrajectory,
    mode: &CavityModeSpec,
    grid: &SimGrid,
    indices: &[usize],
) -> Result<Vec<SpectralAmplitude>> {
    let q = mode.polarization;
    let target = traj.traces.iter().position(|t| t.mode.polarization == q).ok_or(Error::MissingMode(q))?;
    let trace = &traj.traces[target];
    let gamma = mode.resonance.gamma_rad;
    let big_gamma = mode.resonance.gamma_total;
    let omegas = grid.omegas();
    let reference = |i: usize| {
        if big_gamma > 0.0 {
            gamma * trace.leaked[i] / big_gamma
        } else {
            0.0
        }
    };
    if gamma == 0.0 || mode.rabi == 0.0 {
        return Ok(indices
            .iter()
            .map(|&i| SpectralAmplitude::zero(q, omegas.clone(), traj.time(i), Some(reference(i))))
            .collect());
    }
    let deltas: Vec<f64> = omegas.iter().map(|w| w - traj.omega21).collect();
    let dx = |i: usize| traj.b_derivative(trace, i);
    let raw = windowed_transform(&trace.b, &dx, traj.dt, &deltas, indices);
    let pref = (gamma / (2.0 * PI)).sqrt();
    let modes = traj.modes();
    let res = Resolvent::new(&modes, traj.omega21, target);
    let y0 = state_at(traj, 0);
    let (lo, hi) = (deltas[0], deltas[deltas.len() - 1]);
    indices
        .iter()
        .zip(raw)
        .map(|(&i, phi)| {
            let t = traj.time(i);
            let tail = tail_mass(&res, gamma, t, &state_at(traj, i), &y0, lo, hi)?;
            let mut spec = SpectralAmplitude {
                polarization: q,
                omega: omegas.clone(),
                phi: phi.into_iter().map(|p| p * pref).collect(),
                t,
                eta: 0.0,
                tail_mass: tail,
                reference_eta: Some(reference(i)),
            };
            spec.eta = spec.norm_sqr();
            Ok(spec)
        })
        .collect()
}

/// `φ_σ(ω, T)` at the end of the trajectory.
pub fn spectral_amplitude_poleapprox(
    traj: &EmissionTrajectory,
    mode: &CavityModeSpec,
    grid: &SimGrid,
) -> Result<SpectralAmplitude> {
    let last = traj.len() - 1;
    let spec = pole_spectra(traj, mode, grid, &[last])?.remove(0);
    spec.check_window()?;
    Ok(spec)
}

/// `(t, η(t))` on `n_points` equally spaced times from 0 to the end.
pub fn efficiency_series(
    traj: &EmissionTrajectory,
    mode: &CavityModeSpec,
    grid: &SimGrid,
    n_points: usize,
) -> Result<Vec<(f64, f64)>> {
    let last = traj.len() - 1;
    let n_points = n_points.max(2);
    let mut indices: Vec<usize> = (0..n_points).map(|k| (k * last + (n_points - 1) / 2) / (n_points - 1)).collect();
    indices.dedup();
    let spectra = pole_spectra(traj, mode, grid, &indices)?;
    Ok(spectra.iter().map(|s| (s.t, s.eta)).collect())
}

/// `η = ∫|φ|² dω`, checked against the trajectory ledger when available.
pub fn efficiency_eta(spec: &SpectralAmplitude) -> Result<f64> {
    if let Some(reference) = spec.reference_eta {
        let residual = (spec.eta - reference).abs();
        let tolerance = PARSEVAL_TOLERANCE * spec.eta.max(reference) + 1e-15;
        if residual > tolerance {
            return Err(Error::Parseval { residual, tolerance });
        }
    }
    Ok(spec.eta)
}

/// `F = φ/√η`.
pub fn normalized_mode_function(spec: &SpectralAmplitude) -> Result<SpectralAmplitude> {
    if !(spec.eta > 0.0) {
        return Err(Error::ZeroEfficiency);
    }
    let s = spec.eta.sqrt().recip();
    Ok(SpectralAmplitude {
        phi: spec.phi.iter().map(|p| p * s).collect(),
        eta: 1.0,
        tail_mass: spec.tail_mass / spec.eta,
        reference_eta: None,
        ..spec.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima of `|F|` whose height and prominence both reach
/// `threshold·max|F|`, refined by a parabola through the three nearest
/// samples. Requiring prominence drops the ripples that a finite
/// evaluation time leaves on the flanks of the main peaks.
pub fn peak_report(spec: &SpectralAmplitude, threshold: f64) -> Vec<Peak> {
    let scale = if spec.eta > 0.0 { spec.eta.sqrt().recip() } else { 1.0 };
    let values: Vec<f64> = spec.phi.iter().map(|p| p.norm() * scale).collect();
    peaks_in_samples(&spec.omega, &values, threshold)
}

pub fn peaks_in_samples(omega: &[f64], values: &[f64], threshold: f64) -> Vec<Peak> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let floor = threshold * max;
    let h = (omega[n - 1] - omega[0]) / (n - 1) as f64;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let v = values[i];
        if !(v > values[i - 1] && v >= values[i + 1]) || v < floor {
            continue;
        }
        let mut left_min = v;
        let mut j = i;
        while j > 0 && values[j - 1] <= v {
            j -= 1;
            left_min = left_min.min(values[j]);
        }
        let mut right_min = v;
        let mut j = i;
        while j + 1 < n && values[j + 1] <= v {
            j += 1;
            right_min = right_min.min(values[j]);
        }
        let prominence = v - left_min.max(right_min);
        if prominence < floor {
            continue;
        }
        let (a, b, c) = (values[i - 1], v, values[i + 1]);
        let curvature = a - 2.0 * b + c;
        let (offset, height) = if curvature < 0.0 {
            let x = 0.5 * (a - c) / curvature;
            (x, b - 0.25 * (a - c) * x)
        } else {
            (0.0, b)
        };
        peaks.push(Peak { omega: omega[i] + offset * h, height, prominence });
    }
    peaks
}

/// Settings of the full-Green evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullGreenOptions {
    /// Minimum half-width of the synthesis band around `ω21`.
    pub min_half_band: f64,
    /// Decay lengths (in `1/Γ`) appended to `T` to avoid wrap-around.
    pub decay_lengths: f64,
}

impl Default for FullGreenOptions {
    fn default() -> Self {
        Self { min_half_band: 400.0, decay_lengths: 40.0 }
    }
}

/// Outgoing amplitude with the cavity response taken from the stack instead
/// of a single pole. The outgoing signal is the causal convolution of
/// `C2` with the dipole-to-output transfer function of the stack
/// (`ω²·S(ω)/√c⁺(ω)`), synthesized on a band around `ω21`; its windowed
/// transform gives `φ`. The overall constant is fixed so that the transfer
/// function equals the pole form `√γ(R/2)/(ω − Ω)` at `ω = ω_j`.
pub fn spectral_amplitude_fullgreen(
    traj: &EmissionTrajectory,
    stack: &LayerStack,
    emitter: &EmitterSpec,
    mode: &CavityModeSpec,
    grid: &SimGrid,
) -> Result<SpectralAmplitude> {
    let spec = spectral_amplitude_fullgreen_with(traj, stack, emitter, mode, grid, FullGreenOptions::default())?;
    spec.check_window()?;
    Ok(spec)
}

/// As [`spectral_amplitude_fullgreen`] but without the window edge check.
pub fn spectral_amplitude_fullgreen_with(
    traj: &EmissionTrajectory,
    stack: &LayerStack,
    emitter: &EmitterSpec,
    mode: &CavityModeSpec,
    grid: &SimGrid,
    options: FullGreenOptions,
) -> Result<SpectralAmplitude> {
    let q = mode.polarization;
    let omegas = grid.omegas();
    let t_end = traj.t_final();
    let Some(out) = outgoing_signal(traj, stack, emitter, mode, grid.k_transverse, options)? else {
        return Ok(SpectralAmplitude::zero(q, omegas, t_end, None));
    };
    let deltas: Vec<f64> = omegas.iter().map(|w| w - traj.omega21).collect();
    let no_slope = |_: usize| Complex64::new(0.0, 0.0);
    let raw = windowed_transform(&out, &no_slope, traj.dt, &deltas, &[traj.len() - 1]).remove(0);
    let pref = (2.0 * PI).sqrt().recip();
    let mut spec = SpectralAmplitude {
        polarization: q,
        omega: omegas,
        phi: raw.into_iter().map(|p| p * pref).collect(),
        t: t_end,
        eta: 0.0,
        tail_mass: 0.0,
        reference_eta: None,
    };
    spec.eta = spec.window_mass();
    Ok(spec)
}

/// Outgoing signal on the trajectory's time grid, normalized so that its
/// pole-approximation counterpart is `√γ·b(t)`. `None` when the stack does
/// not radiate into the output half-space.
pub fn outgoing_signal(
    traj: &EmissionTrajectory,
    stack: &LayerStack,
    emitter: &EmitterSpec,
    mode: &CavityModeSpec,
    k: f64,
    options: FullGreenOptions,
) -> Result<Option<Vec<Complex64>>> {
    let q = mode.polarization;
    let res = mode.resonance;
    check_stack_mode(stack, mode, k)?;
    let transfer = |w: f64| -> Result<Complex64> {
        let ctx = GreenContext::new(stack, k, w)?;
        let cplus = outcoupling_in(&ctx, q)?;
        if cplus == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // S pairs with the conjugated C2 transform; its conjugate is the
        // causal response used in the convolution.
        Ok(dipole_transfer(&ctx, emitter, q)?.conj() * (w * w / cplus.sqrt()))
    };
    let at_mode = transfer(res.omega)?;
    if at_mode.norm() == 0.0 || res.gamma_rad == 0.0 || mode.rabi == 0.0 {
        return Ok(None);
    }
    let pole_value = Complex64::new(0.0, -1.0) * res.gamma_rad.sqrt() * mode.rabi / res.gamma_total;
    let kappa = pole_value / at_mode;

    let scaled = |w: f64| transfer(w).map(|h| h * kappa);
    synthesize(traj, res.gamma_total, options, scaled).map(Some)
}

/// `(1/2π)∫ H(ω21 + Δ) Ĉ2(Δ) e^{−iΔt} dΔ` on the trajectory's time grid.
fn synthesize(
    traj: &EmissionTrajectory,
    gamma: f64,
    options: FullGreenOptions,
    transfer: impl Fn(f64) -> Result<Complex64>,
) -> Result<Vec<Complex64>> {
    let omega21 = traj.omega21;
    let t_end = traj.t_final();
    let period = t_end + options.decay_lengths / gamma;
    let dw = 2.0 * PI / period;
    let count = (options.min_half_band / dw).ceil() as i64;
    let band: Vec<f64> = (-count..=count).map(|m| dw * m as f64).collect();

    let c2_rate =
        |i: usize| -> Complex64 { traj.traces.iter().map(|tr| -0.5 * Complex64::i() * tr.mode.rabi * tr.b[i]).sum() };
    let last = traj.len() - 1;
    let c2_hat = windowed_transform(&traj.c2, &c2_rate, traj.dt, &band, &[last]).remove(0);

    let mut out = vec![Complex64::new(0.0, 0.0); traj.len()];
    for (m, &delta) in band.iter().enumerate() {
        let weight = transfer(omega21 + delta)? * c2_hat[m] * (dw / (2.0 * PI));
        let step = Complex64::new(0.0, -delta * traj.dt).exp();
        let mut phasor = Complex64::new(1.0, 0.0);
        for (n, o) in out.iter_mut().enumerate() {
            if n % 512 == 0 {
                phasor = Complex64::new(0.0, -delta * traj.dt * n as f64).exp();
            }
            *o += weight * phasor;
            phasor *= step;
        }
    }
    Ok(out)
}

/// The stack must have a resonance within `Γ/2` of the mode's pole.
fn check_stack_mode(stack: &LayerStack, mode: &CavityModeSpec, k: f64) -> Result<()> {
    let res = mode.resonance;
    let tolerance = (0.5 * res.gamma_total).max(1e-9 * res.omega);
    let span = (10.0 * res.gamma_total).max(1e-3 * res.omega);
    let mismatch = |found: f64| Error::ModeMismatch { expected: res.omega, found, tolerance };
    let poles = find_resonances(stack, mode.polarization, k, (res.omega - span, res.omega + span))
        .map_err(|_| mismatch(f64::NAN))?;
    let best = poles
        .iter()
        .min_by(|a, b| (a.pole() - res.pole()).norm().total_cmp(&(b.pole() - res.pole()).norm()))
        .ok_or_else(|| mismatch(f64::NAN))?;
    if (best.pole() - res.pole()).norm() > tolerance {
        return Err(mismatch(best.omega));
    }
    Ok(())
}
