//! Emitter amplitude `C2(t)` under the exponential-memory kernel of the
//! cavity modes, with the intracavity amplitudes and leakage bookkeeping.
//!
//! Each mode contributes `−R²/4·e^{−i(Ω−ω21)t}` to the memory kernel. Writing
//! `B(t) = ∫₀ᵗ e^{−i(Ω−ω21)(t−s)} C2(s) ds` turns the integro-differential
//! equation into the local system
//!
//! ```text
//! C2' = −¼ Σ R² B,    B' = C2 − i(Ω − ω21) B
//! ```
//!
//! integrated with classical RK4. The intracavity amplitude is
//! `b = −(iR/2)·B` and the ledger `|C2|² + Σ|b|² + Σ Γ∫|b|² = 1` is exact.

use alloc::{vec, vec::Vec};

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::domain::{CavityModeSpec, EmitterSpec, Polarization, SimGrid};
use crate::{Error, Result};

/// Upper bound on the number of modes handled by the stepper.
pub const MAX_MODES: usize = 4;

/// Fraction of the fastest period allowed per step.
pub const STEP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrace {
    pub mode: CavityModeSpec,
    /// Intracavity amplitude in the frame rotating at `ω21`.
    pub b: Vec<Complex64>,
    /// `Γ·∫₀ᵗ |b|² dt'`.
    pub leaked: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionTrajectory {
    pub omega21: f64,
    pub dt: f64,
    pub c2: Vec<Complex64>,
    pub traces: Vec<ModeTrace>,
}

impl EmissionTrajectory {
    pub fn len(&self) -> usize {
        self.c2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c2.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.dt * i as f64
    }

    pub fn t_final(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn trace(&self, polarization: Polarization) -> Option<&ModeTrace> {
        self.traces.iter().find(|t| t.mode.polarization == polarization)
    }

    pub fn modes(&self) -> Vec<CavityModeSpec> {
        self.traces.iter().map(|t| t.mode).collect()
    }

    /// Signed ledger defect at sample `i`.
    pub fn ledger_defect(&self, i: usize) -> f64 {
        let mut total = self.c2[i].norm_sqr();
        for tr in &self.traces {
            total += tr.b[i].norm_sqr() + tr.leaked[i];
        }
        total - 1.0
    }

    /// Index of the sample closest to time `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let i = (t / self.dt).round();
        (i.max(0.0) as usize).min(self.len() - 1)
    }

    /// Every `factor`-th sample.
    pub fn decimate(self, factor: usize) -> Self {
        if factor <= 1 {
            return self;
        }
        let pick = |v: &[Complex64]| v.iter().step_by(factor).copied().collect::<Vec<_>>();
        Self {
            omega21: self.omega21,
            dt: self.dt * factor as f64,
            c2: pick(&self.c2),
            traces: self
                .traces
                .iter()
                .map(|t| ModeTrace {
                    mode: t.mode,
                    b: pick(&t.b),
                    leaked: t.leaked.iter().step_by(factor).copied().collect(),
                })
                .collect(),
        }
    }

    /// `b'(t_i)` from the mode equations.
    pub fn b_derivative(&self, trace: &ModeTrace, i: usize) -> Complex64 {
        let m = &trace.mode;
        let a = Complex64::i() * m.detuned_pole(self.omega21);
        -Complex64::i() * (0.5 * m.rabi) * self.c2[i] - a * trace.b[i]
    }
}

/// `K(t) = −¼ Σ R² exp(−i(Ω − ω21)t)`.
pub fn kernel_k(modes: &[CavityModeSpec], omega21: f64, t: f64) -> Complex64 {
    modes
        .iter()
        .map(|m| {
            let rate = -Complex64::i() * m.detuned_pole(omega21) * t;
            -0.25 * m.rabi * m.rabi * rate.exp()
        })
        .sum()
}

/// Largest admissible step, `None` when nothing evolves.
pub fn step_bound(modes: &[CavityModeSpec], omega21: f64) -> Option<f64> {
    let fastest = modes
        .iter()
        .map(|m| m.rabi.max((m.resonance.omega - omega21).abs()).max(m.resonance.gamma_total))
        .fold(0.0, f64::max);
    (fastest > 0.0).then(|| STEP_FRACTION * 2.0 * core::f64::consts::PI / fastest)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Ledger residual that triggers step halving.
    pub ledger_tolerance: f64,
    pub max_halvings: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { ledger_tolerance: 1e-8, max_halvings: 4 }
    }
}

/// RK4 integration on the grid's time axis, halving the step while the
/// ledger residual exceeds the tolerance. The result is always sampled on
/// the grid's `n_time + 1` points.
pub fn solve(modes: &[CavityModeSpec], emitter: &EmitterSpec, grid: &SimGrid) -> Result<EmissionTrajectory> {
    solve_with(modes, emitter, grid, SolveOptions::default())
}

pub fn solve_with(
    modes: &[CavityModeSpec],
    emitter: &EmitterSpec,
    grid: &SimGrid,
    options: SolveOptions,
) -> Result<EmissionTrajectory> {
    let mut steps = grid.n_time;
    let mut last = 0.0;
    for halvings in 0..=options.max_halvings {
        let traj = solve_fixed_step(modes, emitter.omega21, grid.t_max, steps)?;
        last = energy_ledger(&traj);
        if last <= options.ledger_tolerance {
            return Ok(traj.decimate(1 << halvings));
        }
        steps *= 2;
    }
    Err(Error::LedgerDrift { residual: last, tolerance: options.ledger_tolerance, dt: grid.t_max / (steps / 2) as f64 })
}

#[derive(Clone, Copy)]
struct State {
    c2: Complex64,
    b: [Complex64; MAX_MODES],
    leak: [f64; MAX_MODES],
}

struct Rates {
    n: usize,
    r2: [f64; MAX_MODES],
    gamma: [f64; MAX_MODES],
    a: [Complex64; MAX_MODES],
}

impl Rates {
    fn derivative(&self, y: &State) -> State {
        let mut d =
            State { c2: Complex64::new(0.0, 0.0), b: [Complex64::new(0.0, 0.0); MAX_MODES], leak: [0.0; MAX_MODES] };
        for j in 0..self.n {
            d.c2 -= 0.25 * self.r2[j] * y.b[j];
            d.b[j] = y.c2 - self.a[j] * y.b[j];
            d.leak[j] = self.gamma[j] * 0.25 * self.r2[j] * y.b[j].norm_sqr();
        }
        d
    }
}

fn axpy(y: &State, h: f64, k: &State, n: usize) -> State {
    let mut out = *y;
    out.c2 += k.c2 * h;
    for j in 0..n {
        out.b[j] += k.b[j] * h;
        out.leak[j] += k.leak[j] * h;
    }
    out
}

/// Fixed-step RK4 with `n_steps` steps on `[0, t_max]`.
pub fn solve_fixed_step(
    modes: &[CavityModeSpec],
    omega21: f64,
    t_max: f64,
    n_steps: usize,
) -> Result<EmissionTrajectory> {
    if modes.len() > MAX_MODES {
        return Err(Error::InvalidConfig(alloc::format!("at most {MAX_MODES} modes supported")));
    }
    if n_steps == 0 || !(t_max > 0.0) {
        return Err(Error::InvalidConfig("time grid must be non-empty".into()));
    }
    let dt = t_max / n_steps as f64;
    if let Some(bound) = step_bound(modes, omega21) {
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, bound });
        }
    }
    let n = modes.len();
    let mut rates =
        Rates { n, r2: [0.0; MAX_MODES], gamma: [0.0; MAX_MODES], a: [Complex64::new(0.0, 0.0); MAX_MODES] };
    for (j, m) in modes.iter().enumerate() {
        rates.r2[j] = m.rabi * m.rabi;
        rates.gamma[j] = m.resonance.gamma_total;
        rates.a[j] = Complex64::i() * m.detuned_pole(omega21);
    }

    let len = n_steps + 1;
    let mut c2 = Vec::with_capacity(len);
    let mut bs: Vec<Vec<Complex64>> = (0..n).map(|_| Vec::with_capacity(len)).collect();
    let mut leaks: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(len)).collect();
    let mut y =
        State { c2: Complex64::new(1.0, 0.0), b: [Complex64::new(0.0, 0.0); MAX_MODES], leak: [0.0; MAX_MODES] };
    let record = |y: &State, c2: &mut Vec<Complex64>, bs: &mut Vec<Vec<Complex64>>, leaks: &mut Vec<Vec<f64>>| {
        c2.push(y.c2);
        for (j, m) in modes.iter().enumerate() {
            bs[j].push(-Complex64::i() * (0.5 * m.rabi) * y.b[j]);
            leaks[j].push(y.leak[j]);
        }
    };
    record(&y, &mut c2, &mut bs, &mut leaks);
    for _ in 0..n_steps {
        let k1 = rates.derivative(&y);
        let k2 = rates.derivative(&axpy(&y, 0.5 * dt, &k1, n));
        let k3 = rates.derivative(&axpy(&y, 0.5 * dt, &k2, n));
        let k4 = rates.derivative(&axpy(&y, dt, &k3, n));
        y.c2 += (k1.c2 + (k2.c2 + k3.c2) * 2.0 + k4.c2) * (dt / 6.0);
        for j in 0..n {
            y.b[j] += (k1.b[j] + (k2.b[j] + k3.b[j]) * 2.0 + k4.b[j]) * (dt / 6.0);
            y.leak[j] += (k1.leak[j] + 2.0 * (k2.leak[j] + k3.leak[j]) + k4.leak[j]) * (dt / 6.0);
        }
        record(&y, &mut c2, &mut bs, &mut leaks);
    }
    let traces =
        modes.iter().zip(bs.into_iter().zip(leaks)).map(|(m, (b, leaked))| ModeTrace { mode: *m, b, leaked }).collect();
    Ok(EmissionTrajectory { omega21, dt, c2, traces })
}

/// Direct discretisation of the memory integral: trapezoidal product
/// quadrature with an Euler predictor and trapezoidal corrector. Second
/// order and `O(N²)`; meant as an independent cross-check of [`solve`].
pub fn solve_volterra_direct(
    modes: &[CavityModeSpec],
    emitter: &EmitterSpec,
    grid: &SimGrid,
) -> Result<EmissionTrajectory> {
    let omega21 = emitter.omega21;
    let n_steps = grid.n_time;
    let h = grid.dt();
    if let Some(bound) = step_bound(modes, omega21) {
        if h > bound * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt: h, bound });
        }
    }
    let len = n_steps + 1;
    let kernel: Vec<Complex64> = (0..len).map(|m| kernel_k(modes, omega21, h * m as f64)).collect();
    let mut c2 = vec![Complex64::new(0.0, 0.0); len];
    c2[0] = Complex64::new(1.0, 0.0);
    // Memory integral at t_n with the current endpoint excluded.
    let history = |c2: &[Complex64], n: usize| -> Complex64 {
        let mut acc = 0.5 * kernel[n] * c2[0];
        for m in 1..n {
            acc += kernel[n - m] * c2[m];
        }
        acc * h
    };
    let mut f_prev = Complex64::new(0.0, 0.0);
    for n in 0..n_steps {
        let partial = history(&c2, n + 1);
        let predicted = c2[n] + h * f_prev;
        let f_pred = partial + 0.5 * h * kernel[0] * predicted;
        let next = c2[n] + 0.5 * h * (f_prev + f_pred);
        c2[n + 1] = next;
        f_prev = partial + 0.5 * h * kernel[0] * next;
    }

    let traces = modes
        .iter()
        .map(|m| {
            let rate = -Complex64::i() * m.detuned_pole(omega21);
            let prop: Vec<Complex64> = (0..len).map(|k| (rate * (h * k as f64)).exp()).collect();
            let pref = -Complex64::i() * (0.5 * m.rabi);
            let b: Vec<Complex64> = (0..len)
                .map(|n| {
                    if n == 0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let mut acc = 0.5 * (prop[n] * c2[0] + prop[0] * c2[n]);
                    for k in 1..n {
                        acc += prop[n - k] * c2[k];
                    }
                    pref * acc * h
                })
                .collect();
            let mut leaked = Vec::with_capacity(len);
            leaked.push(0.0);
            for n in 1..len {
                let inc = 0.5 * h * m.resonance.gamma_total * (b[n - 1].norm_sqr() + b[n].norm_sqr());
                leaked.push(leaked[n - 1] + inc);
            }
            ModeTrace { mode: *m, b, leaked }
        })
        .collect();
    Ok(EmissionTrajectory { omega21, dt: h, c2, traces })
}

/// Closed form for one mode:
/// `C2 = (λ₊e^{λ₋t} − λ₋e^{λ₊t})/(λ₊ − λ₋)`, `λ± = (−a ± √(a² − R²))/2`,
/// `a = i(ω − ω21) + Γ/2`.
pub fn analytic_single_mode(mode: &CavityModeSpec, omega21: f64, t: f64) -> Complex64 {
    let a = Complex64::i() * mode.detuned_pole(omega21);
    let r = mode.rabi;
    let disc = (a * a - r * r).sqrt();
    let lp = 0.5 * (-a + disc);
    let lm = 0.5 * (-a - disc);
    let scale = a.norm().max(r).max(1.0);
    if disc.norm() <= 1e-7 * scale {
        let l = -0.5 * a;
        return (1.0 - l * t) * (l * t).exp();
    }
    (lp * (lm * t).exp() - lm * (lp * t).exp()) / (lp - lm)
}

/// Largest `| |C2|² + Σ|b|² + Σ leaked − 1 |` over the samples.
pub fn energy_ledger(traj: &EmissionTrajectory) -> f64 {
    (0..traj.len()).map(|i| traj.ledger_defect(i).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Polarization::S;

    #[test]
    fn kernel_values() {
        let m = CavityModeSpec::new(S, 1000.0, 0.0, 2.0);
        assert!((kernel_k(&[m], 1000.0, 3.7) + 1.0).norm() < 1e-14);
        let zero = CavityModeSpec::new(S, 1000.0, 1.0, 0.0);
        assert_eq!(kernel_k(&[zero], 1000.0, 0.4), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn uncoupled_is_frozen() {
        let m = CavityModeSpec::new(S, 1003.0, 1.0, 0.0);
        let traj = solve_fixed_step(&[m], 1000.0, 1.0, 100).unwrap();
        assert!(traj.c2.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
        assert_eq!(energy_ledger(&traj), 0.0);
    }

    #[test]
    fn step_guard() {
        let m = CavityModeSpec::new(S, 1000.0, 1.0, 20.0);
        assert!(matches!(solve_fixed_step(&[m], 1000.0, 10.0, 100), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn confluent_limit_is_continuous() {
        // a = Γ/2 = R gives a double root.
        let m = CavityModeSpec::new(S, 1000.0, 4.0, 2.0);
        let near = CavityModeSpec::new(S, 1000.0, 4.0, 2.0 + 1e-6);
        for t in [0.1, 0.7, 2.0] {
            let d = analytic_single_mode(&m, 1000.0, t) - analytic_single_mode(&near, 1000.0, t);
            assert!(d.norm() < 1e-5);
        }
    }
}
