//! Scenario description: emitter, cavity modes, layer stack and sampling grids.

use alloc::{format, string::String, vec, vec::Vec};
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    S,
    P,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::S, Polarization::P];

    pub fn label(self) -> &'static str {
        match self {
            Polarization::S => "s",
            Polarization::P => "p",
        }
    }

    /// Sign `ξ_q` of the polarization in the dyadic expansion.
    pub fn xi(self) -> f64 {
        match self {
            Polarization::S => -1.0,
            Polarization::P => 1.0,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A quasi-discrete resonance `Ω = ω − iΓ/2` with radiative part `γ ≤ Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResonance {
    pub omega: f64,
    pub gamma_total: f64,
    pub gamma_rad: f64,
}

impl ComplexResonance {
    /// Resonance whose losses are all radiative.
    pub fn new(omega: f64, gamma_total: f64) -> Self {
        Self { omega, gamma_total, gamma_rad: gamma_total }
    }

    pub fn with_radiative(mut self, gamma_rad: f64) -> Self {
        self.gamma_rad = gamma_rad;
        self
    }

    pub fn pole(&self) -> Complex64 {
        Complex64::new(self.omega, -0.5 * self.gamma_total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityModeSpec {
    pub polarization: Polarization,
    pub resonance: ComplexResonance,
    /// Vacuum Rabi frequency `R`.
    pub rabi: f64,
}

impl CavityModeSpec {
    pub fn new(polarization: Polarization, omega: f64, gamma: f64, rabi: f64) -> Self {
        Self { polarization, resonance: ComplexResonance::new(omega, gamma), rabi }
    }

    /// `Ω − ω21`, the complex rate of the mode in the emitter's rotating frame.
    pub fn detuned_pole(&self, omega21: f64) -> Complex64 {
        self.resonance.pole() - omega21
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterSpec {
    pub omega21: f64,
    /// Axial position in stack coordinates; only used by the full-Green path.
    pub z_position: f64,
    pub dipole: [f64; 3],
}

impl EmitterSpec {
    pub fn new(omega21: f64) -> Self {
        Self { omega21, z_position: 0.0, dipole: [0.0, 1.0, 0.0] }
    }
}

/// Relative permittivity `ε(ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Permittivity {
    Constant(Complex64),
    /// `ε_b + f·ω0² / (ω0² − ω² − iγω)`.
    Lorentz {
        background: Complex64,
        strength: f64,
        resonance: f64,
        damping: f64,
    },
    /// Ideal mirror; admissible only as an outer half-space.
    PerfectConductor,
}

impl Permittivity {
    pub fn real(eps: f64) -> Self {
        Permittivity::Constant(Complex64::new(eps, 0.0))
    }

    pub fn is_perfect_conductor(&self) -> bool {
        matches!(self, Permittivity::PerfectConductor)
    }

    /// Value at a real frequency. A perfect conductor reports `NaN`.
    pub fn at(&self, omega: f64) -> Complex64 {
        self.at_complex(Complex64::new(omega, 0.0))
    }

    /// Analytic continuation to complex frequency.
    pub fn at_complex(&self, omega: Complex64) -> Complex64 {
        match *self {
            Permittivity::Constant(eps) => eps,
            Permittivity::Lorentz { background, strength, resonance, damping } => {
                let w0 = resonance * resonance;
                let den = Complex64::new(w0, 0.0) - omega * omega - Complex64::i() * damping * omega;
                background + strength * w0 / den
            }
            Permittivity::PerfectConductor => Complex64::new(f64::NAN, f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    /// `None` for the two outer half-spaces.
    pub thickness: Option<f64>,
    pub permittivity: Permittivity,
}

impl Layer {
    pub fn half_space(permittivity: Permittivity) -> Self {
        Self { thickness: None, permittivity }
    }

    pub fn slab(thickness: f64, permittivity: Permittivity) -> Self {
        Self { thickness: Some(thickness), permittivity }
    }

    pub fn vacuum() -> Self {
        Self::half_space(Permittivity::real(1.0))
    }
}

/// Planar stack ordered along +z. Layer 0 occupies `z ≤ 0`; interior layer
/// `j` occupies `[Z_j, Z_j + d_j]` with `Z_1 = 0`; the last layer is the
/// output half-space.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub emitter_layer: usize,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, emitter_layer: usize) -> Self {
        Self { layers, emitter_layer }
    }

    /// Index of the last layer.
    pub fn last(&self) -> usize {
        self.layers.len() - 1
    }

    /// Thickness used in propagation factors; zero for the half-spaces.
    pub fn thickness(&self, j: usize) -> f64 {
        self.layers[j].thickness.unwrap_or(0.0)
    }

    /// Global coordinate of the lower interface of layer `j` (`j ≥ 1`).
    pub fn start(&self, j: usize) -> f64 {
        (1..j).map(|i| self.thickness(i)).sum()
    }

    /// Layer containing `z` and the local coordinate `z − Z_j`. Interface
    /// points belong to the layer above them, except the upper surface of the
    /// stack which stays in the last interior layer.
    pub fn locate(&self, z: f64) -> (usize, f64) {
        if z < 0.0 {
            return (0, z);
        }
        let n = self.last();
        let mut z0 = 0.0;
        for j in 1..n {
            let d = self.thickness(j);
            if z < z0 + d || (j == n - 1 && z <= z0 + d) {
                return (j, z - z0);
            }
            z0 += d;
        }
        (n, z - z0)
    }

    pub fn permittivity(&self, j: usize, omega: f64) -> Complex64 {
        self.layers[j].permittivity.at(omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    pub t_max: f64,
    /// Number of time steps; the trajectory holds `n_time + 1` samples.
    pub n_time: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub k_transverse: f64,
}

impl SimGrid {
    pub fn dt(&self) -> f64 {
        self.t_max / self.n_time as f64
    }

    pub fn omega_step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n_omega - 1) as f64
    }

    pub fn omegas(&self) -> Vec<f64> {
        let h = self.omega_step();
        (0..self.n_omega).map(|i| self.omega_min + h * i as f64).collect()
    }

    /// Same window and time span, different step count.
    pub fn with_steps(mut self, n_time: usize) -> Self {
        self.n_time = n_time;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    PoleApprox,
    FullGreen,
}

impl EvaluationMode {
    pub fn label(self) -> &'static str {
        match self {
            EvaluationMode::PoleApprox => "pole",
            EvaluationMode::FullGreen => "fullgreen",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub emitter: EmitterSpec,
    pub modes: Vec<CavityModeSpec>,
    pub grid: SimGrid,
    pub evaluation_mode: EvaluationMode,
    pub stack: Option<LayerStack>,
}

impl ScenarioConfig {
    pub fn mode(&self, polarization: Polarization) -> Option<&CavityModeSpec> {
        self.modes.iter().find(|m| m.polarization == polarization)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, message: &str) -> bool {
        self.violations.iter().any(|v| v.message == message)
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { field: field.into(), message: message.into() });
    }

    /// First violation as an error, if any.
    pub fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidConfig(format!("{}: {}", v.field, v.message))),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

fn finite_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

pub fn validate(config: &ScenarioConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let e = &config.emitter;
    if !finite_positive(e.omega21) {
        report.push("emitter.omega21", "transition frequency must be positive");
    }
    let norm = e.dipole.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        report.push("emitter.dipole", "dipole orientation must have unit norm");
    }
    if !e.z_position.is_finite() {
        report.push("emitter.z", "position must be finite");
    }

    if config.modes.is_empty() || config.modes.len() > 2 {
        report.push("modes", "expected one or two cavity modes");
    }
    for (i, m) in config.modes.iter().enumerate() {
        let field = format!("mode.{}", m.polarization);
        if config.modes[..i].iter().any(|o| o.polarization == m.polarization) {
            report.push(field.clone(), "duplicate polarization");
        }
        let r = &m.resonance;
        if !finite_positive(r.omega) {
            report.push(format!("{field}.omega"), "mode frequency must be positive");
        }
        if !(r.gamma_total.is_finite() && r.gamma_total >= 0.0) {
            report.push(format!("{field}.gamma_total"), "total width must be non-negative");
        }
        if !(r.gamma_rad.is_finite() && r.gamma_rad >= 0.0) {
            report.push(format!("{field}.gamma_rad"), "radiative width must be non-negative");
        }
        if r.gamma_rad > r.gamma_total {
            report.push(format!("{field}.gamma_rad"), "radiative width exceeds total");
        }
        if !(m.rabi.is_finite() && m.rabi >= 0.0) {
            report.push(format!("{field}.rabi"), "rabi frequency must be non-negative");
        }
    }

    let g = &config.grid;
    if !finite_positive(g.t_max) {
        report.push("grid.t_max", "final time must be positive");
    }
    if g.n_time < 2 {
        report.push("grid.n_time", "at least two time steps required");
    }
    if !(g.omega_min.is_finite() && g.omega_max.is_finite() && g.omega_min < g.omega_max) {
        report.push("grid.omega", "window must satisfy omega_min < omega_max");
    }
    if g.n_omega < 3 {
        report.push("grid.n_omega", "at least three frequency samples required");
    }
    if !(g.k_transverse.is_finite() && g.k_transverse >= 0.0) {
        report.push("grid.k", "transverse wavevector must be non-negative");
    }

    match (&config.stack, config.evaluation_mode) {
        (None, EvaluationMode::FullGreen) => report.push("stack", "stack required"),
        (Some(stack), mode) => {
            let mut probes = vec![e.omega21, g.omega_min, g.omega_max];
            probes.retain(|w| *w > 0.0);
            validate_stack(stack, &probes, &mut report);
            if mode == EvaluationMode::FullGreen && report.is_valid() {
                let (j, _) = stack.locate(e.z_position);
                if j != stack.emitter_layer {
                    report.push("emitter.z", "emitter position lies outside the emitter layer");
                }
            }
        }
        (None, EvaluationMode::PoleApprox) => {}
    }
    report
}

/// Structural checks on a stack; `probes` are frequencies at which the
/// absorption sign is checked.
pub fn validate_stack_report(stack: &LayerStack, probes: &[f64]) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_stack(stack, probes, &mut report);
    report
}

fn validate_stack(stack: &LayerStack, probes: &[f64], report: &mut ValidationReport) {
    let n = stack.layers.len();
    if n < 3 {
        report.push("stack", "at least three layers required");
        return;
    }
    for (j, layer) in stack.layers.iter().enumerate() {
        let field = format!("stack.{j}");
        let outer = j == 0 || j == n - 1;
        match (outer, layer.thickness) {
            (true, Some(_)) => report.push(field.clone(), "outer layers must be semi-infinite"),
            (false, None) => report.push(field.clone(), "interior layer needs a thickness"),
            (false, Some(d)) if !(d.is_finite() && d >= 0.0) => {
                report.push(field.clone(), "thickness must be non-negative")
            }
            _ => {}
        }
        match layer.permittivity {
            Permittivity::PerfectConductor => {
                if !outer {
                    report.push(field.clone(), "perfect conductor only allowed as a half-space");
                }
            }
            p => {
                for &w in probes {
                    let eps = p.at(w);
                    if !(eps.re.is_finite() && eps.im.is_finite()) {
                        report.push(field.clone(), "permittivity must be finite");
                        break;
                    }
                    if eps.im < 0.0 {
                        report.push(field.clone(), "absorption must be non-negative");
                        break;
                    }
                }
                if let Permittivity::Lorentz { strength, resonance, damping, .. } = p {
                    if strength < 0.0 || resonance <= 0.0 || damping < 0.0 {
                        report.push(field.clone(), "lorentz parameters must be non-negative");
                    }
                }
            }
        }
    }
    if stack.emitter_layer == 0 || stack.emitter_layer >= n - 1 {
        report.push("stack.emitter_layer", "emitter layer must be interior");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Fig1a,
    Fig1b,
}

impl PresetName {
    pub const ALL: [PresetName; 2] = [PresetName::Fig1a, PresetName::Fig1b];

    pub fn label(self) -> &'static str {
        match self {
            PresetName::Fig1a => "fig1a",
            PresetName::Fig1b => "fig1b",
        }
    }
}

impl core::str::FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1a" => Ok(PresetName::Fig1a),
            "fig1b" => Ok(PresetName::Fig1b),
            other => Err(Error::UnknownPreset(other.into())),
        }
    }
}

/// Default time step of the presets.
pub const PRESET_DT: f64 = 1e-3;

/// Two-mode scenarios of the reference figure: resonant s mode with
/// `R_k = 20`, p mode with `Γ_l = 1.5`, `R_l = 6`, either resonant (fig1a)
/// or sitting on the lower Rabi peak at 990 (fig1b).
pub fn preset(name: PresetName) -> ScenarioConfig {
    let omega21 = 1000.0;
    let omega_l = match name {
        PresetName::Fig1a => 1000.0,
        PresetName::Fig1b => 990.0,
    };
    let t_max = 10.0;
    ScenarioConfig {
        emitter: EmitterSpec::new(omega21),
        modes: vec![
            CavityModeSpec::new(Polarization::S, 1000.0, 1.0, 20.0),
            CavityModeSpec::new(Polarization::P, omega_l, 1.5, 6.0),
        ],
        grid: SimGrid {
            t_max,
            n_time: (t_max / PRESET_DT).round() as usize,
            omega_min: 960.0,
            omega_max: 1040.0,
            n_omega: 4001,
            k_transverse: 0.0,
        },
        evaluation_mode: EvaluationMode::PoleApprox,
        stack: None,
    }
}

pub fn preset_by_name(name: &str) -> Result<ScenarioConfig> {
    Ok(preset(name.parse()?))
}
