//! `manifest.json`: everything needed to reproduce the data files of a run.

use serde::{Deserialize, Serialize};

use cqed_core::domain::{LayerStack, Permittivity, ScenarioConfig, SimGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Absent for commands that do not run a scenario.
    pub scenario: Option<ScenarioEcho>,
    pub solver: serde_json::Value,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub source: String,
    pub base: Option<String>,
    pub evaluation: String,
    pub emitter: EmitterEcho,
    pub modes: Vec<ModeEcho>,
    pub grid: GridEcho,
    pub stack: Option<StackEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterEcho {
    pub omega21: f64,
    pub z: f64,
    pub dipole: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEcho {
    pub polarization: String,
    pub omega: f64,
    pub gamma_total: f64,
    pub gamma_rad: f64,
    pub rabi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEcho {
    pub t_max: f64,
    pub n_time: usize,
    pub dt: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub k: f64,
}

impl From<&SimGrid> for GridEcho {
    fn from(g: &SimGrid) -> Self {
        GridEcho {
            t_max: g.t_max,
            n_time: g.n_time,
            dt: g.dt(),
            omega_min: g.omega_min,
            omega_max: g.omega_max,
            n_omega: g.n_omega,
            k: g.k_transverse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackEcho {
    pub emitter_layer: usize,
    pub layers: Vec<LayerEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PermittivityEcho {
    Constant { re: f64, im: f64 },
    Lorentz { background_re: f64, background_im: f64, strength: f64, resonance: f64, damping: f64 },
    PerfectConductor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerEcho {
    pub thickness: Option<f64>,
    pub permittivity: PermittivityEcho,
}

impl From<&LayerStack> for StackEcho {
    fn from(s: &LayerStack) -> Self {
        let layers = s
            .layers
            .iter()
            .map(|l| LayerEcho {
                thickness: l.thickness,
                permittivity: match l.permittivity {
                    Permittivity::Constant(e) => PermittivityEcho::Constant { re: e.re, im: e.im },
                    Permittivity::Lorentz { background, strength, resonance, damping } => PermittivityEcho::Lorentz {
                        background_re: background.re,
                        background_im: background.im,
                        strength,
                        resonance,
                        damping,
                    },
                    Permittivity::PerfectConductor => PermittivityEcho::PerfectConductor,
                },
            })
            .collect();
        StackEcho { emitter_layer: s.emitter_layer, layers }
    }
}

impl ScenarioEcho {
    pub fn new(source: &str, base: Option<&str>, config: &ScenarioConfig) -> Self {
        let e = &config.emitter;
        ScenarioEcho {
            source: source.to_string(),
            base: base.map(str::to_string),
            evaluation: config.evaluation_mode.label().to_string(),
            emitter: EmitterEcho { omega21: e.omega21, z: e.z_position, dipole: e.dipole },
            modes: config
                .modes
                .iter()
                .map(|m| ModeEcho {
                    polarization: m.polarization.label().to_string(),
                    omega: m.resonance.omega,
                    gamma_total: m.resonance.gamma_total,
                    gamma_rad: m.resonance.gamma_rad,
                    rabi: m.rabi,
                })
                .collect(),
            grid: (&config.grid).into(),
            stack: config.stack.as_ref().map(StackEcho::from),
        }
    }
}

impl Manifest {
    pub fn new(
        command: &str,
        scenario: Option<ScenarioEcho>,
        solver: serde_json::Value,
        files: Vec<FileEntry>,
    ) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario,
            solver,
            files,
        }
    }
}
