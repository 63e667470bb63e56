//! Plain-text scenario files.
//!
//! ```text
//! base = fig1a          # optional preset; keys below override it
//! evaluation = pole     # pole | fullgreen
//!
//! [emitter]
//! omega21 = 1000
//! z = 0.0047            # optional, defaults to the middle of `layer`
//! dipole = 0 1 0
//! layer = 2
//!
//! [mode.s]
//! omega = 1000
//! gamma_total = 1
//! gamma_rad = 1         # defaults to gamma_total
//! rabi = 20
//!
//! [grid]
//! t_max = 10
//! n_time = 10000
//! omega_min = 960
//! omega_max = 1040
//! n_omega = 4001
//! k = 0
//!
//! [stack.0]             # half-spaces carry no thickness
//! eps = 1
//! [stack.1]
//! thickness = 0.0039
//! eps = 1600 0          # real and imaginary part
//! [stack.2]
//! lorentz = 2.1 0.3 1000 5   # background, strength, resonance, damping
//! [stack.3]
//! medium = pec
//! ```
//!
//! Comments start with `#`. Every key may appear once per file; a key that
//! replaces a preset value produces a warning.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cqed_core::domain::{
    CavityModeSpec, ComplexResonance, EmitterSpec, EvaluationMode, Layer, LayerStack, Permittivity, Polarization,
    PresetName, ScenarioConfig, SimGrid,
};
use cqed_core::Complex64;

use crate::error::{CliError, Result};

/// A parsed scenario together with the diagnostics produced while merging.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub base: Option<PresetName>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Preset,
    File,
}

#[derive(Debug, Clone)]
struct Value {
    text: String,
    line: usize,
    origin: Origin,
}

/// Flat `section.key → value` view of a file, in key order.
#[derive(Debug, Default)]
struct Document {
    path: String,
    values: BTreeMap<String, Value>,
    warnings: Vec<String>,
}

const EMITTER_KEYS: &[&str] = &["omega21", "z", "dipole", "layer"];
const MODE_KEYS: &[&str] = &["omega", "gamma_total", "gamma_rad", "rabi"];
const GRID_KEYS: &[&str] = &["t_max", "n_time", "omega_min", "omega_max", "n_omega", "k"];
const LAYER_KEYS: &[&str] = &["thickness", "eps", "lorentz", "medium"];
const TOP_KEYS: &[&str] = &["base", "evaluation"];

fn parse_error(path: &str, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_string(), line, message: message.into() }
}

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "emitter" => Some(EMITTER_KEYS),
        "mode.s" | "mode.p" => Some(MODE_KEYS),
        "grid" => Some(GRID_KEYS),
        s => s.strip_prefix("stack.").and_then(|i| i.parse::<usize>().ok()).map(|_| LAYER_KEYS),
    }
}

impl Document {
    fn tokenize(text: &str, path: &str, origin: Origin) -> Result<Vec<(String, Value)>> {
        let mut section = String::new();
        let mut out = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_error(path, line, "unterminated section header"))?
                    .trim();
                if section_keys(name).is_none() {
                    return Err(parse_error(path, line, format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| parse_error(path, line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(parse_error(path, line, format!("missing value for `{key}`")));
            }
            let allowed = if section.is_empty() { TOP_KEYS } else { section_keys(&section).unwrap_or(&[]) };
            if !allowed.contains(&key) {
                let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
                return Err(parse_error(path, line, format!("unknown key `{key}` in {place}")));
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            out.push((full, Value { text: value.to_string(), line, origin }));
        }
        Ok(out)
    }

    fn parse(text: &str, path: &str) -> Result<Self> {
        let entries = Self::tokenize(text, path, Origin::File)?;
        let mut doc = Document { path: path.to_string(), ..Default::default() };
        let base = entries.iter().find(|(k, _)| k == "base");
        if let Some((_, v)) = base {
            let name: PresetName =
                v.text.parse().map_err(|_| parse_error(path, v.line, format!("unknown preset `{}`", v.text)))?;
            let preset_text = write_scenario(&cqed_core::domain::preset(name));
            for (k, v) in Self::tokenize(&preset_text, "<preset>", Origin::Preset)? {
                doc.values.insert(k, v);
            }
        }
        for (key, value) in entries {
            match doc.values.get(&key) {
                Some(prev) if prev.origin == Origin::File => {
                    return Err(parse_error(path, value.line, format!("`{key}` already set on line {}", prev.line)));
                }
                Some(prev) if !same_value(&prev.text, &value.text) => {
                    doc.warnings.push(format!(
                        "{path}:{}: `{key}` = {} overrides the preset value {}",
                        value.line, value.text, prev.text
                    ));
                }
                _ => {}
            }
            doc.values.insert(key, value);
        }
        doc.check_values()?;
        Ok(doc)
    }

    /// Type-checks every value up front so that the first bad line is
    /// reported before any structural complaint.
    fn check_values(&self) -> Result<()> {
        let mut entries: Vec<(&String, &Value)> =
            self.values.iter().filter(|(_, v)| v.origin == Origin::File).collect();
        entries.sort_by_key(|(_, v)| v.line);
        for (key, v) in entries {
            let field = key.rsplit('.').next().unwrap_or(key);
            match field {
                "base" => {}
                "evaluation" => {
                    self.evaluation()?;
                }
                "medium" => {
                    if !matches!(v.text.as_str(), "pec" | "vacuum") {
                        return Err(parse_error(&self.path, v.line, format!("unknown medium `{}`", v.text)));
                    }
                }
                "layer" | "n_time" | "n_omega" => {
                    self.count(key)?;
                }
                "dipole" => {
                    self.numbers(key, 3..=3)?;
                }
                "eps" => {
                    self.numbers(key, 1..=2)?;
                }
                "lorentz" => {
                    self.numbers(key, 4..=4)?;
                }
                _ => {
                    self.number(key)?;
                }
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.values.keys().any(|k| k.starts_with(prefix))
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::Config(format!("{}: missing `{key}`", self.path))
    }

    fn numbers(&self, key: &str, count: std::ops::RangeInclusive<usize>) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let mut out = Vec::new();
        for word in v.text.split_whitespace() {
            let x: f64 = word
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| parse_error(&self.path, v.line, format!("`{word}` is not a finite number")))?;
            out.push(x);
        }
        if !count.contains(&out.len()) {
            let want = if count.start() == count.end() {
                format!("{}", count.start())
            } else {
                format!("{} to {}", count.start(), count.end())
            };
            return Err(parse_error(&self.path, v.line, format!("`{key}` takes {want} numbers, got {}", out.len())));
        }
        Ok(Some(out))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        Ok(self.numbers(key, 1..=1)?.map(|v| v[0]))
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| self.missing(key))
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        v.text
            .parse()
            .map(Some)
            .map_err(|_| parse_error(&self.path, v.line, format!("`{}` is not a non-negative integer", v.text)))
    }

    fn layer_count(&self) -> Result<usize> {
        let mut indices: Vec<usize> =
            self.values.keys().filter_map(|k| k.strip_prefix("stack.")?.split('.').next()?.parse().ok()).collect();
        indices.sort_unstable();
        indices.dedup();
        for (expected, &found) in indices.iter().enumerate() {
            if expected != found {
                return Err(CliError::Config(format!(
                    "{}: stack layers must be numbered 0, 1, 2, ... (missing {expected})",
                    self.path
                )));
            }
        }
        Ok(indices.len())
    }

    fn layer(&self, j: usize) -> Result<Layer> {
        let prefix = format!("stack.{j}");
        let thickness = self.number(&format!("{prefix}.thickness"))?;
        let eps = self.numbers(&format!("{prefix}.eps"), 1..=2)?;
        let lorentz = self.numbers(&format!("{prefix}.lorentz"), 4..=4)?;
        let medium = self.get(&format!("{prefix}.medium"));
        let given = eps.is_some() as usize + lorentz.is_some() as usize + medium.is_some() as usize;
        if given != 1 {
            return Err(CliError::Config(format!(
                "{}: [{prefix}] needs exactly one of `eps`, `lorentz`, `medium`",
                self.path
            )));
        }
        let permittivity = if let Some(e) = eps {
            Permittivity::Constant(Complex64::new(e[0], e.get(1).copied().unwrap_or(0.0)))
        } else if let Some(l) = lorentz {
            Permittivity::Lorentz {
                background: Complex64::new(l[0], 0.0),
                strength: l[1],
                resonance: l[2],
                damping: l[3],
            }
        } else {
            let m = medium.expect("counted above");
            match m.text.as_str() {
                "pec" => Permittivity::PerfectConductor,
                "vacuum" => Permittivity::real(1.0),
                other => return Err(parse_error(&self.path, m.line, format!("unknown medium `{other}`"))),
            }
        };
        Ok(Layer { thickness, permittivity })
    }

    /// Stack sections, with the emitter layer taken from `[emitter]`.
    fn stack(&self) -> Result<Option<LayerStack>> {
        let n = self.layer_count()?;
        if n == 0 {
            return Ok(None);
        }
        let layers = (0..n).map(|j| self.layer(j)).collect::<Result<Vec<_>>>()?;
        let mut stack = LayerStack::new(layers, 0);
        stack.emitter_layer = match (self.count("emitter.layer")?, self.number("emitter.z")?) {
            (Some(j), _) => j,
            (None, Some(z)) => stack.locate(z).0,
            (None, None) if n == 3 => 1,
            (None, None) => return Err(self.missing("emitter.layer")),
        };
        Ok(Some(stack))
    }

    fn emitter(&self, stack: Option<&LayerStack>, required: bool) -> Result<EmitterSpec> {
        let omega21 = match self.number("emitter.omega21")? {
            Some(w) => w,
            None if required => return Err(self.missing("emitter.omega21")),
            None => 0.0,
        };
        let mut e = EmitterSpec::new(omega21);
        if let Some(d) = self.numbers("emitter.dipole", 3..=3)? {
            e.dipole = [d[0], d[1], d[2]];
        }
        e.z_position = match (self.number("emitter.z")?, stack) {
            (Some(z), _) => z,
            (None, Some(s)) if s.emitter_layer < s.layers.len() => {
                s.start(s.emitter_layer) + 0.5 * s.thickness(s.emitter_layer)
            }
            (None, _) => 0.0,
        };
        Ok(e)
    }

    fn mode(&self, q: Polarization) -> Result<Option<CavityModeSpec>> {
        let prefix = format!("mode.{}", q.label());
        if !self.has_prefix(&format!("{prefix}.")) {
            return Ok(None);
        }
        let omega = self.required(&format!("{prefix}.omega"))?;
        let gamma_total = self.required(&format!("{prefix}.gamma_total"))?;
        let gamma_rad = self.number(&format!("{prefix}.gamma_rad"))?.unwrap_or(gamma_total);
        let rabi = self.required(&format!("{prefix}.rabi"))?;
        Ok(Some(CavityModeSpec {
            polarization: q,
            resonance: ComplexResonance::new(omega, gamma_total).with_radiative(gamma_rad),
            rabi,
        }))
    }

    fn grid(&self) -> Result<SimGrid> {
        let n_time = self.count("grid.n_time")?.ok_or_else(|| self.missing("grid.n_time"))?;
        let n_omega = self.count("grid.n_omega")?.ok_or_else(|| self.missing("grid.n_omega"))?;
        Ok(SimGrid {
            t_max: self.required("grid.t_max")?,
            n_time,
            omega_min: self.required("grid.omega_min")?,
            omega_max: self.required("grid.omega_max")?,
            n_omega,
            k_transverse: self.number("grid.k")?.unwrap_or(0.0),
        })
    }

    fn evaluation(&self) -> Result<EvaluationMode> {
        match self.get("evaluation") {
            None => Ok(EvaluationMode::PoleApprox),
            Some(v) => parse_mode(&v.text).ok_or_else(|| {
                parse_error(&self.path, v.line, format!("unknown evaluation `{}` (expected pole or fullgreen)", v.text))
            }),
        }
    }
}

fn same_value(a: &str, b: &str) -> bool {
    let nums = |s: &str| s.split_whitespace().map(|w| w.parse::<f64>().ok()).collect::<Option<Vec<_>>>();
    a == b || matches!((nums(a), nums(b)), (Some(x), Some(y)) if x == y)
}

pub fn parse_mode(text: &str) -> Option<EvaluationMode> {
    match text {
        "pole" => Some(EvaluationMode::PoleApprox),
        "fullgreen" => Some(EvaluationMode::FullGreen),
        _ => None,
    }
}

/// Parses a scenario file. `path` only labels diagnostics.
pub fn parse_scenario(text: &str, path: &str) -> Result<Scenario> {
    let doc = Document::parse(text, path)?;
    let base = match doc.get("base") {
        Some(v) => v.text.parse().ok(),
        None => None,
    };
    let stack = doc.stack()?;
    let emitter = doc.emitter(stack.as_ref(), true)?;
    let modes: Vec<CavityModeSpec> =
        Polarization::ALL.iter().filter_map(|&q| doc.mode(q).transpose()).collect::<Result<_>>()?;
    let config = ScenarioConfig { emitter, modes, grid: doc.grid()?, evaluation_mode: doc.evaluation()?, stack };
    Ok(Scenario { config, base, warnings: doc.warnings })
}

/// A layer stack and the emitter placed in it.
#[derive(Debug, Clone, PartialEq)]
pub struct StackFile {
    pub stack: LayerStack,
    pub emitter: EmitterSpec,
    /// Whether `[emitter] dipole` was set explicitly.
    pub dipole_given: bool,
}

/// Reads a stack in the scenario format; only the `[stack.N]` and
/// `[emitter]` sections are used.
pub fn parse_stack(text: &str, path: &str) -> Result<StackFile> {
    let doc = Document::parse(text, path)?;
    let stack = doc.stack()?.ok_or_else(|| CliError::Config(format!("{path}: no [stack.N] sections")))?;
    let emitter = doc.emitter(Some(&stack), false)?;
    Ok(StackFile { stack, emitter, dipole_given: doc.get("emitter.dipole").is_some() })
}

/// Scenario from a preset name or a file path.
pub fn load_scenario(arg: &str) -> Result<Scenario> {
    if let Ok(name) = arg.parse::<PresetName>() {
        return Ok(Scenario { config: cqed_core::domain::preset(name), base: Some(name), warnings: Vec::new() });
    }
    let text = std::fs::read_to_string(arg).map_err(|source| CliError::Read { path: arg.into(), source })?;
    parse_scenario(&text, arg)
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Fully resolved scenario text; parsing it gives back the same config.
pub fn write_scenario(config: &ScenarioConfig) -> String {
    let mut s = String::new();
    let e = &config.emitter;
    let _ = writeln!(s, "evaluation = {}", config.evaluation_mode.label());
    let _ = writeln!(s, "\n[emitter]");
    let _ = writeln!(s, "omega21 = {}", num(e.omega21));
    let _ = writeln!(s, "z = {}", num(e.z_position));
    let _ = writeln!(s, "dipole = {} {} {}", num(e.dipole[0]), num(e.dipole[1]), num(e.dipole[2]));
    if let Some(stack) = &config.stack {
        let _ = writeln!(s, "layer = {}", stack.emitter_layer);
    }
    for m in &config.modes {
        let r = &m.resonance;
        let _ = writeln!(s, "\n[mode.{}]", m.polarization.label());
        let _ = writeln!(s, "omega = {}", num(r.omega));
        let _ = writeln!(s, "gamma_total = {}", num(r.gamma_total));
        let _ = writeln!(s, "gamma_rad = {}", num(r.gamma_rad));
        let _ = writeln!(s, "rabi = {}", num(m.rabi));
    }
    let g = &config.grid;
    let _ = writeln!(s, "\n[grid]");
    let _ = writeln!(s, "t_max = {}", num(g.t_max));
    let _ = writeln!(s, "n_time = {}", g.n_time);
    let _ = writeln!(s, "omega_min = {}", num(g.omega_min));
    let _ = writeln!(s, "omega_max = {}", num(g.omega_max));
    let _ = writeln!(s, "n_omega = {}", g.n_omega);
    let _ = writeln!(s, "k = {}", num(g.k_transverse));
    if let Some(stack) = &config.stack {
        for (j, layer) in stack.layers.iter().enumerate() {
            let _ = writeln!(s, "\n[stack.{j}]");
            if let Some(d) = layer.thickness {
                let _ = writeln!(s, "thickness = {}", num(d));
            }
            match layer.permittivity {
                Permittivity::Constant(eps) => {
                    let _ = writeln!(s, "eps = {} {}", num(eps.re), num(eps.im));
                }
                Permittivity::Lorentz { background, strength, resonance, damping } => {
                    // The file format has a real background only.
                    let _ = writeln!(
                        s,
                        "lorentz = {} {} {} {}",
                        num(background.re),
                        num(strength),
                        num(resonance),
                        num(damping)
                    );
                }
                Permittivity::PerfectConductor => {
                    let _ = writeln!(s, "medium = pec");
                }
            }
        }
    }
    s
}
