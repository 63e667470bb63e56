//! The five subcommands. Each returns the directory or report it produced;
//! `main` maps errors to exit codes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use cqed_core::domain::{validate, validate_stack_report, EvaluationMode, Polarization, ScenarioConfig};
use cqed_core::dynamics::{self, energy_ledger, EmissionTrajectory, SolveOptions, STEP_FRACTION};
use cqed_core::greens::{find_resonances, local_coupling_spectrum, verify_im_identity, Z_TOLERANCE};
use cqed_core::outfield::{
    self, efficiency_eta, peak_report, peaks_in_samples, FullGreenOptions, Peak, SpectralAmplitude,
    DEFAULT_PEAK_THRESHOLD, EDGE_RATIO_LIMIT, PARSEVAL_TOLERANCE,
};
use cqed_core::quantum_state::{factorization_deviation_eta, wigner_at, wigner_sigma, ProbeGrid, WignerGridSpec};
use cqed_core::Complex64;

use crate::error::{CliError, Result};
use crate::manifest::{GridEcho, Manifest, ScenarioEcho};
use crate::output::{csv, out_dir, read_json, Artifacts, Table};
use crate::scenario::{load_scenario, parse_stack, write_scenario};

/// Samples of the efficiency build-up written to `efficiency.csv`.
pub const EFFICIENCY_POINTS: usize = 101;

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct GlobalOptions {
    pub out: Option<PathBuf>,
    pub scenario: Option<String>,
    pub mode: Option<EvaluationMode>,
    pub dt: Option<f64>,
    pub omega_window: Option<(f64, f64, usize)>,
    pub quiet: bool,
}

impl GlobalOptions {
    fn note(&self, message: &str) {
        if !self.quiet {
            eprintln!("{message}");
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEntry {
    pub omega: f64,
    pub height: f64,
    pub prominence: f64,
}

impl From<Peak> for PeakEntry {
    fn from(p: Peak) -> Self {
        PeakEntry { omega: p.omega, height: p.height, prominence: p.prominence }
    }
}

/// Contents of `peaks.json`. Heights refer to `|F| = |φ|/√η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFile {
    pub threshold: f64,
    pub s: Vec<PeakEntry>,
    pub p: Vec<PeakEntry>,
}

impl PeakFile {
    pub fn get(&self, q: Polarization) -> &[PeakEntry] {
        match q {
            Polarization::S => &self.s,
            Polarization::P => &self.p,
        }
    }
}

/// Contents of `state_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub eta_s: f64,
    pub eta_p: f64,
    #[serde(rename = "W0_s")]
    pub w0_s: f64,
    #[serde(rename = "W0_p")]
    pub w0_p: f64,
    pub factorization_deviation: f64,
}

impl StateSummary {
    pub fn from_eta(eta_s: f64, eta_p: f64) -> Self {
        let origin = Complex64::new(0.0, 0.0);
        StateSummary {
            eta_s,
            eta_p,
            w0_s: wigner_at(eta_s, origin),
            w0_p: wigner_at(eta_p, origin),
            factorization_deviation: factorization_deviation_eta(eta_s, eta_p, ProbeGrid::default()),
        }
    }
}

fn apply_overrides(config: &mut ScenarioConfig, opts: &GlobalOptions) -> Result<()> {
    if let Some(mode) = opts.mode {
        config.evaluation_mode = mode;
    }
    if let Some(dt) = opts.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::Config(format!("--dt: step must be positive, got {dt}")));
        }
        let steps = (config.grid.t_max / dt).round();
        if steps < 1.0 || (steps * dt - config.grid.t_max).abs() > 1e-9 * config.grid.t_max {
            return Err(CliError::Config(format!("--dt: {dt} does not divide t_max = {}", config.grid.t_max)));
        }
        config.grid.n_time = steps as usize;
    }
    if let Some((lo, hi, n)) = opts.omega_window {
        config.grid.omega_min = lo;
        config.grid.omega_max = hi;
        config.grid.n_omega = n;
    }
    Ok(())
}

fn spectrum(config: &ScenarioConfig, traj: &EmissionTrajectory, q: Polarization) -> Result<SpectralAmplitude> {
    let mode = config.mode(q).expect("caller iterates configured modes");
    match config.evaluation_mode {
        EvaluationMode::PoleApprox => {
            let spec = outfield::spectral_amplitude_poleapprox(traj, mode, &config.grid)?;
            efficiency_eta(&spec)?;
            Ok(spec)
        }
        EvaluationMode::FullGreen => {
            let stack = config.stack.as_ref().expect("validated");
            Ok(outfield::spectral_amplitude_fullgreen(traj, stack, &config.emitter, mode, &config.grid)?)
        }
    }
}

fn unit_scale(spec: &SpectralAmplitude) -> f64 {
    if spec.eta > 0.0 {
        spec.eta.sqrt().recip()
    } else {
        0.0
    }
}

fn wigner_csv(eta: f64, grid: WignerGridSpec) -> Result<String> {
    let w = wigner_sigma(eta, grid)?;
    Ok(csv(&["re_gamma", "im_gamma", "W"], w.samples().map(|(g, v)| vec![g.re, g.im, v])))
}

/// Runs the full pipeline and writes the run directory.
pub fn simulate(opts: &GlobalOptions) -> Result<PathBuf> {
    let dir = out_dir(opts.out.as_ref(), "simulate")?;
    let source =
        opts.scenario.clone().ok_or_else(|| CliError::Config("simulate: --scenario NAME|FILE is required".into()))?;
    let scenario = load_scenario(&source)?;
    for w in &scenario.warnings {
        opts.note(&format!("warning: {w}"));
    }
    let mut config = scenario.config;
    apply_overrides(&mut config, opts)?;
    validate(&config).into_result()?;

    let solve_options = SolveOptions::default();
    let traj = dynamics::solve_with(&config.modes, &config.emitter, &config.grid, solve_options)?;
    let ledger = energy_ledger(&traj);

    let mut spectra = Vec::new();
    let mut series = Vec::new();
    for m in &config.modes {
        let q = m.polarization;
        spectra.push(spectrum(&config, &traj, q)?);
        series.push(outfield::efficiency_series(&traj, m, &config.grid, EFFICIENCY_POINTS)?);
    }
    let find = |q: Polarization| spectra.iter().find(|s| s.polarization == q);
    let eta = |q: Polarization| find(q).map_or(0.0, |s| s.eta);

    let mut files = Artifacts::default();

    let trace = |q: Polarization| traj.trace(q);
    let rows = (0..traj.len()).map(|i| {
        let b2 = |q| trace(q).map_or(0.0, |t| t.b[i].norm_sqr());
        let leaked = |q| trace(q).map_or(0.0, |t| t.leaked[i]);
        let c2 = traj.c2[i];
        vec![
            traj.time(i),
            c2.re,
            c2.im,
            c2.norm_sqr(),
            b2(Polarization::S),
            b2(Polarization::P),
            leaked(Polarization::S),
            leaked(Polarization::P),
            traj.ledger_defect(i),
        ]
    });
    files.add(
        "trajectory.csv",
        csv(
            &["t", "re_c2", "im_c2", "abs2_c2", "abs2_b_s", "abs2_b_p", "leaked_s", "leaked_p", "ledger_residual"],
            rows,
        ),
    );

    let omegas = config.grid.omegas();
    let zero = Complex64::new(0.0, 0.0);
    let rows = omegas.iter().enumerate().map(|(i, &w)| {
        let phi = |q| find(q).map_or(zero, |s| s.phi[i]);
        let f = |q| find(q).map_or(0.0, |s| s.phi[i].norm() * unit_scale(s));
        let (ps, pp) = (phi(Polarization::S), phi(Polarization::P));
        vec![w, f(Polarization::S), f(Polarization::P), ps.re, ps.im, pp.re, pp.im]
    });
    files.add(
        "spectrum.csv",
        csv(&["omega", "abs_f_s", "abs_f_p", "re_phi_s", "im_phi_s", "re_phi_p", "im_phi_p"], rows),
    );

    let series_of = |q: Polarization| config.modes.iter().position(|m| m.polarization == q).map(|k| &series[k]);
    let (ser_s, ser_p) = (series_of(Polarization::S), series_of(Polarization::P));
    let n_rows = ser_s.or(ser_p).map_or(0, |s| s.len());
    let rows = (0..n_rows).map(|i| {
        let t = ser_s.or(ser_p).expect("at least one mode")[i].0;
        vec![t, ser_s.map_or(0.0, |s| s[i].1), ser_p.map_or(0.0, |s| s[i].1)]
    });
    files.add("efficiency.csv", csv(&["t", "eta_s", "eta_p"], rows));

    let peaks_of = |q| {
        find(q)
            .filter(|s| s.eta > 0.0)
            .map(|s| peak_report(s, DEFAULT_PEAK_THRESHOLD).into_iter().map(PeakEntry::from).collect())
            .unwrap_or_default()
    };
    let peaks =
        PeakFile { threshold: DEFAULT_PEAK_THRESHOLD, s: peaks_of(Polarization::S), p: peaks_of(Polarization::P) };
    files.add_json("peaks.json", &peaks);

    let summary = StateSummary::from_eta(eta(Polarization::S), eta(Polarization::P));
    files.add_json("state_summary.json", &summary);

    let wgrid = WignerGridSpec::default();
    for m in &config.modes {
        let q = m.polarization;
        files.add(&format!("wigner_{}.csv", q.label()), wigner_csv(eta(q), wgrid)?);
    }
    files.add("scenario.cfg", write_scenario(&config));

    let full_green = FullGreenOptions::default();
    let probe = ProbeGrid::default();
    let solver = json!({
        "integrator": "rk4",
        "dt": config.grid.dt(),
        "n_time": config.grid.n_time,
        "step_fraction": STEP_FRACTION,
        "ledger_tolerance": solve_options.ledger_tolerance,
        "max_halvings": solve_options.max_halvings,
        "max_ledger_residual": ledger,
        "omega_step": config.grid.omega_step(),
        "parseval_tolerance": PARSEVAL_TOLERANCE,
        "edge_ratio_limit": EDGE_RATIO_LIMIT,
        "peak_threshold": DEFAULT_PEAK_THRESHOLD,
        "efficiency_points": EFFICIENCY_POINTS,
        "efficiency_source": "pole",
        "full_green": match config.evaluation_mode {
            EvaluationMode::FullGreen => json!({
                "min_half_band": full_green.min_half_band,
                "decay_lengths": full_green.decay_lengths,
            }),
            EvaluationMode::PoleApprox => serde_json::Value::Null,
        },
        "wigner_grid": {
            "re": [wgrid.re.0, wgrid.re.1],
            "im": [wgrid.im.0, wgrid.im.1],
            "n_re": wgrid.n_re,
            "n_im": wgrid.n_im,
        },
        "probe_grid": { "radius": probe.radius, "points_per_axis": probe.points_per_axis },
    });
    let base = scenario.base.map(|b| b.label());
    let echo = ScenarioEcho::new(&source, base, &config);
    let manifest = Manifest::new("simulate", Some(echo), solver, files.entries());
    files.add_json("manifest.json", &manifest);
    files.write_to(&dir)?;
    opts.note(&format!(
        "simulate: eta_s = {:.6}, eta_p = {:.6}, wrote {}",
        summary.eta_s,
        summary.eta_p,
        dir.display()
    ));
    Ok(dir)
}

/// Pairing of one peak of the first run with the nearest peak of the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDelta {
    pub omega_a: f64,
    pub omega_b: f64,
    pub d_omega: f64,
    pub d_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakComparison {
    pub count_a: usize,
    pub count_b: usize,
    pub deltas: Vec<PeakDelta>,
}

/// Report of `compare A B`; ratios are `A / B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub run_a: String,
    pub run_b: String,
    pub eta_s_ratio: Option<f64>,
    pub eta_p_ratio: Option<f64>,
    pub peaks_s: PeakComparison,
    pub peaks_p: PeakComparison,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    if a == b {
        Some(1.0)
    } else if b != 0.0 {
        Some(a / b)
    } else {
        None
    }
}

fn compare_peaks(a: &[PeakEntry], b: &[PeakEntry]) -> PeakComparison {
    let deltas = a
        .iter()
        .filter_map(|pa| {
            let pb = b.iter().min_by(|x, y| (x.omega - pa.omega).abs().total_cmp(&(y.omega - pa.omega).abs()))?;
            Some(PeakDelta {
                omega_a: pa.omega,
                omega_b: pb.omega,
                d_omega: pa.omega - pb.omega,
                d_height: pa.height - pb.height,
            })
        })
        .collect();
    PeakComparison { count_a: a.len(), count_b: b.len(), deltas }
}

fn run_grid(dir: &Path) -> Result<GridEcho> {
    let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
    manifest
        .scenario
        .map(|s| s.grid)
        .ok_or_else(|| CliError::Config(format!("{} is not a simulate run", dir.display())))
}

pub fn compare(a: &Path, b: &Path, opts: &GlobalOptions) -> Result<CompareReport> {
    let (grid_a, grid_b) = (run_grid(a)?, run_grid(b)?);
    if grid_a != grid_b {
        return Err(CliError::Config(format!(
            "runs use different grids: {} has {:?}, {} has {:?}",
            a.display(),
            grid_a,
            b.display(),
            grid_b
        )));
    }
    let sa: StateSummary = read_json(&a.join("state_summary.json"))?;
    let sb: StateSummary = read_json(&b.join("state_summary.json"))?;
    let pa: PeakFile = read_json(&a.join("peaks.json"))?;
    let pb: PeakFile = read_json(&b.join("peaks.json"))?;
    let report = CompareReport {
        run_a: a.display().to_string(),
        run_b: b.display().to_string(),
        eta_s_ratio: ratio(sa.eta_s, sb.eta_s),
        eta_p_ratio: ratio(sa.eta_p, sb.eta_p),
        peaks_s: compare_peaks(&pa.s, &pb.s),
        peaks_p: compare_peaks(&pa.p, &pb.p),
    };
    if let Some(dir) = &opts.out {
        let mut files = Artifacts::default();
        files.add_json("compare.json", &report);
        files.write_to(dir)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleEntry {
    pub omega: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentitySample {
    pub z: f64,
    pub z2: f64,
    pub omega: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub k: f64,
    pub samples: Vec<IdentitySample>,
    pub max_residual: f64,
}

/// Arguments of `greens`.
#[derive(Debug, Clone)]
pub struct GreensArgs {
    pub stack: PathBuf,
    pub polarization: Polarization,
    pub k: f64,
    pub scan: (f64, f64, usize),
}

/// Coupling profile, resonances and the imaginary-part identity of a stack.
pub fn greens(args: &GreensArgs, opts: &GlobalOptions) -> Result<PathBuf> {
    let dir = out_dir(opts.out.as_ref(), "greens")?;
    let path = args.stack.display().to_string();
    let text = crate::output::read_text(&args.stack)?;
    let file = parse_stack(&text, &path)?;
    let (stack, mut emitter) = (file.stack, file.emitter);
    let (lo, hi, n) = args.scan;
    if !(lo > 0.0) {
        return Err(CliError::Config(format!("--scan: frequencies must be positive, got {lo}")));
    }
    if !(args.k.is_finite() && args.k >= 0.0) {
        return Err(CliError::Config(format!("--k: must be non-negative, got {}", args.k)));
    }
    validate_stack_report(&stack, &[lo, hi]).into_result()?;
    if stack.locate(emitter.z_position).0 != stack.emitter_layer {
        return Err(CliError::Config(format!("{path}: emitter.z lies outside the emitter layer")));
    }
    if !file.dipole_given {
        // In-plane dipole that couples to the requested polarization.
        emitter.dipole = match args.polarization {
            Polarization::S => [0.0, 1.0, 0.0],
            Polarization::P => [1.0, 0.0, 0.0],
        };
    }

    let profile = local_coupling_spectrum(&stack, &emitter, args.k, args.scan)?;
    let poles: Vec<PoleEntry> = find_resonances(&stack, args.polarization, args.k, (lo, hi))?
        .into_iter()
        .map(|r| PoleEntry { omega: r.omega, gamma: r.gamma_total })
        .collect();

    let j = stack.emitter_layer;
    let z_a = emitter.z_position;
    let z_b = stack.start(j) + 0.25 * stack.thickness(j);
    let mut omegas = vec![0.5 * (lo + hi)];
    omegas.extend(poles.iter().map(|p| p.omega));
    let mut samples = Vec::new();
    for &w in &omegas {
        for (z, z2) in [(z_a, z_a), (z_a, z_b), (z_b, z_a)] {
            let residual = verify_im_identity(&stack, z, z2, args.k, w)?;
            samples.push(IdentitySample { z, z2, omega: w, residual });
        }
    }
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let identity = IdentityReport { k: args.k, samples, max_residual };

    let mut files = Artifacts::default();
    files.add(
        "dos.csv",
        csv(&["omega", "profile"], profile.omega.iter().zip(&profile.value).map(|(&w, &v)| vec![w, v])),
    );
    files.add_json("poles.json", &poles);
    files.add_json("identity.json", &identity);
    let settings = json!({
        "stack_file": path,
        "polarization": args.polarization.label(),
        "k": args.k,
        "scan": { "omega_min": lo, "omega_max": hi, "n": n },
        "emitter": { "z": z_a, "dipole": emitter.dipole, "layer": j },
        "z_tolerance": { "abs": Z_TOLERANCE.abs, "rel": Z_TOLERANCE.rel, "max_depth": Z_TOLERANCE.max_depth },
    });
    let manifest = Manifest::new("greens", None, settings, files.entries());
    files.add_json("manifest.json", &manifest);
    files.write_to(&dir)?;
    opts.note(&format!(
        "greens: {} poles, identity residual {:.3e}, wrote {}",
        poles.len(),
        max_residual,
        dir.display()
    ));
    Ok(dir)
}

/// Arguments of `wigner`.
#[derive(Debug, Clone, Default)]
pub struct WignerArgs {
    pub run: Option<PathBuf>,
    pub eta_s: Option<f64>,
    pub eta_p: Option<f64>,
    pub grid: Option<(f64, f64, usize)>,
}

/// Wigner functions from a run's efficiencies or from explicit values.
pub fn wigner(args: &WignerArgs, opts: &GlobalOptions) -> Result<PathBuf> {
    let (mut eta_s, mut eta_p) = (args.eta_s, args.eta_p);
    if let Some(run) = &args.run {
        let summary: StateSummary = read_json(&run.join("state_summary.json"))?;
        eta_s = eta_s.or(Some(summary.eta_s));
        eta_p = eta_p.or(Some(summary.eta_p));
    }
    if eta_s.is_none() && eta_p.is_none() {
        return Err(CliError::Config("wigner: give --run DIR or --eta-s/--eta-p".into()));
    }
    let dir = match (&opts.out, &args.run) {
        (Some(out), _) => out.clone(),
        (None, Some(run)) => run.clone(),
        (None, None) => return Err(CliError::Config("wigner: --out DIR is required".into())),
    };
    let spec = match args.grid {
        Some((lo, hi, n)) => WignerGridSpec { re: (lo, hi), im: (lo, hi), n_re: n, n_im: n },
        None => WignerGridSpec::default(),
    };
    let mut files = Artifacts::default();
    for (q, eta) in [(Polarization::S, eta_s), (Polarization::P, eta_p)] {
        if let Some(eta) = eta {
            files.add(&format!("wigner_{}.csv", q.label()), wigner_csv(eta, spec)?);
        }
    }
    files.write_to(&dir)?;
    Ok(dir)
}

/// Peaks recomputed from a run's `spectrum.csv`.
pub fn peaks(run: &Path, threshold: f64, opts: &GlobalOptions) -> Result<PeakFile> {
    if !(threshold.is_finite() && threshold > 0.0 && threshold < 1.0) {
        return Err(CliError::Config(format!("--threshold must lie in (0, 1), got {threshold}")));
    }
    let path = run.join("spectrum.csv");
    let table = Table::read(&path)?;
    let missing = |c: &str| CliError::Config(format!("{}: no column `{c}`", path.display()));
    let omega = table.column("omega").ok_or_else(|| missing("omega"))?;
    let find = |c: &str| -> Result<Vec<PeakEntry>> {
        let values = table.column(c).ok_or_else(|| missing(c))?;
        if values.iter().all(|&v| v == 0.0) {
            return Ok(Vec::new());
        }
        Ok(peaks_in_samples(&omega, &values, threshold).into_iter().map(PeakEntry::from).collect())
    };
    let report = PeakFile { threshold, s: find("abs_f_s")?, p: find("abs_f_p")? };
    if let Some(dir) = &opts.out {
        let mut files = Artifacts::default();
        files.add_json("peaks.json", &report);
        files.write_to(dir)?;
    }
    Ok(report)
}
