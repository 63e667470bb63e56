use std::f64::consts::PI;

use cqed_core::domain::{
    preset, CavityModeSpec, EmitterSpec, Layer, LayerStack, Permittivity, Polarization, PresetName, ScenarioConfig,
    SimGrid,
};
use cqed_core::dynamics::{solve, EmissionTrajectory};
use cqed_core::greens::find_resonances;
use cqed_core::outfield::*;
use cqed_core::{Complex64, Error};
use proptest::prelude::*;

fn run(name: PresetName) -> (ScenarioConfig, EmissionTrajectory) {
    let cfg = preset(name);
    let traj = solve(&cfg.modes, &cfg.emitter, &cfg.grid).unwrap();
    (cfg, traj)
}

fn spectrum(cfg: &ScenarioConfig, traj: &EmissionTrajectory, q: Polarization) -> SpectralAmplitude {
    spectral_amplitude_poleapprox(traj, cfg.mode(q).unwrap(), &cfg.grid).unwrap()
}

#[test]
fn parseval_matches_leaked_population() {
    for name in PresetName::ALL {
        let (cfg, traj) = run(name);
        for mode in &cfg.modes {
            let spec = spectral_amplitude_poleapprox(&traj, mode, &cfg.grid).unwrap();
            let reference = spec.reference_eta.unwrap();
            assert!((spec.eta - reference).abs() < 1e-6 * spec.eta);
            assert_eq!(efficiency_eta(&spec).unwrap(), spec.eta);
            assert!(spec.tail_mass > 0.0 && spec.tail_mass < 1e-3 * spec.eta);
        }
    }
}

#[test]
fn nothing_emitted_at_t_zero() {
    let (cfg, traj) = run(PresetName::Fig1a);
    let spec = pole_spectra(&traj, &cfg.modes[0], &cfg.grid, &[0]).unwrap().remove(0);
    assert!(spec.phi.iter().all(|p| *p == Complex64::new(0.0, 0.0)));
    assert_eq!(spec.eta, 0.0);
    assert!(matches!(normalized_mode_function(&spec), Err(Error::ZeroEfficiency)));
}

#[test]
fn fig1a_two_peaks() {
    let (cfg, traj) = run(PresetName::Fig1a);
    let s = spectrum(&cfg, &traj, Polarization::S);
    let peaks = peak_report(&s, DEFAULT_PEAK_THRESHOLD);
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!((peaks[0].omega - 990.0).abs() < 0.5);
    assert!((peaks[1].omega - 1010.0).abs() < 0.5);
    let p = spectrum(&cfg, &traj, Polarization::P);
    assert_eq!(peak_report(&p, DEFAULT_PEAK_THRESHOLD).len(), 2);
}

#[test]
fn fig1b_three_peaks() {
    let (cfg, traj) = run(PresetName::Fig1b);
    for q in Polarization::ALL {
        let peaks = peak_report(&spectrum(&cfg, &traj, q), DEFAULT_PEAK_THRESHOLD);
        assert_eq!(peaks.len(), 3, "{q}: {peaks:?}");
        assert!(peaks.windows(2).all(|w| w[0].omega < w[1].omega));
    }
}

#[test]
fn uncoupled_mode_is_dark() {
    let mut cfg = preset(PresetName::Fig1a);
    cfg.modes[1].rabi = 0.0;
    let traj = solve(&cfg.modes, &cfg.emitter, &cfg.grid).unwrap();
    let p = spectrum(&cfg, &traj, Polarization::P);
    assert!(p.phi.iter().all(|x| x.norm() == 0.0));
    assert_eq!(efficiency_eta(&p).unwrap(), 0.0);
}

#[test]
fn efficiency_grows_and_respects_the_ledger() {
    let (cfg, traj) = run(PresetName::Fig1b);
    let series: Vec<Vec<(f64, f64)>> =
        cfg.modes.iter().map(|m| efficiency_series(&traj, m, &cfg.grid, 41).unwrap()).collect();
    for s in &series {
        assert!(s.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
        assert!(s.iter().all(|&(_, eta)| (0.0..=1.0).contains(&eta)));
    }
    for k in 0..series[0].len() {
        let t = series[0][k].0;
        let i = traj.index_at(t);
        let stored: f64 = traj.c2[i].norm_sqr() + traj.traces.iter().map(|tr| tr.b[i].norm_sqr()).sum::<f64>();
        let total: f64 = series.iter().map(|s| s[k].1).sum();
        assert!(total <= 1.0 - stored + 1e-6, "t = {t}");
    }
}

#[test]
fn single_radiative_mode_emits_everything() {
    let mode = CavityModeSpec::new(Polarization::S, 1000.0, 1.0, 20.0);
    let grid =
        SimGrid { t_max: 40.0, n_time: 40000, omega_min: 960.0, omega_max: 1040.0, n_omega: 4001, k_transverse: 0.0 };
    let traj = solve(&[mode], &EmitterSpec::new(1000.0), &grid).unwrap();
    let spec = spectral_amplitude_poleapprox(&traj, &mode, &grid).unwrap();
    assert!((efficiency_eta(&spec).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn radiative_fraction_scales_efficiency() {
    let mut mode = CavityModeSpec::new(Polarization::S, 1000.0, 1.0, 20.0);
    mode.resonance.gamma_rad = 0.25;
    let grid = preset(PresetName::Fig1a).grid;
    let traj = solve(&[mode], &EmitterSpec::new(1000.0), &grid).unwrap();
    let spec = spectral_amplitude_poleapprox(&traj, &mode, &grid).unwrap();
    let leaked = traj.traces[0].leaked[traj.len() - 1];
    assert!((spec.eta - 0.25 * leaked).abs() < 1e-6 * spec.eta);
}

#[test]
fn normalization() {
    let (cfg, traj) = run(PresetName::Fig1a);
    let spec = spectrum(&cfg, &traj, Polarization::S);
    let f = normalized_mode_function(&spec).unwrap();
    assert!((f.norm_sqr() - 1.0).abs() < 1e-9);

    let mut scaled = spec.clone();
    scaled.phi.iter_mut().for_each(|p| *p *= 7.5);
    scaled.eta *= 56.25;
    scaled.tail_mass *= 56.25;
    let g = normalized_mode_function(&scaled).unwrap();
    let diff = f.phi.iter().zip(&g.phi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12);

    let raw_max = spec.magnitudes().iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    let f_max = f.magnitudes().iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert_eq!(raw_max, f_max);
    let pa: Vec<f64> = peak_report(&spec, 0.05).iter().map(|p| p.omega).collect();
    let pb: Vec<f64> = peak_report(&f, 0.05).iter().map(|p| p.omega).collect();
    assert_eq!(pa, pb);
}

#[test]
fn narrow_window_is_rejected() {
    let mut cfg = preset(PresetName::Fig1a);
    cfg.grid.omega_min = 995.0;
    cfg.grid.omega_max = 1005.0;
    cfg.grid.n_omega = 501;
    let traj = solve(&cfg.modes, &cfg.emitter, &cfg.grid).unwrap();
    let err = spectral_amplitude_poleapprox(&traj, &cfg.modes[0], &cfg.grid).unwrap_err();
    assert!(matches!(err, Error::WindowTooNarrow { .. }));
}

#[test]
fn lorentzian_has_one_peak() {
    let omega: Vec<f64> = (0..801).map(|i| 990.0 + 0.025 * i as f64).collect();
    let center = 1000.0123;
    let values: Vec<f64> = omega.iter().map(|w| 1.0 / ((w - center).powi(2) + 0.25)).collect();
    let peaks = peaks_in_samples(&omega, &values, 0.05);
    assert_eq!(peaks.len(), 1);
    assert!((peaks[0].omega - center).abs() < 0.1 * 0.025);
}

proptest! {
    #[test]
    fn lorentzian_center_recovered(center in 995.0f64..1005.0, width in 0.3f64..3.0) {
        let h = 0.02;
        let omega: Vec<f64> = (0..1001).map(|i| 990.0 + h * i as f64).collect();
        let values: Vec<f64> = omega.iter().map(|w| width / ((w - center).powi(2) + width * width)).collect();
        let peaks = peaks_in_samples(&omega, &values, 0.05);
        prop_assert_eq!(peaks.len(), 1);
        prop_assert!((peaks[0].omega - center).abs() < 0.1 * h);
    }
}

/// Quarter-wave mirrors of permittivity `eps` around a half-wave vacuum
/// spacer; the emitter sits at the spacer centre.
fn symmetric_cavity(omega0: f64, eps: f64) -> LayerStack {
    let lambda = 2.0 * PI / omega0;
    let mirror = Layer::slab(lambda / (4.0 * eps.sqrt()), Permittivity::real(eps));
    LayerStack::new(
        vec![
            Layer::vacuum(),
            mirror.clone(),
            Layer::slab(lambda / 2.0, Permittivity::real(1.0)),
            mirror,
            Layer::vacuum(),
        ],
        2,
    )
}

struct CrossCase {
    stack: LayerStack,
    emitter: EmitterSpec,
    mode: CavityModeSpec,
    grid: SimGrid,
    traj: EmissionTrajectory,
}

fn cross_case(t_max: f64, n_time: usize) -> CrossCase {
    let stack = symmetric_cavity(1000.0, 1600.0);
    let r = find_resonances(&stack, Polarization::S, 0.0, (950.0, 1050.0)).unwrap()[0];
    let mut emitter = EmitterSpec::new(r.omega);
    emitter.z_position = stack.start(2) + 0.5 * stack.thickness(2);
    // Half of the loss leaves through the output side.
    let mode = CavityModeSpec::new(Polarization::S, r.omega, r.gamma_total, 20.0);
    let mode = CavityModeSpec { resonance: mode.resonance.with_radiative(0.5 * r.gamma_total), ..mode };
    let grid = SimGrid {
        t_max,
        n_time,
        omega_min: r.omega - 40.0,
        omega_max: r.omega + 40.0,
        n_omega: 4001,
        k_transverse: 0.0,
    };
    let traj = solve(&[mode], &emitter, &grid).unwrap();
    CrossCase { stack, emitter, mode, grid, traj }
}

#[test]
fn full_green_matches_pole_peaks() {
    let c = cross_case(30.0, 15000);
    assert!(c.mode.resonance.gamma_total <= 1e-3 * c.mode.resonance.omega);
    let pole = spectral_amplitude_poleapprox(&c.traj, &c.mode, &c.grid).unwrap();
    let full = spectral_amplitude_fullgreen(&c.traj, &c.stack, &c.emitter, &c.mode, &c.grid).unwrap();
    let a = peak_report(&pole, DEFAULT_PEAK_THRESHOLD);
    let b = peak_report(&full, DEFAULT_PEAK_THRESHOLD);
    assert_eq!(a.len(), b.len());
    let h = c.grid.omega_step();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.omega - y.omega).abs() < h, "{x:?} {y:?}");
    }
    // Same trajectory, same radiative width: efficiencies agree closely.
    assert!((pole.eta - full.eta).abs() < 0.02 * pole.eta, "{} {}", pole.eta, full.eta);
}

#[test]
fn full_green_far_window_is_dark() {
    let c = cross_case(30.0, 15000);
    let on = spectral_amplitude_fullgreen(&c.traj, &c.stack, &c.emitter, &c.mode, &c.grid).unwrap();
    let far_grid = SimGrid {
        omega_min: c.mode.resonance.omega + 200.0,
        omega_max: c.mode.resonance.omega + 240.0,
        n_omega: 401,
        ..c.grid
    };
    let options = FullGreenOptions::default();
    let far = spectral_amplitude_fullgreen_with(&c.traj, &c.stack, &c.emitter, &c.mode, &far_grid, options).unwrap();
    let peak = on.magnitudes().into_iter().fold(0.0, f64::max);
    let far_max = far.magnitudes().into_iter().fold(0.0, f64::max);
    assert!(far_max < 1e-3 * peak, "{far_max} vs {peak}");
}

#[test]
fn full_green_closed_cavity_is_dark() {
    let lambda = 2.0 * PI / 1000.0;
    let stack = LayerStack::new(
        vec![
            Layer::half_space(Permittivity::PerfectConductor),
            Layer::slab(lambda / 2.0, Permittivity::real(1.0)),
            Layer::half_space(Permittivity::PerfectConductor),
        ],
        1,
    );
    let r = find_resonances(&stack, Polarization::S, 0.0, (950.0, 1050.0)).unwrap()[0];
    assert!(r.gamma_total < 1e-12);
    let mut emitter = EmitterSpec::new(r.omega);
    emitter.z_position = lambda / 4.0;
    let mode = CavityModeSpec::new(Polarization::S, r.omega, 0.0, 20.0);
    let grid = preset(PresetName::Fig1a).grid;
    let traj = solve(&[mode], &emitter, &grid).unwrap();
    let spec = spectral_amplitude_fullgreen(&traj, &stack, &emitter, &mode, &grid).unwrap();
    assert!(spec.phi.iter().all(|p| p.norm() == 0.0));
    assert_eq!(spec.eta, 0.0);
}

#[test]
fn full_green_rejects_mismatched_mode() {
    let c = cross_case(2.0, 1000);
    let mut mode = c.mode;
    mode.resonance.omega += 2.0 * c.mode.resonance.gamma_total;
    let err = spectral_amplitude_fullgreen(&c.traj, &c.stack, &c.emitter, &mode, &c.grid).unwrap_err();
    assert!(matches!(err, Error::ModeMismatch { .. }), "{err:?}");
}
