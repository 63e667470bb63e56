use std::f64::consts::FRAC_2_PI;

use cqed_core::quantum_state::*;
use cqed_core::{Complex64, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn component_values() {
    assert!((wigner_component(WignerKind::Vacuum, c(0.0, 0.0)) - FRAC_2_PI).abs() < 1e-15);
    assert!((wigner_component(WignerKind::OnePhoton, c(0.0, 0.0)) + FRAC_2_PI).abs() < 1e-15);
    assert!(wigner_component(WignerKind::OnePhoton, c(0.3, 0.4)).abs() < 1e-15);
    assert!(wigner_component(WignerKind::OnePhoton, c(0.0, 0.49)) < 0.0);
    assert!(wigner_component(WignerKind::OnePhoton, c(0.0, 0.51)) > 0.0);
}

#[test]
fn grid_normalization_and_bounds() {
    for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let w = wigner_sigma(eta, WignerGridSpec::default()).unwrap();
        assert!((w.integral() - 1.0).abs() < 1e-6, "{eta}");
        assert!(w.min() >= -FRAC_2_PI - 1e-15);
        assert!((w.value(60, 60) - FRAC_2_PI * (1.0 - 2.0 * eta)).abs() < 1e-15);
    }
    let w = wigner_sigma(1.0, WignerGridSpec::default()).unwrap();
    assert!(w.values.iter().any(|&x| x < 0.0));
}

#[test]
fn mixture_is_linear() {
    let spec = WignerGridSpec::default();
    let w0 = wigner_sigma(0.0, spec).unwrap();
    let w1 = wigner_sigma(1.0, spec).unwrap();
    let eta = 0.37;
    let w = wigner_sigma(eta, spec).unwrap();
    for k in 0..w.values.len() {
        assert!((w.values[k] - ((1.0 - eta) * w0.values[k] + eta * w1.values[k])).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_efficiency() {
    assert!(matches!(wigner_sigma(1.2, WignerGridSpec::default()), Err(Error::EfficiencyOutOfRange(_))));
    assert!(wigner_sigma(-0.1, WignerGridSpec::default()).is_err());
}

#[test]
fn characteristic_function() {
    let zero = c(0.0, 0.0);
    assert_eq!(characteristic_out(OverlapPair { beta_s: zero, beta_p: zero }, (0.0, 0.0)), 1.0);
    let beta = c(0.3, -0.2);
    let single = (-0.4f64).exp() * (1.0 - beta.norm_sqr());
    assert!((characteristic_out(OverlapPair { beta_s: beta, beta_p: zero }, (0.8, 0.0)) - single).abs() < 1e-15);

    let half = c(0.5, 0.0);
    let n = 0.5;
    let joint = characteristic_out(OverlapPair { beta_s: half, beta_p: half }, (n, n));
    let product = characteristic_out(OverlapPair { beta_s: half, beta_p: zero }, (n, 0.0))
        * characteristic_out(OverlapPair { beta_s: zero, beta_p: half }, (0.0, n));
    assert!(joint < product);
}

#[test]
fn factorization() {
    let probe = ProbeGrid::default();
    assert!(factorization_deviation_eta(0.9, 0.0, probe) < 1e-12);
    assert!(factorization_deviation_eta(0.0, 0.4, probe) < 1e-12);
    assert!(factorization_deviation_eta(0.5, 0.3, probe) > 0.01);
    let amps = probe.amplitudes();
    assert!(amps.iter().all(|a| a.norm() <= 2.0 + 1e-12));
    assert!(amps.len() > 300 && amps.len() < 441);
}

proptest! {
    #[test]
    fn deviation_phase_covariant(
        sr in -2.0f64..2.0, si in -2.0f64..2.0, pr in -2.0f64..2.0, pi in -2.0f64..2.0,
        theta in 0.0f64..6.3, es in 0.0f64..1.0, ep in 0.0f64..1.0,
    ) {
        let (a, b) = (c(sr, si), c(pr, pi));
        let rot = Complex64::from_polar(1.0, theta);
        let d0 = pair_deviation(a, b, es, ep);
        let d1 = pair_deviation(a * rot, b * rot, es, ep);
        prop_assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn origin_sign_law(eta in 0.0f64..1.0) {
        let w0 = wigner_at(eta, c(0.0, 0.0));
        prop_assert_eq!(w0 < 0.0, eta > 0.5);
    }
}
