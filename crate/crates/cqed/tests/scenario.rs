use cqed::scenario::{parse_scenario, parse_stack, write_scenario};
use cqed::CliError;
use cqed_core::domain::{preset, EvaluationMode, Permittivity, Polarization, PresetName};

#[test]
fn presets_round_trip_through_text() {
    for name in PresetName::ALL {
        let config = preset(name);
        let parsed = parse_scenario(&write_scenario(&config), "rt.cfg").unwrap();
        assert_eq!(parsed.config, config);
        assert!(parsed.warnings.is_empty());
    }
}

#[test]
fn stack_round_trips() {
    let text = "\
evaluation = fullgreen
[emitter]
omega21 = 1000
layer = 2
[mode.s]
omega = 1000
gamma_total = 0.8
gamma_rad = 0.4
rabi = 20
[grid]
t_max = 10
n_time = 10000
omega_min = 960
omega_max = 1040
n_omega = 4001
[stack.0]
medium = pec
[stack.1]
thickness = 0.001
lorentz = 2.0 0.5 1500 3
[stack.2]
thickness = 0.003
eps = 1 0.001
[stack.3]
eps = 1
";
    let first = parse_scenario(text, "a.cfg").unwrap().config;
    assert_eq!(first.evaluation_mode, EvaluationMode::FullGreen);
    let stack = first.stack.as_ref().unwrap();
    assert_eq!(stack.emitter_layer, 2);
    assert_eq!(stack.layers[0].permittivity, Permittivity::PerfectConductor);
    assert!(matches!(stack.layers[1].permittivity, Permittivity::Lorentz { strength, .. } if strength == 0.5));
    // Emitter defaults to the middle of its layer.
    assert!((first.emitter.z_position - 0.0025).abs() < 1e-15);
    assert_eq!(first.modes[0].resonance.gamma_rad, 0.4);
    let second = parse_scenario(&write_scenario(&first), "b.cfg").unwrap().config;
    assert_eq!(first, second);
}

#[test]
fn file_overrides_preset_with_warning() {
    let s = parse_scenario("base = fig1a\n[mode.p]\nomega = 990 # move p\n", "o.cfg").unwrap();
    assert_eq!(s.config.mode(Polarization::P).unwrap().resonance.omega, 990.0);
    assert_eq!(s.config.modes, preset(PresetName::Fig1b).modes);
    assert_eq!(s.warnings.len(), 1);
    assert!(s.warnings[0].contains("o.cfg:3") && s.warnings[0].contains("mode.p.omega"), "{}", s.warnings[0]);
    // Restating a preset value is not an override.
    let s = parse_scenario("base = fig1a\n[grid]\nt_max = 10\n", "o.cfg").unwrap();
    assert!(s.warnings.is_empty());
}

fn parse_line(text: &str) -> (usize, String) {
    match parse_scenario(text, "x.cfg") {
        Err(CliError::Parse { line, message, .. }) => (line, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn errors_name_the_line() {
    assert_eq!(parse_line("base = fig1a\n\n[grid]\nt_max = ten\n").0, 4);
    assert_eq!(parse_line("base = fig1a\n[grid]\nn_time = 10\nn_time = 20\n").0, 4);
    let (line, message) = parse_line("[grid]\nspeed = 3\n");
    assert_eq!(line, 2);
    assert!(message.contains("speed"));
    assert_eq!(parse_line("[nonsense]\n").0, 1);
    assert_eq!(parse_line("base = fig9\n").0, 1);
    assert_eq!(parse_line("[emitter]\ndipole = 0 1\n").0, 2);
    assert_eq!(parse_line("[grid\n").0, 1);
    assert_eq!(parse_line("evaluation = exact\n").0, 1);
}

#[test]
fn missing_keys_are_config_errors() {
    let err = parse_scenario("[emitter]\nomega21 = 1000\n[mode.s]\nomega = 1000\n", "m.cfg").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("mode.s.gamma_total"), "{err}");
}

#[test]
fn stack_file_needs_layers_and_a_single_medium() {
    assert!(parse_stack("[emitter]\nz = 0\n", "s.cfg").is_err());
    let err = parse_stack(
        "[stack.0]\neps = 1\nmedium = pec\n[stack.1]\nthickness = 1\neps = 1\n[stack.2]\neps = 1\n",
        "s.cfg",
    )
    .unwrap_err();
    assert!(err.to_string().contains("exactly one"), "{err}");
    let err = parse_stack("[stack.0]\neps = 1\n[stack.2]\neps = 1\n", "s.cfg").unwrap_err();
    assert!(err.to_string().contains("missing 1"), "{err}");
    let file =
        parse_stack("[stack.0]\neps = 1\n[stack.1]\nthickness = 2\neps = 4\n[stack.2]\neps = 1\n", "s.cfg").unwrap();
    assert_eq!(file.stack.emitter_layer, 1);
    assert_eq!(file.emitter.z_position, 1.0);
    assert!(!file.dipole_given);
}
