//! Synthetic boundary data.

use accreg_core::noise::NoiseSpec;
use accreg_fem::*;

fn small(example: Example) -> BltSetup {
    BltSetup::disk(example, 8, 4, 4, Coefficients::tissue()).unwrap()
}

#[test]
fn exact_data_has_zero_noise_level() {
    let setup = small(Example::Square);
    let data = setup
        .measurements(&NoiseSpec::new(0.0, 3).unwrap())
        .unwrap();
    assert_eq!(data.delta, 0.0);
    assert_eq!(data.g_noisy, data.g);
    assert_eq!(data.mesh_check, MeshCheck::Ok);
    let a = setup.coarse.coefficients().robin_a;
    for ((g, g1), g2) in data.g.iter().zip(&data.g1).zip(&data.g2) {
        assert_eq!(*g1, 2.0 * a * g);
        assert_eq!(*g2, -g);
    }
    // Outgoing flux of a nonnegative source is positive.
    assert!(data.g.iter().all(|g| *g > 0.0));
}

#[test]
fn dark_environment_couples_the_channels() {
    let setup = small(Example::TwoDisks);
    let data = setup
        .measurements(&NoiseSpec::new(0.05, 11).unwrap())
        .unwrap();
    let a = setup.coarse.coefficients().robin_a;
    assert_eq!(a, 3.2);
    for (g1, g2) in data.g1.iter().zip(&data.g2) {
        assert!((g1 + 2.0 * a * g2).abs() <= 1e-15 * g1.abs());
    }
    assert!(data.delta > 0.0);
    for (g, gn) in data.g.iter().zip(&data.g_noisy) {
        assert!((gn / g - 1.0).abs() <= 0.05 + 1e-12);
    }
}

#[test]
fn measurements_are_deterministic() {
    let setup = small(Example::Square);
    let noise = NoiseSpec::new(0.05, 42).unwrap();
    let a = setup.measurements(&noise).unwrap();
    let b = setup.measurements(&noise).unwrap();
    assert_eq!(a, b);
    let c = setup
        .measurements(&NoiseSpec::new(0.05, 43).unwrap())
        .unwrap();
    assert_ne!(a.delta, c.delta);
}

#[test]
fn noise_level_scales_with_the_relative_level() {
    let setup = small(Example::Square);
    let d1 = setup
        .measurements(&NoiseSpec::new(0.01, 5).unwrap())
        .unwrap()
        .delta;
    let d5 = setup
        .measurements(&NoiseSpec::new(0.05, 5).unwrap())
        .unwrap()
        .delta;
    // Same draws, so the perturbation is exactly linear in the level.
    assert!((d5 / d1 - 5.0).abs() < 1e-6, "{d1} {d5}");
}

#[test]
fn coarse_measurement_mesh_is_flagged() {
    let setup = BltSetup::disk(Example::Square, 8, 4, 2, Coefficients::tissue()).unwrap();
    let data = simulate_measurements(
        &setup.coarse,
        &setup.coarse,
        |p| Example::Square.source(p),
        0.0,
        &NoiseSpec::new(0.0, 0).unwrap(),
    )
    .unwrap();
    assert_eq!(data.mesh_check, MeshCheck::InverseCrime);
    let ok = setup
        .measurements(&NoiseSpec::new(0.0, 0).unwrap())
        .unwrap();
    assert_eq!(ok.mesh_check, MeshCheck::Ok);
}

#[test]
fn fine_and_coarse_data_agree_to_discretization_error() {
    let setup = small(Example::Square);
    let fine = setup
        .measurements(&NoiseSpec::new(0.0, 0).unwrap())
        .unwrap();
    let same = simulate_measurements(
        &setup.coarse,
        &setup.coarse,
        |p| Example::Square.source(p),
        0.0,
        &NoiseSpec::new(0.0, 0).unwrap(),
    )
    .unwrap();
    let rel = fine
        .g
        .iter()
        .zip(&same.g)
        .map(|(a, b)| (a - b).abs() / a.abs())
        .fold(0.0, f64::max);
    assert!(rel < 0.2, "{rel}");
}
