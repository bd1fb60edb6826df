use std::f64::consts::PI;

use dirac_qca_core::observables::{momentum_mean, position_mean, record_trace, TraceOptions};
use dirac_qca_core::spectral::group_velocity;
use dirac_qca_core::wavepacket::{branch_populations, build_packet};
use dirac_qca_core::{AutomatonParams, Complex64, ModeBasis, WavepacketSpec};

fn planned(m: f64, n: usize) -> ModeBasis<dirac_qca_core::RustFft> {
    ModeBasis::planned(AutomatonParams::new(m).unwrap(), n).unwrap()
}

#[test]
fn particle_packet_moves_at_group_velocity() {
    for (m, k0) in [(0.2, 0.5), (0.4, 2.0), (0.1, -1.0)] {
        let basis = planned(m, 2048);
        let spec = WavepacketSpec::particle(k0, 0.05);
        let state = build_packet(&spec, &basis).unwrap();
        let (trace, _) = record_trace(state, &basis, 300, TraceOptions::default()).unwrap();
        let measured = (trace.x_mean[300] - trace.x_mean[0]) / 300.0;
        let expected = group_velocity(k0, basis.params());
        assert!(
            (measured - expected).abs() <= 0.02 * expected.abs(),
            "m={m} k0={k0}: {measured} vs {expected}"
        );
        assert!((trace.p_mean[0] - k0).abs() < 1e-3);
        assert!((trace.p_mean[300] - trace.p_mean[0]).abs() < 1e-10);
    }
}

#[test]
fn antiparticle_packet_moves_the_other_way() {
    let basis = planned(0.3, 2048);
    let spec = WavepacketSpec::new(
        0.7,
        0.05,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    );
    let state = build_packet(&spec, &basis).unwrap();
    let (trace, _) = record_trace(state, &basis, 200, TraceOptions::default()).unwrap();
    let measured = (trace.x_mean[200] - trace.x_mean[0]) / 200.0;
    let expected = -group_velocity(0.7, basis.params());
    assert!((measured - expected).abs() <= 0.02 * expected.abs());
}

#[test]
fn spatial_variance_matches_momentum_width() {
    let sites = 1024;
    let basis = planned(0.5, sites);
    for sigma in [0.08, 0.1, 0.2] {
        let spec = WavepacketSpec::particle(0.0, sigma);
        let s = build_packet(&spec, &basis).unwrap();
        let mean = position_mean(&s).unwrap();
        let var: f64 = s
            .density()
            .iter()
            .enumerate()
            .map(|(i, w)| (s.position(i) as f64 - mean).powi(2) * w)
            .sum();
        let expected = 1.0 / (2.0 * sigma * sigma);
        assert!(
            (var - expected).abs() <= 0.1 * expected,
            "sigma {sigma}: {var} vs {expected}"
        );
    }
}

#[test]
fn branch_populations_follow_coefficients_and_persist() {
    let basis = planned(0.25, 1024);
    let a = (1.0f64 / 3.0).sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    let spec = WavepacketSpec::new(0.3, 0.1, Complex64::new(a, 0.0), Complex64::new(0.0, b));
    let state = build_packet(&spec, &basis).unwrap();
    let (trace, last) = record_trace(
        state,
        &basis,
        150,
        TraceOptions {
            populations: true,
            ..TraceOptions::default()
        },
    )
    .unwrap();
    let (plus, minus) = branch_populations(&last, &basis).unwrap();
    assert!((plus - 1.0 / 3.0).abs() < 1e-12 && (minus - 2.0 / 3.0).abs() < 1e-12);
    for (p, m) in trace.populations.unwrap() {
        assert!((p - 1.0 / 3.0).abs() < 1e-12 && (m - 2.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn momentum_mean_of_a_packet() {
    let basis = planned(0.6, 512);
    for k0 in [-2.0, -0.4, 0.0, 1.1] {
        let s = build_packet(&WavepacketSpec::particle(k0, 0.15), &basis).unwrap();
        let p = momentum_mean(&s, basis.transform()).unwrap();
        assert!((p - k0).abs() < 1e-6, "{k0}: {p}");
    }
    // far from the zone edge the Gaussian on the ring is still centred
    let s = build_packet(&WavepacketSpec::particle(PI - 1.0, 0.15), &basis).unwrap();
    assert!((momentum_mean(&s, basis.transform()).unwrap() - (PI - 1.0)).abs() < 1e-6);
}
