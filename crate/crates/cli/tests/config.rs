use dirac_qca_cli::config::{BackendChoice, Numerics, Output, Packet, Physics, Potential};
use dirac_qca_cli::{Experiment, Format, RunConfig};
use proptest::prelude::*;

fn experiment() -> impl Strategy<Value = Experiment> {
    prop_oneof![
        Just(Experiment::DispersionTable),
        Just(Experiment::FreeEvolve),
        Just(Experiment::Zitter),
        Just(Experiment::ScatterScan),
        Just(Experiment::ScatterDynamic),
    ]
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO
}

prop_compose! {
    fn config()(
        experiment in experiment(),
        mass in finite(),
        masses in prop::collection::vec(finite(), 0..5),
        k0 in finite(),
        sigma in finite(),
        c in prop::array::uniform4(finite()),
        x0 in prop::option::of(finite()),
        phi in finite(),
        barrier in 0usize..1 << 20,
        sites in 0usize..1 << 20,
        steps in 0usize..1 << 20,
        spectral in any::<bool>(),
        stride in 0usize..1000,
        guard_threshold in finite(),
        points in (0usize..1000, 0usize..1000),
        dir in "[a-z/._-]{0,12}",
        json in any::<bool>(),
        seed in any::<u64>(),
    ) -> RunConfig {
        RunConfig {
            experiment,
            physics: Physics { mass, masses },
            packet: Packet { k0, sigma, c_plus: [c[0], c[1]], c_minus: [c[2], c[3]], x0 },
            potential: Potential { phi, barrier },
            numerics: Numerics {
                sites,
                steps,
                backend: if spectral { BackendChoice::Spectral } else { BackendChoice::Stencil },
                stride,
                guard_threshold,
                k_points: points.0,
                phi_points: points.1,
            },
            output: Output { dir, format: if json { Format::Json } else { Format::Csv }, seed },
        }
    }
}

proptest! {
    #[test]
    fn toml_round_trip(c in config()) {
        let text = c.to_toml_string();
        prop_assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn set_accepts_what_it_prints(mass in finite(), steps in 0usize..100_000) {
        let mut c = RunConfig::default();
        c.apply_override(&format!("physics.mass={mass:?}")).unwrap();
        c.apply_override(&format!("steps={steps}")).unwrap();
        prop_assert_eq!(c.physics.mass, mass);
        prop_assert_eq!(c.numerics.steps, steps);
    }
}

#[test]
fn partial_files_fill_in_defaults() {
    let c = RunConfig::from_toml_str("experiment = \"zitter\"\n[packet]\nk0 = 0.5\n").unwrap();
    assert_eq!(c.experiment, Experiment::Zitter);
    assert_eq!(c.packet.k0, 0.5);
    assert_eq!(c.numerics, Numerics::default());
    assert!(RunConfig::from_toml_str("[packet]\nk1 = 0.5\n").is_err());
}
