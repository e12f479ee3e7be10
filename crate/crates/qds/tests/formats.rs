//! Model round trips and report determinism.

use std::path::PathBuf;

use proptest::prelude::*;
use qds::commands::{self, Flags, PicardArgs, TimeArg};
use qds::format;
use qds::report::{self, Report};
use qds_core::random;
use qds_core::{Picture, QuantumModel, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: [&str; 5] = ["id.json", "ad.json", "ad-l.json", "deph.json", "abs3.json"];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn fixtures_round_trip_exactly() {
    for name in FIXTURES {
        let model = format::parse_model(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let text = format::model_to_string(&model);
        let back = format::parse_model(&text).unwrap();
        assert_eq!(back, model, "{name}");
        assert_eq!(format::model_to_string(&back), text, "{name}");
    }
}

#[test]
fn amplitude_damping_fixture_matches_its_definition() {
    let model = format::parse_model(&std::fs::read_to_string(fixture("ad.json")).unwrap()).unwrap();
    let ops = model.kraus_ops().unwrap();
    let half = 0.5f64.sqrt();
    assert_eq!(ops[0][(1, 1)].re, half);
    assert_eq!(ops[1][(0, 1)].re, half);
}

fn without_timing(report: &Report) -> Report {
    Report {
        timing_ms: 0.0,
        ..report.clone()
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let flags = Flags {
        tol: Tolerances::default(),
        seed: 3,
    };
    let runs: Vec<Box<dyn Fn() -> Report>> = vec![
        Box::new(|| commands::cmd_check(&fixture("ad.json"), &flags).unwrap().report),
        Box::new(|| commands::cmd_resolve(&fixture("id.json"), &flags).unwrap().report),
        Box::new(|| commands::cmd_ergodic(&fixture("id.json"), &flags).unwrap().report),
        Box::new(|| {
            commands::cmd_classify(&fixture("abs3.json"), &fixture("p-absorbing.json"), &flags)
                .unwrap()
                .report
        }),
        Box::new(|| {
            commands::cmd_evolve(&fixture("deph.json"), &fixture("sigma-x.json"), TimeArg::Duration(0.5), Picture::Heisenberg, &flags)
                .unwrap()
                .report
        }),
        Box::new(|| {
            let args = PicardArgs { t: 1.0, max_n: 50, steps: 32 };
            commands::cmd_picard(&fixture("ad-l.json"), &fixture("p-ground.json"), args, &flags).unwrap().report
        }),
    ];
    for run in runs {
        let (a, b) = (without_timing(&run()), without_timing(&run()));
        assert_eq!(a.to_json(), b.to_json());
        let back = Report::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}

#[test]
fn model_hash_is_of_the_file_bytes() {
    let flags = Flags {
        tol: Tolerances::default(),
        seed: 1,
    };
    let path = fixture("ad.json");
    let r = commands::cmd_check(&path, &flags).unwrap().report;
    assert_eq!(r.model_hash, report::hash_bytes(&std::fs::read(&path).unwrap()));
}

fn random_model(seed: u64) -> QuantumModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=4);
    match rng.random_range(0..4) {
        0 => random::random_kraus_model(&mut rng, d, 2),
        1 => random::random_lindblad_model(&mut rng, d, 2),
        2 => {
            let h = random::random_hermitian(&mut rng, d);
            let jumps = vec![random::random_matrix(&mut rng, d, d)];
            let y = qds_core::effective_drift(&h, &jumps, &Tolerances::default()).unwrap();
            QuantumModel::lindblad_with_drift(h, jumps, y).unwrap()
        }
        _ => QuantumModel::stochastic(random::random_stochastic(&mut rng, d, 0.6)).unwrap(),
    }
}

proptest! {
    #[test]
    fn random_models_round_trip_exactly(seed in any::<u64>()) {
        let model = random_model(seed);
        let text = format::model_to_string(&model);
        prop_assert_eq!(format::parse_model(&text).unwrap(), model);
    }

    #[test]
    fn matrices_round_trip_through_json(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random::random_matrix(&mut rng, d, d);
        let text = serde_json::to_string(&format::matrix_value(&m)).unwrap();
        prop_assert_eq!(format::parse_operator(&text, d).unwrap(), m);
    }

    #[test]
    fn six_digit_rendering_parses_back_closely(x in -1e12f64..1e12) {
        let shown: f64 = report::sig6(x).parse().unwrap();
        prop_assert!((shown - x).abs() <= 5e-6 * x.abs());
    }
}
