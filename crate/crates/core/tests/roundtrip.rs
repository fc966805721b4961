mod common;

use std::time::Instant;

use biopepa_core::corpus;
use biopepa_core::parser::{parse, serialize};
use proptest::prelude::*;

#[test]
fn bundled_models_round_trip() {
    for (name, sys) in [("module1", corpus::module1()), ("module7", corpus::module7()), ("composed", corpus::composed())] {
        let text = serialize(&sys);
        assert_eq!(parse(&text).unwrap(), sys, "{name}");
        assert_eq!(serialize(&parse(&text).unwrap()), text, "{name} printing is not stable");
    }
}

#[test]
fn thousand_random_systems_round_trip() {
    let start = Instant::now();
    for seed in 0..1000 {
        let sys = common::random_system(seed);
        let text = serialize(&sys);
        let back = parse(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
        assert_eq!(back, sys, "seed {seed}\n{text}");
    }
    let took = start.elapsed();
    assert!(took.as_secs_f64() < 5.0, "took {took:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_systems_round_trip(seed in any::<u64>()) {
        let sys = common::random_system(seed);
        prop_assert_eq!(parse(&serialize(&sys)).unwrap(), sys);
    }
}
