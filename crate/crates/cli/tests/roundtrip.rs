use proptest::prelude::*;
use qicost_cli::format::{
    classical_from, classical_to, distribution_from, distribution_to, parse_document, protocol_from, protocol_to,
    state_from, state_to, AnyState, Document,
};
use qicost_core::fuzz::{
    random_classical_protocol, random_density, random_distribution, random_protocol, random_pure_state,
    RandomProtocolConfig,
};
use qicost_core::hilbert::rng_from_seed;
use qicost_core::measures::trace_distance_full;
use qicost_core::protocol::{qcc, run};
use qicost_core::{Holder, ProtocolInput, Register, RegisterSystem, Tolerances};
use rand::Rng;

fn through_json(doc: Document) -> Document {
    parse_document(&serde_json::to_string(&doc).unwrap()).unwrap()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn protocols_survive_a_round_trip(seed in any::<u64>(), four in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let p = random_protocol(&RandomProtocolConfig::qubits(if four { 4 } else { 2 }), &mut rng).unwrap();
        let Document::Protocol(f) = through_json(Document::Protocol(protocol_to(&p))) else {
            panic!("kind changed");
        };
        let q = protocol_from(&f, &Tolerances::default()).unwrap();
        prop_assert!(q.check().is_ok());
        prop_assert_eq!(qcc(&q).unwrap(), qcc(&p).unwrap());
        prop_assert_eq!(q.input_names(), p.input_names());
        let sys = RegisterSystem::new(
            vec![Register::new("xa", 2), Register::new("xb", 2)],
            vec![Holder::Alice, Holder::Bob],
        )
        .unwrap();
        let rho = random_density(sys, rng.random_range(1..=4), &mut rng);
        let input = ProtocolInput::from_density(&rho, "R").unwrap();
        let d = trace_distance_full(&run(&p, &input).unwrap().output, &run(&q, &input).unwrap().output).unwrap();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn states_survive_a_round_trip(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3, pure in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let sys = RegisterSystem::new(
            vec![Register::new("a", da), Register::new("b", db)],
            vec![Holder::Alice, Holder::Reference],
        )
        .unwrap();
        let s = if pure {
            AnyState::Pure(random_pure_state(sys, &mut rng))
        } else {
            AnyState::Mixed(random_density(sys, da * db, &mut rng))
        };
        let Document::State(f) = through_json(Document::State(state_to(&s))) else {
            panic!("kind changed");
        };
        let back = state_from(&f, &Tolerances::default()).unwrap();
        prop_assert_eq!(back.system(), s.system());
        match (&s, &back) {
            (AnyState::Pure(x), AnyState::Pure(y)) => prop_assert!((x.inner(y).unwrap().norm() - 1.0).abs() <= 1e-12),
            (AnyState::Mixed(x), AnyState::Mixed(y)) => prop_assert!(trace_distance_full(x, y).unwrap() <= 1e-12),
            _ => prop_assert!(false, "purity changed"),
        }
    }

    #[test]
    fn classical_files_survive_a_round_trip(seed in any::<u64>(), nx in 2usize..=3, ny in 2usize..=3) {
        let mut rng = rng_from_seed(seed);
        let mu = random_distribution(nx, ny, None, &mut rng);
        let Document::Distribution(f) = through_json(Document::Distribution(distribution_to(&mu))) else {
            panic!("kind changed");
        };
        let back = distribution_from(&f, &Tolerances::default()).unwrap();
        let grid = |d: &qicost_core::hilbert::JointDistribution| -> Vec<f64> {
            (0..nx).flat_map(|x| (0..ny).map(move |y| (x, y))).map(|(x, y)| d.p(x, y)).collect()
        };
        prop_assert!(close(&grid(&mu), &grid(&back)));

        let cp = random_classical_protocol(nx, ny, 2, &[2, 3, 2], 0.5, &mut rng).unwrap();
        let Document::ClassicalProtocol(f) = through_json(Document::ClassicalProtocol(classical_to(&cp))) else {
            panic!("kind changed");
        };
        let back = classical_from(&f).unwrap();
        prop_assert!(back.validate().is_ok());
        prop_assert_eq!(back.alphabets(), cp.alphabets());
        prop_assert!(close(&back.randomness, &cp.randomness));
    }
}
