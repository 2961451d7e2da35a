mod common;

use proptest::prelude::*;

use descent_engine::coeff::CoeffKind;
use descent_engine::linalg::Field;
use descent_engine::scenarios::{
    builtin_names, law_names, parse_coeff, run_scenario, Expectations, ObjectPolicy, Scenario, ShapeSource, Verdict,
};

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn random_scenario(cat: descent_engine::fincat::FinCategory, seed: u64, coeff: &str) -> Scenario {
    Scenario {
        name: "random".into(),
        description: None,
        shape: ShapeSource::RandomCanonical {
            category: cat,
            base_knobs: common::knobs_small(),
            cover_knobs: common::knobs_small(),
        },
        coeff: coeff.into(),
        objects: ObjectPolicy {
            random: 1,
            knobs: common::knobs_small(),
            base_random: 2,
            ..ObjectPolicy::default()
        },
        battery: None,
        seed,
        budget: 200_000,
        expect: Expectations::default(),
    }
}

fn coeff() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("set"), Just("vect-2"), Just("vect-3")]
}

fn names(v: &Verdict) -> Vec<&str> {
    v.laws.iter().map(|l| l.name.as_str()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Random canonical scenarios satisfy every law, list them all, and
    /// produce the same bytes when rerun.
    #[test]
    fn random_canonical_scenarios_pass(cat in common::category(), seed in any::<u64>(), coeff in coeff()) {
        let s = random_scenario((*cat).clone(), seed, coeff);
        let v = run_scenario(&s).unwrap();
        let failing: Vec<_> = v.laws.iter().filter(|l| !l.pass).collect();
        prop_assert!(failing.is_empty(), "{:?}", failing);
        let mut expected = law_names();
        expected.sort_unstable();
        prop_assert_eq!(names(&v), expected);
        prop_assert_eq!(run_scenario(&s).unwrap().to_json(), v.to_json());
        let parsed: Verdict = serde_json::from_str(&v.to_json()).unwrap();
        prop_assert_eq!(parsed.to_json(), v.to_json());
    }

    #[test]
    fn scenario_json_round_trips(cat in common::category(), seed in any::<u64>(), coeff in coeff()) {
        let s = random_scenario((*cat).clone(), seed, coeff);
        let text = serde_json::to_string(&s).unwrap();
        let back = Scenario::from_json(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn coefficients_parse_exactly_for_primes(n in 0u64..400) {
        let parsed = parse_coeff(&format!("vect-{n}"));
        prop_assert_eq!(parsed.is_ok(), is_prime(n));
        if let Ok(kind) = parsed {
            prop_assert_eq!(kind, CoeffKind::Vect(Field::Prime(n)));
        }
    }
}

#[test]
fn builtin_scenarios_round_trip_and_name_themselves() {
    for name in builtin_names() {
        let s = Scenario::builtin(name).unwrap();
        assert_eq!(s.name, name);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::to_string(&Scenario::from_json(&text).unwrap()).unwrap(), text);
    }
    assert_eq!(parse_coeff("set").unwrap(), CoeffKind::Set);
    assert_eq!(parse_coeff("vect-q").unwrap(), CoeffKind::Vect(Field::Rationals));
    assert!(parse_coeff("vect-").is_err() && parse_coeff("sets").is_err());
}

#[test]
fn equal_scenarios_give_equal_verdicts() {
    let cat = common::poset(2, 1);
    let a = run_scenario(&random_scenario(cat.clone(), 1, "set")).unwrap();
    let b = run_scenario(&random_scenario(cat, 1, "set")).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.environment.seed, 1);
}
