use std::collections::{BTreeMap, BTreeSet};

use ffdef_core::builders::build_phi;
use ffdef_core::corpus::random_ring_sentence;
use ffdef_core::eval::{eval_bounded, eval_pe, verify_witness, Interpretation, SearchBounds, Verdict};
use ffdef_core::sweep::enumerate_bounded;
use ffdef_core::term::sym;
use ffdef_core::text::parse_formula;
use ffdef_core::{build_pi, direct_orbit, single_polynomial, to_system, Field, RatFunc, RingFormula, RingTerm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sentence(seed: u64) -> RingFormula {
    random_ring_sentence(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_and_json_round_trip(seed in any::<u64>()) {
        let f = sentence(seed);
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f.clone());
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<RingFormula>(&json).unwrap(), f);
    }

    #[test]
    fn true_verdicts_reverify(seed in any::<u64>()) {
        let f2 = Field::new(2, 1).unwrap();
        let f = sentence(seed);
        let interp = Interpretation::new(&f2);
        let res = eval_pe(&f, &interp, SearchBounds::default()).unwrap();
        if let Verdict::True(w) = &res.verdict {
            prop_assert!(verify_witness(&f, &interp, w).unwrap());
        }
    }

    #[test]
    fn larger_bounds_keep_truth(seed in any::<u64>()) {
        let f3 = Field::new(3, 1).unwrap();
        let f = sentence(seed);
        let interp = Interpretation::new(&f3);
        let small = SearchBounds { max_num_deg: 0, max_den_deg: 0, hint_depth: 1 };
        let large = SearchBounds { max_num_deg: 1, max_den_deg: 1, hint_depth: 3 };
        if eval_pe(&f, &interp, small).unwrap().verdict.is_true() {
            prop_assert!(eval_pe(&f, &interp, large).unwrap().verdict.is_true());
        }
    }

    #[test]
    fn lowering_preserves_bounded_truth(seed in any::<u64>()) {
        let f2 = Field::new(2, 1).unwrap();
        let domain = enumerate_bounded(&f2, 1, 1);
        let f = sentence(seed);
        let interp = Interpretation::new(&f2);
        let direct = eval_bounded(&f, &interp, &domain).unwrap().is_some();
        let system = to_system(&f).unwrap().satisfiable_in(&interp, &domain).unwrap().is_some();
        let single = single_polynomial(&f, 2).unwrap().satisfiable_in(&interp, &domain).unwrap().is_some();
        prop_assert_eq!(direct, system);
        prop_assert_eq!(system, single);
    }
}

#[test]
fn pi_round_trips() {
    let pi = build_pi(0).unwrap();
    assert_eq!(parse_formula(&pi.to_string()).unwrap(), *pi);
    let json = serde_json::to_string(&*pi).unwrap();
    assert_eq!(serde_json::from_str::<RingFormula>(&json).unwrap(), *pi);
    assert_eq!(pi.free_vars(), [sym("x"), sym("y"), sym("z")].into_iter().collect());
    assert!(pi.has_unique_binders());
}

#[test]
fn substitution_avoids_capture() {
    let (phi, _) = build_phi(0).unwrap();
    let bound: Vec<_> = phi.bound_vars();
    let clash = RingTerm::var_sym(&bound[0]) + RingTerm::var("u");
    let other = RingTerm::var_sym(&bound[bound.len() - 1]) * RingTerm::T;
    let map: BTreeMap<_, _> = [(sym("x"), clash.clone()), (sym("y"), other.clone())].into_iter().collect();
    let out = phi.substitute(&map);
    let expected: BTreeSet<_> = clash.free_vars().union(&other.free_vars()).cloned().collect();
    assert_eq!(out.free_vars(), expected);
    assert_eq!(out.count_exists(), phi.count_exists());
    assert_eq!(out.count_atoms(), phi.count_atoms());
}

#[test]
fn pi_is_sound_over_f3() {
    let f3 = Field::new(3, 1).unwrap();
    let pi = build_pi(0).unwrap();
    let universe = enumerate_bounded(&f3, 1, 1);
    let mut positives = 0;
    for g in universe.iter().filter(|g| !g.is_constant()) {
        for s in 0..=1 {
            let f = g.frobenius_iter(s);
            assert!(direct_orbit(&f, g).in_orbit);
            let interp = Interpretation::new(&f3).assign("x", f).assign("y", g.clone()).assign("z", RatFunc::t(&f3));
            let res = eval_pe(&pi, &interp, SearchBounds::default()).unwrap();
            let Verdict::True(w) = &res.verdict else { panic!("{g}: {:?}", res.verdict.name()) };
            assert!(verify_witness(&pi, &interp, w).unwrap());
            positives += 1;
        }
    }
    assert!(positives > 0);
}
