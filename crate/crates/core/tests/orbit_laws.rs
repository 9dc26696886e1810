use ffdef_core::artin::wp;
use ffdef_core::orbit::{orbit_criterion_detail, Direction};
use ffdef_core::sweep::{enumerate_ratfuncs, run_sweep, Sample, SweepSpec};
use ffdef_core::{artin_schreier_solve, direct_orbit, orbit_criterion, CriterionConfig, Field, Poly, RatFunc};
use proptest::prelude::*;

fn ratfunc(field: Field, max_deg: usize) -> impl Strategy<Value = RatFunc> {
    let q = field.q();
    let f2 = field.clone();
    (
        proptest::collection::vec(0..q, 0..=max_deg + 1),
        proptest::collection::vec(0..q, 1..=max_deg + 1),
    )
        .prop_filter_map("zero denominator", move |(n, d)| {
            RatFunc::new(Poly::new(&field, n), Poly::new(&f2, d)).ok()
        })
}

fn char2_ratfunc(max_deg: usize) -> impl Strategy<Value = RatFunc> {
    prop_oneof![ratfunc(Field::new(2, 1).unwrap(), max_deg), ratfunc(Field::new(2, 2).unwrap(), max_deg)]
}

fn solvable(x: &RatFunc) -> bool {
    let out = artin_schreier_solve(x).unwrap();
    if let Some(h) = out.witness() {
        assert_eq!(&wp(h), x);
    }
    out.is_solvable()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn images_are_solvable(h in char2_ratfunc(3)) {
        prop_assert!(solvable(&wp(&h)));
    }

    #[test]
    fn solvable_set_is_additive(a in char2_ratfunc(2), b in char2_ratfunc(2)) {
        prop_assume!(a.field() == b.field());
        let (x, y) = (wp(&a), wp(&b));
        prop_assert!(solvable(&x.add(&y)));
        if solvable(&a) && solvable(&b) {
            prop_assert!(solvable(&a.add(&b)));
        }
    }

    #[test]
    fn squaring_preserves_solvability(x in char2_ratfunc(3)) {
        prop_assert_eq!(solvable(&x), solvable(&x.square()));
    }

    #[test]
    fn solvable_poles_are_even(h in char2_ratfunc(3)) {
        let x = wp(&h);
        for (place, v) in x.divisor() {
            prop_assert!(v >= 0 || v % 2 == 0, "odd pole {} at {}", v, place);
        }
    }

    #[test]
    fn criterion_is_symmetric(f in ratfunc(Field::new(2, 1).unwrap(), 2), g in ratfunc(Field::new(2, 1).unwrap(), 2)) {
        prop_assume!(!(f.is_constant() && g.is_constant()));
        let cfg = CriterionConfig::choose(0, 2, 1).unwrap();
        prop_assert_eq!(orbit_criterion(&f, &g, &cfg).unwrap(), orbit_criterion(&g, &f, &cfg).unwrap());
    }

    #[test]
    fn direct_orbit_flips(f in ratfunc(Field::new(3, 1).unwrap(), 2), g in ratfunc(Field::new(3, 1).unwrap(), 2)) {
        let (a, b) = (direct_orbit(&f, &g), direct_orbit(&g, &f));
        prop_assert_eq!(a.in_orbit, b.in_orbit);
        if a.in_orbit && f != g {
            let flipped = match a.direction.unwrap() {
                Direction::FIsPowerOfG => Direction::GIsPowerOfF,
                Direction::GIsPowerOfF => Direction::FIsPowerOfG,
            };
            prop_assert_eq!(b.direction, Some(flipped));
            prop_assert_eq!(a.s, b.s);
        }
    }

    #[test]
    fn orbit_claims_hold(f in ratfunc(Field::new(2, 2).unwrap(), 2), s in 0u32..3) {
        prop_assume!(!f.is_constant());
        let g = f.frobenius_iter(s);
        let ans = direct_orbit(&g, &f);
        prop_assert!(ans.in_orbit);
        prop_assert_eq!(ans.direction, Some(Direction::FIsPowerOfG));
        prop_assert_eq!(f.frobenius_iter(ans.s.unwrap()), g);
    }
}

#[test]
fn forward_implication_holds_per_j() {
    for (p, k) in [(2, 1), (3, 1), (2, 2)] {
        let cfg = CriterionConfig::choose(0, p, k).unwrap();
        let field = cfg.field();
        for g in enumerate_ratfuncs(&field, 1) {
            if g.is_constant() {
                continue;
            }
            for s in 0..=2 {
                let f = g.frobenius_iter(s);
                let detail = orbit_criterion_detail(&f, &g, &cfg).unwrap();
                assert_eq!(detail.len(), cfg.m);
                assert!(detail.iter().all(|&b| b), "F_{}: f={f} g={g}", field.q());
            }
        }
    }
}

#[test]
fn char2_extension_sweep() {
    let config = CriterionConfig::choose(0, 2, 2).unwrap();
    assert_eq!((config.d, config.m), (7, 18));
    let full = run_sweep(&SweepSpec { config: config.clone(), max_degree: 1, sample: None }, None, None).unwrap();
    assert_eq!(full.disagreements, 0);
    let sample = Sample { pairs: 3000, seed: 4 };
    let part = run_sweep(&SweepSpec { config, max_degree: 2, sample: Some(sample) }, None, None).unwrap();
    assert!(part.rows.len() >= 3000);
    assert_eq!(part.disagreements, 0);
}
