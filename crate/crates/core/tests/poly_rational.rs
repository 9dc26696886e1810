use ffdef_core::factor::{enumerate_irreducibles, factorize_seeded};
use ffdef_core::ratfunc::poly_sqrt;
use ffdef_core::{factorize, is_irreducible, Field, Place, Poly, RatFunc, Valuation};
use proptest::prelude::*;

fn fields() -> Vec<Field> {
    [(2, 1), (3, 1), (2, 2), (5, 1)].iter().map(|&(p, k)| Field::new(p, k).unwrap()).collect()
}

fn poly_in(field: Field, max_deg: usize) -> impl Strategy<Value = Poly> {
    let q = field.q();
    proptest::collection::vec(0..q, 0..=max_deg + 1).prop_map(move |c| Poly::new(&field, c))
}

fn field_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    (0..4usize).prop_flat_map(move |i| poly_in(fields()[i].clone(), max_deg))
}

fn field_ratfunc(max_deg: usize) -> impl Strategy<Value = RatFunc> {
    (0..4usize).prop_flat_map(move |i| {
        let f = fields()[i].clone();
        (poly_in(f.clone(), max_deg), poly_in(f, max_deg))
            .prop_filter_map("zero denominator", |(n, d)| RatFunc::new(n, d).ok())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factorization_reconstructs(f in field_poly(20), seed in 0u64..4) {
        prop_assume!(!f.is_zero());
        let fact = factorize_seeded(&f, seed).unwrap();
        prop_assert_eq!(fact.reconstruct(), f);
        for (g, m) in &fact.factors {
            prop_assert!(g.is_monic() && *m > 0 && is_irreducible(g));
        }
        prop_assert!(fact.factors.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn degree_sum_vanishes(r in field_ratfunc(6)) {
        prop_assume!(!r.is_zero());
        let mut places = vec![Place::Infinity];
        for part in [r.num(), r.den()] {
            if !part.is_constant() {
                places.extend(factorize(part).unwrap().factors.into_iter().map(|(g, _)| Place::Finite(g)));
            }
        }
        let total: i64 = places
            .iter()
            .map(|pl| match r.valuation(pl) {
                Valuation::Finite(v) => pl.degree() as i64 * v,
                Valuation::Infinite => unreachable!(),
            })
            .sum();
        prop_assert_eq!(total, 0);
        let from_divisor: i64 = r.divisor().iter().map(|(pl, v)| pl.degree() as i64 * v).sum();
        prop_assert_eq!(from_divisor, 0);
    }

    #[test]
    fn partial_fractions_recombine(r in field_ratfunc(6)) {
        let pf = r.partial_fractions();
        for term in &pf.terms {
            prop_assert!(is_irreducible(&term.place));
            prop_assert!(term.numerator.deg0() < term.place.deg0() || term.numerator.is_zero());
        }
        prop_assert_eq!(pf.recombine(), r);
    }

    #[test]
    fn squares_and_non_squares(r in field_ratfunc(4)) {
        let sq = r.square();
        let root = sq.sqrt().expect("square has a root");
        prop_assert!(root == r || root == r.neg());
        prop_assume!(!r.is_zero());
        let tf2 = RatFunc::t(r.field()).mul(&sq);
        prop_assert!(!tf2.is_square());
    }

    #[test]
    fn poly_sqrt_of_square(f in field_poly(8)) {
        let root = poly_sqrt(&f.mul(&f)).expect("square");
        prop_assert!(root == f || root == f.neg());
    }

    #[test]
    fn text_round_trip(r in field_ratfunc(5)) {
        let text = r.to_string();
        prop_assert_eq!(RatFunc::parse(r.field(), &text).unwrap(), r);
    }
}

#[test]
fn irreducible_enumeration_is_increasing_and_coprime() {
    for (p, d, m) in [(2u64, 7usize, 18usize), (3, 5, 22), (2, 4, 3)] {
        let field = Field::new(p, 1).unwrap();
        let list = enumerate_irreducibles(&field, d, m).unwrap();
        assert_eq!(list.len(), m);
        assert!(list.windows(2).all(|w| w[0] < w[1]));
        for (i, a) in list.iter().enumerate() {
            assert!(a.is_monic() && a.deg0() == d);
            for b in &list[i + 1..] {
                assert!(a.gcd(b).is_one());
            }
        }
    }
    let f2 = Field::new(2, 1).unwrap();
    assert!(enumerate_irreducibles(&f2, 4, 4).is_err());
}
