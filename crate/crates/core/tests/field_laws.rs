use ffdef_core::Field;
use proptest::prelude::*;

const SHAPES: &[(u64, u32)] = &[(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1), (2, 4)];

fn field_and_codes(n: usize) -> impl Strategy<Value = (Field, Vec<u32>)> {
    (0..SHAPES.len()).prop_flat_map(move |i| {
        let (p, k) = SHAPES[i];
        let field = Field::new(p, k).unwrap();
        let q = field.q();
        (Just(field), proptest::collection::vec(0..q, n))
    })
}

proptest! {
    #[test]
    fn ring_axioms((f, v) in field_and_codes(3)) {
        let (a, b, c) = (v[0], v[1], v[2]);
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        prop_assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
        match f.inv(a) {
            Some(i) => prop_assert_eq!(f.mul(a, i), 1),
            None => prop_assert_eq!(a, 0),
        }
    }

    #[test]
    fn pth_root_inverts_frobenius((f, v) in field_and_codes(1)) {
        let a = v[0];
        let p = f.p() as u128;
        prop_assert_eq!(f.pow(f.pth_root(a), p), a);
        prop_assert_eq!(f.pth_root(f.pow(a, p)), a);
        prop_assert_eq!(f.frobenius(a), f.pow(a, p));
    }

    #[test]
    fn squares_are_multiplicative((f, v) in field_and_codes(2)) {
        prop_assume!(f.p() != 2 && v[0] != 0 && v[1] != 0);
        let (a, b) = (v[0], v[1]);
        prop_assert_eq!(f.is_square(f.mul(a, b)), f.is_square(a) == f.is_square(b));
        if let Some(r) = f.sqrt(a) {
            prop_assert_eq!(f.mul(r, r), a);
        }
    }

    #[test]
    fn trace_is_additive((f, v) in field_and_codes(2)) {
        let (a, b) = (v[0], v[1]);
        let p = f.p();
        prop_assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
    }
}

#[test]
fn trace_zero_count() {
    for &(p, k) in SHAPES {
        let f = Field::new(p, k).unwrap();
        let zeros = (0..f.q()).filter(|&a| f.trace(a) == 0).count() as u32;
        assert_eq!(zeros, f.q() / f.p(), "F_{}", f.q());
    }
}

#[test]
fn every_element_has_a_pth_root() {
    for &(p, k) in SHAPES {
        let f = Field::new(p, k).unwrap();
        let images: std::collections::BTreeSet<u32> = (0..f.q()).map(|a| f.frobenius(a)).collect();
        assert_eq!(images.len() as u32, f.q());
    }
}
