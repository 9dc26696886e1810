//! Decides `h^2 + h = c` over `F_{2^k}(t)` by stripping poles.

use serde::Serialize;

use crate::factor::factorize;
use crate::poly::Poly;
use crate::ratfunc::{poly_multiplicity, Place, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("the Artin-Schreier solver needs characteristic 2, got {p}")]
pub struct WrongCharacteristic {
    pub p: u32,
}

/// Why `h^2 + h = c` has no solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// Some reduction of `c` has a pole of odd order.
    OddPole {
        #[serde(serialize_with = "display")]
        place: Place,
        order: u64,
    },
    /// The residual constant has absolute trace 1.
    NonzeroTrace { constant: String },
}

fn display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AsOutcome {
    Solvable(RatFunc),
    Unsolvable(Obstruction),
}

impl AsOutcome {
    pub fn is_solvable(&self) -> bool {
        matches!(self, AsOutcome::Solvable(_))
    }

    pub fn witness(&self) -> Option<&RatFunc> {
        match self {
            AsOutcome::Solvable(h) => Some(h),
            AsOutcome::Unsolvable(_) => None,
        }
    }
}

/// `h^2 + h`.
pub fn wp(h: &RatFunc) -> RatFunc {
    h.square().add(h)
}

pub fn artin_schreier_solve(c: &RatFunc) -> Result<AsOutcome, WrongCharacteristic> {
    artin_schreier_solve_with_places(c, &[])
}

/// Like [`artin_schreier_solve`], trying the given monic irreducibles first as
/// candidate poles; any pole they miss is found by factoring.
pub fn artin_schreier_solve_with_places(c: &RatFunc, places: &[Poly]) -> Result<AsOutcome, WrongCharacteristic> {
    let field = c.field().clone();
    if field.p() != 2 {
        return Err(WrongCharacteristic { p: field.p() });
    }
    let mut cur = c.clone();
    let mut h = RatFunc::zero(&field);

    let strip = |pi: &Poly, cur: &mut RatFunc, h: &mut RatFunc| -> Option<Obstruction> {
        loop {
            let m = poly_multiplicity(cur.den(), pi) as u64;
            if m == 0 {
                return None;
            }
            if m % 2 == 1 {
                return Some(Obstruction::OddPole { place: Place::Finite(pi.clone()), order: m });
            }
            let pm = pi.pow(m);
            let rest = cur.den().exact_div(&pm);
            let rest_inv = rest.inv_mod(pi).expect("coprime to the place");
            let lead = cur.num().mul_mod(&rest_inv, pi);
            // The residue field has 2^{ek} elements, so r -> r^{2^{ek-1}} is the square root.
            let steps = pi.deg0() as u32 * field.k() - 1;
            let root = (0..steps).fold(lead, |r, _| r.mul_mod(&r, pi));
            let s = RatFunc::new(root, pi.pow(m / 2)).expect("nonzero place power");
            *cur = cur.sub(&wp(&s));
            *h = h.add(&s);
        }
    };

    for pi in places {
        if let Some(obstruction) = strip(pi, &mut cur, &mut h) {
            return Ok(AsOutcome::Unsolvable(obstruction));
        }
    }
    if !cur.den().is_constant() {
        let remaining = factorize(cur.den()).expect("nonzero denominator");
        for (pi, _) in remaining.factors {
            if let Some(obstruction) = strip(&pi, &mut cur, &mut h) {
                return Ok(AsOutcome::Unsolvable(obstruction));
            }
        }
    }
    debug_assert!(cur.den().is_one());

    while let Some(n) = cur.num().degree().filter(|&n| n > 0) {
        if n % 2 == 1 {
            return Ok(AsOutcome::Unsolvable(Obstruction::OddPole { place: Place::Infinity, order: n as u64 }));
        }
        let root = field.sqrt(cur.num().lead()).expect("squares are surjective in characteristic 2");
        let s = RatFunc::from_poly(Poly::monomial(&field, root, n / 2));
        cur = cur.sub(&wp(&s));
        h = h.add(&s);
    }

    let c0 = cur.num().coeff(0);
    if field.trace(c0) != 0 {
        return Ok(AsOutcome::Unsolvable(Obstruction::NonzeroTrace { constant: field.format_code(c0) }));
    }
    let h0 = (0..field.q())
        .find(|&x| field.add(field.mul(x, x), x) == c0)
        .expect("trace zero constants are Artin-Schreier values");
    let h = h.add(&RatFunc::constant(&field, h0));
    debug_assert_eq!(&wp(&h), c);
    Ok(AsOutcome::Solvable(h))
}
