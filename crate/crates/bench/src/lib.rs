//! Seeded inputs shared by the benchmarks.

use ffdef_core::{Field, Poly, RatFunc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_poly(rng: &mut impl Rng, field: &Field, degree: usize) -> Poly {
    let mut coeffs: Vec<u32> = (0..degree).map(|_| rng.gen_range(0..field.q())).collect();
    coeffs.push(1);
    Poly::new(field, coeffs)
}

pub fn random_ratfunc(rng: &mut impl Rng, field: &Field, degree: usize) -> RatFunc {
    let num = random_poly(rng, field, degree);
    let den = random_poly(rng, field, degree);
    RatFunc::new(num, den).expect("monic denominator")
}
