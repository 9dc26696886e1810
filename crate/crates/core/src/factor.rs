//! Factorization over `F_q`: squarefree decomposition (with p-th root
//! extraction in characteristic p), distinct-degree splitting and
//! Cantor–Zassenhaus equal-degree splitting. Also counts and enumerates
//! monic irreducibles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, FieldElem};
use crate::poly::{Poly, PolyError};

/// Default seed of the randomized equal-degree splitting.
pub const DEFAULT_FACTOR_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub lead: FieldElem,
    /// Monic irreducible factors in canonical order with multiplicities.
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn reconstruct(&self) -> Poly {
        let field = self.lead.field();
        self.factors
            .iter()
            .fold(Poly::constant(field, self.lead.code()), |acc, (g, m)| acc.mul(&g.pow(*m as u64)))
    }

    pub fn multiplicity(&self, factor: &Poly) -> u32 {
        self.factors.iter().find(|(g, _)| g == factor).map_or(0, |(_, m)| *m)
    }
}

/// Squarefree decomposition of the monic part of `f`: pairwise coprime
/// squarefree monic `g_i` with `monic(f) = prod g_i^{m_i}`, sorted by
/// multiplicity.
pub fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    sqf_into(&f.monic(), 1, &mut out);
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn sqf_into(f: &Poly, scale: u32, out: &mut Vec<(Poly, u32)>) {
    let p = f.field().p();
    let mut c = f.gcd(&f.derivative());
    let mut w = f.exact_div(&c);
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.exact_div(&y);
        if !fac.is_one() {
            out.push((fac, i * scale));
        }
        w = y;
        c = c.exact_div(&w);
        i += 1;
    }
    if !c.is_one() {
        // Everything left has multiplicity divisible by p.
        let root = c.pth_root().expect("remaining cofactor is a p-th power");
        sqf_into(&root, scale * p, out);
    }
}

/// Splits a squarefree monic polynomial into products of irreducibles of
/// equal degree: returns `(product, degree)` pairs.
pub fn distinct_degree(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field().clone();
    let q = field.q() as u128;
    let x = Poly::x(&field);
    let mut out = Vec::new();
    let mut rest = f.monic();
    let mut h = x.clone();
    let mut d = 1;
    while rest.deg0() >= 2 * d {
        h = h.pow_mod(q, &rest);
        let g = h.sub(&x).gcd(&rest);
        if !g.is_one() {
            rest = rest.exact_div(&g);
            h = h.rem(&rest).expect("nonzero");
            out.push((g, d));
        }
        d += 1;
    }
    if rest.deg0() > 0 {
        let deg = rest.deg0();
        out.push((rest, deg));
    }
    out
}

/// Cantor–Zassenhaus: splits a monic product of distinct irreducibles of
/// degree `d` into its factors.
pub fn equal_degree<R: Rng>(f: &Poly, d: usize, rng: &mut R) -> Vec<Poly> {
    let mut out = Vec::new();
    edf_into(&f.monic(), d, rng, &mut out);
    out
}

fn edf_into<R: Rng>(f: &Poly, d: usize, rng: &mut R, out: &mut Vec<Poly>) {
    let n = f.deg0();
    if n == d {
        out.push(f.clone());
        return;
    }
    let field = f.field().clone();
    let q = field.q();
    loop {
        let a = Poly::new(&field, (0..n).map(|_| rng.gen_range(0..q)).collect());
        if a.is_constant() {
            continue;
        }
        let candidate = if field.p() == 2 {
            // Absolute trace of a in F_q[X]/(f) down to F_2.
            let mut acc = Poly::zero(&field);
            let mut cur = a.rem(f).expect("nonzero");
            for _ in 0..(field.k() as usize * d) {
                acc = acc.add(&cur);
                cur = cur.mul_mod(&cur, f);
            }
            acc
        } else {
            // a^{(q^d - 1)/2} = (a^{1 + q + ... + q^{d-1}})^{(q-1)/2}
            let mut norm = Poly::one(&field);
            let mut cur = a.rem(f).expect("nonzero");
            for _ in 0..d {
                norm = norm.mul_mod(&cur, f);
                cur = cur.pow_mod(q as u128, f);
            }
            norm.pow_mod(((q - 1) / 2) as u128, f).sub(&Poly::one(&field))
        };
        let g = candidate.gcd(f);
        let dg = g.deg0();
        if dg > 0 && dg < n {
            edf_into(&g, d, rng, out);
            edf_into(&f.exact_div(&g), d, rng, out);
            return;
        }
    }
}

pub fn factorize(f: &Poly) -> Result<Factorization, PolyError> {
    factorize_seeded(f, DEFAULT_FACTOR_SEED)
}

pub fn factorize_seeded(f: &Poly, seed: u64) -> Result<Factorization, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::new();
    for (part, mult) in squarefree_decomposition(f) {
        for (block, d) in distinct_degree(&part) {
            for g in equal_degree(&block, d, &mut rng) {
                factors.push((g, mult));
            }
        }
    }
    factors.sort();
    Ok(Factorization { lead: f.lead_elem(), factors })
}

/// Ben-Or irreducibility test.
pub fn is_irreducible(f: &Poly) -> bool {
    let Some(n) = f.degree() else { return false };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let field = f.field();
    let f = f.monic();
    if f.coeff(0) == 0 {
        return false;
    }
    let x = Poly::x(field);
    let q = field.q() as u128;
    let mut h = x.clone();
    for _ in 1..=n / 2 {
        h = h.pow_mod(q, &f);
        if !h.sub(&x).gcd(&f).is_one() {
            return false;
        }
    }
    true
}

fn mobius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of monic irreducible polynomials of degree `d` over `F_q`, by the
/// necklace formula `(1/d) sum_{e | d} mu(e) q^{d/e}`.
///
/// Panics if `q^d` does not fit in 128 bits.
pub fn count_irreducibles(d: u32, q: u64) -> u128 {
    assert!(d >= 1, "degree must be positive");
    let mut total: i128 = 0;
    for e in 1..=d {
        if !d.is_multiple_of(e) {
            continue;
        }
        let mu = mobius(e as u64);
        if mu == 0 {
            continue;
        }
        let term = (q as i128)
            .checked_pow(d / e)
            .expect("q^d overflows 128 bits");
        total += mu as i128 * term;
    }
    debug_assert!(total % d as i128 == 0);
    (total / d as i128) as u128
}

/// All monic polynomials of degree `d` in canonical order.
pub struct MonicPolys {
    field: Field,
    digits: Vec<u32>,
    done: bool,
}

impl MonicPolys {
    pub fn new(field: &Field, d: usize) -> Self {
        MonicPolys { field: field.clone(), digits: vec![0; d], done: false }
    }
}

impl Iterator for MonicPolys {
    type Item = Poly;

    fn next(&mut self) -> Option<Poly> {
        if self.done {
            return None;
        }
        let mut coeffs = self.digits.clone();
        coeffs.push(1);
        let out = Poly::new(&self.field, coeffs);
        // c_0 is the most significant digit, so carries run towards index 0.
        let q = self.field.q();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < q {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

/// Monic irreducibles of degree `d` in canonical order.
pub fn irreducibles(field: &Field, d: usize) -> impl Iterator<Item = Poly> {
    MonicPolys::new(field, d).filter(is_irreducible)
}

/// The first `m` monic irreducibles of degree `d` in canonical order.
pub fn enumerate_irreducibles(field: &Field, d: usize, m: usize) -> Result<Vec<Poly>, PolyError> {
    let available = count_irreducibles(d as u32, field.q() as u64);
    if m as u128 > available {
        return Err(PolyError::NotEnoughIrreducibles { requested: m as u128, available });
    }
    Ok(irreducibles(field, d).take(m).collect())
}
