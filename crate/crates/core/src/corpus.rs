//! Seeded generators of small formulas and a fixed corpus of Pheidas
//! sentences, shared by tests, benchmarks and the acceptance harness.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::RingFormula;
use crate::pheidas::{parse_pheidas, NatTerm, PheidasFormula, PheidasSentence};
use crate::term::{RingTerm, Symbol};

/// `(p, sentence)` pairs, each true over `N` with witnesses at most 32.
pub const PHEIDAS_CORPUS: &[(u64, &str)] = &[
    (2, "E n . n + n = n"),
    (2, "E n . n = 1"),
    (3, "E n . n = 0"),
    (2, "E n . E m . n = 1 & n divp m"),
    (2, "E n . E m . n = 1 & n divp m & m + m = m + m"),
    (2, "E n . n + 1 = n + n"),
    (3, "E n . E m . n + m + n = m"),
    (2, "E n . E m . n = 1 + 1 & m = n + n & n divp m"),
    (3, "E n . E m . n = 1 & m = n + n + n & n divp m"),
    (5, "E n . E m . n = 1 + 1 & n divp m & m = n + n + n + n + n"),
    (2, "E a . E b . E c . a + b = c & a = 1 & b = 1 + 1"),
    (2, "E n . n = 0 | n = 1"),
    (3, "(E n . n + 1 = 0) | (E m . m + m = 1 + 1)"),
    (2, "E n . E m . (n = 1 | n = 0) & n divp m & m = 0"),
    (2, "E n . 0 divp n"),
    (7, "E n . n divp n"),
    (3, "E n . E m . m = n + 1 & n = 1 + 1"),
    (2, "E x . E y . x + y = y + x & x = 1"),
    (2, "E n . E m . E k . n = 1 & n divp m & m divp k & k = m + m"),
    (3, "E n . E m . n divp m & n = 1 + 1 & m = n + n + n"),
    (5, "E n . (n = 1 + 1 + 1) & (n + 1 = 1 + 1 + 1 + 1)"),
    (2, "E n . E m . n + n = m & m divp m & n = 1"),
    (11, "E n . E m . n = 1 & n divp m & m + 1 = 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1"),
];

pub fn pheidas_corpus() -> Vec<PheidasSentence> {
    PHEIDAS_CORPUS
        .iter()
        .map(|&(p, s)| PheidasSentence { p, formula: parse_pheidas(s).expect("corpus sentences parse") })
        .collect()
}

fn random_term<R: Rng>(rng: &mut R, scope: &[Symbol], depth: u32) -> RingTerm {
    let leaf = |rng: &mut R| match rng.gen_range(0..4) {
        0 => RingTerm::int(rng.gen_range(0..3)),
        1 => RingTerm::T,
        _ if !scope.is_empty() => RingTerm::var_sym(scope.choose(rng).expect("nonempty")),
        _ => RingTerm::T,
    };
    if depth == 0 || rng.gen_bool(0.35) {
        return leaf(rng);
    }
    let (a, b) = (random_term(rng, scope, depth - 1), random_term(rng, scope, depth - 1));
    match rng.gen_range(0..5) {
        0 | 1 => a + b,
        2 => a - b,
        3 => a * b,
        _ => a.pow(2),
    }
}

fn random_ring<R: Rng>(rng: &mut R, scope: &mut Vec<Symbol>, depth: u32, binders: &mut u32) -> RingFormula {
    let roll = if depth == 0 { 0 } else { rng.gen_range(0..5) };
    match roll {
        0 | 1 => RingFormula::eq(random_term(rng, scope, 2), random_term(rng, scope, 2)),
        2 | 3 if *binders > 0 => {
            *binders -= 1;
            let name: Symbol = ["u", "v", "w"][rng.gen_range(0..3)].into();
            scope.push(name.clone());
            let body = random_ring(rng, scope, depth - 1, binders);
            scope.pop();
            RingFormula::exists_sym(name, body)
        }
        _ => {
            let children = (0..rng.gen_range(2..=3)).map(|_| random_ring(rng, scope, depth - 1, binders)).collect();
            if rng.gen_bool(0.5) {
                RingFormula::And { children }
            } else {
                RingFormula::Or { children }
            }
        }
    }
}

/// A small `O`-free sentence with at most three quantifiers.
pub fn random_ring_sentence<R: Rng>(rng: &mut R) -> RingFormula {
    let mut binders = 3;
    let name: Symbol = "u".into();
    let mut scope = vec![name.clone()];
    RingFormula::exists_sym(name, random_ring(rng, &mut scope, 3, &mut binders))
}

fn random_nat_term<R: Rng>(rng: &mut R, scope: &[Symbol], size: u32) -> NatTerm {
    if size <= 1 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..4) {
            0 => NatTerm::Zero,
            1 => NatTerm::One,
            _ => NatTerm::Var { name: scope.choose(rng).expect("nonempty").clone() },
        };
    }
    random_nat_term(rng, scope, size - 1).plus(random_nat_term(rng, scope, 1))
}

/// A sentence `E n_1 ... n_l . atom & ...`, with a disjunction when
/// `allow_or` is set.
pub fn random_pheidas_sentence<R: Rng>(rng: &mut R, p: u64, allow_or: bool) -> PheidasSentence {
    let names: Vec<Symbol> = ["n", "m", "k"].iter().take(rng.gen_range(1..=3)).map(|&s| s.into()).collect();
    let atom = |rng: &mut R| {
        let (a, b) = (random_nat_term(rng, &names, 3), random_nat_term(rng, &names, 3));
        if rng.gen_bool(0.3) {
            PheidasFormula::div(a, b)
        } else {
            PheidasFormula::eq(a, b)
        }
    };
    let conj = |rng: &mut R| {
        let atoms: Vec<PheidasFormula> = (0..rng.gen_range(1..=3)).map(|_| atom(rng)).collect();
        if atoms.len() == 1 {
            atoms.into_iter().next().expect("one atom")
        } else {
            PheidasFormula::And { children: atoms }
        }
    };
    let mut body = conj(rng);
    if allow_or && rng.gen_bool(0.5) {
        body = PheidasFormula::Or { children: vec![body, conj(rng)] };
    }
    for name in names.iter().rev() {
        body = PheidasFormula::Exists { var: name.clone(), body: Box::new(body) };
    }
    PheidasSentence { p, formula: body }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pheidas::{eval_nat, NatVerdict};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corpus_sentences_hold() {
        let corpus = pheidas_corpus();
        assert!(corpus.len() >= 20);
        for s in &corpus {
            assert!(matches!(eval_nat(s, 32).unwrap(), NatVerdict::True(_)), "{}", s.formula);
        }
    }

    #[test]
    fn generators_are_closed_and_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_ring_sentence(&mut a);
            assert!(f.is_closed() && !f.contains_o());
            assert_eq!(f, random_ring_sentence(&mut b));
            let s = random_pheidas_sentence(&mut a, 2, true);
            assert!(s.formula.free_vars().is_empty());
            random_pheidas_sentence(&mut b, 2, true);
        }
    }
}
