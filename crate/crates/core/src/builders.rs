//! Builders for the Frobenius-orbit formulas `phi_g(x, y)`, `pi_g(x, y, z)`
//! and the root wrapper `E w (t = w^{p^m} & pi_g(x, y, w))`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::Serialize;

use crate::factor::{count_irreducibles, enumerate_irreducibles};
use crate::field::{is_prime, Field};
use crate::formula::RingFormula;
use crate::orbit::{checked_m_bound, degree_ceiling};
use crate::poly::Poly;
use crate::term::{sym, RingTerm, Symbol};

/// Largest formula (counted in `E h` conjuncts of one `phi`) built by default.
pub const DEFAULT_CONJUNCT_CAP: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("phi_{genus} would have {conjuncts} conjuncts, above the cap of {cap}")]
    FormulaTooLarge { genus: u64, conjuncts: u128, cap: u128 },
    #[error("p^m = {p}^{m} does not fit in a 32-bit exponent")]
    ExponentTooLarge { p: u64, m: u32 },
}

pub fn guard_primes(genus: u64) -> Vec<u64> {
    (2..=4 * genus + 12).filter(|&p| is_prime(p)).collect()
}

/// Least prime `d` with enough degree-`d` irreducibles in every guarded
/// characteristic.
pub fn phi_degree(genus: u64) -> u32 {
    let primes = guard_primes(genus);
    (2..=degree_ceiling(genus))
        .filter(|&d| is_prime(d))
        .find(|&d| {
            primes.iter().all(|&p| {
                checked_m_bound(genus, d, p).is_some_and(|m| count_irreducibles(d as u32, p) >= m)
            })
        })
        .expect("a workable degree exists below the ceiling") as u32
}

/// Sizes of `phi_g` without constructing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiPlan {
    pub genus: u64,
    pub d: u32,
    /// `M(g, d, p)` for each guarded prime `p`.
    pub branch_sizes: BTreeMap<u64, u128>,
    /// Number of integer lifts, the largest branch size.
    pub m_star: u128,
    pub crt_modulus: u128,
    pub zero_branch_size: u64,
    /// `E h` conjuncts over all branches.
    pub conjuncts: u128,
    /// Exists nodes including the guards `E z (z * p = 1)`.
    pub exists_nodes: u128,
}

impl PhiPlan {
    pub fn new(genus: u64) -> PhiPlan {
        let d = phi_degree(genus);
        let primes = guard_primes(genus);
        let branch_sizes: BTreeMap<u64, u128> =
            primes.iter().map(|&p| (p, checked_m_bound(genus, d as u64, p).expect("bounded"))).collect();
        let m_star = *branch_sizes.values().max().expect("2 is always guarded");
        let zero_branch_size = 4 * genus + 12;
        let conjuncts = branch_sizes.values().sum::<u128>() + zero_branch_size as u128;
        PhiPlan {
            genus,
            d,
            crt_modulus: primes.iter().map(|&p| p as u128).product(),
            m_star,
            zero_branch_size,
            conjuncts,
            exists_nodes: conjuncts + primes.len() as u128,
            branch_sizes,
        }
    }
}

/// Integer test polynomials and their reductions modulo each guarded prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiFamily {
    pub plan: PhiPlan,
    /// Monic integer lifts with coefficients in `[0, N)`, constant term first.
    pub lifts: Vec<Vec<u64>>,
    /// The first `M(g, d, p)` reductions that each branch uses.
    pub reductions: BTreeMap<u64, Vec<Poly>>,
}

fn crt(residues: &[(u64, u64)]) -> u64 {
    let (mut x, mut modulus) = (0u128, 1u128);
    for &(r, p) in residues {
        let (r, p) = (r as u128, p as u128);
        // Find x' = x + modulus * k with x' = r (mod p).
        let inv = (1..p).find(|&i| (modulus % p) * i % p == 1).expect("coprime moduli");
        let k = ((r + p - x % p) % p) * inv % p;
        x += modulus * k;
        modulus *= p;
    }
    x as u64
}

impl PhiFamily {
    pub fn new(genus: u64) -> Result<PhiFamily, BuildError> {
        Self::with_cap(genus, DEFAULT_CONJUNCT_CAP)
    }

    pub fn with_cap(genus: u64, cap: u128) -> Result<PhiFamily, BuildError> {
        let plan = PhiPlan::new(genus);
        if plan.conjuncts > cap {
            return Err(BuildError::FormulaTooLarge { genus, conjuncts: plan.conjuncts, cap });
        }
        let d = plan.d as usize;
        let mut reductions = BTreeMap::new();
        for (&p, &m) in &plan.branch_sizes {
            let field = Field::prime(p).expect("prime");
            reductions.insert(p, enumerate_irreducibles(&field, d, m as usize).expect("checked by phi_degree"));
        }
        let lifts = (0..plan.m_star as usize)
            .map(|j| {
                (0..=d)
                    .map(|i| {
                        let residues: Vec<(u64, u64)> = reductions
                            .iter()
                            .map(|(&p, polys)| {
                                // Branches needing fewer polynomials take X^d as filler.
                                let c = polys.get(j).map_or(u32::from(i == d), |f| f.coeff(i));
                                (c as u64, p)
                            })
                            .collect();
                        crt(&residues)
                    })
                    .collect()
            })
            .collect();
        Ok(PhiFamily { plan, lifts, reductions })
    }

    /// `F_j(x)` as a sum of powers, highest degree first.
    pub fn lift_term(&self, j: usize, x: &RingTerm) -> RingTerm {
        integer_poly_term(&self.lifts[j], x)
    }
}

pub fn integer_poly_term(coeffs: &[u64], x: &RingTerm) -> RingTerm {
    let mut acc: Option<RingTerm> = None;
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let power = match i {
            0 => None,
            1 => Some(x.clone()),
            _ => Some(x.clone().pow(i as u32)),
        };
        let mono = match (power, c) {
            (None, c) => RingTerm::int(c),
            (Some(pw), 1) => pw,
            (Some(pw), c) => RingTerm::int(c) * pw,
        };
        acc = Some(match acc {
            None => mono,
            Some(a) => a + mono,
        });
    }
    acc.unwrap_or(RingTerm::int(0))
}

fn var(name: &str) -> RingTerm {
    RingTerm::var(name)
}

/// `phi_g(x, y)` over the given family.
pub fn phi_from_family(family: &PhiFamily) -> RingFormula {
    let (x, y) = (var("x"), var("y"));
    let genus = family.plan.genus;
    let mut branches = Vec::new();
    for (&p, &m) in &family.plan.branch_sizes {
        let conjuncts: Vec<RingFormula> = (0..m as usize)
            .map(|j| {
                let h = format!("h{p}_{}", j + 1);
                let (fx, fy) = (family.lift_term(j, &x), family.lift_term(j, &y));
                let atom = if p == 2 {
                    RingFormula::eq(fx.clone() + fy.clone(), (fx * fy) * (var(&h).pow(2) + var(&h)))
                } else {
                    RingFormula::eq(fx * fy, var(&h).pow(2))
                };
                RingFormula::exists(&h, atom)
            })
            .collect();
        branches.push(RingFormula::And {
            children: vec![RingFormula::and(conjuncts), RingFormula::eq(RingTerm::int(p), RingTerm::int(0))],
        });
    }
    let zero_branch: Vec<RingFormula> = (1..=4 * genus + 12)
        .map(|j| {
            let h = format!("h0_{j}");
            let lhs = (x.clone() - RingTerm::int(j)) * (y.clone() - RingTerm::int(j));
            RingFormula::exists(&h, RingFormula::eq(lhs, var(&h).pow(2)))
        })
        .collect();
    let guards: Vec<RingFormula> = guard_primes(genus)
        .into_iter()
        .map(|p| {
            let z = format!("nz{p}");
            RingFormula::exists(&z, RingFormula::eq(var(&z) * RingTerm::int(p), RingTerm::int(1)))
        })
        .collect();
    branches.push(RingFormula::And { children: vec![RingFormula::and(zero_branch), RingFormula::and(guards)] });
    RingFormula::Or { children: branches }
}

pub fn build_phi(genus: u64) -> Result<(RingFormula, PhiFamily), BuildError> {
    let family = PhiFamily::new(genus)?;
    Ok((phi_from_family(&family), family))
}

fn instance(phi: &RingFormula, n: usize, a: RingTerm, b: RingTerm) -> RingFormula {
    let mut map = BTreeMap::new();
    map.insert(sym("x"), a);
    map.insert(sym("y"), b);
    phi.rename_bound(&format!("_i{n}")).substitute(&map)
}

/// `E u . phi(u, z) & phi(x, y) & phi(u x, z y) & phi(u (x + 1), z (y + 1))`.
pub fn pi_from_phi(phi: &RingFormula) -> RingFormula {
    let (x, y, z, u) = (var("x"), var("y"), var("z"), var("u"));
    let one = RingTerm::int(1);
    RingFormula::exists(
        "u",
        RingFormula::And {
            children: vec![
                instance(phi, 1, u.clone(), z.clone()),
                instance(phi, 2, x.clone(), y.clone()),
                instance(phi, 3, u.clone() * x.clone(), z.clone() * y.clone()),
                instance(phi, 4, u * (x + one.clone()), z * (y + one)),
            ],
        },
    )
}

static PI_CACHE: Lazy<Mutex<HashMap<u64, Arc<RingFormula>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `pi_g(x, y, z)`; cached per genus.
pub fn build_pi(genus: u64) -> Result<Arc<RingFormula>, BuildError> {
    if let Some(f) = PI_CACHE.lock().expect("cache lock").get(&genus) {
        return Ok(f.clone());
    }
    let (phi, _) = build_phi(genus)?;
    let pi = Arc::new(pi_from_phi(&phi));
    PI_CACHE.lock().expect("cache lock").insert(genus, pi.clone());
    Ok(pi)
}

/// `E w . t = w^{p^m} & pi_g(x, y, w)`.
pub fn build_pi_root(genus: u64, p: u64, m: u32) -> Result<RingFormula, BuildError> {
    let exponent = p
        .checked_pow(m)
        .and_then(|e| u32::try_from(e).ok())
        .ok_or(BuildError::ExponentTooLarge { p, m })?;
    let pi = build_pi(genus)?;
    let w = var("w");
    let root = if exponent == 1 { w.clone() } else { w.clone().pow(exponent) };
    let mut map: BTreeMap<Symbol, RingTerm> = BTreeMap::new();
    map.insert(sym("z"), w);
    Ok(RingFormula::exists(
        "w",
        RingFormula::And { children: vec![RingFormula::eq(RingTerm::T, root), pi.substitute(&map)] },
    ))
}
