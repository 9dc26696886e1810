//! Frobenius-orbit recognition: the test-polynomial bound, the choice of the
//! family `F_1, ..., F_M`, the square and Artin-Schreier criteria, and a direct
//! orbit search used as an oracle.

use serde::{Deserialize, Serialize};

use crate::artin::{artin_schreier_solve_with_places, WrongCharacteristic};
use crate::factor::{count_irreducibles, enumerate_irreducibles, factorize};
use crate::field::{is_prime, Field, FieldError};
use crate::poly::{Poly, PolyError};
use crate::ratfunc::RatFunc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrbitError {
    #[error("both arguments are constants")]
    BothConstant,
    #[error("configuration is for characteristic {config} but the arguments live in characteristic {field}")]
    CharacteristicMismatch { config: u32, field: u32 },
    #[error(transparent)]
    WrongCharacteristic(#[from] WrongCharacteristic),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("d = {0} must be 1 or a prime")]
    BadDegree(u32),
}

/// `ceil((4g + 12 + 8 * sum_{j=1}^{ceil((d-1)/2)} p^j) / d)`, or `None` on overflow.
pub fn checked_m_bound(genus: u64, d: u64, p: u64) -> Option<u128> {
    assert!(d >= 1, "d must be positive");
    let top = (d - 1).div_ceil(2);
    let mut sum: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..top {
        power = power.checked_mul(p as u128)?;
        sum = sum.checked_add(power)?;
    }
    let numerator = (4 * genus as u128 + 12).checked_add(sum.checked_mul(8)?)?;
    Some(numerator.div_ceil(d as u128))
}

/// See [`checked_m_bound`]; panics on overflow.
pub fn m_bound(genus: u64, d: u64, p: u64) -> u128 {
    checked_m_bound(genus, d, p).expect("m_bound overflows 128 bits")
}

/// The least prime not below `2 log2(16 + sqrt(8g + 248))`, past which a
/// workable degree always exists.
pub fn degree_ceiling(genus: u64) -> u64 {
    let bound = 2.0 * (16.0 + ((8 * genus + 248) as f64).sqrt()).log2();
    let mut d = bound.ceil() as u64;
    while !is_prime(d) {
        d += 1;
    }
    d
}

/// The least `d` in `{1, 2, 3, 5, 7, ...}` with enough monic irreducibles of
/// degree `d` over `F_p`.
pub fn choose_d(genus: u64, p: u64) -> u32 {
    let ceiling = degree_ceiling(genus);
    let found = (1..=ceiling)
        .filter(|&d| d == 1 || is_prime(d))
        .find(|&d| checked_m_bound(genus, d, p).is_some_and(|m| count_irreducibles(d as u32, p) >= m));
    found.expect("a workable degree exists below the ceiling") as u32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ConfigJson", try_from = "ConfigJson")]
pub struct CriterionConfig {
    pub genus_bound: u64,
    pub p: u32,
    pub k: u32,
    pub d: u32,
    pub m: usize,
    /// Monic irreducibles of degree `d` over `F_p`.
    pub polys: Vec<Poly>,
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    genus_bound: u64,
    p: u32,
    k: u32,
    d: u32,
    m: usize,
    polys: Vec<Vec<u32>>,
}

impl From<CriterionConfig> for ConfigJson {
    fn from(c: CriterionConfig) -> Self {
        ConfigJson {
            genus_bound: c.genus_bound,
            p: c.p,
            k: c.k,
            d: c.d,
            m: c.m,
            polys: c.polys.iter().map(|f| f.coeffs().to_vec()).collect(),
        }
    }
}

impl TryFrom<ConfigJson> for CriterionConfig {
    type Error = String;

    fn try_from(j: ConfigJson) -> Result<Self, String> {
        let fp = Field::prime(j.p as u64).map_err(|e| e.to_string())?;
        let polys: Vec<Poly> = j.polys.into_iter().map(|c| Poly::new(&fp, c)).collect();
        if polys.len() != j.m {
            return Err(format!("expected {} polynomials, found {}", j.m, polys.len()));
        }
        if polys.iter().any(|f| f.degree() != Some(j.d as usize) || !f.is_monic() || !crate::factor::is_irreducible(f)) {
            return Err(format!("every polynomial must be monic irreducible of degree {}", j.d));
        }
        Ok(CriterionConfig { genus_bound: j.genus_bound, p: j.p, k: j.k, d: j.d, m: j.m, polys })
    }
}

impl CriterionConfig {
    /// `choose_d_and_polys`: least workable `d` and the first `M` irreducibles.
    pub fn choose(genus: u64, p: u32, k: u32) -> Result<CriterionConfig, OrbitError> {
        Field::new(p as u64, k)?;
        let d = choose_d(genus, p as u64);
        Self::with_degree(genus, p, k, d)
    }

    pub fn with_degree(genus: u64, p: u32, k: u32, d: u32) -> Result<CriterionConfig, OrbitError> {
        if !(d == 1 || is_prime(d as u64)) {
            return Err(OrbitError::BadDegree(d));
        }
        Field::new(p as u64, k)?;
        let fp = Field::prime(p as u64)?;
        let m = checked_m_bound(genus, d as u64, p as u64).unwrap_or(u128::MAX);
        let available = count_irreducibles(d, p as u64);
        if m > available {
            return Err(PolyError::NotEnoughIrreducibles { requested: m, available }.into());
        }
        let polys = enumerate_irreducibles(&fp, d as usize, m as usize)?;
        Ok(CriterionConfig { genus_bound: genus, p, k, d, m: m as usize, polys })
    }

    pub fn field(&self) -> Field {
        Field::new(self.p as u64, self.k).expect("validated at construction")
    }
}

/// Values `F_j(f)` for every test polynomial, together with the irreducible
/// factors of each numerator.
#[derive(Debug, Clone)]
pub struct Evaluations {
    pub values: Vec<RatFunc>,
    num_places: Vec<Vec<Poly>>,
}

impl Evaluations {
    pub fn new(f: &RatFunc, cfg: &CriterionConfig) -> Evaluations {
        let values: Vec<RatFunc> = cfg.polys.iter().map(|poly| f.eval_poly(poly)).collect();
        let num_places = if cfg.p == 2 {
            values
                .iter()
                .map(|v| {
                    if v.num().is_constant() {
                        Vec::new()
                    } else {
                        factorize(v.num()).expect("nonzero").factors.into_iter().map(|(g, _)| g).collect()
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        Evaluations { values, num_places }
    }
}

/// The `j`-th test condition given precomputed evaluations.
pub fn criterion_at(a: &Evaluations, b: &Evaluations, j: usize, p: u32) -> bool {
    let (fa, fb) = (&a.values[j], &b.values[j]);
    if p != 2 {
        return fa.mul(fb).is_square();
    }
    match (fa.is_zero(), fb.is_zero()) {
        (true, true) => true,
        (true, false) | (false, true) => false,
        (false, false) => {
            let c = fa.inv().expect("nonzero").add(&fb.inv().expect("nonzero"));
            let mut places = a.num_places[j].clone();
            for pi in &b.num_places[j] {
                if !places.contains(pi) {
                    places.push(pi.clone());
                }
            }
            artin_schreier_solve_with_places(&c, &places).expect("characteristic 2").is_solvable()
        }
    }
}

fn check_inputs(f: &RatFunc, g: &RatFunc, cfg: &CriterionConfig) -> Result<(), OrbitError> {
    f.field().check_same(g.field())?;
    if f.field().p() != cfg.p {
        return Err(OrbitError::CharacteristicMismatch { config: cfg.p, field: f.field().p() });
    }
    if f.is_constant() && g.is_constant() {
        return Err(OrbitError::BothConstant);
    }
    Ok(())
}

/// Result of every test `j = 1..M` separately.
pub fn orbit_criterion_detail(f: &RatFunc, g: &RatFunc, cfg: &CriterionConfig) -> Result<Vec<bool>, OrbitError> {
    check_inputs(f, g, cfg)?;
    let (a, b) = (Evaluations::new(f, cfg), Evaluations::new(g, cfg));
    Ok((0..cfg.polys.len()).map(|j| criterion_at(&a, &b, j, cfg.p)).collect())
}

/// True iff every test `j` passes; stops at the first failure.
pub fn orbit_criterion(f: &RatFunc, g: &RatFunc, cfg: &CriterionConfig) -> Result<bool, OrbitError> {
    check_inputs(f, g, cfg)?;
    let (a, b) = (Evaluations::new(f, cfg), Evaluations::new(g, cfg));
    Ok(criterion_from(&a, &b, cfg.p))
}

pub fn criterion_from(a: &Evaluations, b: &Evaluations, p: u32) -> bool {
    (0..a.values.len()).all(|j| criterion_at(a, b, j, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `f = g^{p^s}`.
    #[serde(rename = "f=g^(p^s)")]
    FIsPowerOfG,
    /// `g = f^{p^s}`.
    #[serde(rename = "g=f^(p^s)")]
    GIsPowerOfF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitAnswer {
    pub in_orbit: bool,
    pub direction: Option<Direction>,
    pub s: Option<u32>,
}

impl OrbitAnswer {
    const NO: OrbitAnswer = OrbitAnswer { in_orbit: false, direction: None, s: None };

    fn yes(direction: Direction, s: u32) -> OrbitAnswer {
        OrbitAnswer { in_orbit: true, direction: Some(direction), s: Some(s) }
    }
}

/// Least `s` with `target = base^{p^s}`, searching while degrees allow it.
fn power_exponent(target: &RatFunc, base: &RatFunc) -> Option<u32> {
    let p = target.field().p() as usize;
    if base.is_constant() {
        return None;
    }
    let (limit, step) = (target.max_degree(), base.max_degree());
    let mut cur = base.clone();
    let mut s = 0;
    let mut degree = step;
    while degree <= limit {
        if &cur == target {
            return Some(s);
        }
        cur = cur.frobenius();
        degree *= p;
        s += 1;
    }
    None
}

/// Searches `s >= 0` with `f = g^{p^s}` or `g = f^{p^s}`.
pub fn direct_orbit(f: &RatFunc, g: &RatFunc) -> OrbitAnswer {
    if f.is_constant() && g.is_constant() {
        let k = f.field().k();
        let mut cur = g.clone();
        for s in 0..k {
            if &cur == f {
                return OrbitAnswer::yes(Direction::FIsPowerOfG, s);
            }
            cur = cur.frobenius();
        }
        return OrbitAnswer::NO;
    }
    if let Some(s) = power_exponent(f, g) {
        return OrbitAnswer::yes(Direction::FIsPowerOfG, s);
    }
    if let Some(s) = power_exponent(g, f) {
        return OrbitAnswer::yes(Direction::GIsPowerOfF, s);
    }
    OrbitAnswer::NO
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(field: &Field, s: &str) -> RatFunc {
        RatFunc::parse(field, s).unwrap()
    }

    fn by_formula(genus: u64, d: u64, p: u64) -> u128 {
        // Independent: exact rational arithmetic then ceiling.
        let top = (d - 1).div_ceil(2);
        let sum: u128 = (1..=top).map(|j| (p as u128).pow(j as u32)).sum();
        let num = 4 * genus as u128 + 12 + 8 * sum;
        num.div_ceil(d as u128)
    }

    #[test]
    fn m_bound_values() {
        for g in 0..3 {
            for p in [2, 3, 5, 13] {
                assert_eq!(m_bound(g, 1, p), 4 * g as u128 + 12);
            }
        }
        assert_eq!(m_bound(0, 7, 2), 18);
        assert_eq!(m_bound(0, 5, 3), 22);
        for (g, d, p) in [(0, 2, 2), (1, 11, 3), (2, 4, 7), (0, 3, 5)] {
            assert_eq!(m_bound(g, d, p), by_formula(g, d, p));
        }
        assert_eq!(checked_m_bound(0, 101, 1 << 20), None);
    }

    #[test]
    fn chosen_degrees() {
        let c = CriterionConfig::choose(0, 2, 1).unwrap();
        assert_eq!((c.d, c.m, c.polys.len()), (7, 18, 18));
        for d in [2, 3, 5] {
            assert!(count_irreducibles(d, 2) < m_bound(0, d as u64, 2));
        }
        let c = CriterionConfig::choose(0, 3, 1).unwrap();
        assert_eq!((c.d, c.m), (5, 22));
        assert_eq!(count_irreducibles(5, 3), 48);
        let c = CriterionConfig::choose(0, 13, 1).unwrap();
        assert_eq!((c.d, c.m), (1, 12));
        assert_eq!(degree_ceiling(0), 11);
    }

    #[test]
    fn config_json_round_trip() {
        let c = CriterionConfig::choose(0, 3, 2).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: CriterionConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let bad = text.replacen("[", "[[1,1],", 2);
        assert!(serde_json::from_str::<CriterionConfig>(&bad).is_err());
    }

    #[test]
    fn criterion_examples() {
        let f2 = Field::new(2, 1).unwrap();
        let cfg = CriterionConfig::choose(0, 2, 1).unwrap();
        assert!(orbit_criterion(&r(&f2, "t^2"), &r(&f2, "t"), &cfg).unwrap());
        let detail = orbit_criterion_detail(&r(&f2, "t"), &r(&f2, "t+1"), &cfg).unwrap();
        assert!(detail.iter().any(|ok| !ok));
        let f3 = Field::new(3, 1).unwrap();
        let cfg3 = CriterionConfig::choose(0, 3, 1).unwrap();
        assert!(orbit_criterion(&r(&f3, "t^3"), &r(&f3, "t"), &cfg3).unwrap());
        assert_eq!(orbit_criterion(&r(&f3, "1"), &r(&f3, "2"), &cfg3), Err(OrbitError::BothConstant));
        assert!(matches!(
            orbit_criterion(&r(&f3, "t"), &r(&f3, "t"), &cfg),
            Err(OrbitError::CharacteristicMismatch { .. })
        ));
    }

    #[test]
    fn direct_orbit_examples() {
        let f2 = Field::new(2, 1).unwrap();
        assert_eq!(direct_orbit(&r(&f2, "t^4"), &r(&f2, "t")), OrbitAnswer::yes(Direction::FIsPowerOfG, 2));
        assert_eq!(direct_orbit(&r(&f2, "t"), &r(&f2, "t")), OrbitAnswer::yes(Direction::FIsPowerOfG, 0));
        assert_eq!(direct_orbit(&r(&f2, "t"), &r(&f2, "t^4")), OrbitAnswer::yes(Direction::GIsPowerOfF, 2));
        assert!(!direct_orbit(&r(&f2, "t+1"), &r(&f2, "t")).in_orbit);
        assert!(!direct_orbit(&r(&f2, "1"), &r(&f2, "t")).in_orbit);
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(direct_orbit(&r(&f4, "a+1"), &r(&f4, "a")), OrbitAnswer::yes(Direction::FIsPowerOfG, 1));
        assert!(!direct_orbit(&r(&f4, "1"), &r(&f4, "a")).in_orbit);
    }
}
