//! Evaluation of ring formulas over `F_q(t)`: exact atoms, exact decisions
//! for existentials that are at most quadratic in their variable, and a
//! bounded witness search for everything else.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artin::artin_schreier_solve;
use crate::field::Field;
use crate::formula::RingFormula;
use crate::ratfunc::{Place, RatFunc};
use crate::sweep::enumerate_bounded;
use crate::term::{sym, RingTerm, Symbol};

pub type Witness = BTreeMap<Symbol, RatFunc>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula contains a quantifier")]
    NotQuantifierFree,
    #[error("formula is not an existential over one equation at most quadratic in its variable")]
    ShapeMismatch,
    #[error("t must map to a nonconstant rational function")]
    ConstantTImage,
    #[error("invalid interpretation: {0}")]
    Invalid(String),
}

/// A target `F_q(t)` together with the image of `t`, the place defining
/// `O`, and values for free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    pub field: Field,
    pub t_image: RatFunc,
    pub o_place: Place,
    pub assignment: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationJson {
    pub p: u32,
    pub k: u32,
    #[serde(default)]
    pub t_image: Option<String>,
    /// `inf` or a monic irreducible polynomial in `t`.
    #[serde(default)]
    pub o_place: Option<String>,
    #[serde(default)]
    pub assignment: BTreeMap<String, String>,
}

impl Interpretation {
    pub fn new(field: &Field) -> Interpretation {
        Interpretation {
            field: field.clone(),
            t_image: RatFunc::t(field),
            o_place: Place::t_adic(field),
            assignment: BTreeMap::new(),
        }
    }

    pub fn with_t_image(mut self, t_image: RatFunc) -> Result<Interpretation, EvalError> {
        if t_image.is_constant() {
            return Err(EvalError::ConstantTImage);
        }
        self.t_image = t_image;
        Ok(self)
    }

    pub fn with_o_place(mut self, place: Place) -> Interpretation {
        self.o_place = place;
        self
    }

    pub fn assign(mut self, name: &str, value: RatFunc) -> Interpretation {
        self.assignment.insert(sym(name), value);
        self
    }

    pub fn to_json(&self) -> InterpretationJson {
        InterpretationJson {
            p: self.field.p(),
            k: self.field.k(),
            t_image: Some(self.t_image.to_string()),
            o_place: Some(match &self.o_place {
                Place::Finite(pi) => pi.format_with("t"),
                Place::Infinity => "inf".into(),
            }),
            assignment: self.assignment.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    pub fn from_json(json: &InterpretationJson) -> Result<Interpretation, EvalError> {
        let invalid = |e: &dyn std::fmt::Display| EvalError::Invalid(e.to_string());
        let field = Field::new(json.p as u64, json.k).map_err(|e| invalid(&e))?;
        let parse = |s: &str| RatFunc::parse(&field, s).map_err(|e| invalid(&e));
        let mut interp = Interpretation::new(&field);
        if let Some(t) = &json.t_image {
            interp = interp.with_t_image(parse(t)?)?;
        }
        if let Some(place) = &json.o_place {
            interp.o_place = if place.trim() == "inf" {
                Place::Infinity
            } else {
                let r = parse(place)?;
                let pi = r.num().clone();
                if !r.den().is_one() || !pi.is_monic() || !crate::factor::is_irreducible(&pi) {
                    return Err(EvalError::Invalid(format!("`{place}` is not a monic irreducible polynomial")));
                }
                Place::Finite(pi)
            };
        }
        for (name, value) in &json.assignment {
            interp.assignment.insert(sym(name), parse(value)?);
        }
        Ok(interp)
    }
}

fn lookup(env: &Witness, name: &Symbol) -> Result<RatFunc, EvalError> {
    env.get(name).cloned().ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
}

fn eval_in(term: &RingTerm, interp: &Interpretation, env: &Witness) -> Result<RatFunc, EvalError> {
    let field = &interp.field;
    Ok(match term {
        RingTerm::Int { value } => RatFunc::from_int(field, *value as i128),
        RingTerm::T => interp.t_image.clone(),
        RingTerm::Var { name } => lookup(env, name)?,
        RingTerm::Neg { arg } => eval_in(arg, interp, env)?.neg(),
        RingTerm::Add { lhs, rhs } => eval_in(lhs, interp, env)?.add(&eval_in(rhs, interp, env)?),
        RingTerm::Sub { lhs, rhs } => eval_in(lhs, interp, env)?.sub(&eval_in(rhs, interp, env)?),
        RingTerm::Mul { lhs, rhs } => eval_in(lhs, interp, env)?.mul(&eval_in(rhs, interp, env)?),
        RingTerm::Pow { base, exp } => {
            eval_in(base, interp, env)?.pow(*exp as i64).expect("non-negative exponents never divide")
        }
    })
}

/// Value of `term` with variables read from the interpretation's assignment.
pub fn eval_term(term: &RingTerm, interp: &Interpretation) -> Result<RatFunc, EvalError> {
    eval_in(term, interp, &interp.assignment)
}

fn atom_holds(f: &RingFormula, interp: &Interpretation, env: &Witness) -> Result<bool, EvalError> {
    match f {
        RingFormula::Eq { lhs, rhs } => Ok(eval_in(lhs, interp, env)? == eval_in(rhs, interp, env)?),
        RingFormula::O { term } => Ok(eval_in(term, interp, env)?.valuation(&interp.o_place).is_nonnegative()),
        _ => unreachable!("not an atom"),
    }
}

fn qf_in(f: &RingFormula, interp: &Interpretation, env: &Witness) -> Result<bool, EvalError> {
    match f {
        RingFormula::Eq { .. } | RingFormula::O { .. } => atom_holds(f, interp, env),
        RingFormula::And { children } => {
            for c in children {
                if !qf_in(c, interp, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        RingFormula::Or { children } => {
            for c in children {
                if qf_in(c, interp, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        RingFormula::Exists { .. } => Err(EvalError::NotQuantifierFree),
    }
}

/// Truth of a quantifier-free formula under the interpretation.
pub fn eval_qf(f: &RingFormula, interp: &Interpretation) -> Result<bool, EvalError> {
    qf_in(f, interp, &interp.assignment)
}

/// Checks `f` with each bound variable taking its value from `witness`.
/// A disjunct whose binders are missing from the witness counts as false.
pub fn verify_witness(f: &RingFormula, interp: &Interpretation, witness: &Witness) -> Result<bool, EvalError> {
    fn go(f: &RingFormula, interp: &Interpretation, env: &mut Witness, witness: &Witness) -> Result<bool, EvalError> {
        match f {
            RingFormula::Eq { .. } | RingFormula::O { .. } => atom_holds(f, interp, env),
            RingFormula::And { children } => {
                for c in children {
                    if !go(c, interp, env, witness)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            RingFormula::Or { children } => {
                for c in children {
                    match go(c, interp, env, witness) {
                        Ok(true) => return Ok(true),
                        Ok(false) | Err(EvalError::UnboundVariable(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                Ok(false)
            }
            RingFormula::Exists { var, body } => {
                let Some(value) = witness.get(var) else { return Ok(false) };
                let before = env.insert(var.clone(), value.clone());
                let result = go(body, interp, env, witness);
                match before {
                    Some(b) => env.insert(var.clone(), b),
                    None => env.remove(var),
                };
                result
            }
        }
    }
    let mut env = interp.assignment.clone();
    go(f, interp, &mut env, witness)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    True(Witness),
    False,
    Unknown,
}

impl Verdict {
    pub fn is_true(&self) -> bool {
        matches!(self, Verdict::True(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::True(_) => "true",
            Verdict::False => "false",
            Verdict::Unknown => "unknown",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::True(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactPattern,
    BoundedSearch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalResult {
    pub verdict: Verdict,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_num_deg: usize,
    pub max_den_deg: usize,
    /// Hints `t^{+-p^s}` and Frobenius images use `s <= hint_depth`.
    pub hint_depth: u32,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_num_deg: 1, max_den_deg: 1, hint_depth: 4 }
    }
}

/// Coefficients of a polynomial in one variable; `None` past degree 2.
fn univariate(
    term: &RingTerm,
    v: &Symbol,
    interp: &Interpretation,
    env: &Witness,
) -> Result<Option<Vec<RatFunc>>, EvalError> {
    if !term.mentions(v) {
        return Ok(Some(vec![eval_in(term, interp, env)?]));
    }
    let zero = RatFunc::zero(&interp.field);
    let add = |a: Vec<RatFunc>, b: Vec<RatFunc>| -> Vec<RatFunc> {
        (0..a.len().max(b.len()))
            .map(|i| a.get(i).unwrap_or(&zero).add(b.get(i).unwrap_or(&zero)))
            .collect()
    };
    let mul = |a: &[RatFunc], b: &[RatFunc]| -> Option<Vec<RatFunc>> {
        let mut out = vec![zero.clone(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if !x.is_zero() && !y.is_zero() {
                    out[i + j] = out[i + j].add(&x.mul(y));
                }
            }
        }
        while out.len() > 1 && out.last().is_some_and(RatFunc::is_zero) {
            out.pop();
        }
        (out.len() <= 3).then_some(out)
    };
    let neg = |a: Vec<RatFunc>| a.into_iter().map(|c| c.neg()).collect::<Vec<_>>();
    Ok(match term {
        RingTerm::Var { .. } => Some(vec![zero.clone(), RatFunc::one(&interp.field)]),
        RingTerm::Neg { arg } => univariate(arg, v, interp, env)?.map(neg),
        RingTerm::Add { lhs, rhs } | RingTerm::Sub { lhs, rhs } => {
            let (Some(a), Some(b)) = (univariate(lhs, v, interp, env)?, univariate(rhs, v, interp, env)?) else {
                return Ok(None);
            };
            Some(if matches!(term, RingTerm::Add { .. }) { add(a, b) } else { add(a, neg(b)) })
        }
        RingTerm::Mul { lhs, rhs } => {
            let (Some(a), Some(b)) = (univariate(lhs, v, interp, env)?, univariate(rhs, v, interp, env)?) else {
                return Ok(None);
            };
            mul(&a, &b)
        }
        RingTerm::Pow { base, exp } => {
            let Some(b) = univariate(base, v, interp, env)? else { return Ok(None) };
            let mut acc = vec![RatFunc::one(&interp.field)];
            for _ in 0..*exp {
                match mul(&acc, &b) {
                    Some(next) => acc = next,
                    None => return Ok(None),
                }
            }
            Some(acc)
        }
        RingTerm::Int { .. } | RingTerm::T => unreachable!("mentions v"),
    })
}

/// Solves `c0 + c1 v + c2 v^2 = 0`: `Some(Some(v))` solvable, `Some(None)`
/// unsolvable, `None` beyond degree 2.
fn solve_quadratic(coeffs: &[RatFunc], field: &Field) -> Option<Option<RatFunc>> {
    let zero = RatFunc::zero(field);
    let c = |i: usize| coeffs.get(i).cloned().unwrap_or_else(|| zero.clone());
    let (c0, c1, c2) = (c(0), c(1), c(2));
    let degree = coeffs.iter().rposition(|x| !x.is_zero());
    Some(match degree {
        None => Some(zero),
        Some(0) => None,
        Some(1) => Some(c0.neg().div(&c1).expect("c1 != 0")),
        Some(2) if field.p() != 2 => {
            let disc = c1.square().sub(&RatFunc::from_int(field, 4).mul(&c0).mul(&c2));
            disc.sqrt().map(|s| {
                let two_c2 = RatFunc::from_int(field, 2).mul(&c2);
                c1.neg().add(&s).div(&two_c2).expect("2 c2 != 0")
            })
        }
        Some(2) if c1.is_zero() => c0.div(&c2).expect("c2 != 0").sqrt(),
        Some(2) => {
            // v = (c1/c2) w turns the equation into w^2 + w = c0 c2 / c1^2.
            let rhs = c0.mul(&c2).div(&c1.square()).expect("c1 != 0");
            artin_schreier_solve(&rhs)
                .expect("characteristic 2")
                .witness()
                .map(|w| c1.div(&c2).expect("c2 != 0").mul(w))
        }
        Some(_) => return None,
    })
}

fn exact_solution(
    atom: &RingFormula,
    v: &Symbol,
    interp: &Interpretation,
    env: &Witness,
) -> Result<Option<Option<RatFunc>>, EvalError> {
    let RingFormula::Eq { lhs, rhs } = atom else { return Ok(None) };
    let diff = lhs.clone() - rhs.clone();
    Ok(match univariate(&diff, v, interp, env)? {
        Some(coeffs) => solve_quadratic(&coeffs, &interp.field),
        None => None,
    })
}

/// Decides `E h . A = B` when the equation is at most quadratic in `h`,
/// covering `h^2 = A`, `A + B = A B (h^2 + h)` and `C z = 1`.
pub fn decide_special(f: &RingFormula, interp: &Interpretation) -> Result<EvalResult, EvalError> {
    let RingFormula::Exists { var, body } = f else { return Err(EvalError::ShapeMismatch) };
    let Some(solution) = exact_solution(body, var, interp, &interp.assignment)? else {
        return Err(EvalError::ShapeMismatch);
    };
    let verdict = match solution {
        Some(value) => Verdict::True([(var.clone(), value)].into_iter().collect()),
        None => Verdict::False,
    };
    Ok(EvalResult { verdict, method: Method::ExactPattern })
}

struct Search<'a> {
    interp: &'a Interpretation,
    bounds: SearchBounds,
    candidates: Option<Vec<RatFunc>>,
    searched: bool,
}

fn flatten_and<'f>(f: &'f RingFormula, out: &mut Vec<&'f RingFormula>) {
    match f {
        RingFormula::And { children } => children.iter().for_each(|c| flatten_and(c, out)),
        _ => out.push(f),
    }
}

fn priority(f: &RingFormula) -> u8 {
    let atom = matches!(f, RingFormula::Eq { .. } | RingFormula::O { .. });
    match (f.is_closed(), atom) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

impl Search<'_> {
    fn hints(&self, env: &Witness) -> Vec<RatFunc> {
        let p = self.interp.field.p() as i64;
        let mut out = Vec::new();
        let mut power = 1i64;
        for _ in 0..=self.bounds.hint_depth {
            for e in [power, -power] {
                out.push(self.interp.t_image.pow(e).expect("t_image is nonzero"));
            }
            power *= p;
        }
        for value in env.values() {
            let mut cur = value.clone();
            for _ in 0..=self.bounds.hint_depth {
                let next = cur.frobenius();
                out.push(cur);
                cur = next;
            }
        }
        out
    }

    fn conjunction(&mut self, items: &[&RingFormula], env: &mut Witness) -> Result<Verdict, EvalError> {
        let mut order: Vec<&RingFormula> = items.to_vec();
        order.sort_by_key(|c| priority(c));
        let mut witness = Witness::new();
        let mut unknown = false;
        for c in order {
            match self.eval(c, env)? {
                Verdict::False => return Ok(Verdict::False),
                Verdict::Unknown => unknown = true,
                Verdict::True(w) => witness.extend(w),
            }
        }
        Ok(if unknown { Verdict::Unknown } else { Verdict::True(witness) })
    }

    fn eval(&mut self, f: &RingFormula, env: &mut Witness) -> Result<Verdict, EvalError> {
        match f {
            RingFormula::Eq { .. } | RingFormula::O { .. } => {
                Ok(if atom_holds(f, self.interp, env)? { Verdict::True(Witness::new()) } else { Verdict::False })
            }
            RingFormula::And { children } => self.conjunction(&children.iter().collect::<Vec<_>>(), env),
            RingFormula::Or { children } => {
                let mut unknown = false;
                for c in children {
                    match self.eval(c, env)? {
                        Verdict::True(w) => return Ok(Verdict::True(w)),
                        Verdict::Unknown => unknown = true,
                        Verdict::False => {}
                    }
                }
                Ok(if unknown { Verdict::Unknown } else { Verdict::False })
            }
            RingFormula::Exists { var, body } => self.exists(var, body, env),
        }
    }

    fn exists(&mut self, v: &Symbol, body: &RingFormula, env: &mut Witness) -> Result<Verdict, EvalError> {
        let mut conjuncts = Vec::new();
        flatten_and(body, &mut conjuncts);
        let (with_v, without_v): (Vec<&RingFormula>, Vec<&RingFormula>) =
            conjuncts.into_iter().partition(|c| c.mentions_free(v));
        let mut witness = match self.conjunction(&without_v, env)? {
            Verdict::True(w) => w,
            other => return Ok(other),
        };
        let zero = RatFunc::zero(&self.interp.field);
        if with_v.is_empty() {
            witness.insert(v.clone(), zero);
            return Ok(Verdict::True(witness));
        }
        if let [atom] = with_v[..] {
            if let Some(solution) = exact_solution(atom, v, self.interp, env)? {
                return Ok(match solution {
                    Some(value) => {
                        witness.insert(v.clone(), value);
                        Verdict::True(witness)
                    }
                    None => Verdict::False,
                });
            }
        }

        self.searched = true;
        let hints = self.hints(env);
        let candidates = self
            .candidates
            .get_or_insert_with(|| {
                enumerate_bounded(&self.interp.field, self.bounds.max_num_deg, self.bounds.max_den_deg)
            })
            .clone();
        let mut seen = BTreeSet::new();
        let saved = env.get(v).cloned();
        let mut found = None;
        for candidate in hints.into_iter().chain(candidates) {
            if !seen.insert(candidate.clone()) {
                continue;
            }
            env.insert(v.clone(), candidate.clone());
            let result = self.conjunction(&with_v, env);
            if let Ok(Verdict::True(w)) = result {
                found = Some((candidate, w));
                break;
            }
            if let Err(e) = result {
                restore(env, v, saved);
                return Err(e);
            }
        }
        restore(env, v, saved);
        Ok(match found {
            Some((value, w)) => {
                witness.extend(w);
                witness.insert(v.clone(), value);
                Verdict::True(witness)
            }
            None => Verdict::Unknown,
        })
    }
}

fn restore(env: &mut Witness, v: &Symbol, saved: Option<RatFunc>) {
    match saved {
        Some(s) => env.insert(v.clone(), s),
        None => env.remove(v),
    };
}

/// Semi-decides `f` under the interpretation. `True` carries a witness for
/// every binder on the satisfied path and is re-verified; `False` only
/// comes from exact decisions.
pub fn eval_pe(f: &RingFormula, interp: &Interpretation, bounds: SearchBounds) -> Result<EvalResult, EvalError> {
    let mut search = Search { interp, bounds, candidates: None, searched: false };
    let mut env = interp.assignment.clone();
    let mut verdict = search.eval(f, &mut env)?;
    if let Verdict::True(w) = &verdict {
        if !verify_witness(f, interp, w)? {
            verdict = Verdict::Unknown;
        }
    }
    let method = if search.searched { Method::BoundedSearch } else { Method::ExactPattern };
    Ok(EvalResult { verdict, method })
}

/// Truth of `f` when every quantifier ranges over `domain` only.
pub fn eval_bounded(f: &RingFormula, interp: &Interpretation, domain: &[RatFunc]) -> Result<Option<Witness>, EvalError> {
    fn go(
        f: &RingFormula,
        interp: &Interpretation,
        domain: &[RatFunc],
        env: &mut Witness,
    ) -> Result<Option<Witness>, EvalError> {
        match f {
            RingFormula::Eq { .. } | RingFormula::O { .. } => {
                Ok(atom_holds(f, interp, env)?.then(Witness::new))
            }
            RingFormula::And { children } => {
                let mut witness = Witness::new();
                for c in children {
                    match go(c, interp, domain, env)? {
                        Some(w) => witness.extend(w),
                        None => return Ok(None),
                    }
                }
                Ok(Some(witness))
            }
            RingFormula::Or { children } => {
                for c in children {
                    if let Some(w) = go(c, interp, domain, env)? {
                        return Ok(Some(w));
                    }
                }
                Ok(None)
            }
            RingFormula::Exists { var, body } => {
                let saved = env.get(var).cloned();
                for value in domain {
                    env.insert(var.clone(), value.clone());
                    match go(body, interp, domain, env) {
                        Ok(Some(mut w)) => {
                            restore(env, var, saved);
                            w.insert(var.clone(), value.clone());
                            return Ok(Some(w));
                        }
                        Ok(None) => {}
                        Err(e) => {
                            restore(env, var, saved);
                            return Err(e);
                        }
                    }
                }
                restore(env, var, saved);
                Ok(None)
            }
        }
    }
    let mut env = interp.assignment.clone();
    go(f, interp, domain, &mut env)
}

/// Hex SHA-256 of the formula's text form.
pub fn formula_hash(f: &RingFormula) -> String {
    let digest = Sha256::digest(f.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub formula_hash: String,
    pub interpretation: InterpretationJson,
    pub verdict: String,
    pub witness: Option<BTreeMap<String, String>>,
    pub method: Method,
    pub bounds: SearchBounds,
}

impl Transcript {
    pub fn new(f: &RingFormula, interp: &Interpretation, result: &EvalResult, bounds: SearchBounds) -> Transcript {
        Transcript {
            formula_hash: formula_hash(f),
            interpretation: interp.to_json(),
            verdict: result.verdict.name().into(),
            witness: result
                .verdict
                .witness()
                .map(|w| w.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()),
            method: result.method,
            bounds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_formula;

    fn field(p: u64) -> Field {
        Field::new(p, 1).unwrap()
    }

    fn r(f: &Field, s: &str) -> RatFunc {
        RatFunc::parse(f, s).unwrap()
    }

    fn parse(s: &str) -> RingFormula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn term_examples() {
        let f2 = field(2);
        let interp = Interpretation::new(&f2).assign("z", r(&f2, "1/t")).assign("x", r(&f2, "t"));
        let t = crate::text::parse_term;
        assert!(eval_term(&t("t*z").unwrap(), &interp).unwrap().is_one());
        assert!(eval_term(&t("x + x").unwrap(), &interp).unwrap().is_zero());
        let f3 = field(3);
        assert!(eval_term(&RingTerm::int(3), &Interpretation::new(&f3)).unwrap().is_zero());
        assert_eq!(
            eval_term(&t("y").unwrap(), &interp),
            Err(EvalError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn qf_examples() {
        let f2 = field(2);
        let interp = Interpretation::new(&f2);
        assert!(eval_qf(&parse("O(t)"), &interp).unwrap());
        let inv = RingFormula::o(RingTerm::var("w"));
        let with_inv = interp.clone().assign("w", r(&f2, "1/t"));
        assert!(!eval_qf(&inv, &with_inv).unwrap());
        let either = RingFormula::or(vec![parse("t = t"), inv]);
        assert!(eval_qf(&either, &with_inv).unwrap());
        assert_eq!(eval_qf(&parse("E h . h = t"), &interp), Err(EvalError::NotQuantifierFree));
    }

    #[test]
    fn special_examples() {
        let f3 = field(3);
        let interp = Interpretation::new(&f3);
        let d = |s: &str| decide_special(&parse(s), &interp).unwrap().verdict;
        assert_eq!(d("E h . t^2 = h^2"), Verdict::True([(sym("h"), r(&f3, "t"))].into()));
        assert_eq!(d("E h . t = h^2"), Verdict::False);
        assert_eq!(d("E z . 2*z = 1"), Verdict::True([(sym("z"), r(&f3, "2"))].into()));
        assert_eq!(d("E h . 0 = h^2"), Verdict::True([(sym("h"), r(&f3, "0"))].into()));
        assert_eq!(decide_special(&parse("E h . h^3 = t"), &interp), Err(EvalError::ShapeMismatch));

        let f2 = field(2);
        let interp = Interpretation::new(&f2).assign("a", r(&f2, "t")).assign("b", r(&f2, "t^2"));
        let shape = parse("E h . a + b = a*b*(h^2 + h)");
        // 1/t + 1/t^2 = wp(1/t).
        assert_eq!(decide_special(&shape, &interp).unwrap().verdict, Verdict::True([(sym("h"), r(&f2, "1/t"))].into()));
    }

    #[test]
    fn pe_examples() {
        let f2 = field(2);
        let interp = Interpretation::new(&f2);
        let res = eval_pe(&parse("E h . 0 = h^2"), &interp, SearchBounds::default()).unwrap();
        assert_eq!(res.method, Method::ExactPattern);
        assert!(res.verdict.is_true());

        // Needs search: two conjuncts mention u.
        let f = parse("E u . u*u*u = t^3 & u + 1 = t + 1");
        let res = eval_pe(&f, &interp, SearchBounds::default()).unwrap();
        assert_eq!(res.verdict, Verdict::True([(sym("u"), r(&f2, "t"))].into()));
        assert_eq!(res.method, Method::BoundedSearch);

        let f = parse("E u . u*u*u = t^3 & t = t + 1");
        assert_eq!(eval_pe(&f, &interp, SearchBounds::default()).unwrap().verdict, Verdict::False);
        let f = parse("E u . u*u*u = t^3 & u*u*u*u = t^5");
        assert_eq!(eval_pe(&f, &interp, SearchBounds::default()).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn verify_witness_checks_binders() {
        let f2 = field(2);
        let interp = Interpretation::new(&f2);
        let f = parse("(E h . h^2 = t^2) | (E g . g = 1)");
        assert!(verify_witness(&f, &interp, &[(sym("h"), r(&f2, "t"))].into()).unwrap());
        assert!(verify_witness(&f, &interp, &[(sym("g"), r(&f2, "1"))].into()).unwrap());
        assert!(!verify_witness(&f, &interp, &[(sym("h"), r(&f2, "1"))].into()).unwrap());
    }

    #[test]
    fn bounded_semantics() {
        let f2 = field(2);
        let interp = Interpretation::new(&f2);
        let domain = enumerate_bounded(&f2, 1, 1);
        assert!(eval_bounded(&parse("E h . h^2 = t^2"), &interp, &domain).unwrap().is_some());
        assert!(eval_bounded(&parse("E h . h^2 = t^4"), &interp, &domain).unwrap().is_none());
    }

    #[test]
    fn interpretation_json() {
        let f3 = field(3);
        let interp = Interpretation::new(&f3)
            .with_t_image(r(&f3, "t^2 + 1"))
            .unwrap()
            .with_o_place(Place::Infinity)
            .assign("x", r(&f3, "1/(t+2)"));
        let back = Interpretation::from_json(&interp.to_json()).unwrap();
        assert_eq!(back, interp);
        assert!(Interpretation::new(&f3).with_t_image(r(&f3, "2")).is_err());
    }

    fn brute_force_square(c: &RatFunc, pool: &[RatFunc]) -> bool {
        pool.iter().any(|h| &h.square() == c)
    }

    fn brute_force_as(a: &RatFunc, b: &RatFunc, pool: &[RatFunc]) -> bool {
        pool.iter().any(|h| a.add(b) == a.mul(b).mul(&h.square().add(h)))
    }

    #[test]
    fn special_matches_brute_force() {
        for p in [2, 3] {
            let f = field(p);
            let inputs = enumerate_bounded(&f, 2, 2);
            let pool = enumerate_bounded(&f, 3, 3);
            let square = parse("E h . a = h^2");
            let artin = parse("E h . a + b = a*b*(h^2 + h)");
            for a in &inputs {
                let interp = Interpretation::new(&f).assign("a", a.clone());
                let got = decide_special(&square, &interp).unwrap().verdict.is_true();
                assert_eq!(got, brute_force_square(a, &pool), "square {a}");
                if p != 2 {
                    continue;
                }
                for b in &inputs {
                    let interp = interp.clone().assign("b", b.clone());
                    let verdict = decide_special(&artin, &interp).unwrap().verdict;
                    assert_eq!(verdict.is_true(), brute_force_as(a, b, &pool), "AS {a}, {b}");
                }
            }
        }
    }
}
