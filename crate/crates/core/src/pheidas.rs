//! Positive-existential sentences over `(N; 0, 1, +, |_p)`: parsing, bounded
//! evaluation, unnesting, translation into ring formulas with `O`, and
//! lifting of natural-number witnesses to `F_q(t)`.
//!
//! ```text
//! formula := conj ('|' conj)*
//! conj    := unit ('&' unit)*
//! unit    := 'E' ident '.' formula | '(' formula ')' | term ('=' | 'divp') term
//! term    := atom ('+' atom)*
//! atom    := '0' | '1' | ident | '(' term ')'
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::builders::{build_pi_root, BuildError};
use crate::eval::{eval_qf, EvalError, Interpretation, Witness};
use crate::formula::{fresh_name, RingFormula};
use crate::orbit::{direct_orbit, Direction};
use crate::ratfunc::{Place, RatFunc};
use crate::term::{sym, RingTerm, Symbol};
use crate::text::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum NatTerm {
    Zero,
    One,
    Var { name: Symbol },
    Add { lhs: Box<NatTerm>, rhs: Box<NatTerm> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PheidasFormula {
    Eq { lhs: NatTerm, rhs: NatTerm },
    /// `lhs |_p rhs`, i.e. `rhs = lhs * p^s` for some `s`.
    Div { lhs: NatTerm, rhs: NatTerm },
    And { children: Vec<PheidasFormula> },
    Or { children: Vec<PheidasFormula> },
    Exists { var: Symbol, body: Box<PheidasFormula> },
}

/// A formula together with the prime of its divisibility predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PheidasSentence {
    pub p: u64,
    pub formula: PheidasFormula,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PheidasError {
    #[error("input still contains a disjunction")]
    ContainsDisjunction,
    #[error("formula is not a sentence; free variables: {0:?}")]
    FreeVariables(Vec<String>),
    #[error("natural-number witness does not satisfy the sentence")]
    WitnessInvalid,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl NatTerm {
    pub fn var(name: &str) -> NatTerm {
        NatTerm::Var { name: sym(name) }
    }

    pub fn plus(self, rhs: NatTerm) -> NatTerm {
        NatTerm::Add { lhs: Box::new(self), rhs: Box::new(rhs) }
    }

    fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            NatTerm::Zero | NatTerm::One => {}
            NatTerm::Var { name } => {
                out.insert(name.clone());
            }
            NatTerm::Add { lhs, rhs } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    fn rename(&self, map: &BTreeMap<Symbol, Symbol>) -> NatTerm {
        match self {
            NatTerm::Var { name } => NatTerm::Var { name: map.get(name).unwrap_or(name).clone() },
            NatTerm::Add { lhs, rhs } => lhs.rename(map).plus(rhs.rename(map)),
            other => other.clone(),
        }
    }

    /// Value under `env`; `None` on an unbound variable or overflow.
    pub fn value(&self, env: &BTreeMap<Symbol, u64>) -> Option<u64> {
        match self {
            NatTerm::Zero => Some(0),
            NatTerm::One => Some(1),
            NatTerm::Var { name } => env.get(name).copied(),
            NatTerm::Add { lhs, rhs } => lhs.value(env)?.checked_add(rhs.value(env)?),
        }
    }
}

/// `n |_p m`: `m = n * p^s` for some `s >= 0`, so `0 |_p m` iff `m = 0`.
pub fn divp(n: u64, m: u64, p: u64) -> bool {
    if n == 0 {
        return m == 0;
    }
    if !m.is_multiple_of(n) {
        return false;
    }
    let mut q = m / n;
    if q == 0 {
        return false;
    }
    while q.is_multiple_of(p) {
        q /= p;
    }
    q == 1
}

impl PheidasFormula {
    pub fn eq(lhs: NatTerm, rhs: NatTerm) -> PheidasFormula {
        PheidasFormula::Eq { lhs, rhs }
    }

    pub fn div(lhs: NatTerm, rhs: NatTerm) -> PheidasFormula {
        PheidasFormula::Div { lhs, rhs }
    }

    pub fn exists(var: &str, body: PheidasFormula) -> PheidasFormula {
        PheidasFormula::Exists { var: sym(var), body: Box::new(body) }
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        match self {
            PheidasFormula::Eq { lhs, rhs } | PheidasFormula::Div { lhs, rhs } => {
                lhs.collect_vars(&mut out);
                rhs.collect_vars(&mut out);
            }
            PheidasFormula::And { children } | PheidasFormula::Or { children } => {
                children.iter().for_each(|c| out.extend(c.free_vars()));
            }
            PheidasFormula::Exists { var, body } => {
                out = body.free_vars();
                out.remove(var);
            }
        }
        out
    }

    fn all_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            PheidasFormula::Eq { lhs, rhs } | PheidasFormula::Div { lhs, rhs } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            PheidasFormula::And { children } | PheidasFormula::Or { children } => {
                children.iter().for_each(|c| c.all_vars(out));
            }
            PheidasFormula::Exists { var, body } => {
                out.insert(var.clone());
                body.all_vars(out);
            }
        }
    }

    /// Truth of a quantifier-free formula; `None` on an unbound variable.
    pub fn holds(&self, env: &BTreeMap<Symbol, u64>, p: u64) -> Option<bool> {
        Some(match self {
            PheidasFormula::Eq { lhs, rhs } => lhs.value(env)? == rhs.value(env)?,
            PheidasFormula::Div { lhs, rhs } => divp(lhs.value(env)?, rhs.value(env)?, p),
            PheidasFormula::And { children } => {
                for c in children {
                    if !c.holds(env, p)? {
                        return Some(false);
                    }
                }
                true
            }
            PheidasFormula::Or { children } => {
                for c in children {
                    if c.holds(env, p)? {
                        return Some(true);
                    }
                }
                false
            }
            PheidasFormula::Exists { .. } => return None,
        })
    }

    fn has_exists(&self) -> bool {
        match self {
            PheidasFormula::Exists { .. } => true,
            PheidasFormula::And { children } | PheidasFormula::Or { children } => {
                children.iter().any(PheidasFormula::has_exists)
            }
            _ => false,
        }
    }

    /// Renames bound variables so that no name is bound twice or bound and
    /// free at once.
    pub fn rename_apart(&self) -> PheidasFormula {
        fn go(
            f: &PheidasFormula,
            map: &mut BTreeMap<Symbol, Symbol>,
            taken: &mut BTreeSet<Symbol>,
            used: &mut BTreeSet<Symbol>,
        ) -> PheidasFormula {
            match f {
                PheidasFormula::Eq { lhs, rhs } => PheidasFormula::eq(lhs.rename(map), rhs.rename(map)),
                PheidasFormula::Div { lhs, rhs } => PheidasFormula::div(lhs.rename(map), rhs.rename(map)),
                PheidasFormula::And { children } => {
                    PheidasFormula::And { children: children.iter().map(|c| go(c, map, taken, used)).collect() }
                }
                PheidasFormula::Or { children } => {
                    PheidasFormula::Or { children: children.iter().map(|c| go(c, map, taken, used)).collect() }
                }
                PheidasFormula::Exists { var, body } => {
                    let name = if used.contains(var) { fresh_name(var, taken) } else { var.clone() };
                    taken.insert(name.clone());
                    used.insert(name.clone());
                    let before = map.insert(var.clone(), name.clone());
                    let body = go(body, map, taken, used);
                    match before {
                        Some(b) => map.insert(var.clone(), b),
                        None => map.remove(var),
                    };
                    PheidasFormula::Exists { var: name, body: Box::new(body) }
                }
            }
        }
        let mut taken = BTreeSet::new();
        self.all_vars(&mut taken);
        let mut used = self.free_vars();
        go(self, &mut BTreeMap::new(), &mut taken, &mut used)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NatVerdict {
    True(BTreeMap<Symbol, u64>),
    False,
    Unknown,
}

impl NatVerdict {
    pub fn witness(&self) -> Option<&BTreeMap<Symbol, u64>> {
        match self {
            NatVerdict::True(w) => Some(w),
            _ => None,
        }
    }
}

fn search(
    f: &PheidasFormula,
    p: u64,
    bound: u64,
    env: &mut BTreeMap<Symbol, u64>,
) -> Option<BTreeMap<Symbol, u64>> {
    match f {
        PheidasFormula::Eq { .. } | PheidasFormula::Div { .. } => {
            f.holds(env, p).unwrap_or(false).then(BTreeMap::new)
        }
        PheidasFormula::And { children } => {
            let mut w = BTreeMap::new();
            for c in children {
                w.extend(search(c, p, bound, env)?);
            }
            Some(w)
        }
        PheidasFormula::Or { children } => children.iter().find_map(|c| search(c, p, bound, env)),
        PheidasFormula::Exists { var, body } => {
            let saved = env.get(var).copied();
            let mut found = None;
            for value in 0..=bound {
                env.insert(var.clone(), value);
                if let Some(mut w) = search(body, p, bound, env) {
                    w.insert(var.clone(), value);
                    found = Some(w);
                    break;
                }
            }
            match saved {
                Some(s) => env.insert(var.clone(), s),
                None => env.remove(var),
            };
            found
        }
    }
}

/// Searches witnesses in `[0, bound]`. A ground sentence is decided; an
/// exhausted search is `Unknown`.
pub fn eval_nat(sentence: &PheidasSentence, bound: u64) -> Result<NatVerdict, PheidasError> {
    let f = &sentence.formula;
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(PheidasError::FreeVariables(free.iter().map(|s| s.to_string()).collect()));
    }
    if !f.has_exists() {
        let holds = f.holds(&BTreeMap::new(), sentence.p).expect("ground");
        return Ok(if holds { NatVerdict::True(BTreeMap::new()) } else { NatVerdict::False });
    }
    let f = f.rename_apart();
    Ok(match search(&f, sentence.p, bound, &mut BTreeMap::new()) {
        Some(w) => NatVerdict::True(w),
        None => NatVerdict::Unknown,
    })
}

/// An existential block over a conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjunctive {
    pub vars: Vec<Symbol>,
    pub atoms: Vec<PheidasFormula>,
}

impl Conjunctive {
    pub fn to_formula(&self) -> PheidasFormula {
        let mut f = if self.atoms.len() == 1 {
            self.atoms[0].clone()
        } else {
            PheidasFormula::And { children: self.atoms.clone() }
        };
        for v in self.vars.iter().rev() {
            f = PheidasFormula::Exists { var: v.clone(), body: Box::new(f) };
        }
        f
    }
}

/// Distributes into a disjunction of existential conjunctions.
pub fn to_dnf(f: &PheidasFormula) -> Vec<Conjunctive> {
    fn go(f: &PheidasFormula) -> Vec<Conjunctive> {
        match f {
            PheidasFormula::Eq { .. } | PheidasFormula::Div { .. } => {
                vec![Conjunctive { vars: vec![], atoms: vec![f.clone()] }]
            }
            PheidasFormula::Or { children } => children.iter().flat_map(go).collect(),
            PheidasFormula::And { children } => {
                let mut acc = vec![Conjunctive { vars: vec![], atoms: vec![] }];
                for c in children {
                    let parts = go(c);
                    acc = acc
                        .iter()
                        .flat_map(|a| {
                            parts.iter().map(move |b| Conjunctive {
                                vars: a.vars.iter().chain(&b.vars).cloned().collect(),
                                atoms: a.atoms.iter().chain(&b.atoms).cloned().collect(),
                            })
                        })
                        .collect();
                }
                acc
            }
            PheidasFormula::Exists { var, body } => go(body)
                .into_iter()
                .map(|mut c| {
                    c.vars.insert(0, var.clone());
                    c
                })
                .collect(),
        }
    }
    go(&f.rename_apart())
}

/// Atoms in one of the five unnested shapes, over variable indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum UnnestedAtom {
    /// `n_i = n_j`
    Eq { i: usize, j: usize },
    /// `n_i = 0`
    Zero { i: usize },
    /// `n_i = 1`
    One { i: usize },
    /// `n_i + n_j = n_k`
    Sum { i: usize, j: usize, k: usize },
    /// `n_i |_p n_j`
    Div { i: usize, j: usize },
}

/// How an introduced variable is determined by the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Definition {
    Constant { value: u64 },
    Sum { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnnestedSentence {
    pub vars: Vec<Symbol>,
    pub atoms: Vec<UnnestedAtom>,
    /// Introduced variables, in order of introduction.
    pub definitions: Vec<(usize, Definition)>,
}

struct Unnester {
    vars: Vec<Symbol>,
    index: BTreeMap<Symbol, usize>,
    taken: BTreeSet<Symbol>,
    next_letter: u8,
    atoms: Vec<UnnestedAtom>,
    definitions: Vec<(usize, Definition)>,
}

impl Unnester {
    fn fresh(&mut self, def: Definition) -> usize {
        let name = loop {
            let letter = (b'a' + self.next_letter % 26) as char;
            let round = self.next_letter / 26;
            self.next_letter += 1;
            let candidate = if round == 0 { letter.to_string() } else { format!("{letter}{round}") };
            if !self.taken.contains(candidate.as_str()) {
                break sym(&candidate);
            }
        };
        self.taken.insert(name.clone());
        let idx = self.vars.len();
        self.vars.push(name.clone());
        self.index.insert(name, idx);
        self.definitions.push((idx, def));
        idx
    }

    fn name(&mut self, t: &NatTerm) -> usize {
        match t {
            NatTerm::Var { name } => self.index[name],
            NatTerm::Zero | NatTerm::One => {
                let value = u64::from(matches!(t, NatTerm::One));
                let i = self.fresh(Definition::Constant { value });
                self.atoms.push(if value == 0 { UnnestedAtom::Zero { i } } else { UnnestedAtom::One { i } });
                i
            }
            NatTerm::Add { lhs, rhs } => {
                let (i, j) = (self.name(lhs), self.name(rhs));
                let k = self.fresh(Definition::Sum { i, j });
                self.atoms.push(UnnestedAtom::Sum { i, j, k });
                k
            }
        }
    }

    fn atom(&mut self, f: &PheidasFormula) {
        match f {
            PheidasFormula::Div { lhs, rhs } => {
                let (i, j) = (self.name(lhs), self.name(rhs));
                self.atoms.push(UnnestedAtom::Div { i, j });
            }
            PheidasFormula::Eq { lhs, rhs } => {
                let constant = |t: &NatTerm| match t {
                    NatTerm::Zero => Some(0),
                    NatTerm::One => Some(1),
                    _ => None,
                };
                let shaped = |i: usize, c: u64| if c == 0 { UnnestedAtom::Zero { i } } else { UnnestedAtom::One { i } };
                match (lhs, rhs) {
                    (_, NatTerm::Add { lhs: r1, rhs: r2 }) => {
                        let k = self.name(lhs);
                        let (i, j) = (self.name(r1), self.name(r2));
                        self.atoms.push(UnnestedAtom::Sum { i, j, k });
                    }
                    (NatTerm::Add { lhs: l1, rhs: l2 }, _) => {
                        let (i, j) = (self.name(l1), self.name(l2));
                        let k = self.name(rhs);
                        self.atoms.push(UnnestedAtom::Sum { i, j, k });
                    }
                    (NatTerm::Var { name }, c) if constant(c).is_some() => {
                        let i = self.index[name];
                        self.atoms.push(shaped(i, constant(c).unwrap()));
                    }
                    (c, NatTerm::Var { name }) if constant(c).is_some() => {
                        let i = self.index[name];
                        self.atoms.push(shaped(i, constant(c).unwrap()));
                    }
                    _ => {
                        let (i, j) = (self.name(lhs), self.name(rhs));
                        self.atoms.push(UnnestedAtom::Eq { i, j });
                    }
                }
            }
            _ => unreachable!("conjunctive atoms only"),
        }
    }
}

/// Unnests an existential conjunction.
pub fn unnest(sentence: &Conjunctive) -> UnnestedSentence {
    let mut taken = BTreeSet::new();
    for a in &sentence.atoms {
        a.all_vars(&mut taken);
    }
    taken.extend(sentence.vars.iter().cloned());
    let mut u = Unnester {
        vars: sentence.vars.clone(),
        index: sentence.vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect(),
        taken,
        next_letter: 0,
        atoms: Vec::new(),
        definitions: Vec::new(),
    };
    for a in &sentence.atoms {
        u.atom(a);
    }
    UnnestedSentence { vars: u.vars, atoms: u.atoms, definitions: u.definitions }
}

/// Unnests a formula that must already be an existential conjunction.
pub fn unnest_formula(f: &PheidasFormula) -> Result<UnnestedSentence, PheidasError> {
    let mut dnf = to_dnf(f);
    let mut has_or = false;
    let mut probe = |g: &PheidasFormula| has_or |= matches!(g, PheidasFormula::Or { .. });
    visit(f, &mut probe);
    if has_or || dnf.len() != 1 {
        return Err(PheidasError::ContainsDisjunction);
    }
    Ok(unnest(&dnf.pop().expect("one disjunct")))
}

fn visit(f: &PheidasFormula, g: &mut impl FnMut(&PheidasFormula)) {
    g(f);
    match f {
        PheidasFormula::And { children } | PheidasFormula::Or { children } => children.iter().for_each(|c| visit(c, g)),
        PheidasFormula::Exists { body, .. } => visit(body, g),
        _ => {}
    }
}

impl UnnestedSentence {
    pub fn to_formula(&self) -> PheidasFormula {
        let v = |i: usize| NatTerm::Var { name: self.vars[i].clone() };
        let atoms = self
            .atoms
            .iter()
            .map(|a| match *a {
                UnnestedAtom::Eq { i, j } => PheidasFormula::eq(v(i), v(j)),
                UnnestedAtom::Zero { i } => PheidasFormula::eq(v(i), NatTerm::Zero),
                UnnestedAtom::One { i } => PheidasFormula::eq(v(i), NatTerm::One),
                UnnestedAtom::Sum { i, j, k } => PheidasFormula::eq(v(i).plus(v(j)), v(k)),
                UnnestedAtom::Div { i, j } => PheidasFormula::div(v(i), v(j)),
            })
            .collect();
        Conjunctive { vars: self.vars.clone(), atoms }.to_formula()
    }

    pub fn div_count(&self) -> usize {
        self.atoms.iter().filter(|a| matches!(a, UnnestedAtom::Div { .. })).count()
    }

    /// Extends a witness for the original variables to the introduced ones.
    pub fn extend_witness(&self, witness: &BTreeMap<Symbol, u64>) -> Option<Vec<u64>> {
        let mut values: Vec<Option<u64>> = self.vars.iter().map(|v| witness.get(v).copied()).collect();
        for &(idx, def) in &self.definitions {
            values[idx] = Some(match def {
                Definition::Constant { value } => value,
                Definition::Sum { i, j } => values[i]?.checked_add(values[j]?)?,
            });
        }
        values.into_iter().collect()
    }

    pub fn holds(&self, values: &[u64], p: u64) -> bool {
        self.atoms.iter().all(|a| match *a {
            UnnestedAtom::Eq { i, j } => values[i] == values[j],
            UnnestedAtom::Zero { i } => values[i] == 0,
            UnnestedAtom::One { i } => values[i] == 1,
            UnnestedAtom::Sum { i, j, k } => values[i].checked_add(values[j]) == Some(values[k]),
            UnnestedAtom::Div { i, j } => divp(values[i], values[j], p),
        })
    }
}

/// One translated `|_p` atom: `E xt, yt . pi_root(xt, x_i) & xt yt = 1 & ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivPart {
    pub i: usize,
    pub j: usize,
    pub xt: Symbol,
    pub yt: Symbol,
    pub pi: RingFormula,
}

/// A translated sentence with its pieces kept apart for checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub sentence: RingFormula,
    /// `x_1, ..., x_l, y_1, ..., y_l, z`.
    pub outer_vars: Vec<Symbol>,
    /// Every atom outside the `pi` sub-formulas.
    pub atoms: Vec<RingFormula>,
    pub divs: Vec<DivPart>,
}

fn xv(i: usize) -> Symbol {
    sym(&format!("x_{}", i + 1))
}

fn yv(i: usize) -> Symbol {
    sym(&format!("y_{}", i + 1))
}

/// Translates with `O` read as a valuation ring where `v(t) = s_val`.
pub fn translate(u: &UnnestedSentence, p: u64, genus: u64, s_val: u32) -> Result<Translation, PheidasError> {
    let var = |s: &Symbol| RingTerm::var_sym(s);
    let (x, y) = (|i| var(&xv(i)), |i| var(&yv(i)));
    let z = RingTerm::var("z");
    let spow = |t: RingTerm| if s_val == 1 { t } else { t.pow(s_val) };
    let o = RingFormula::o;
    let pi_template = if u.div_count() > 0 { Some(build_pi_root(genus, p, 0)?) } else { None };

    let mut atoms = Vec::new();
    let mut conjuncts = Vec::new();
    let mut divs = Vec::new();
    for (n, atom) in u.atoms.iter().enumerate() {
        match *atom {
            UnnestedAtom::Zero { i } => {
                let a = o(y(i));
                atoms.push(a.clone());
                conjuncts.push(a);
            }
            UnnestedAtom::One { i } => {
                let pair = [o(spow(x(i)) * z.clone()), o(spow(y(i)) * RingTerm::T)];
                atoms.extend(pair.clone());
                conjuncts.extend(pair);
            }
            UnnestedAtom::Sum { i, j, k } => {
                let pair = [o((x(i) * x(j)) * y(k)), o((y(i) * y(j)) * x(k))];
                atoms.extend(pair.clone());
                conjuncts.extend(pair);
            }
            UnnestedAtom::Eq { i, j } => {
                let pair = [o(x(i) * y(j)), o(x(j) * y(i))];
                atoms.extend(pair.clone());
                conjuncts.extend(pair);
            }
            UnnestedAtom::Div { i, j } => {
                let (xt, yt) = (sym(&format!("xt_{}", n + 1)), sym(&format!("yt_{}", n + 1)));
                let mut map = BTreeMap::new();
                map.insert(sym("x"), var(&xt));
                map.insert(sym("y"), x(i));
                let pi = pi_template
                    .as_ref()
                    .expect("built when a divisibility atom exists")
                    .rename_bound(&format!("_d{}", n + 1))
                    .substitute(&map);
                let rest = [
                    RingFormula::eq(var(&xt) * var(&yt), RingTerm::int(1)),
                    o(var(&xt) * y(j)),
                    o(var(&yt) * x(j)),
                ];
                atoms.extend(rest.clone());
                let body = RingFormula::And { children: std::iter::once(pi.clone()).chain(rest).collect() };
                conjuncts.push(RingFormula::exists_sym(xt.clone(), RingFormula::exists_sym(yt.clone(), body)));
                divs.push(DivPart { i, j, xt, yt, pi });
            }
        }
    }
    let l = u.vars.len();
    let mut scaffold = vec![RingFormula::eq(RingTerm::T * z.clone(), RingTerm::int(1))];
    scaffold.extend((0..l).map(|i| RingFormula::eq(x(i) * y(i), RingTerm::int(1))));
    scaffold.extend((0..l).map(|i| o(x(i))));
    atoms.extend(scaffold.clone());
    conjuncts.extend(scaffold);

    let outer_vars: Vec<Symbol> = (0..l).map(xv).chain((0..l).map(yv)).chain([sym("z")]).collect();
    let sentence = RingFormula::exists_many(&outer_vars, RingFormula::And { children: conjuncts });
    Ok(Translation { sentence, outer_vars, atoms, divs })
}

impl Translation {
    /// Binders outside the `pi` sub-formulas.
    pub fn scaffold_var_count(&self) -> usize {
        let inner: usize = self.divs.iter().map(|d| d.pi.count_exists()).sum();
        self.sentence.count_exists() - inner
    }
}

/// Realizes `n_i` as `w^{n_i}` for a uniformizer `w` of the place of `O`.
pub fn lift_witness(
    u: &UnnestedSentence,
    values: &[u64],
    p: u64,
    interp: &Interpretation,
) -> Result<Witness, PheidasError> {
    if values.len() != u.vars.len() || !u.holds(values, p) {
        return Err(PheidasError::WitnessInvalid);
    }
    let field = &interp.field;
    let uniformizer = match &interp.o_place {
        Place::Finite(pi) => RatFunc::from_poly(pi.clone()),
        Place::Infinity => RatFunc::t(field).inv().expect("t != 0"),
    };
    let power = |n: i64| uniformizer.pow(n).expect("uniformizer is nonzero");
    let mut w = Witness::new();
    for (i, &n) in values.iter().enumerate() {
        w.insert(xv(i), power(n as i64));
        w.insert(yv(i), power(-(n as i64)));
    }
    w.insert(sym("z"), interp.t_image.inv().map_err(|_| EvalError::ConstantTImage)?);
    for (n, atom) in u.atoms.iter().enumerate() {
        if let UnnestedAtom::Div { i, j } = *atom {
            let (ni, nj) = (values[i], values[j]);
            let mut s = 0u32;
            if let Some(mut q) = nj.checked_div(ni) {
                while q > 1 {
                    q /= p;
                    s += 1;
                }
            }
            let xt = w[&xv(i)].frobenius_iter(s);
            w.insert(sym(&format!("yt_{}", n + 1)), xt.inv().expect("nonzero"));
            w.insert(sym(&format!("xt_{}", n + 1)), xt);
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedCheck {
    pub atoms: usize,
    pub atoms_true: usize,
    pub orbit_checks: usize,
    pub orbit_true: usize,
    pub ok: bool,
}

/// Checks every atom of the translation under the lifted witness; each `pi`
/// part is checked as orbit membership `xt = x_i^{p^s}`.
pub fn lifted_check(tr: &Translation, witness: &Witness, interp: &Interpretation) -> Result<LiftedCheck, PheidasError> {
    let mut with = interp.clone();
    with.assignment.extend(witness.iter().map(|(k, v)| (k.clone(), v.clone())));
    let mut atoms_true = 0;
    for a in &tr.atoms {
        if eval_qf(a, &with)? {
            atoms_true += 1;
        }
    }
    let orbit_true = tr
        .divs
        .iter()
        .filter(|d| {
            let answer = direct_orbit(&with.assignment[&d.xt], &with.assignment[&xv(d.i)]);
            answer.in_orbit && answer.direction == Some(Direction::FIsPowerOfG)
        })
        .count();
    Ok(LiftedCheck {
        atoms: tr.atoms.len(),
        atoms_true,
        orbit_checks: tr.divs.len(),
        orbit_true,
        ok: atoms_true == tr.atoms.len() && orbit_true == tr.divs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub sentence: String,
    pub nat_verdict: String,
    pub witness: Option<BTreeMap<String, u64>>,
    pub lifted_check: Option<LiftedCheck>,
}

impl RoundTripReport {
    pub fn ok(&self) -> bool {
        self.lifted_check.as_ref().is_some_and(|c| c.ok)
    }
}

/// Evaluates over `N`, then lifts the witness of the first satisfied
/// disjunct and checks its translation.
pub fn round_trip(
    sentence: &PheidasSentence,
    bound: u64,
    genus: u64,
    interp: &Interpretation,
) -> Result<RoundTripReport, PheidasError> {
    let text = sentence.formula.to_string();
    let verdict = eval_nat(sentence, bound)?;
    let NatVerdict::True(_) = verdict else {
        let name = if verdict == NatVerdict::False { "false" } else { "unknown" };
        return Ok(RoundTripReport { sentence: text, nat_verdict: name.into(), witness: None, lifted_check: None });
    };
    let s_val = interp.t_image.valuation(&interp.o_place).finite().unwrap_or(0).max(0) as u32;
    for disjunct in to_dnf(&sentence.formula) {
        let formula = disjunct.to_formula();
        let part = PheidasSentence { p: sentence.p, formula };
        if let NatVerdict::True(w) = eval_nat(&part, bound)? {
            let u = unnest(&disjunct);
            let values = u.extend_witness(&w).ok_or(PheidasError::WitnessInvalid)?;
            let tr = translate(&u, sentence.p, genus, s_val)?;
            let lifted = lift_witness(&u, &values, sentence.p, interp)?;
            let check = lifted_check(&tr, &lifted, interp)?;
            return Ok(RoundTripReport {
                sentence: text,
                nat_verdict: "true".into(),
                witness: Some(w.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
                lifted_check: Some(check),
            });
        }
    }
    unreachable!("a satisfied sentence has a satisfied disjunct")
}

/// Translation of a whole sentence; disjuncts are translated separately and
/// rejoined with `|`.
pub fn translate_sentence(sentence: &PheidasSentence, genus: u64, s_val: u32) -> Result<RingFormula, PheidasError> {
    let parts: Result<Vec<RingFormula>, PheidasError> = to_dnf(&sentence.formula)
        .iter()
        .map(|c| translate(&unnest(c), sentence.p, genus, s_val).map(|t| t.sentence))
        .collect();
    Ok(RingFormula::or(parts?))
}

fn write_term(t: &NatTerm, nested: bool, out: &mut String) {
    match t {
        NatTerm::Zero => out.push('0'),
        NatTerm::One => out.push('1'),
        NatTerm::Var { name } => out.push_str(name),
        NatTerm::Add { lhs, rhs } => {
            if nested {
                out.push('(');
            }
            write_term(lhs, false, out);
            out.push_str(" + ");
            write_term(rhs, true, out);
            if nested {
                out.push(')');
            }
        }
    }
}

// Levels as in the ring syntax: disjunction 1, conjunction 2, unit 3.
fn write_formula(f: &PheidasFormula, ctx: u8, out: &mut String) {
    match f {
        PheidasFormula::Eq { lhs, rhs } | PheidasFormula::Div { lhs, rhs } => {
            write_term(lhs, false, out);
            out.push_str(if matches!(f, PheidasFormula::Eq { .. }) { " = " } else { " divp " });
            write_term(rhs, false, out);
        }
        PheidasFormula::And { children } | PheidasFormula::Or { children } => {
            let (level, sep) = if matches!(f, PheidasFormula::And { .. }) { (2, " & ") } else { (1, " | ") };
            let wrap = level < ctx;
            if wrap {
                out.push('(');
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                let child_ctx = match c {
                    PheidasFormula::And { .. } if level == 1 => 2,
                    PheidasFormula::And { .. } | PheidasFormula::Or { .. } => 3,
                    PheidasFormula::Exists { .. } => 4,
                    _ => 0,
                };
                write_formula(c, child_ctx, out);
            }
            if wrap {
                out.push(')');
            }
        }
        PheidasFormula::Exists { var, body } => {
            let wrap = ctx > 3;
            if wrap {
                out.push('(');
            }
            out.push_str("E ");
            out.push_str(var);
            out.push_str(" . ");
            write_formula(body, 0, out);
            if wrap {
                out.push(')');
            }
        }
    }
}

impl fmt::Display for NatTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(self, false, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for PheidasFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(self, 0, &mut s);
        f.write_str(&s)
    }
}

pub fn parse_pheidas(text: &str) -> Result<PheidasFormula, SyntaxError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("end of input");
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError { position: self.pos, expected: expected.into() })
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        let hit = self.peek() == Some(c);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn word(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        let first = *self.src.get(start)?;
        if !(first.is_ascii_alphabetic() || first == b'_') {
            return None;
        }
        let len = self.src[start..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == b'_').count();
        std::str::from_utf8(&self.src[start..start + len]).ok()
    }

    fn formula(&mut self) -> Result<PheidasFormula, SyntaxError> {
        let mut items = vec![self.conj()?];
        while self.eat(b'|') {
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PheidasFormula::Or { children: items } })
    }

    fn conj(&mut self) -> Result<PheidasFormula, SyntaxError> {
        let mut items = vec![self.unit()?];
        while self.eat(b'&') {
            items.push(self.unit()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PheidasFormula::And { children: items } })
    }

    fn unit(&mut self) -> Result<PheidasFormula, SyntaxError> {
        if self.word() == Some("E") {
            self.pos += 1;
            let var = match self.word() {
                Some(w) if w != "E" && w != "divp" => w.to_string(),
                _ => return self.err("variable name"),
            };
            self.pos += var.len();
            if !self.eat(b'.') {
                return self.err("'.'");
            }
            let body = self.formula()?;
            return Ok(PheidasFormula::Exists { var: sym(&var), body: Box::new(body) });
        }
        if self.peek() == Some(b'(') {
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.formula() {
                if self.eat(b')') && !matches!(self.peek(), Some(b'=' | b'+')) && self.word() != Some("divp") {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        let lhs = self.term()?;
        if self.eat(b'=') {
            return Ok(PheidasFormula::eq(lhs, self.term()?));
        }
        if self.word() == Some("divp") {
            self.pos += 4;
            return Ok(PheidasFormula::div(lhs, self.term()?));
        }
        self.err("'=' or 'divp'")
    }

    fn term(&mut self) -> Result<NatTerm, SyntaxError> {
        let mut acc = self.atom()?;
        while self.eat(b'+') {
            acc = acc.plus(self.atom()?);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<NatTerm, SyntaxError> {
        match self.peek() {
            Some(b'0') | Some(b'1') => {
                let c = self.src[self.pos];
                self.pos += 1;
                if self.src.get(self.pos).is_some_and(u8::is_ascii_alphanumeric) {
                    return self.err("the literal 0 or 1");
                }
                Ok(if c == b'0' { NatTerm::Zero } else { NatTerm::One })
            }
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                if !self.eat(b')') {
                    return self.err("')'");
                }
                Ok(t)
            }
            _ => match self.word() {
                Some(w) if w != "E" && w != "divp" => {
                    let name = w.to_string();
                    self.pos += name.len();
                    Ok(NatTerm::Var { name: sym(&name) })
                }
                _ => self.err("term"),
            },
        }
    }
}
