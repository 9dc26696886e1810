//! Terms of the ring language `{+, -, *, 0, 1, t}` and their expansion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub type Symbol = Arc<str>;

pub fn sym(name: &str) -> Symbol {
    Arc::from(name)
}

/// An unexpanded term tree; integer literals are non-negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum RingTerm {
    Int { value: u64 },
    T,
    Var { name: Symbol },
    Neg { arg: Box<RingTerm> },
    Add { lhs: Box<RingTerm>, rhs: Box<RingTerm> },
    Sub { lhs: Box<RingTerm>, rhs: Box<RingTerm> },
    Mul { lhs: Box<RingTerm>, rhs: Box<RingTerm> },
    Pow { base: Box<RingTerm>, exp: u32 },
}

impl RingTerm {
    pub fn int(value: u64) -> RingTerm {
        RingTerm::Int { value }
    }

    pub fn var(name: &str) -> RingTerm {
        RingTerm::Var { name: sym(name) }
    }

    pub fn var_sym(name: &Symbol) -> RingTerm {
        RingTerm::Var { name: name.clone() }
    }

    pub fn pow(self, exp: u32) -> RingTerm {
        RingTerm::Pow { base: Box::new(self), exp }
    }

    /// Integer constant, using `Neg` for negative values.
    pub fn from_i128(n: i128) -> RingTerm {
        if n < 0 {
            -RingTerm::int(n.unsigned_abs() as u64)
        } else {
            RingTerm::int(n as u64)
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, RingTerm::Int { value: 0 })
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            RingTerm::Int { .. } | RingTerm::T => {}
            RingTerm::Var { name } => {
                out.insert(name.clone());
            }
            RingTerm::Neg { arg } => arg.collect_vars(out),
            RingTerm::Pow { base, .. } => base.collect_vars(out),
            RingTerm::Add { lhs, rhs } | RingTerm::Sub { lhs, rhs } | RingTerm::Mul { lhs, rhs } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    /// True if some variable satisfies `pred`.
    pub fn any_var(&self, pred: &mut impl FnMut(&Symbol) -> bool) -> bool {
        match self {
            RingTerm::Int { .. } | RingTerm::T => false,
            RingTerm::Var { name } => pred(name),
            RingTerm::Neg { arg } => arg.any_var(pred),
            RingTerm::Pow { base, .. } => base.any_var(pred),
            RingTerm::Add { lhs, rhs } | RingTerm::Sub { lhs, rhs } | RingTerm::Mul { lhs, rhs } => {
                lhs.any_var(pred) || rhs.any_var(pred)
            }
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.any_var(&mut |name| &**name == v)
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, map: &BTreeMap<Symbol, RingTerm>) -> RingTerm {
        match self {
            RingTerm::Int { .. } | RingTerm::T => self.clone(),
            RingTerm::Var { name } => map.get(name).cloned().unwrap_or_else(|| self.clone()),
            RingTerm::Neg { arg } => -arg.substitute(map),
            RingTerm::Pow { base, exp } => base.substitute(map).pow(*exp),
            RingTerm::Add { lhs, rhs } => lhs.substitute(map) + rhs.substitute(map),
            RingTerm::Sub { lhs, rhs } => lhs.substitute(map) - rhs.substitute(map),
            RingTerm::Mul { lhs, rhs } => lhs.substitute(map) * rhs.substitute(map),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            RingTerm::Int { .. } | RingTerm::T | RingTerm::Var { .. } => 1,
            RingTerm::Neg { arg } => 1 + arg.size(),
            RingTerm::Pow { base, .. } => 1 + base.size(),
            RingTerm::Add { lhs, rhs } | RingTerm::Sub { lhs, rhs } | RingTerm::Mul { lhs, rhs } => {
                1 + lhs.size() + rhs.size()
            }
        }
    }

    pub fn expand(&self) -> Result<Expanded, ExpandError> {
        Ok(match self {
            RingTerm::Int { value } => Expanded::constant(*value as i128),
            RingTerm::T => Expanded::atom(Indeterminate::T),
            RingTerm::Var { name } => Expanded::atom(Indeterminate::Var(name.clone())),
            RingTerm::Neg { arg } => arg.expand()?.neg(),
            RingTerm::Add { lhs, rhs } => lhs.expand()?.add(&rhs.expand()?)?,
            RingTerm::Sub { lhs, rhs } => lhs.expand()?.add(&rhs.expand()?.neg())?,
            RingTerm::Mul { lhs, rhs } => lhs.expand()?.mul(&rhs.expand()?)?,
            RingTerm::Pow { base, exp } => {
                let b = base.expand()?;
                let mut acc = Expanded::constant(1);
                for _ in 0..*exp {
                    acc = acc.mul(&b)?;
                }
                acc
            }
        })
    }
}

impl From<u64> for RingTerm {
    fn from(value: u64) -> Self {
        RingTerm::int(value)
    }
}

impl ops::Add for RingTerm {
    type Output = RingTerm;
    fn add(self, rhs: RingTerm) -> RingTerm {
        RingTerm::Add { lhs: Box::new(self), rhs: Box::new(rhs) }
    }
}

impl ops::Sub for RingTerm {
    type Output = RingTerm;
    fn sub(self, rhs: RingTerm) -> RingTerm {
        RingTerm::Sub { lhs: Box::new(self), rhs: Box::new(rhs) }
    }
}

impl ops::Mul for RingTerm {
    type Output = RingTerm;
    fn mul(self, rhs: RingTerm) -> RingTerm {
        RingTerm::Mul { lhs: Box::new(self), rhs: Box::new(rhs) }
    }
}

impl ops::Neg for RingTerm {
    type Output = RingTerm;
    fn neg(self) -> RingTerm {
        RingTerm::Neg { arg: Box::new(self) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("integer coefficient overflow while expanding a term")]
pub struct ExpandError;

/// `t` sorts before every named variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indeterminate {
    T,
    Var(Symbol),
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indeterminate::T => f.write_str("t"),
            Indeterminate::Var(v) => f.write_str(v),
        }
    }
}

/// Exponent vector, sorted by indeterminate, zero exponents omitted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<(Indeterminate, u32)>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Indeterminate, u32> = self.0.iter().cloned().collect();
        for (x, e) in &other.0 {
            *map.entry(x.clone()).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }
}

/// Graded order: higher total degree first, then lexicographic.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.degree().cmp(&self.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `Z[t, vars]` in canonical expanded form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expanded {
    pub terms: BTreeMap<Monomial, i128>,
}

impl Expanded {
    pub fn constant(c: i128) -> Expanded {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(Monomial(Vec::new()), c);
        }
        Expanded { terms }
    }

    pub fn atom(x: Indeterminate) -> Expanded {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial(vec![(x, 1)]), 1);
        Expanded { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Expanded {
        Expanded { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn add(&self, other: &Expanded) -> Result<Expanded, ExpandError> {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert(0);
            *entry = entry.checked_add(*c).ok_or(ExpandError)?;
            if *entry == 0 {
                terms.remove(m);
            }
        }
        Ok(Expanded { terms })
    }

    pub fn mul(&self, other: &Expanded) -> Result<Expanded, ExpandError> {
        let mut out = Expanded::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1.checked_mul(*c2).ok_or(ExpandError)?;
                let entry = out.terms.entry(m.clone()).or_insert(0);
                *entry = entry.checked_add(c).ok_or(ExpandError)?;
                if *entry == 0 {
                    out.terms.remove(&m);
                }
            }
        }
        Ok(out)
    }

    /// Rebuilds a term in canonical shape.
    pub fn to_term(&self) -> RingTerm {
        let mut acc: Option<RingTerm> = None;
        for (m, &c) in &self.terms {
            let mut factors: Vec<RingTerm> = m
                .0
                .iter()
                .map(|(x, e)| {
                    let base = match x {
                        Indeterminate::T => RingTerm::T,
                        Indeterminate::Var(v) => RingTerm::var_sym(v),
                    };
                    if *e == 1 {
                        base
                    } else {
                        base.pow(*e)
                    }
                })
                .collect();
            let magnitude = c.unsigned_abs();
            if magnitude != 1 || factors.is_empty() {
                factors.insert(0, RingTerm::int(magnitude as u64));
            }
            let mono = factors.into_iter().reduce(|a, b| a * b).expect("nonempty");
            acc = Some(match (acc, c < 0) {
                (None, false) => mono,
                (None, true) => -mono,
                (Some(a), false) => a + mono,
                (Some(a), true) => a - mono,
            });
        }
        acc.unwrap_or(RingTerm::int(0))
    }
}

impl fmt::Display for Expanded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_is_canonical() {
        let x = RingTerm::var("x");
        let y = RingTerm::var("y");
        let a = (x.clone() + y.clone()).pow(2);
        let b = x.clone() * x.clone() + RingTerm::int(2) * x.clone() * y.clone() + y.clone() * y.clone();
        assert_eq!(a.expand().unwrap(), b.expand().unwrap());
        let d = (x.clone() - x.clone()).expand().unwrap();
        assert!(d.is_zero());
        assert_eq!((RingTerm::T * x.clone() - RingTerm::int(3)).expand().unwrap().to_string(), "t*x-3");
    }

    #[test]
    fn substitution_and_vars() {
        let x = RingTerm::var("x");
        let mut map = BTreeMap::new();
        map.insert(sym("x"), RingTerm::var("u") * RingTerm::var("x"));
        let s = (x.clone().pow(2) + RingTerm::T).substitute(&map);
        assert_eq!(s.free_vars().into_iter().map(|v| v.to_string()).collect::<Vec<_>>(), ["u", "x"]);
        assert!(s.mentions("u"));
        assert!(!s.mentions("t"));
    }

    #[test]
    fn overflow_is_reported() {
        let big = RingTerm::int(u64::MAX).pow(3);
        assert_eq!(big.expand(), Err(ExpandError));
    }
}
