//! Positive-existential formulas over the ring language with the unary
//! predicate `O`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::term::{sym, RingTerm, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingFormula {
    Eq { lhs: RingTerm, rhs: RingTerm },
    O { term: RingTerm },
    /// The empty conjunction is `true`.
    And { children: Vec<RingFormula> },
    /// The empty disjunction is `false`.
    Or { children: Vec<RingFormula> },
    Exists { var: Symbol, body: Box<RingFormula> },
}

impl RingFormula {
    pub fn eq(lhs: RingTerm, rhs: RingTerm) -> RingFormula {
        RingFormula::Eq { lhs, rhs }
    }

    pub fn o(term: RingTerm) -> RingFormula {
        RingFormula::O { term }
    }

    pub fn truth() -> RingFormula {
        RingFormula::And { children: Vec::new() }
    }

    pub fn falsity() -> RingFormula {
        RingFormula::Or { children: Vec::new() }
    }

    /// Conjunction; a single child is returned unwrapped.
    pub fn and(mut children: Vec<RingFormula>) -> RingFormula {
        if children.len() == 1 {
            return children.pop().unwrap();
        }
        RingFormula::And { children }
    }

    /// Disjunction; a single child is returned unwrapped.
    pub fn or(mut children: Vec<RingFormula>) -> RingFormula {
        if children.len() == 1 {
            return children.pop().unwrap();
        }
        RingFormula::Or { children }
    }

    pub fn exists(var: &str, body: RingFormula) -> RingFormula {
        RingFormula::Exists { var: sym(var), body: Box::new(body) }
    }

    pub fn exists_sym(var: Symbol, body: RingFormula) -> RingFormula {
        RingFormula::Exists { var, body: Box::new(body) }
    }

    /// Wraps `body` in `E v1 . E v2 . ...`.
    pub fn exists_many(vars: &[Symbol], body: RingFormula) -> RingFormula {
        vars.iter().rev().fold(body, |acc, v| RingFormula::exists_sym(v.clone(), acc))
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Symbol>, out: &mut BTreeSet<Symbol>) {
        fn add_term(t: &RingTerm, bound: &[Symbol], out: &mut BTreeSet<Symbol>) {
            let mut vars = BTreeSet::new();
            t.collect_vars(&mut vars);
            out.extend(vars.into_iter().filter(|v| !bound.contains(v)));
        }
        match self {
            RingFormula::Eq { lhs, rhs } => {
                add_term(lhs, bound, out);
                add_term(rhs, bound, out);
            }
            RingFormula::O { term } => add_term(term, bound, out),
            RingFormula::And { children } | RingFormula::Or { children } => {
                for c in children {
                    c.collect_free(bound, out);
                }
            }
            RingFormula::Exists { var, body } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// True if some free variable satisfies `pred`; stops at the first hit.
    pub fn any_free(&self, pred: &mut impl FnMut(&Symbol) -> bool) -> bool {
        fn go(f: &RingFormula, bound: &mut Vec<Symbol>, pred: &mut impl FnMut(&Symbol) -> bool) -> bool {
            match f {
                RingFormula::Eq { lhs, rhs } => {
                    lhs.any_var(&mut |v| !bound.contains(v) && pred(v))
                        || rhs.any_var(&mut |v| !bound.contains(v) && pred(v))
                }
                RingFormula::O { term } => term.any_var(&mut |v| !bound.contains(v) && pred(v)),
                RingFormula::And { children } | RingFormula::Or { children } => {
                    children.iter().any(|c| go(c, bound, pred))
                }
                RingFormula::Exists { var, body } => {
                    bound.push(var.clone());
                    let hit = go(body, bound, pred);
                    bound.pop();
                    hit
                }
            }
        }
        go(self, &mut Vec::new(), pred)
    }

    pub fn is_closed(&self) -> bool {
        !self.any_free(&mut |_| true)
    }

    pub fn mentions_free(&self, v: &str) -> bool {
        self.any_free(&mut |name| &**name == v)
    }

    /// Every bound variable, in pre-order.
    pub fn bound_vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let RingFormula::Exists { var, .. } = f {
                out.push(var.clone());
            }
        });
        out
    }

    /// Every variable occurring free or bound.
    pub fn all_vars(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.bound_vars().into_iter().collect();
        self.visit(&mut |f| match f {
            RingFormula::Eq { lhs, rhs } => {
                lhs.collect_vars(&mut out);
                rhs.collect_vars(&mut out);
            }
            RingFormula::O { term } => term.collect_vars(&mut out),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&RingFormula)) {
        f(self);
        match self {
            RingFormula::And { children } | RingFormula::Or { children } => {
                for c in children {
                    c.visit(f);
                }
            }
            RingFormula::Exists { body, .. } => body.visit(f),
            _ => {}
        }
    }

    pub fn count_exists(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| n += matches!(f, RingFormula::Exists { .. }) as usize);
        n
    }

    pub fn count_atoms(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| n += matches!(f, RingFormula::Eq { .. } | RingFormula::O { .. }) as usize);
        n
    }

    pub fn contains_o(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f, RingFormula::O { .. }));
        found
    }

    /// True if no variable is bound twice or bound while also free.
    pub fn has_unique_binders(&self) -> bool {
        let bound = self.bound_vars();
        let distinct: BTreeSet<&Symbol> = bound.iter().collect();
        distinct.len() == bound.len() && self.free_vars().iter().all(|v| !distinct.contains(v))
    }

    /// Appends `suffix` to every bound variable.
    pub fn rename_bound(&self, suffix: &str) -> RingFormula {
        fn go(f: &RingFormula, suffix: &str, map: &mut BTreeMap<Symbol, RingTerm>) -> RingFormula {
            match f {
                RingFormula::Eq { lhs, rhs } => RingFormula::eq(lhs.substitute(map), rhs.substitute(map)),
                RingFormula::O { term } => RingFormula::o(term.substitute(map)),
                RingFormula::And { children } => {
                    RingFormula::And { children: children.iter().map(|c| go(c, suffix, map)).collect() }
                }
                RingFormula::Or { children } => {
                    RingFormula::Or { children: children.iter().map(|c| go(c, suffix, map)).collect() }
                }
                RingFormula::Exists { var, body } => {
                    let renamed = sym(&format!("{var}{suffix}"));
                    let previous = map.insert(var.clone(), RingTerm::var_sym(&renamed));
                    let body = go(body, suffix, map);
                    match previous {
                        Some(p) => map.insert(var.clone(), p),
                        None => map.remove(var),
                    };
                    RingFormula::exists_sym(renamed, body)
                }
            }
        }
        go(self, suffix, &mut BTreeMap::new())
    }

    /// Capture-avoiding simultaneous substitution for free variables.
    pub fn substitute(&self, map: &BTreeMap<Symbol, RingTerm>) -> RingFormula {
        let mut avoid: BTreeSet<Symbol> = BTreeSet::new();
        for t in map.values() {
            t.collect_vars(&mut avoid);
        }
        let mut taken = self.all_vars();
        taken.extend(avoid.iter().cloned());
        taken.extend(map.keys().cloned());
        self.subst_inner(&mut map.clone(), &avoid, &mut taken)
    }

    fn subst_inner(
        &self,
        map: &mut BTreeMap<Symbol, RingTerm>,
        avoid: &BTreeSet<Symbol>,
        taken: &mut BTreeSet<Symbol>,
    ) -> RingFormula {
        match self {
            RingFormula::Eq { lhs, rhs } => RingFormula::eq(lhs.substitute(map), rhs.substitute(map)),
            RingFormula::O { term } => RingFormula::o(term.substitute(map)),
            RingFormula::And { children } => {
                RingFormula::And { children: children.iter().map(|c| c.subst_inner(map, avoid, taken)).collect() }
            }
            RingFormula::Or { children } => {
                RingFormula::Or { children: children.iter().map(|c| c.subst_inner(map, avoid, taken)).collect() }
            }
            RingFormula::Exists { var, body } => {
                let shadowed = map.remove(var);
                let result = if avoid.contains(var) && !map.is_empty() {
                    let fresh = fresh_name(var, taken);
                    let before = map.insert(var.clone(), RingTerm::var_sym(&fresh));
                    let body = body.subst_inner(map, avoid, taken);
                    match before {
                        Some(b) => map.insert(var.clone(), b),
                        None => map.remove(var),
                    };
                    RingFormula::exists_sym(fresh, body)
                } else {
                    RingFormula::exists_sym(var.clone(), body.subst_inner(map, avoid, taken))
                };
                if let Some(s) = shadowed {
                    map.insert(var.clone(), s);
                }
                result
            }
        }
    }

    /// Renames bound variables so that all binders are distinct and disjoint
    /// from the free variables.
    pub fn freshen(&self) -> RingFormula {
        let mut taken = self.free_vars();
        self.freshen_inner(&mut BTreeMap::new(), &mut taken, &mut BTreeSet::new())
    }

    fn freshen_inner(
        &self,
        map: &mut BTreeMap<Symbol, RingTerm>,
        taken: &mut BTreeSet<Symbol>,
        used: &mut BTreeSet<Symbol>,
    ) -> RingFormula {
        match self {
            RingFormula::Eq { lhs, rhs } => RingFormula::eq(lhs.substitute(map), rhs.substitute(map)),
            RingFormula::O { term } => RingFormula::o(term.substitute(map)),
            RingFormula::And { children } => {
                RingFormula::And { children: children.iter().map(|c| c.freshen_inner(map, taken, used)).collect() }
            }
            RingFormula::Or { children } => {
                RingFormula::Or { children: children.iter().map(|c| c.freshen_inner(map, taken, used)).collect() }
            }
            RingFormula::Exists { var, body } => {
                let name = if taken.contains(var) || used.contains(var) { fresh_name(var, taken) } else { var.clone() };
                taken.insert(name.clone());
                used.insert(name.clone());
                let before = map.insert(var.clone(), RingTerm::var_sym(&name));
                let body = body.freshen_inner(map, taken, used);
                match before {
                    Some(b) => map.insert(var.clone(), b),
                    None => map.remove(var),
                };
                RingFormula::exists_sym(name, body)
            }
        }
    }
}

/// `base_1`, `base_2`, ... ; the first one not in `taken` (which is updated).
pub fn fresh_name(base: &str, taken: &mut BTreeSet<Symbol>) -> Symbol {
    let mut i = 1usize;
    loop {
        let candidate = sym(&format!("{base}_{i}"));
        if !taken.contains(&candidate) {
            taken.insert(candidate.clone());
            return candidate;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RingTerm {
        RingTerm::var("x")
    }

    fn h() -> RingTerm {
        RingTerm::var("h")
    }

    #[test]
    fn free_and_bound() {
        let f = RingFormula::exists("h", RingFormula::eq(x(), h().pow(2)));
        assert_eq!(f.free_vars().len(), 1);
        assert_eq!(f.bound_vars(), vec![sym("h")]);
        assert!(!f.is_closed());
        assert!(f.mentions_free("x"));
        assert!(!f.mentions_free("h"));
        assert!(RingFormula::eq(RingTerm::int(2), RingTerm::int(0)).is_closed());
    }

    #[test]
    fn substitution_avoids_capture() {
        // E h . x = h^2 with x := h + 1 must not capture.
        let f = RingFormula::exists("h", RingFormula::eq(x(), h().pow(2)));
        let mut map = BTreeMap::new();
        map.insert(sym("x"), h() + RingTerm::int(1));
        let g = f.substitute(&map);
        assert_eq!(g.free_vars(), [sym("h")].into_iter().collect());
        let RingFormula::Exists { var, .. } = &g else { panic!() };
        assert_ne!(&**var, "h");
    }

    #[test]
    fn substitution_respects_shadowing() {
        let f = RingFormula::and(vec![
            RingFormula::eq(x(), RingTerm::int(0)),
            RingFormula::exists("x", RingFormula::eq(x(), RingTerm::T)),
        ]);
        let mut map = BTreeMap::new();
        map.insert(sym("x"), RingTerm::int(1));
        let g = f.substitute(&map);
        let RingFormula::And { children } = &g else { panic!() };
        assert_eq!(children[0], RingFormula::eq(RingTerm::int(1), RingTerm::int(0)));
        assert_eq!(children[1], f_child(&f));
        fn f_child(f: &RingFormula) -> RingFormula {
            let RingFormula::And { children } = f else { panic!() };
            children[1].clone()
        }
    }

    #[test]
    fn freshen_makes_binders_unique() {
        let inner = RingFormula::exists("h", RingFormula::eq(x(), h()));
        let f = RingFormula::and(vec![inner.clone(), inner, RingFormula::eq(h(), RingTerm::T)]);
        assert!(!f.has_unique_binders());
        let g = f.freshen();
        assert!(g.has_unique_binders());
        assert_eq!(g.free_vars(), f.free_vars());
    }

    #[test]
    fn rename_bound_appends_suffix() {
        let f = RingFormula::exists("h", RingFormula::eq(x(), h()));
        let g = f.rename_bound("_i1");
        assert_eq!(g, RingFormula::exists("h_i1", RingFormula::eq(x(), RingTerm::var("h_i1"))));
    }
}
