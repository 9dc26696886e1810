//! Lowering of positive-existential formulas to prenex polynomial systems
//! and to a single polynomial.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eval::{eval_term, EvalError, Interpretation, Witness};
use crate::formula::RingFormula;
use crate::ratfunc::RatFunc;
use crate::term::{RingTerm, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LowerError {
    #[error("the formula contains an O atom, which is not a ring equation")]
    ContainsOPredicate,
}

/// A tree of equations `poly = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    Eq { poly: RingTerm },
    And { children: Vec<Constraint> },
    Or { children: Vec<Constraint> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrenexSystem {
    /// Existential variables in binding order.
    pub vars: Vec<Symbol>,
    pub body: Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinglePolynomial {
    pub vars: Vec<Symbol>,
    pub p: u64,
    pub poly: RingTerm,
}

fn equation(lhs: &RingTerm, rhs: &RingTerm) -> RingTerm {
    if rhs.is_zero_literal() {
        lhs.clone()
    } else if lhs.is_zero_literal() {
        rhs.clone()
    } else {
        lhs.clone() - rhs.clone()
    }
}

fn strip(f: &RingFormula, vars: &mut Vec<Symbol>) -> Constraint {
    match f {
        RingFormula::Eq { lhs, rhs } => Constraint::Eq { poly: equation(lhs, rhs) },
        RingFormula::O { .. } => unreachable!("rejected before stripping"),
        RingFormula::And { children } => Constraint::And { children: children.iter().map(|c| strip(c, vars)).collect() },
        RingFormula::Or { children } => Constraint::Or { children: children.iter().map(|c| strip(c, vars)).collect() },
        RingFormula::Exists { var, body } => {
            vars.push(var.clone());
            strip(body, vars)
        }
    }
}

/// Hoists every quantifier after renaming binders apart.
pub fn to_system(f: &RingFormula) -> Result<PrenexSystem, LowerError> {
    if f.contains_o() {
        return Err(LowerError::ContainsOPredicate);
    }
    let fresh = f.freshen();
    let mut vars = Vec::new();
    let body = strip(&fresh, &mut vars);
    Ok(PrenexSystem { vars, body })
}

fn balanced(mut items: Vec<RingTerm>, empty: RingTerm, join: &impl Fn(RingTerm, RingTerm) -> RingTerm) -> RingTerm {
    if items.is_empty() {
        return empty;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => join(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop().expect("nonempty")
}

impl Constraint {
    /// One polynomial vanishing exactly where the constraint holds over
    /// `F_q(t)`: `A B` for a disjunction, `A^2 - t B^2` for a conjunction.
    pub fn combine(&self, p: u64) -> RingTerm {
        match self {
            Constraint::Eq { poly } => poly.clone(),
            Constraint::Or { children } => {
                balanced(children.iter().map(|c| c.combine(p)).collect(), RingTerm::int(1), &|a, b| a * b)
            }
            Constraint::And { children } => {
                let join = |a: RingTerm, b: RingTerm| {
                    if p == 2 {
                        a.pow(2) + RingTerm::T * b.pow(2)
                    } else {
                        a.pow(2) - RingTerm::T * b.pow(2)
                    }
                };
                balanced(children.iter().map(|c| c.combine(p)).collect(), RingTerm::int(0), &join)
            }
        }
    }

    pub fn holds(&self, interp: &Interpretation) -> Result<bool, EvalError> {
        Ok(match self {
            Constraint::Eq { poly } => eval_term(poly, interp)?.is_zero(),
            Constraint::And { children } => {
                for c in children {
                    if !c.holds(interp)? {
                        return Ok(false);
                    }
                }
                true
            }
            Constraint::Or { children } => {
                for c in children {
                    if c.holds(interp)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn count_equations(&self) -> usize {
        match self {
            Constraint::Eq { .. } => 1,
            Constraint::And { children } | Constraint::Or { children } => {
                children.iter().map(Constraint::count_equations).sum()
            }
        }
    }
}

pub fn single_polynomial(f: &RingFormula, p: u64) -> Result<SinglePolynomial, LowerError> {
    let system = to_system(f)?;
    let poly = system.body.combine(p);
    Ok(SinglePolynomial { vars: system.vars, p, poly })
}

/// First assignment of `vars` from `domain` satisfying `check`.
pub fn search_assignments(
    vars: &[Symbol],
    domain: &[RatFunc],
    interp: &Interpretation,
    check: &impl Fn(&Interpretation) -> Result<bool, EvalError>,
) -> Result<Option<Witness>, EvalError> {
    fn go(
        vars: &[Symbol],
        domain: &[RatFunc],
        interp: &mut Interpretation,
        check: &impl Fn(&Interpretation) -> Result<bool, EvalError>,
    ) -> Result<bool, EvalError> {
        let Some((v, rest)) = vars.split_first() else { return check(interp) };
        for value in domain {
            interp.assignment.insert(v.clone(), value.clone());
            if go(rest, domain, interp, check)? {
                return Ok(true);
            }
        }
        interp.assignment.remove(v);
        Ok(false)
    }
    let mut work = interp.clone();
    if go(vars, domain, &mut work, check)? {
        Ok(Some(vars.iter().map(|v| (v.clone(), work.assignment[v].clone())).collect()))
    } else {
        Ok(None)
    }
}

impl PrenexSystem {
    pub fn satisfiable_in(&self, interp: &Interpretation, domain: &[RatFunc]) -> Result<Option<Witness>, EvalError> {
        search_assignments(&self.vars, domain, interp, &|i| self.body.holds(i))
    }
}

impl SinglePolynomial {
    pub fn satisfiable_in(&self, interp: &Interpretation, domain: &[RatFunc]) -> Result<Option<Witness>, EvalError> {
        search_assignments(&self.vars, domain, interp, &|i| Ok(eval_term(&self.poly, i)?.is_zero()))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let group = |f: &mut fmt::Formatter<'_>, children: &[Constraint], sep: &str, empty: &str| {
            if children.is_empty() {
                return f.write_str(empty);
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                match c {
                    Constraint::Eq { .. } => write!(f, "{c}")?,
                    _ => write!(f, "({c})")?,
                }
            }
            Ok(())
        };
        match self {
            Constraint::Eq { poly } => write!(f, "{poly} = 0"),
            Constraint::And { children } => group(f, children, " & ", "true"),
            Constraint::Or { children } => group(f, children, " | ", "false"),
        }
    }
}

impl fmt::Display for PrenexSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vars {
            write!(f, "E {v} . ")?;
        }
        write!(f, "{}", self.body)
    }
}
