//! Text syntax for ring terms and formulas.
//!
//! ```text
//! formula := conj ('|' conj)*
//! conj    := unit ('&' unit)*
//! unit    := 'E' ident '.' formula | 'O' '(' term ')' | '(' formula ')'
//!          | 'true' | 'false' | term '=' term
//! term    := prod (('+' | '-') prod)*
//! prod    := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' int)?
//! atom    := int | 't' | ident | '(' term ')'
//! ```
//!
//! The body of `E x .` extends as far to the right as possible.

use std::fmt;

use crate::formula::RingFormula;
use crate::term::{sym, RingTerm};

const RESERVED: [&str; 5] = ["t", "E", "O", "true", "false"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {position}: expected {expected}")]
pub struct SyntaxError {
    pub position: usize,
    pub expected: String,
}

// Precedence levels: sum 1, product 2, unary 3, power 4, atom 5.
fn write_term(t: &RingTerm, ctx: u8, out: &mut String) {
    let level = match t {
        RingTerm::Add { .. } | RingTerm::Sub { .. } => 1,
        RingTerm::Mul { .. } => 2,
        RingTerm::Neg { .. } => 3,
        RingTerm::Pow { .. } => 4,
        _ => 5,
    };
    if level < ctx {
        out.push('(');
    }
    match t {
        RingTerm::Int { value } => out.push_str(&value.to_string()),
        RingTerm::T => out.push('t'),
        RingTerm::Var { name } => out.push_str(name),
        RingTerm::Neg { arg } => {
            out.push('-');
            write_term(arg, 3, out);
        }
        RingTerm::Add { lhs, rhs } | RingTerm::Sub { lhs, rhs } => {
            write_term(lhs, 1, out);
            out.push(if matches!(t, RingTerm::Add { .. }) { '+' } else { '-' });
            write_term(rhs, 2, out);
        }
        RingTerm::Mul { lhs, rhs } => {
            write_term(lhs, 2, out);
            out.push('*');
            write_term(rhs, 3, out);
        }
        RingTerm::Pow { base, exp } => {
            write_term(base, 5, out);
            out.push('^');
            out.push_str(&exp.to_string());
        }
    }
    if level < ctx {
        out.push(')');
    }
}

impl fmt::Display for RingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(self, 0, &mut s);
        f.write_str(&s)
    }
}

// Levels: disjunction 1, conjunction 2, unit 3.
fn write_formula(phi: &RingFormula, ctx: u8, out: &mut String) {
    match phi {
        RingFormula::Eq { lhs, rhs } => {
            write_term(lhs, 0, out);
            out.push_str(" = ");
            write_term(rhs, 0, out);
        }
        RingFormula::O { term } => {
            out.push_str("O(");
            write_term(term, 0, out);
            out.push(')');
        }
        RingFormula::And { children } if children.is_empty() => out.push_str("true"),
        RingFormula::Or { children } if children.is_empty() => out.push_str("false"),
        RingFormula::And { children } | RingFormula::Or { children } => {
            let (level, sep) = if matches!(phi, RingFormula::And { .. }) { (2, " & ") } else { (1, " | ") };
            let wrap = level < ctx;
            if wrap {
                out.push('(');
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                // Nested connectives of the same kind keep their grouping.
                let child_ctx = match c {
                    RingFormula::And { children } if !children.is_empty() && level == 1 => 2,
                    RingFormula::And { children } | RingFormula::Or { children } if !children.is_empty() => 3,
                    RingFormula::Exists { .. } => 4,
                    _ => 0,
                };
                write_formula(c, child_ctx, out);
            }
            if wrap {
                out.push(')');
            }
        }
        RingFormula::Exists { var, body } => {
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

impl fmt::Display for RingFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(self, 0, &mut s);
        f.write_str(&s)
    }
}

pub fn parse_term(text: &str) -> Result<RingTerm, SyntaxError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_formula(text: &str) -> Result<RingFormula, SyntaxError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError { position: self.pos, expected: expected.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("'{}'", c as char))
        }
    }

    fn finish(&mut self) -> Result<(), SyntaxError> {
        if self.peek().is_some() {
            return self.err("end of input");
        }
        Ok(())
    }

    fn peek_ident(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src;
        if start >= bytes.len() || !(bytes[start].is_ascii_alphabetic() || bytes[start] == b'_') {
            return None;
        }
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        std::str::from_utf8(&bytes[start..end]).ok()
    }

    fn ident(&mut self) -> Option<String> {
        let s = self.peek_ident()?.to_string();
        self.pos += s.len();
        Some(s)
    }

    fn variable(&mut self) -> Result<String, SyntaxError> {
        match self.peek_ident() {
            Some(name) if !RESERVED.contains(&name) => Ok(self.ident().unwrap()),
            _ => self.err("variable name"),
        }
    }

    fn formula(&mut self) -> Result<RingFormula, SyntaxError> {
        let mut items = vec![self.conj()?];
        while self.eat(b'|') {
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { RingFormula::Or { children: items } })
    }

    fn conj(&mut self) -> Result<RingFormula, SyntaxError> {
        let mut items = vec![self.unit()?];
        while self.eat(b'&') {
            items.push(self.unit()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { RingFormula::And { children: items } })
    }

    fn unit(&mut self) -> Result<RingFormula, SyntaxError> {
        match self.peek_ident() {
            Some("E") => {
                self.pos += 1;
                let var = self.variable()?;
                self.expect(b'.')?;
                let body = self.formula()?;
                return Ok(RingFormula::exists_sym(sym(&var), body));
            }
            Some("O") => {
                self.pos += 1;
                self.expect(b'(')?;
                let term = self.term()?;
                self.expect(b')')?;
                return Ok(RingFormula::o(term));
            }
            Some("true") => {
                self.pos += 4;
                return Ok(RingFormula::truth());
            }
            Some("false") => {
                self.pos += 5;
                return Ok(RingFormula::falsity());
            }
            _ => {}
        }
        if self.peek() == Some(b'(') {
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.formula() {
                if self.eat(b')') && !matches!(self.peek(), Some(b'=' | b'+' | b'-' | b'*' | b'^')) {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        let lhs = self.term().or_else(|e| if e.position == self.pos { self.err("formula") } else { Err(e) })?;
        self.expect(b'=')?;
        let rhs = self.term()?;
        Ok(RingFormula::eq(lhs, rhs))
    }

    fn term(&mut self) -> Result<RingTerm, SyntaxError> {
        let mut acc = self.product()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.product()?;
            } else if self.eat(b'-') {
                acc = acc - self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<RingTerm, SyntaxError> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = acc * self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RingTerm, SyntaxError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.integer()?;
            let exp = u32::try_from(exp).or_else(|_| self.err("exponent below 2^32"))?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        digits.parse().or_else(|_| {
            self.pos = start;
            self.err("integer below 2^64")
        })
    }

    fn atom(&mut self) -> Result<RingTerm, SyntaxError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => Ok(RingTerm::int(self.integer()?)),
            _ => match self.peek_ident() {
                Some("t") => {
                    self.pos += 1;
                    Ok(RingTerm::T)
                }
                Some(name) if !RESERVED.contains(&name) => {
                    let name = self.ident().unwrap();
                    Ok(RingTerm::var(&name))
                }
                _ => self.err("term"),
            },
        }
    }
}
