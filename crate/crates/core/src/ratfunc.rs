//! Reduced rational functions in `F_q(t)`, places and valuations.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::factor::{factorize, squarefree_decomposition};
use crate::field::Field;
use crate::poly::{CoeffJson, Poly, PolyError};

/// A fraction `num/den` with `gcd(num, den) = 1` and `den` monic; zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

/// A place of `F_q(t)/F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    /// The zero of a monic irreducible polynomial.
    Finite(Poly),
    /// The pole of `t`.
    Infinity,
}

impl Place {
    /// The `t`-adic place.
    pub fn t_adic(field: &Field) -> Place {
        Place::Finite(Poly::x(field))
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(pi) => pi.deg0(),
            Place::Infinity => 1,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(pi) => write!(f, "{pi}"),
            Place::Infinity => f.write_str("inf"),
        }
    }
}

/// A valuation value; `Infinite` is reserved for the zero function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_nonnegative(self) -> bool {
        self >= Valuation::Finite(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFractionTerm {
    /// Monic irreducible denominator base.
    pub place: Poly,
    pub exponent: u32,
    /// Numerator of degree below `deg(place)`.
    pub numerator: Poly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFractions {
    pub poly_part: Poly,
    pub terms: Vec<PartialFractionTerm>,
}

impl PartialFractions {
    pub fn recombine(&self) -> RatFunc {
        self.terms.iter().fold(RatFunc::from_poly(self.poly_part.clone()), |acc, term| {
            let den = term.place.pow(term.exponent as u64);
            acc.add(&RatFunc::new(term.numerator.clone(), den).expect("nonzero denominator"))
        })
    }
}

/// Multiplicity of the irreducible `pi` in the nonzero polynomial `f`.
pub fn poly_multiplicity(f: &Poly, pi: &Poly) -> u32 {
    let mut count = 0;
    let mut cur = f.clone();
    loop {
        let (q, r) = cur.div_rem(pi).expect("nonzero place polynomial");
        if !r.is_zero() {
            return count;
        }
        cur = q;
        count += 1;
    }
}

/// Square root of a polynomial, if it is a square in `F_q[X]`.
pub fn poly_sqrt(f: &Poly) -> Option<Poly> {
    let field = f.field();
    if f.is_zero() {
        return Some(f.clone());
    }
    let lead_root = field.sqrt(f.lead())?;
    let mut root = Poly::constant(field, lead_root);
    for (g, m) in squarefree_decomposition(f) {
        if m % 2 != 0 {
            return None;
        }
        root = root.mul(&g.pow(m as u64 / 2));
    }
    Some(root)
}

impl RatFunc {
    /// Reduces `num/den` to canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        num.field().check_same(den.field())?;
        if num.is_zero() {
            return Ok(RatFunc::zero(num.field()));
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_one() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        if !den.is_monic() {
            let inv = den.field().inv(den.lead()).expect("nonzero");
            num = num.scale(inv);
            den = den.scale(inv);
        }
        Ok(RatFunc { num, den })
    }

    /// Builds from parts already known to be coprime with monic denominator.
    fn from_reduced(num: Poly, den: Poly) -> RatFunc {
        debug_assert!(den.is_monic());
        debug_assert!(num.gcd(&den).is_one() || num.is_zero() && den.is_one());
        RatFunc { num, den }
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        let den = Poly::one(p.field());
        RatFunc { num: p, den }
    }

    pub fn zero(field: &Field) -> RatFunc {
        RatFunc::from_poly(Poly::zero(field))
    }

    pub fn one(field: &Field) -> RatFunc {
        RatFunc::from_poly(Poly::one(field))
    }

    pub fn constant(field: &Field, code: u32) -> RatFunc {
        RatFunc::from_poly(Poly::constant(field, code))
    }

    pub fn from_int(field: &Field, n: i128) -> RatFunc {
        RatFunc::constant(field, field.from_int(n))
    }

    /// The transcendental `t = X/1`.
    pub fn t(field: &Field) -> RatFunc {
        RatFunc::from_poly(Poly::x(field))
    }

    pub fn field(&self) -> &Field {
        self.num.field()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True for elements of `F_q`.
    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_one()
    }

    /// `max(deg num, deg den)`, the degree of the map `P^1 -> P^1`.
    pub fn max_degree(&self) -> usize {
        self.num.deg0().max(self.den.deg0())
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.den == other.den {
            return RatFunc::new(self.num.add(&other.num), self.den.clone()).expect("nonzero");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        RatFunc::new(num, self.den.mul(&other.den)).expect("nonzero")
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero(self.field());
        }
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let num = self.num.exact_div(&g1).mul(&other.num.exact_div(&g2));
        let den = self.den.exact_div(&g2).mul(&other.den.exact_div(&g1));
        RatFunc::new(num, den).expect("nonzero")
    }

    pub fn inv(&self) -> Result<RatFunc, PolyError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, PolyError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn scale(&self, code: u32) -> RatFunc {
        if code == 0 {
            return RatFunc::zero(self.field());
        }
        RatFunc { num: self.num.scale(code), den: self.den.clone() }
    }

    pub fn square(&self) -> RatFunc {
        RatFunc::from_reduced(self.num.mul(&self.num), self.den.mul(&self.den))
    }

    /// Integer power; negative exponents fail on zero.
    pub fn pow(&self, e: i64) -> Result<RatFunc, PolyError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs();
        Ok(RatFunc::from_reduced(base.num.pow(e), base.den.pow(e)))
    }

    /// `self^p`.
    pub fn frobenius(&self) -> RatFunc {
        RatFunc::from_reduced(self.num.frobenius(), self.den.frobenius())
    }

    /// `self^{p^s}`.
    pub fn frobenius_iter(&self, s: u32) -> RatFunc {
        (0..s).fold(self.clone(), |acc, _| acc.frobenius())
    }

    /// Evaluates a polynomial (with coefficients in this field or in its
    /// prime subfield) at `self`.
    pub fn eval_poly(&self, poly: &Poly) -> RatFunc {
        let field = self.field();
        assert_eq!(poly.field().p(), field.p(), "characteristic mismatch");
        let coeffs: Vec<u32> = poly.coeffs().to_vec();
        let Some(d) = poly.degree() else {
            return RatFunc::zero(field);
        };
        if self.is_zero() || self.den.is_one() {
            // Horner over F_q[X].
            let num = coeffs
                .iter()
                .rev()
                .fold(Poly::zero(field), |acc, &c| acc.mul(&self.num).add(&Poly::constant(field, c)));
            return RatFunc::from_poly(num);
        }
        // Homogenize: F(N/D) = sum c_i N^i D^{d-i} / D^d, already coprime.
        let mut num_pows = vec![Poly::one(field)];
        let mut den_pows = vec![Poly::one(field)];
        for _ in 0..d {
            num_pows.push(num_pows.last().unwrap().mul(&self.num));
            den_pows.push(den_pows.last().unwrap().mul(&self.den));
        }
        let mut acc = Poly::zero(field);
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                acc = acc.add(&num_pows[i].mul(&den_pows[d - i]).scale(c));
            }
        }
        RatFunc::from_reduced(acc, den_pows[d].clone())
    }

    pub fn valuation(&self, place: &Place) -> Valuation {
        if self.is_zero() {
            return Valuation::Infinite;
        }
        match place {
            Place::Infinity => Valuation::Finite(self.den.deg0() as i64 - self.num.deg0() as i64),
            Place::Finite(pi) => Valuation::Finite(
                poly_multiplicity(&self.num, pi) as i64 - poly_multiplicity(&self.den, pi) as i64,
            ),
        }
    }

    /// Every place where the valuation is nonzero, with its value.
    pub fn divisor(&self) -> Vec<(Place, i64)> {
        let mut out = Vec::new();
        if self.is_zero() {
            return out;
        }
        if !self.num.is_constant() {
            for (g, m) in factorize(&self.num).expect("nonzero").factors {
                out.push((Place::Finite(g), m as i64));
            }
        }
        if !self.den.is_constant() {
            for (g, m) in factorize(&self.den).expect("nonzero").factors {
                out.push((Place::Finite(g), -(m as i64)));
            }
        }
        let at_inf = self.den.deg0() as i64 - self.num.deg0() as i64;
        if at_inf != 0 {
            out.push((Place::Infinity, at_inf));
        }
        out.sort();
        out
    }

    pub fn partial_fractions(&self) -> PartialFractions {
        let field = self.field();
        let (poly_part, rem) = self.num.div_rem(&self.den).expect("nonzero");
        let mut terms = Vec::new();
        if !self.den.is_constant() && !rem.is_zero() {
            for (pi, e) in factorize(&self.den).expect("nonzero").factors {
                let pe = pi.pow(e as u64);
                let cof = self.den.exact_div(&pe);
                let cof_inv = cof.inv_mod(&pe).expect("coprime cofactor");
                let mut local = rem.mul_mod(&cof_inv, &pe);
                // pi-adic digits: local = sum a_j pi^j, contributes a_j / pi^{e-j}.
                for j in 0..e {
                    let (q, digit) = local.div_rem(&pi).expect("nonzero");
                    if !digit.is_zero() {
                        terms.push(PartialFractionTerm {
                            place: pi.clone(),
                            exponent: e - j,
                            numerator: digit,
                        });
                    }
                    local = q;
                }
            }
        }
        terms.sort_by(|a, b| a.place.cmp(&b.place).then(a.exponent.cmp(&b.exponent)));
        let _ = field;
        PartialFractions { poly_part, terms }
    }

    /// A witness `h` with `h^2 = self`, if one exists in `F_q(t)`.
    pub fn sqrt(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let num_root = poly_sqrt(&self.num)?;
        let den_root = poly_sqrt(&self.den)?;
        let den_root = den_root.monic();
        Some(RatFunc::from_reduced(num_root, den_root))
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }

    /// Renders with the given indeterminate name.
    pub fn format_with(&self, var: &str) -> String {
        let num = self.num.format_with(var);
        if self.den.is_one() {
            return num;
        }
        let wrap = |s: String| if s.contains('+') || s.contains('*') { format!("({s})") } else { s };
        format!("{}/{}", wrap(num), wrap(self.den.format_with(var)))
    }

    /// Parses the rational-expression syntax: integers, `t`, the extension
    /// generator `a` (for `k > 1`), `+ - * /`, `^` with an integer exponent,
    /// and parentheses.
    pub fn parse(field: &Field, text: &str) -> Result<RatFunc, ParseError> {
        let mut parser = ExprParser { field, src: text.as_bytes(), pos: 0 };
        let value = parser.sum()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("end of input"));
        }
        Ok(value)
    }

    pub fn to_json(&self) -> RatFuncJson {
        RatFuncJson { num: self.num.to_json_coeffs(), den: self.den.to_json_coeffs() }
    }

    pub fn from_json(field: &Field, json: &RatFuncJson) -> Result<RatFunc, PolyError> {
        RatFunc::new(Poly::from_json_coeffs(field, &json.num), Poly::from_json_coeffs(field, &json.den))
    }
}

/// Orders by total degree, then numerator and denominator in canonical order.
impl Ord for RatFunc {
    fn cmp(&self, other: &Self) -> Ordering {
        let total = |r: &RatFunc| r.num.deg0() + r.den.deg0();
        total(self)
            .cmp(&total(other))
            .then_with(|| self.num.cmp(&other.num))
            .then_with(|| self.den.cmp(&other.den))
    }
}

impl PartialOrd for RatFunc {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with("t"))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatFuncJson {
    pub num: Vec<CoeffJson>,
    pub den: Vec<CoeffJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("division by zero in expression")]
    DivisionByZero,
}

struct ExprParser<'a> {
    field: &'a Field,
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax { position: self.pos, expected: expected.to_string() }
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

    fn integer(&mut self) -> Option<i128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn sum(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.product()?.neg()
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<RatFunc, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    acc = acc.div(&d).map_err(|_| ParseError::DivisionByZero)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<RatFunc, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let negative = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let e = self.integer().ok_or_else(|| self.error("integer exponent"))?;
            let e = if negative { -e } else { e };
            return base.pow(e as i64).map_err(|_| ParseError::DivisionByZero);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(RatFunc::t(self.field))
            }
            Some(b'a') if self.field.k() > 1 => {
                self.pos += 1;
                Ok(RatFunc::constant(self.field, self.field.p()))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer().ok_or_else(|| self.error("integer"))?;
                Ok(RatFunc::from_int(self.field, n))
            }
            _ => Err(self.error("integer, 't', or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::new(2, 1).unwrap()
    }

    fn f3() -> Field {
        Field::new(3, 1).unwrap()
    }

    fn r(field: &Field, s: &str) -> RatFunc {
        RatFunc::parse(field, s).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let f = f2();
        let got = RatFunc::new(Poly::from_ints(&f, &[0, 1, 1]), Poly::x(&f)).unwrap();
        assert_eq!(got, r(&f, "t+1"));
        assert!(got.den().is_one());
        let f = f3();
        let got = RatFunc::new(Poly::from_ints(&f, &[0, 2]), Poly::from_ints(&f, &[2])).unwrap();
        assert_eq!(got.num(), &Poly::x(&f));
        assert!(got.den().is_one());
        let got = RatFunc::new(Poly::x(&f).pow(2), Poly::x(&f).pow(3)).unwrap();
        assert_eq!(got.to_string(), "1/t");
        assert_eq!(RatFunc::new(Poly::one(&f), Poly::zero(&f)), Err(PolyError::DivisionByZero));
    }

    #[test]
    fn valuation_examples() {
        let f = f2();
        let t = RatFunc::t(&f);
        assert_eq!(t.valuation(&Place::t_adic(&f)), Valuation::Finite(1));
        assert_eq!(t.valuation(&Place::Infinity), Valuation::Finite(-1));
        let g = r(&f, "(t+1)^2/t");
        assert_eq!(g.valuation(&Place::Finite(Poly::from_ints(&f, &[1, 1]))), Valuation::Finite(2));
        assert_eq!(RatFunc::zero(&f).valuation(&Place::Infinity), Valuation::Infinite);
    }

    #[test]
    fn partial_fraction_examples() {
        let f = f2();
        let pf = r(&f, "(t+1)/t").partial_fractions();
        assert_eq!(pf.poly_part, Poly::one(&f));
        assert_eq!(pf.terms.len(), 1);
        assert_eq!((pf.terms[0].exponent, pf.terms[0].numerator.clone()), (1, Poly::one(&f)));

        // 1/(X(X+1)) = A/X + B/(X+1) with A(X+1) + BX = 1: X=0 gives A=1, X=1 gives B=1.
        let c = r(&f, "1/(t*(t+1))");
        let pf = c.partial_fractions();
        assert!(pf.poly_part.is_zero());
        let parts: Vec<(String, u32, String)> =
            pf.terms.iter().map(|t| (t.place.to_string(), t.exponent, t.numerator.to_string())).collect();
        assert_eq!(parts, [("t".into(), 1, "1".into()), ("t+1".into(), 1, "1".into())]);
        assert_eq!(pf.recombine(), c);

        let pf = r(&f, "t^3/t").partial_fractions();
        assert_eq!(pf.poly_part, Poly::x(&f).pow(2));
        assert!(pf.terms.is_empty());
    }

    #[test]
    fn square_examples() {
        let f = f2();
        let t = RatFunc::t(&f);
        assert_eq!(t.square().sqrt(), Some(t.clone()));
        assert!(!t.is_square());
        let f = f3();
        assert!(!r(&f, "2*t^2").is_square());
        assert!(r(&f, "t^2").is_square());
        assert_eq!(RatFunc::zero(&f).sqrt(), Some(RatFunc::zero(&f)));
    }

    #[test]
    fn parse_and_display() {
        let f = f3();
        let g = r(&f, "(t^2+t+1)/(t+1)");
        assert_eq!(g.to_string(), "(t^2+t+1)/(t+1)");
        assert_eq!(r(&f, "t^-2"), r(&f, "1/t^2"));
        assert_eq!(r(&f, "-t"), r(&f, "2*t"));
        assert!(RatFunc::parse(&f, "t +").is_err());
        assert_eq!(RatFunc::parse(&f, "1/0"), Err(ParseError::DivisionByZero));
        let f4 = Field::new(2, 2).unwrap();
        let w = r(&f4, "a");
        assert_eq!(w.mul(&w), r(&f4, "a+1"));
        assert!(RatFunc::parse(&f, "a").is_err());
    }

    #[test]
    fn eval_poly_matches_horner() {
        let f = f3();
        let poly = Poly::from_ints(&f, &[2, 1, 0, 1]);
        let x = r(&f, "(t+2)/(t^2+1)");
        let horner = poly
            .coeffs()
            .iter()
            .rev()
            .fold(RatFunc::zero(&f), |acc, &c| acc.mul(&x).add(&RatFunc::constant(&f, c)));
        assert_eq!(x.eval_poly(&poly), horner);
    }

    #[test]
    fn json_round_trip() {
        let f4 = Field::new(2, 2).unwrap();
        let g = r(&f4, "(a*t+1)/(t^2+a)");
        let json = serde_json::to_string(&g.to_json()).unwrap();
        let back: RatFuncJson = serde_json::from_str(&json).unwrap();
        assert_eq!(RatFunc::from_json(&f4, &back).unwrap(), g);
    }
}
