//! Finite fields `F_q`, `q = p^k`.
//!
//! Elements are encoded as integers `code = c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
//! where `(c_0, ..., c_{k-1})` are the coordinates in the power basis of the
//! field modulus. Prime-field residues keep their own value as code, so
//! `F_p` embeds into every `F_{p^k}` without conversion.
//!
//! Multiplication in proper extensions goes through exponent/logarithm tables
//! built once per field; the prime field uses residue arithmetic directly.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest field size accepted by [`Field::new`].
pub const DEFAULT_SIZE_CAP: u64 = 1 << 20;

/// Hard ceiling for [`Field::with_cap`]; tables are `q` words each.
const ABSOLUTE_SIZE_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NonPrime(u64),
    #[error("extension degree {0} is out of range")]
    DegreeOutOfRange(u32),
    #[error("field size {p}^{k} exceeds the size cap {cap}")]
    SizeCapExceeded { p: u64, k: u32, cap: u64 },
    #[error("operands live in different fields ({left} vs {right})")]
    FieldMismatch { left: String, right: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed field descriptor {0:?}")]
    BadDescriptor(String),
}

struct FieldInner {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, coefficients from the constant term upward (length k+1).
    modulus: Vec<u32>,
    /// `exp[i] = g^i` for the primitive element `g`, `i < q-1`.
    exp: Vec<u32>,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u32>,
    generator: u32,
}

/// A finite field `F_{p^k}`. Cheap to clone; equal parameters give equal fields.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

static FIELD_CACHE: Lazy<Mutex<HashMap<(u32, u32), Field>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomials over F_p as plain residue vectors, used only while the
// field itself is being constructed.
mod prime_poly {
    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    /// Remainder of `a` modulo the monic polynomial `m`.
    pub fn rem_monic(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap() as u64;
            let shift = r.len() - 1 - dm;
            for (i, &c) in m.iter().enumerate() {
                let sub = lead * c as u64 % p as u64;
                let slot = &mut r[shift + i];
                *slot = ((*slot as u64 + p as u64 - sub) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut v: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut v);
        v
    }

    /// Irreducibility by exhaustive trial division with monic polynomials of
    /// degree at most `deg/2`. Fine for the field sizes we admit.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        for d in 1..=n / 2 {
            let count = (p as u64).pow(d as u32);
            for idx in 0..count {
                let mut g = Vec::with_capacity(d + 1);
                let mut x = idx;
                for _ in 0..d {
                    g.push((x % p as u64) as u32);
                    x /= p as u64;
                }
                g.push(1);
                if rem_monic(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// Lexicographically least monic irreducible polynomial of degree `k` over
/// `F_p`, comparing coefficient vectors from the constant term upward.
fn least_irreducible(p: u32, k: u32) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(k);
    for n in 0..count {
        // c_0 is the most significant digit of n.
        let mut coeffs = vec![0u32; k as usize + 1];
        let mut x = n;
        for i in (0..k as usize).rev() {
            coeffs[i] = (x % p as u64) as u32;
            x /= p as u64;
        }
        coeffs[k as usize] = 1;
        if coeffs[0] != 0 && prime_poly::is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

impl Field {
    /// Creates (or fetches from the cache) `F_{p^k}` with the default size cap.
    pub fn new(p: u64, k: u32) -> Result<Field, FieldError> {
        Self::with_cap(p, k, DEFAULT_SIZE_CAP)
    }

    pub fn prime(p: u64) -> Result<Field, FieldError> {
        Self::new(p, 1)
    }

    pub fn with_cap(p: u64, k: u32, cap: u64) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if k == 0 || k > 64 {
            return Err(FieldError::DegreeOutOfRange(k));
        }
        let cap = cap.min(ABSOLUTE_SIZE_CAP);
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= cap)
            .ok_or(FieldError::SizeCapExceeded { p, k, cap })?;
        let key = (p as u32, k);
        let mut cache = FIELD_CACHE.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = cache.get(&key) {
            return Ok(f.clone());
        }
        let field = Field(Arc::new(Self::build(p as u32, k, q as u32)));
        cache.insert(key, field.clone());
        Ok(field)
    }

    fn build(p: u32, k: u32, q: u32) -> FieldInner {
        let modulus = least_irreducible(p, k);
        let digits = |code: u32| -> Vec<u32> {
            let mut v = Vec::with_capacity(k as usize);
            let mut x = code;
            for _ in 0..k {
                v.push(x % p);
                x /= p;
            }
            prime_poly::trim(&mut v);
            v
        };
        let encode = |v: &[u32]| -> u32 { v.iter().rev().fold(0u32, |acc, &c| acc * p + c) };
        let slow_mul = |a: u32, b: u32| -> u32 {
            let prod = prime_poly::mul(&digits(a), &digits(b), p);
            encode(&prime_poly::rem_monic(&prod, &modulus, p))
        };
        let slow_pow = |a: u32, mut e: u64| -> u32 {
            let mut base = a;
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                e >>= 1;
            }
            acc
        };
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&c| factors.iter().all(|&r| slow_pow(c, order / r) != 1))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for i in 0..order as u32 {
            exp.push(cur);
            log[cur as usize] = i;
            cur = if k == 1 {
                ((cur as u64 * generator as u64) % p as u64) as u32
            } else {
                slow_mul(cur, generator)
            };
        }
        FieldInner { p, k, q, modulus, exp, log, generator }
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Monic modulus, constant term first. For `k = 1` this is `X`.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// Primitive element of the multiplicative group.
    pub fn generator(&self) -> u32 {
        self.0.generator
    }

    pub fn descriptor(&self) -> String {
        format!("{}^{}", self.p(), self.k())
    }

    /// Parses `"p^k"` or a bare prime `"p"`.
    pub fn from_descriptor(s: &str) -> Result<Field, FieldError> {
        let bad = || FieldError::BadDescriptor(s.to_string());
        let s = s.trim();
        let (p, k) = match s.split_once('^') {
            Some((p, k)) => (p.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?),
            None => (s.parse().map_err(|_| bad())?, 1),
        };
        Field::new(p, k)
    }

    pub fn elem(&self, code: u32) -> FieldElem {
        assert!(code < self.q(), "code {code} out of range for F_{}", self.q());
        FieldElem { field: self.clone(), code }
    }

    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q()).map(|c| self.elem(c))
    }

    // ---- raw code arithmetic -------------------------------------------

    /// Power-basis coordinates of `code`.
    pub fn digits(&self, code: u32) -> Vec<u32> {
        let p = self.p();
        let mut x = code;
        (0..self.k())
            .map(|_| {
                let d = x % p;
                x /= p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> u32 {
        let p = self.p();
        digits.iter().rev().fold(0u32, |acc, &c| acc * p + c % p)
    }

    pub fn from_int(&self, n: i128) -> u32 {
        n.rem_euclid(self.p() as i128) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.0.p;
        if p == 2 {
            return a ^ b;
        }
        if self.0.k == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        let (mut x, mut y, mut out, mut place) = (a, b, 0u32, 1u32);
        while x > 0 || y > 0 {
            let d = (x % p + y % p) % p;
            out += d * place;
            place *= p;
            x /= p;
            y /= p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let p = self.0.p;
        if p == 2 {
            return a;
        }
        if self.0.k == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let (mut x, mut out, mut place) = (a, 0u32, 1u32);
        while x > 0 {
            let d = x % p;
            out += ((p - d) % p) * place;
            place *= p;
            x /= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.0;
        if inner.k == 1 {
            return ((a as u64 * b as u64) % inner.p as u64) as u32;
        }
        let order = inner.q - 1;
        let mut e = inner.log[a as usize] + inner.log[b as usize];
        if e >= order {
            e -= order;
        }
        inner.exp[e as usize]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let inner = &*self.0;
        let l = inner.log[a as usize];
        Some(if l == 0 { 1 } else { inner.exp[(inner.q - 1 - l) as usize] })
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: u32, e: u128) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.0.q - 1) as u128;
        let l = self.0.log[a as usize] as u128;
        self.0.exp[((l * (e % order)) % order) as usize]
    }

    /// Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p() as u128)
    }

    /// The unique `b` with `b^p = a`, namely `a^{q/p}`.
    pub fn pth_root(&self, a: u32) -> u32 {
        self.pow(a, (self.q() / self.p()) as u128)
    }

    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.p() == 2 || self.0.log[a as usize].is_multiple_of(2)
    }

    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        if self.p() == 2 {
            return Some(self.pth_root(a));
        }
        let l = self.0.log[a as usize];
        l.is_multiple_of(2).then(|| self.0.exp[(l / 2) as usize])
    }

    /// Absolute trace `a + a^p + ... + a^{p^{k-1}}`, returned as a residue mod p.
    pub fn trace(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut cur = a;
        for _ in 0..self.k() {
            acc = self.add(acc, cur);
            cur = self.frobenius(cur);
        }
        debug_assert!(acc < self.p(), "trace must land in the prime field");
        acc
    }

    /// Renders an element code: a residue for prime fields, otherwise a
    /// polynomial in the generator symbol `a` of the power basis.
    pub fn format_code(&self, code: u32) -> String {
        if self.k() == 1 {
            return code.to_string();
        }
        let digits = self.digits(code);
        let mut parts = Vec::new();
        for (i, &c) in digits.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            parts.push(match (c, mono.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => mono,
                (_, false) => format!("{c}*{mono}"),
            });
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }

    fn same(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.p() == other.p() && self.k() == other.k())
    }

    pub(crate) fn check_same(&self, other: &Field) -> Result<(), FieldError> {
        if self.same(other) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch { left: self.descriptor(), right: other.descriptor() })
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.p(), self.k()).hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.descriptor())
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// JSON form of a field: descriptor plus the explicit modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub descriptor: String,
    pub p: u32,
    pub k: u32,
    pub modulus: Vec<u32>,
}

impl From<&Field> for FieldDescriptor {
    fn from(f: &Field) -> Self {
        FieldDescriptor { descriptor: f.descriptor(), p: f.p(), k: f.k(), modulus: f.modulus().to_vec() }
    }
}

impl TryFrom<FieldDescriptor> for Field {
    type Error = FieldError;

    fn try_from(d: FieldDescriptor) -> Result<Self, Self::Error> {
        let field = Field::new(d.p as u64, d.k)?;
        if field.descriptor() != d.descriptor || field.modulus() != d.modulus.as_slice() {
            return Err(FieldError::BadDescriptor(d.descriptor));
        }
        Ok(field)
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FieldDescriptor::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let desc = FieldDescriptor::deserialize(d)?;
        Field::try_from(desc).map_err(serde::de::Error::custom)
    }
}

/// An element of a finite field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    field: Field,
    code: u32,
}

/// Binary operations accepted by [`elem_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow(u128),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootsAndSquares {
    pub pth_root: FieldElem,
    pub is_square: bool,
    pub sqrt: Option<FieldElem>,
}

impl FieldElem {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    fn wrap(&self, code: u32) -> FieldElem {
        FieldElem { field: self.field.clone(), code }
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.field.check_same(&other.field)?;
        Ok(self.wrap(self.field.add(self.code, other.code)))
    }

    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.field.check_same(&other.field)?;
        Ok(self.wrap(self.field.sub(self.code, other.code)))
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.field.check_same(&other.field)?;
        Ok(self.wrap(self.field.mul(self.code, other.code)))
    }

    pub fn div(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        self.field.check_same(&other.field)?;
        let code = self.field.div(self.code, other.code).ok_or(FieldError::DivisionByZero)?;
        Ok(self.wrap(code))
    }

    pub fn neg(&self) -> FieldElem {
        self.wrap(self.field.neg(self.code))
    }

    pub fn inv(&self) -> Result<FieldElem, FieldError> {
        self.field.inv(self.code).map(|c| self.wrap(c)).ok_or(FieldError::DivisionByZero)
    }

    pub fn pow(&self, e: u128) -> FieldElem {
        self.wrap(self.field.pow(self.code, e))
    }

    pub fn pth_root(&self) -> FieldElem {
        self.wrap(self.field.pth_root(self.code))
    }

    pub fn roots_and_squares(&self) -> RootsAndSquares {
        let sqrt = self.field.sqrt(self.code).map(|c| self.wrap(c));
        RootsAndSquares { pth_root: self.pth_root(), is_square: sqrt.is_some(), sqrt }
    }

    pub fn trace(&self) -> u32 {
        self.field.trace(self.code)
    }
}

/// Applies one binary operation; both operands must share a field.
pub fn elem_arith(a: &FieldElem, b: &FieldElem, op: ArithOp) -> Result<FieldElem, FieldError> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
        ArithOp::Pow(n) => Ok(a.pow(n)),
    }
}

pub fn trace_to_prime(a: &FieldElem) -> u32 {
    a.trace()
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format_code(self.code))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format_code(self.code))
    }
}
