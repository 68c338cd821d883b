//! Truncated graded-commutative polynomial algebras.
//!
//! An algebra is a finite list of named generators, each even or odd, with
//! all monomials of word degree above the truncation bound declared zero.
//! Odd generators square to zero and products follow the Koszul sign rule.
//! Kähler forms over all-even algebras carry the de Rham differential.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::rat::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
    pub parity: Parity,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PolyError {
    #[error("algebra mismatch")]
    AlgebraMismatch,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("odd generator `{0}` not allowed in differential forms")]
    OddGeneratorInForms(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Exponent vector over the algebra's generators, in canonical order.
pub type Monomial = Vec<u32>;

/// A multivariate polynomial algebra truncated at total word degree `trunc`.
/// Generators are kept sorted by name; the monomial order is
/// degree-lexicographic with respect to that order.
#[derive(Debug, PartialEq, Eq)]
pub struct TruncatedPolyAlgebra {
    gens: Vec<Generator>,
    trunc: usize,
}

pub type AlgebraRef = Arc<TruncatedPolyAlgebra>;

impl TruncatedPolyAlgebra {
    pub fn new(mut gens: Vec<Generator>, trunc: usize) -> Result<AlgebraRef, PolyError> {
        gens.sort_by(|a, b| a.name.cmp(&b.name));
        for w in gens.windows(2) {
            if w[0].name == w[1].name {
                return Err(PolyError::DuplicateGenerator(w[0].name.clone()));
            }
        }
        Ok(Arc::new(TruncatedPolyAlgebra { gens, trunc }))
    }

    /// Convenience constructor for all-even generator lists in degree 0.
    pub fn even(names: &[&str], trunc: usize) -> AlgebraRef {
        Self::new(
            names
                .iter()
                .map(|n| Generator { name: n.to_string(), degree: 0, parity: Parity::Even })
                .collect(),
            trunc,
        )
        .expect("distinct names")
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn gen_index(&self, name: &str) -> Result<usize, PolyError> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| PolyError::UnknownGenerator(name.to_string()))
    }

    pub fn is_all_even(&self) -> bool {
        self.gens.iter().all(|g| g.parity == Parity::Even)
    }

    /// Same generators, different truncation bound.
    pub fn with_truncation(&self, trunc: usize) -> AlgebraRef {
        Arc::new(TruncatedPolyAlgebra { gens: self.gens.clone(), trunc })
    }

    pub fn word_degree(&self, m: &Monomial) -> usize {
        m.iter().map(|&e| e as usize).sum()
    }

    pub fn mono_parity(&self, m: &Monomial) -> Parity {
        let mut odd = 0u32;
        for (g, &e) in self.gens.iter().zip(m) {
            if g.parity == Parity::Odd {
                odd += e;
            }
        }
        if odd % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn mono_degree(&self, m: &Monomial) -> i64 {
        self.gens.iter().zip(m).map(|(g, &e)| g.degree * e as i64).sum()
    }

    /// Product of two monomials with the Koszul sign; `None` when the
    /// product dies (odd square or truncation).
    pub fn mul_mono(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, i32)> {
        if self.word_degree(a) + self.word_degree(b) > self.trunc {
            return None;
        }
        let mut out = vec![0u32; self.gens.len()];
        let mut inversions = 0u32;
        // Odd generators of `b` cross the odd generators of `a` with larger
        // index when the concatenated word is sorted.
        let mut odd_suffix_a = vec![0u32; self.gens.len() + 1];
        for i in (0..self.gens.len()).rev() {
            odd_suffix_a[i] = odd_suffix_a[i + 1]
                + if self.gens[i].parity == Parity::Odd { a[i] } else { 0 };
        }
        for i in 0..self.gens.len() {
            out[i] = a[i] + b[i];
            if self.gens[i].parity == Parity::Odd {
                if out[i] > 1 {
                    return None;
                }
                inversions += b[i] * odd_suffix_a[i + 1];
            }
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((out, sign))
    }

    /// Enumerate all monomials of word degree at most `bound` (and at most
    /// the truncation).
    pub fn monomials_up_to(&self, bound: usize) -> Vec<Monomial> {
        let bound = bound.min(self.trunc);
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.gens.len()];
        self.enumerate_rec(0, bound, &mut cur, &mut out);
        out.sort_by(|a, b| self.mono_cmp(a, b));
        out
    }

    fn enumerate_rec(
        &self,
        idx: usize,
        remaining: usize,
        cur: &mut Monomial,
        out: &mut Vec<Monomial>,
    ) {
        if idx == self.gens.len() {
            out.push(cur.clone());
            return;
        }
        let max = if self.gens[idx].parity == Parity::Odd { remaining.min(1) } else { remaining };
        for e in 0..=max {
            cur[idx] = e as u32;
            self.enumerate_rec(idx + 1, remaining - e, cur, out);
        }
        cur[idx] = 0;
    }

    pub fn mono_cmp(&self, a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
        self.word_degree(a).cmp(&self.word_degree(b)).then_with(|| a.cmp(b))
    }

    pub fn mono_to_string(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (g, &e) in self.gens.iter().zip(m) {
            match e {
                0 => {}
                1 => parts.push(g.name.clone()),
                _ => parts.push(format!("{}^{}", g.name, e)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    pub fn mono_from_string(&self, s: &str) -> Result<Monomial, PolyError> {
        let mut m = vec![0u32; self.gens.len()];
        let s = s.trim();
        if s == "1" {
            return Ok(m);
        }
        for part in s.split('*') {
            let (name, exp) = match part.split_once('^') {
                Some((n, e)) => {
                    let e: u32 =
                        e.trim().parse().map_err(|_| PolyError::Parse(format!("bad exponent in `{part}`")))?;
                    (n.trim(), e)
                }
                None => (part.trim(), 1),
            };
            let i = self.gen_index(name)?;
            m[i] += exp;
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "gens": self.gens.iter().map(|g| json!({
                "name": g.name,
                "degree": g.degree,
                "parity": if g.parity == Parity::Even { "even" } else { "odd" },
            })).collect::<Vec<_>>(),
            "trunc": self.trunc,
        })
    }

    pub fn from_json(v: &Value) -> Result<AlgebraRef, PolyError> {
        let gens = v["gens"]
            .as_array()
            .ok_or_else(|| PolyError::Parse("missing gens".into()))?
            .iter()
            .map(|g| {
                Ok(Generator {
                    name: g["name"]
                        .as_str()
                        .ok_or_else(|| PolyError::Parse("gen name".into()))?
                        .to_string(),
                    degree: g["degree"].as_i64().unwrap_or(0),
                    parity: match g["parity"].as_str() {
                        Some("odd") => Parity::Odd,
                        _ => Parity::Even,
                    },
                })
            })
            .collect::<Result<Vec<_>, PolyError>>()?;
        let trunc = v["trunc"]
            .as_u64()
            .ok_or_else(|| PolyError::Parse("missing trunc".into()))? as usize;
        TruncatedPolyAlgebra::new(gens, trunc)
    }
}

/// An element of a truncated algebra: canonical monomials with nonzero
/// rational coefficients.
#[derive(Clone)]
pub struct PolyElement {
    algebra: AlgebraRef,
    terms: BTreeMap<Monomial, Rat>,
}

impl PartialEq for PolyElement {
    fn eq(&self, other: &Self) -> bool {
        *self.algebra == *other.algebra && self.terms == other.terms
    }
}

impl PolyElement {
    pub fn zero(algebra: &AlgebraRef) -> Self {
        PolyElement { algebra: algebra.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(algebra: &AlgebraRef, c: Rat) -> Self {
        let mut e = Self::zero(algebra);
        e.add_term(vec![0; algebra.num_gens()], c);
        e
    }

    pub fn one(algebra: &AlgebraRef) -> Self {
        Self::constant(algebra, Rat::one())
    }

    pub fn gen(algebra: &AlgebraRef, name: &str) -> Result<Self, PolyError> {
        let i = algebra.gen_index(name)?;
        let mut m = vec![0u32; algebra.num_gens()];
        m[i] = 1;
        let mut e = Self::zero(algebra);
        e.add_term(m, Rat::one());
        Ok(e)
    }

    pub fn from_terms(
        algebra: &AlgebraRef,
        terms: impl IntoIterator<Item = (Monomial, Rat)>,
    ) -> Self {
        let mut e = Self::zero(algebra);
        for (m, c) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn algebra(&self) -> &AlgebraRef {
        &self.algebra
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() || self.algebra.word_degree(&m) > self.algebra.trunc() {
            return;
        }
        let v = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn check_same(&self, rhs: &Self) -> Result<(), PolyError> {
        if *self.algebra != *rhs.algebra {
            return Err(PolyError::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same(rhs)?;
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zero(&self.algebra);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = &*c * s;
        }
        out
    }

    /// Graded-commutative product, truncated at the algebra's bound.
    pub fn mul(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.check_same(rhs)?;
        let mut out = Self::zero(&self.algebra);
        for (ma, ca) in self.terms() {
            for (mb, cb) in rhs.terms() {
                if let Some((m, sign)) = self.algebra.mul_mono(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, PolyError> {
        let mut acc = Self::one(&self.algebra);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Graded left partial derivative: the generator is moved to the front
    /// of the monomial (picking up the Koszul sign past the odd generators
    /// before it) and struck out.
    pub fn partial_derivative(&self, gen: &str) -> Result<Self, PolyError> {
        let k = self.algebra.gen_index(gen)?;
        let odd_k = self.algebra.gens()[k].parity == Parity::Odd;
        let mut out = Self::zero(&self.algebra);
        for (m, c) in self.terms() {
            if m[k] == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm[k] -= 1;
            let mut coef = c * &Rat::from_int(m[k] as i64);
            if odd_k {
                let crossings: u32 = self
                    .algebra
                    .gens()
                    .iter()
                    .zip(m)
                    .take(k)
                    .filter(|(g, _)| g.parity == Parity::Odd)
                    .map(|(_, &e)| e)
                    .sum();
                if crossings % 2 == 1 {
                    coef = -coef;
                }
            }
            out.add_term(dm, coef);
        }
        Ok(out)
    }

    /// Substitute a rational value for one generator (used to specialize a
    /// family parameter).
    pub fn substitute(&self, gen: &str, value: &Rat) -> Result<Self, PolyError> {
        let k = self.algebra.gen_index(gen)?;
        let mut out = Self::zero(&self.algebra);
        for (m, c) in self.terms() {
            let e = m[k];
            let mut nm = m.clone();
            nm[k] = 0;
            out.add_term(nm, c * &value.pow(e));
        }
        Ok(out)
    }

    /// The maximal word degree of a term, `None` for the zero element.
    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| self.algebra.word_degree(m)).max()
    }

    /// The minimal word degree of a term, `None` for the zero element.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| self.algebra.word_degree(m)).min()
    }

    /// Re-interpret in an algebra with the same generators and a different
    /// truncation; terms above the new bound are dropped.
    pub fn into_algebra(&self, algebra: &AlgebraRef) -> Result<Self, PolyError> {
        if algebra.gens() != self.algebra.gens() {
            return Err(PolyError::AlgebraMismatch);
        }
        let mut out = Self::zero(algebra);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Parse an expression over the algebra's generators.  Grammar:
    /// sums/differences of products of powers; rational literals `p` or
    /// `p/q`; parentheses.
    pub fn parse(algebra: &AlgebraRef, input: &str) -> Result<Self, PolyError> {
        let mut p = ExprParser { algebra, tokens: lex(input)?, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(PolyError::Parse(format!("trailing input near token {}", p.pos)));
        }
        Ok(e)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "gens": self.algebra.to_json()["gens"],
            "trunc": self.algebra.trunc(),
            "terms": self.terms.iter().map(|(m, c)| json!({
                "mono": self.algebra.mono_to_string(m),
                "coef": c.to_string(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, PolyError> {
        let algebra = TruncatedPolyAlgebra::from_json(v)?;
        let mut e = Self::zero(&algebra);
        for t in v["terms"].as_array().ok_or_else(|| PolyError::Parse("missing terms".into()))? {
            let m = algebra
                .mono_from_string(t["mono"].as_str().ok_or_else(|| PolyError::Parse("mono".into()))?)?;
            let c: Rat = t["coef"]
                .as_str()
                .ok_or_else(|| PolyError::Parse("coef".into()))?
                .parse()
                .map_err(PolyError::Parse)?;
            e.add_term(m, c);
        }
        Ok(e)
    }
}

impl fmt::Display for PolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let ms = self.algebra.mono_to_string(m);
            if ms == "1" {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{ms}")?;
            } else {
                write!(f, "{c}*{ms}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Token>, PolyError> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '−' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut text: String = chars[start..i].iter().collect();
                // A rational literal p/q, only when a digit follows the slash.
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    let dstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    text.push('/');
                    text.push_str(&chars[dstart..i].iter().collect::<String>());
                }
                out.push(Token::Num(text.parse().map_err(PolyError::Parse)?));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(PolyError::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    algebra: &'a AlgebraRef,
    tokens: Vec<Token>,
    pos: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<PolyElement, PolyError> {
        let mut acc = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyElement, PolyError> {
        let mut acc = self.factor()?;
        while let Some(Token::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<PolyElement, PolyError> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            match self.tokens.get(self.pos).cloned() {
                Some(Token::Num(r)) if r.is_integer() && r > Rat::zero() => {
                    self.pos += 1;
                    let e: u32 = r
                        .numer()
                        .to_string()
                        .parse()
                        .map_err(|_| PolyError::Parse("exponent too large".into()))?;
                    return base.pow(e);
                }
                _ => return Err(PolyError::Parse("expected positive integer exponent".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<PolyElement, PolyError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(r)) => {
                self.pos += 1;
                Ok(PolyElement::constant(self.algebra, r))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                PolyElement::gen(self.algebra, &name)
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(PolyError::Parse("expected `)`".into())),
                }
            }
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(self.atom()?.neg())
            }
            t => Err(PolyError::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

/// Number of degree-`k` monomials in `n` even variables.
pub fn sym_basis_dim(n: usize, k: usize) -> usize {
    assert!(n >= 1);
    binomial(k + n - 1, n - 1)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num = num_bigint::BigInt::from(1);
    let mut den = num_bigint::BigInt::from(1);
    for i in 0..k {
        num *= (n - i) as i64;
        den *= (i + 1) as i64;
    }
    let q = num / den;
    q.to_string().parse().expect("binomial fits usize")
}

/// A homogeneous differential form of degree `k` over an all-even algebra:
/// coefficients indexed by (monomial, generator subset as a bitmask).
#[derive(Clone, PartialEq)]
pub struct KaehlerForm {
    algebra: AlgebraRef,
    degree: usize,
    terms: BTreeMap<(Monomial, u64), Rat>,
}

impl KaehlerForm {
    pub fn zero(algebra: &AlgebraRef, degree: usize) -> Result<Self, PolyError> {
        if let Some(g) = algebra.gens().iter().find(|g| g.parity == Parity::Odd) {
            return Err(PolyError::OddGeneratorInForms(g.name.clone()));
        }
        assert!(algebra.num_gens() <= 64, "at most 64 generators in forms");
        Ok(KaehlerForm { algebra: algebra.clone(), degree, terms: BTreeMap::new() })
    }

    pub fn from_poly(p: &PolyElement) -> Result<Self, PolyError> {
        let mut f = Self::zero(p.algebra(), 0)?;
        for (m, c) in p.terms() {
            f.add_term(m.clone(), 0, c.clone());
        }
        Ok(f)
    }

    pub fn algebra(&self) -> &AlgebraRef {
        &self.algebra
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Monomial, u64), &Rat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, mask: u64, c: Rat) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        if c.is_zero() || self.algebra.word_degree(&m) > self.algebra.trunc() {
            return;
        }
        let key = (m, mask);
        let v = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, PolyError> {
        if *self.algebra != *rhs.algebra || self.degree != rhs.degree {
            return Err(PolyError::AlgebraMismatch);
        }
        let mut out = self.clone();
        for ((m, mask), c) in rhs.terms() {
            out.add_term(m.clone(), *mask, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            let mut out = self.clone();
            out.terms.clear();
            return out;
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = &*c * s;
        }
        out
    }

    /// Coefficient-wise product with a polynomial (even, so no signs).
    pub fn mul_poly(&self, p: &PolyElement) -> Result<Self, PolyError> {
        if *self.algebra != **p.algebra() {
            return Err(PolyError::AlgebraMismatch);
        }
        let mut out = Self::zero(&self.algebra, self.degree)?;
        for ((m, mask), c) in self.terms() {
            for (pm, pc) in p.terms() {
                if let Some((nm, _)) = self.algebra.mul_mono(m, pm) {
                    out.add_term(nm, *mask, c * pc);
                }
            }
        }
        Ok(out)
    }

    /// Left wedge with `d(gen)`: `dx_j ∧ ω`.
    pub fn wedge_dgen_left(&self, j: usize) -> Result<Self, PolyError> {
        let mut out = Self::zero(&self.algebra, self.degree + 1)?;
        let bit = 1u64 << j;
        for ((m, mask), c) in self.terms() {
            if mask & bit != 0 {
                continue;
            }
            let below = (mask & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { c.clone() } else { -c };
            out.add_term(m.clone(), mask | bit, sign);
        }
        Ok(out)
    }

    /// Left wedge with a 1-form.
    pub fn wedge_one_form_left(&self, alpha: &KaehlerForm) -> Result<Self, PolyError> {
        assert_eq!(alpha.degree, 1);
        if *self.algebra != *alpha.algebra {
            return Err(PolyError::AlgebraMismatch);
        }
        let mut out = Self::zero(&self.algebra, self.degree + 1)?;
        for ((am, amask), ac) in alpha.terms() {
            let j = amask.trailing_zeros() as usize;
            let scaled = self.mul_poly(&PolyElement::from_terms(
                &self.algebra,
                [(am.clone(), ac.clone())],
            ))?;
            let wedged = scaled.wedge_dgen_left(j)?;
            out = out.add(&wedged)?;
        }
        Ok(out)
    }

    /// De Rham differential restricted to the given generator directions.
    pub fn de_rham_d_dirs(&self, dirs: &[usize]) -> Result<Self, PolyError> {
        let mut out = Self::zero(&self.algebra, self.degree + 1)?;
        for ((m, mask), c) in self.terms() {
            for &j in dirs {
                if m[j] == 0 || mask & (1 << j) != 0 {
                    continue;
                }
                let mut dm = m.clone();
                dm[j] -= 1;
                let coef = c * &Rat::from_int(m[j] as i64);
                let below = (mask & ((1u64 << j) - 1)).count_ones();
                out.add_term(dm, mask | (1 << j), if below % 2 == 0 { coef } else { -coef });
            }
        }
        Ok(out)
    }

    /// Full de Rham differential.
    pub fn de_rham_d(&self) -> Result<Self, PolyError> {
        let dirs: Vec<usize> = (0..self.algebra.num_gens()).collect();
        self.de_rham_d_dirs(&dirs)
    }

    /// Exterior derivative of a polynomial, as a 1-form.
    pub fn d_of_poly(p: &PolyElement) -> Result<Self, PolyError> {
        Self::from_poly(p)?.de_rham_d()
    }
}

impl fmt::Display for KaehlerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((m, mask), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{}", c, self.algebra.mono_to_string(m))?;
            for j in 0..self.algebra.num_gens() {
                if mask & (1 << j) != 0 {
                    write!(f, "∧d{}", self.algebra.gens()[j].name)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for KaehlerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
