//! Generalized polynomial expressions over one integer variable: grammar,
//! recursive-descent parser, deterministic printer, canonical form and the
//! formal degree.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := ["+"|"-"] term (("+"|"-") term)*
//! term   := factor ("*" factor)*
//! factor := scalar | "n" ["^" uint] | "ni(" expr ")" | "fl(" expr ")" | "(" expr ")"
//! scalar := uint ["/" uint] | "sqrt(" uint ")" | "pi" | "e"
//! ```
//!
//! Parsing canonicalizes: products are expanded, like terms merge, and the
//! printer emits the canonical form, so `parse . print` is the identity.
//!
//! ```
//! use gpolylab::gpexpr::GpExpr;
//!
//! let p = GpExpr::parse("ni(sqrt(2)*n^2*ni(sqrt(3)*n))").unwrap();
//! assert_eq!(p.degree(), 3);
//! let q = GpExpr::parse("n + n^2 - n").unwrap();
//! assert_eq!(q.print(), "n^2");
//! ```
//!
//! `ni(...)` is the nearest-integer bracket and `fl(...)` the floor bracket.
//! Stored expressions are canonicalized (products expanded over sums, scalar
//! constants folded, like terms merged) and must vanish at `n = 0`.
//!
//! ```
//! use gpolylab::gpexpr::GpExpr;
//! let e = GpExpr::parse("3*n^2 - ni(sqrt(5)*n)").unwrap();
//! assert_eq!(GpExpr::parse(&e.print()).unwrap(), e);
//! assert_eq!(e.degree(), 2);
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::scalar::{ExactScalar, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("non-integer exponent at offset {0}")]
    BadExponent(usize),
    #[error("constant term does not vanish at n = 0")]
    NonVanishing,
}

/// Abstract syntax tree of a generalized polynomial in one variable `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GpExpr {
    Monomial { coeff: ExactScalar, power: u32 },
    Sum(Vec<GpExpr>),
    Product(Vec<GpExpr>),
    NearestInt(Box<GpExpr>),
    Floor(Box<GpExpr>),
    ScalarMul(ExactScalar, Box<GpExpr>),
}

/// One canonical term: `coeff * n^npow * brackets...`.
#[derive(Debug, Clone)]
struct Term {
    coeff: ExactScalar,
    npow: u32,
    brackets: Vec<GpExpr>,
}

impl GpExpr {
    pub fn zero() -> Self {
        GpExpr::Monomial { coeff: ExactScalar::zero(), power: 1 }
    }

    pub fn var() -> Self {
        GpExpr::Monomial { coeff: ExactScalar::one(), power: 1 }
    }

    pub fn monomial(coeff: ExactScalar, power: u32) -> Self {
        GpExpr::Monomial { coeff, power }
    }

    pub fn ni(inner: GpExpr) -> Self {
        GpExpr::NearestInt(Box::new(inner))
    }

    pub fn fl(inner: GpExpr) -> Self {
        GpExpr::Floor(Box::new(inner))
    }

    pub fn sum(parts: Vec<GpExpr>) -> Self {
        match parts.len() {
            0 => GpExpr::zero(),
            1 => parts.into_iter().next().unwrap(),
            _ => GpExpr::Sum(parts),
        }
    }

    pub fn product(parts: Vec<GpExpr>) -> Self {
        match parts.len() {
            0 => GpExpr::Monomial { coeff: ExactScalar::one(), power: 0 },
            1 => parts.into_iter().next().unwrap(),
            _ => GpExpr::Product(parts),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GpExpr::Monomial { coeff, .. } if coeff.is_zero())
    }

    /// Parse, canonicalize, and validate the vanishing-at-zero convention.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let raw = Parser::new(text).parse_expr_eof()?;
        let canon = raw.canonicalize();
        if !canon.vanishes_at_zero() {
            return Err(ParseError::NonVanishing);
        }
        Ok(canon)
    }

    /// Formal degree: monomial power; max over sums; sum over products;
    /// brackets and scalar multiples pass through.
    pub fn degree(&self) -> u32 {
        match self {
            GpExpr::Monomial { coeff, power } => {
                if coeff.is_zero() {
                    0
                } else {
                    *power
                }
            }
            GpExpr::Sum(parts) => parts.iter().map(GpExpr::degree).max().unwrap_or(0),
            GpExpr::Product(parts) => parts.iter().map(GpExpr::degree).sum(),
            GpExpr::NearestInt(inner) | GpExpr::Floor(inner) => inner.degree(),
            GpExpr::ScalarMul(_, inner) => inner.degree(),
        }
    }

    /// Structural check that the expression (and every bracket argument)
    /// evaluates to zero at `n = 0`.
    pub fn vanishes_at_zero(&self) -> bool {
        match self {
            GpExpr::Monomial { coeff, power } => coeff.is_zero() || *power >= 1,
            GpExpr::Sum(parts) => parts.iter().all(GpExpr::vanishes_at_zero),
            GpExpr::Product(parts) => {
                parts.iter().any(GpExpr::vanishes_at_zero)
                    && parts
                        .iter()
                        .all(|p| !matches!(p, GpExpr::NearestInt(_) | GpExpr::Floor(_)) || p.vanishes_at_zero())
            }
            GpExpr::NearestInt(inner) | GpExpr::Floor(inner) => inner.vanishes_at_zero(),
            GpExpr::ScalarMul(_, inner) => inner.vanishes_at_zero(),
        }
    }

    /// Fully expanded canonical form: a sorted sum of `coeff * n^k *
    /// brackets` terms with like terms merged and bracket arguments
    /// canonicalized recursively.
    pub fn canonicalize(&self) -> GpExpr {
        let mut terms = Vec::new();
        self.collect_terms(&ExactScalar::one(), &mut terms);
        let mut merged: BTreeMap<(u32, Vec<GpExpr>), ExactScalar> = BTreeMap::new();
        for t in terms {
            let key = (t.npow, t.brackets);
            let entry = merged.entry(key).or_insert_with(ExactScalar::zero);
            *entry = entry.add(&t.coeff);
        }
        merged.retain(|_, c| !c.is_zero());
        let parts: Vec<GpExpr> = merged
            .into_iter()
            .map(|((npow, brackets), coeff)| rebuild_term(coeff, npow, brackets))
            .collect();
        if parts.is_empty() {
            GpExpr::zero()
        } else {
            GpExpr::sum(parts)
        }
    }

    fn collect_terms(&self, scale: &ExactScalar, out: &mut Vec<Term>) {
        match self {
            GpExpr::Monomial { coeff, power } => {
                let c = coeff.mul(scale);
                if !c.is_zero() {
                    out.push(Term { coeff: c, npow: *power, brackets: vec![] });
                }
            }
            GpExpr::Sum(parts) => {
                for p in parts {
                    p.collect_terms(scale, out);
                }
            }
            GpExpr::ScalarMul(c, inner) => inner.collect_terms(&scale.mul(c), out),
            GpExpr::NearestInt(inner) => {
                let b = GpExpr::ni(inner.canonicalize());
                out.push(Term { coeff: scale.clone(), npow: 0, brackets: vec![b] });
            }
            GpExpr::Floor(inner) => {
                let b = GpExpr::fl(inner.canonicalize());
                out.push(Term { coeff: scale.clone(), npow: 0, brackets: vec![b] });
            }
            GpExpr::Product(parts) => {
                // Expand the product over the sums of its factors.
                let mut acc = vec![Term {
                    coeff: scale.clone(),
                    npow: 0,
                    brackets: vec![],
                }];
                for p in parts {
                    let mut factor_terms = Vec::new();
                    p.collect_terms(&ExactScalar::one(), &mut factor_terms);
                    let mut next = Vec::new();
                    for a in &acc {
                        for f in &factor_terms {
                            let mut brackets = a.brackets.clone();
                            brackets.extend(f.brackets.iter().cloned());
                            brackets.sort();
                            next.push(Term {
                                coeff: a.coeff.mul(&f.coeff),
                                npow: a.npow + f.npow,
                                brackets,
                            });
                        }
                    }
                    acc = next;
                }
                out.extend(acc);
            }
        }
    }

    /// Deterministic text form; `parse(print(e)) == e` for canonical `e`.
    pub fn print(&self) -> String {
        let canon = self.canonicalize();
        let parts: Vec<&GpExpr> = match &canon {
            GpExpr::Sum(ps) => ps.iter().collect(),
            other => vec![other],
        };
        let mut s = String::new();
        for (i, p) in parts.iter().enumerate() {
            let (neg, text) = print_term(p);
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else if neg {
                s.push_str(" - ");
            } else {
                s.push_str(" + ");
            }
            s.push_str(&text);
        }
        s
    }

    /// Canonical JSON AST export.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            GpExpr::Monomial { coeff, power } => serde_json::json!({
                "monomial": { "coeff": coeff.to_json(), "power": power }
            }),
            GpExpr::Sum(parts) => {
                serde_json::json!({ "sum": parts.iter().map(|p| p.to_json()).collect::<Vec<_>>() })
            }
            GpExpr::Product(parts) => serde_json::json!({
                "product": parts.iter().map(|p| p.to_json()).collect::<Vec<_>>()
            }),
            GpExpr::NearestInt(inner) => serde_json::json!({ "ni": inner.to_json() }),
            GpExpr::Floor(inner) => serde_json::json!({ "fl": inner.to_json() }),
            GpExpr::ScalarMul(c, inner) => serde_json::json!({
                "scalar_mul": { "scalar": c.to_json(), "inner": inner.to_json() }
            }),
        }
    }
}

fn rebuild_term(coeff: ExactScalar, npow: u32, brackets: Vec<GpExpr>) -> GpExpr {
    if brackets.is_empty() {
        return GpExpr::Monomial { coeff, power: npow };
    }
    if npow > 0 {
        let mut factors = vec![GpExpr::Monomial { coeff, power: npow }];
        factors.extend(brackets);
        GpExpr::product(factors)
    } else if coeff == ExactScalar::one() {
        GpExpr::product(brackets)
    } else {
        GpExpr::ScalarMul(coeff, Box::new(GpExpr::product(brackets)))
    }
}

/// Scalar coefficient as parseable text; multi-term scalars parenthesized.
fn scalar_text(c: &ExactScalar) -> String {
    let n_terms = c.terms().count();
    if n_terms > 1 {
        format!("({})", c)
    } else {
        c.to_string()
    }
}

/// Render one canonical term, splitting off a leading minus when the
/// coefficient is a single negative term.
fn print_term(e: &GpExpr) -> (bool, String) {
    let (coeff, npow, brackets) = match e {
        GpExpr::Monomial { coeff, power } => (coeff.clone(), *power, vec![]),
        GpExpr::ScalarMul(c, inner) => match inner.as_ref() {
            GpExpr::Product(ps) => (c.clone(), 0, ps.clone()),
            other => (c.clone(), 0, vec![other.clone()]),
        },
        GpExpr::Product(ps) => {
            let mut coeff = ExactScalar::one();
            let mut npow = 0;
            let mut brackets = vec![];
            for p in ps {
                match p {
                    GpExpr::Monomial { coeff: c, power } => {
                        coeff = coeff.mul(c);
                        npow += power;
                    }
                    other => brackets.push(other.clone()),
                }
            }
            (coeff, npow, brackets)
        }
        GpExpr::NearestInt(_) | GpExpr::Floor(_) => (ExactScalar::one(), 0, vec![e.clone()]),
        GpExpr::Sum(_) => {
            // nested sums do not occur in canonical terms
            return (false, format!("({})", e.print()));
        }
    };
    let mut neg = false;
    let mut coeff = coeff;
    if coeff.terms().count() == 1 {
        let (_, c) = coeff.terms().next().unwrap();
        if c.is_negative() {
            neg = true;
            coeff = coeff.neg();
        }
    }
    let mut parts = Vec::new();
    if !coeff.is_one_scalar() || (npow == 0 && brackets.is_empty()) {
        parts.push(scalar_text(&coeff));
    }
    if npow == 1 {
        parts.push("n".to_string());
    } else if npow >= 2 {
        parts.push(format!("n^{}", npow));
    }
    for b in &brackets {
        match b {
            GpExpr::NearestInt(inner) => parts.push(format!("ni({})", inner.print())),
            GpExpr::Floor(inner) => parts.push(format!("fl({})", inner.print())),
            other => parts.push(format!("({})", other.print())),
        }
    }
    (neg, parts.join("*"))
}

trait IsOneScalar {
    fn is_one_scalar(&self) -> bool;
}

impl IsOneScalar for ExactScalar {
    fn is_one_scalar(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }
}

impl fmt::Display for GpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.print())
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { input: text.as_bytes(), pos: 0 }
    }

    // offsets in errors are 1-based byte positions
    fn err<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { offset: self.pos + 1, message: message.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn parse_uint(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected an integer");
        }
        std::str::from_utf8(&self.input[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::Syntax { offset: start + 1, message: "integer too large".into() })
    }

    fn parse_ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(std::str::from_utf8(&self.input[start..self.pos]).unwrap())
        }
    }

    fn parse_expr_eof(&mut self) -> Result<GpExpr, ParseError> {
        let e = self.parse_expr()?;
        self.skip_ws();
        if self.pos != self.input.len() {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn parse_expr(&mut self) -> Result<GpExpr, ParseError> {
        let mut parts = Vec::new();
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let first = self.parse_term()?;
        parts.push(if neg { negate(first) } else { first });
        loop {
            if self.eat(b'+') {
                parts.push(self.parse_term()?);
            } else if self.eat(b'-') {
                parts.push(negate(self.parse_term()?));
            } else {
                break;
            }
        }
        Ok(GpExpr::sum(parts))
    }

    fn parse_term(&mut self) -> Result<GpExpr, ParseError> {
        let mut factors = vec![self.parse_factor()?];
        while self.eat(b'*') {
            factors.push(self.parse_factor()?);
        }
        Ok(GpExpr::product(factors))
    }

    fn parse_factor(&mut self) -> Result<GpExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.parse_expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let p = self.parse_uint()?;
                let mut r = Rational::from_integer(p.into());
                if self.eat(b'/') {
                    let q = self.parse_uint()?;
                    if q == 0 {
                        return self.err("zero denominator");
                    }
                    r /= Rational::from_integer(q.into());
                }
                Ok(GpExpr::Monomial { coeff: ExactScalar::from_rational(r), power: 0 })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let ident = self.parse_ident().unwrap();
                match ident {
                    "n" => {
                        let power = if self.eat(b'^') {
                            let off = self.pos + 1;
                            let p = self.parse_uint().map_err(|_| ParseError::BadExponent(off))?;
                            u32::try_from(p).map_err(|_| ParseError::BadExponent(off))?
                        } else {
                            1
                        };
                        Ok(GpExpr::Monomial { coeff: ExactScalar::one(), power })
                    }
                    "pi" => Ok(GpExpr::Monomial { coeff: ExactScalar::pi(), power: 0 }),
                    "e" => Ok(GpExpr::Monomial { coeff: ExactScalar::e(), power: 0 }),
                    "sqrt" => {
                        self.expect(b'(')?;
                        let k = self.parse_uint()?;
                        self.expect(b')')?;
                        Ok(GpExpr::Monomial { coeff: ExactScalar::sqrt(k), power: 0 })
                    }
                    "ni" => {
                        self.expect(b'(')?;
                        let e = self.parse_expr()?;
                        self.expect(b')')?;
                        Ok(GpExpr::ni(e))
                    }
                    "fl" => {
                        self.expect(b'(')?;
                        let e = self.parse_expr()?;
                        self.expect(b')')?;
                        Ok(GpExpr::fl(e))
                    }
                    other => Err(ParseError::Syntax {
                        offset: start + 1,
                        message: format!("unknown identifier '{}'", other),
                    }),
                }
            }
            _ => self.err("expected a factor"),
        }
    }
}

fn negate(e: GpExpr) -> GpExpr {
    GpExpr::ScalarMul(ExactScalar::from_int(-1), Box::new(e))
}

/// Standalone scalar-expression parser for CLI arguments such as
/// `sqrt(2)` or `1/5*pi`. The grammar is the factor/term/expr fragment
/// restricted to constants.
pub fn parse_scalar(text: &str) -> Result<ExactScalar, ParseError> {
    let e = Parser::new(text).parse_expr_eof()?;
    scalar_value(&e).ok_or(ParseError::Syntax {
        offset: 0,
        message: "expected a constant scalar expression".into(),
    })
}

fn scalar_value(e: &GpExpr) -> Option<ExactScalar> {
    match e {
        GpExpr::Monomial { coeff, power } => (*power == 0 || coeff.is_zero()).then(|| coeff.clone()),
        GpExpr::Sum(parts) => {
            let mut acc = ExactScalar::zero();
            for p in parts {
                acc = acc.add(&scalar_value(p)?);
            }
            Some(acc)
        }
        GpExpr::Product(parts) => {
            let mut acc = ExactScalar::one();
            for p in parts {
                acc = acc.mul(&scalar_value(p)?);
            }
            Some(acc)
        }
        GpExpr::ScalarMul(c, inner) => Some(c.mul(&scalar_value(inner)?)),
        GpExpr::NearestInt(_) | GpExpr::Floor(_) => None,
    }
}
