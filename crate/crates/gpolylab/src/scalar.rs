//! Exact coefficient arithmetic over the ring generated by the rationals,
//! square roots of square-free integers, `pi` and `e`.
//!
//! A value is kept as a canonical sum of terms, each term a rational
//! coefficient times a monomial `sqrt(r) * pi^a * e^b` with `r` square-free.
//! Zero is the empty sum, so the exact zero test is syntactic. Signs of
//! nonzero values are decided by arbitrary-precision interval refinement;
//! `pi` and `e` are treated as independent transcendentals over the radical
//! field, so a nonzero canonical form denotes a nonzero real.
//!
//! ```
//! use gpolylab::scalar::ExactScalar;
//! let s2 = ExactScalar::sqrt(2);
//! let s3 = ExactScalar::sqrt(3);
//! assert_eq!(&s2 * &s3, ExactScalar::sqrt(6));
//! assert!((&(&s2 * &s2) - &ExactScalar::from_int(2)).is_zero());
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Default bit cap for sign decisions; override with `GPOLYLAB_PRECISION_CAP`.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

pub fn precision_cap() -> u32 {
    std::env::var("GPOLYLAB_PRECISION_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_PRECISION_CAP)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a non-rational scalar")]
    NonRationalDivisor,
    #[error("quotient not representable in the scalar ring")]
    QuotientNotRepresentable,
    #[error("precision cap of {cap} bits exceeded without separating {value} from zero")]
    PrecisionExhausted { cap: u32, value: String },
    #[error("radicand too large: {0}")]
    RadicandOverflow(u128),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Monomial over the named constants: `sqrt(radicand) * pi^pi * e^e`.
/// `radicand` is square-free and `1` means no radical part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub radicand: u64,
    pub pi: u32,
    pub e: u32,
}

impl Monomial {
    pub const UNIT: Monomial = Monomial { radicand: 1, pi: 0, e: 0 };

    pub fn is_unit(&self) -> bool {
        *self == Monomial::UNIT
    }
}

/// Split `n` into (outside, inside) with `n = outside^2 * inside`, inside square-free.
fn extract_square(mut n: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut inside = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut exp = 0u32;
            while n % p == 0 {
                n /= p;
                exp += 1;
            }
            for _ in 0..exp / 2 {
                outside *= p;
            }
            if exp % 2 == 1 {
                inside *= p;
            }
        }
        p += 1;
    }
    inside *= n; // residual prime
    (outside, inside)
}

/// Canonical element of the coefficient ring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ExactScalar {
    terms: BTreeMap<Monomial, Rational>,
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar::default()
    }

    pub fn one() -> Self {
        ExactScalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(Rational::from_integer(n))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::from_rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Monomial::UNIT, r);
        }
        ExactScalar { terms }
    }

    /// `sqrt(k)` reduced so the stored radicand is square-free.
    pub fn sqrt(k: u64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        let (outside, inside) = extract_square(k);
        let mut terms = BTreeMap::new();
        terms.insert(
            Monomial { radicand: inside, pi: 0, e: 0 },
            Rational::from_integer(BigInt::from(outside)),
        );
        ExactScalar { terms }
    }

    pub fn pi() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial { radicand: 1, pi: 1, e: 0 }, Rational::one());
        ExactScalar { terms }
    }

    pub fn e() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial { radicand: 1, pi: 0, e: 1 }, Rational::one());
        ExactScalar { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value, if the canonical form has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.as_rational()?;
        r.is_integer().then(|| r.to_integer())
    }

    fn insert_term(terms: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::insert_term(&mut terms, *m, c.clone());
        }
        ExactScalar { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::insert_term(&mut terms, *m, -c.clone());
        }
        ExactScalar { terms }
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect();
        ExactScalar { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let prod = (m1.radicand as u128) * (m2.radicand as u128);
                // square-free radicands: product = gcd^2 * (r1/g) * (r2/g)
                let g = m1.radicand.gcd(&m2.radicand);
                let inside = (m1.radicand / g) * (m2.radicand / g);
                debug_assert_eq!(prod, (g as u128) * (g as u128) * inside as u128);
                let m = Monomial { radicand: inside, pi: m1.pi + m2.pi, e: m1.e + m2.e };
                let c = c1 * c2 * Rational::from_integer(BigInt::from(g));
                Self::insert_term(&mut terms, m, c);
            }
        }
        ExactScalar { terms }
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(m, c)| (*m, c * r)).collect();
        ExactScalar { terms }
    }

    /// Division by a nonzero rational scalar.
    pub fn div_rational(&self, other: &Self) -> Result<Self, ScalarError> {
        let r = other.as_rational().ok_or(ScalarError::NonRationalDivisor)?;
        if r.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self.mul_rational(&r.recip()))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division within the ring where representable: single-monomial
    /// divisors, common pi/e factors, and purely radical divisors (by
    /// repeated conjugation). Returns an error otherwise.
    pub fn div_exact(&self, den: &Self) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if den.terms.len() == 1 {
            let (dm, dc) = den.terms.iter().next().unwrap();
            let mut terms = BTreeMap::new();
            for (m, c) in &self.terms {
                if m.pi < dm.pi || m.e < dm.e {
                    return Err(ScalarError::QuotientNotRepresentable);
                }
                // sqrt(r)/sqrt(rd) = sqrt(r*rd)/rd, reduced through the gcd
                let g = m.radicand.gcd(&dm.radicand);
                let inside = (m.radicand / g) * (dm.radicand / g);
                let nm = Monomial { radicand: inside, pi: m.pi - dm.pi, e: m.e - dm.e };
                let nc = c / dc * Rational::new(BigInt::from(g), BigInt::from(dm.radicand));
                Self::insert_term(&mut terms, nm, nc);
            }
            return Ok(ExactScalar { terms });
        }
        // Factor out a common pi^a e^b from the divisor if present.
        let a = den.terms.keys().map(|m| m.pi).min().unwrap();
        let b = den.terms.keys().map(|m| m.e).min().unwrap();
        if a > 0 || b > 0 {
            let common = single(Monomial { radicand: 1, pi: a, e: b });
            let den2 = den.div_exact(&common)?;
            let num2 = self.div_exact(&common)?;
            return num2.div_exact(&den2);
        }
        if den.terms.keys().any(|m| m.pi > 0 || m.e > 0) {
            return Err(ScalarError::QuotientNotRepresentable);
        }
        // Purely radical multi-term divisor: conjugate away one prime.
        let p = den
            .terms
            .keys()
            .filter(|m| m.radicand > 1)
            .map(|m| smallest_prime_factor(m.radicand))
            .min()
            .ok_or(ScalarError::QuotientNotRepresentable)?;
        let mut conj = BTreeMap::new();
        for (m, c) in &den.terms {
            let c = if m.radicand % p == 0 { -c.clone() } else { c.clone() };
            Self::insert_term(&mut conj, *m, c);
        }
        let conj = ExactScalar { terms: conj };
        let new_den = den.mul(&conj);
        debug_assert!(new_den.terms.keys().all(|m| m.radicand % p != 0));
        self.mul(&conj).div_exact(&new_den)
    }

    /// Sign of the value: syntactic zero test, then interval refinement.
    pub fn sign(&self) -> Result<Sign, ScalarError> {
        if self.is_zero() {
            return Ok(Sign::Zero);
        }
        // All monomial values are positive reals, so uniform coefficient
        // signs decide immediately.
        if self.terms.values().all(|c| c.is_positive()) {
            return Ok(Sign::Positive);
        }
        if self.terms.values().all(|c| c.is_negative()) {
            return Ok(Sign::Negative);
        }
        let cap = precision_cap();
        let mut bits = 32u32;
        loop {
            let iv = self.enclosure(bits);
            if iv.lo.is_positive() {
                return Ok(Sign::Positive);
            }
            if iv.hi.is_negative() {
                return Ok(Sign::Negative);
            }
            if bits >= cap {
                return Err(ScalarError::PrecisionExhausted { cap, value: self.to_string() });
            }
            bits = (bits * 2).min(cap);
        }
    }

    /// Compare against another scalar (`self - other` sign).
    pub fn cmp_scalar(&self, other: &Self) -> Result<std::cmp::Ordering, ScalarError> {
        Ok(match self.sub(other).sign()? {
            Sign::Negative => std::cmp::Ordering::Less,
            Sign::Zero => std::cmp::Ordering::Equal,
            Sign::Positive => std::cmp::Ordering::Greater,
        })
    }

    pub fn abs(&self) -> Result<Self, ScalarError> {
        Ok(match self.sign()? {
            Sign::Negative => self.neg(),
            _ => self.clone(),
        })
    }

    /// A certified enclosure with dyadic endpoints on the `2^-bits` grid.
    pub fn enclosure(&self, bits: u32) -> Interval {
        let work = bits + 32;
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (m, c) in &self.terms {
            let mv = monomial_enclosure(m, work);
            let (tlo, thi) = if c.is_positive() {
                (c * &mv.lo, c * &mv.hi)
            } else {
                (c * &mv.hi, c * &mv.lo)
            };
            lo += tlo;
            hi += thi;
        }
        Interval { lo: dyadic_floor(&lo, bits), hi: dyadic_ceil(&hi, bits), bits }
    }

    /// Serialized canonical form: a JSON list of terms.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| {
                    serde_json::json!({
                        "coeff": c.to_string(),
                        "sqrt": m.radicand,
                        "pi": m.pi,
                        "e": m.e,
                    })
                })
                .collect(),
        )
    }

    /// Approximate `f64` value, for human-readable output only.
    pub fn to_f64(&self) -> f64 {
        let iv = self.enclosure(64);
        let mid = (&iv.lo + &iv.hi) / Rational::from_integer(BigInt::from(2));
        mid.numer().to_f64().unwrap_or(f64::NAN) / mid.denom().to_f64().unwrap_or(f64::NAN)
    }
}

fn single(m: Monomial) -> ExactScalar {
    let mut terms = BTreeMap::new();
    terms.insert(m, Rational::one());
    ExactScalar { terms }
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 1;
    }
    n
}

impl std::ops::Add for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::add(self, rhs)
    }
}
impl std::ops::Sub for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::sub(self, rhs)
    }
}
impl std::ops::Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::mul(self, rhs)
    }
}
impl std::ops::Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::neg(self)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_unit() {
                if mag.is_integer() {
                    parts.push(mag.to_integer().to_string());
                } else {
                    parts.push(format!("{}/{}", mag.numer(), mag.denom()));
                }
            }
            if m.radicand > 1 {
                parts.push(format!("sqrt({})", m.radicand));
            }
            for _ in 0..m.pi {
                parts.push("pi".to_string());
            }
            for _ in 0..m.e {
                parts.push("e".to_string());
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Dyadic enclosure of a real value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub bits: u32,
}

impl Interval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn dyadic_floor(r: &Rational, bits: u32) -> Rational {
    let scaled = r * Rational::from_integer(pow2(bits));
    Rational::new(scaled.floor().to_integer(), pow2(bits))
}

fn dyadic_ceil(r: &Rational, bits: u32) -> Rational {
    let scaled = r * Rational::from_integer(pow2(bits));
    Rational::new(scaled.ceil().to_integer(), pow2(bits))
}

/// Positive-interval product; both inputs must have positive lower bounds.
fn mul_pos(a: (Rational, Rational), b: (Rational, Rational)) -> (Rational, Rational) {
    (a.0 * b.0, a.1 * b.1)
}

fn monomial_enclosure(m: &Monomial, bits: u32) -> Interval {
    let mut acc = (Rational::one(), Rational::one());
    if m.radicand > 1 {
        let iv = sqrt_enclosure(m.radicand, bits);
        acc = mul_pos(acc, (iv.lo, iv.hi));
    }
    if m.pi > 0 {
        let iv = pi_enclosure(bits);
        for _ in 0..m.pi {
            acc = mul_pos(acc, (iv.lo.clone(), iv.hi.clone()));
        }
    }
    if m.e > 0 {
        let iv = e_enclosure(bits);
        for _ in 0..m.e {
            acc = mul_pos(acc, (iv.lo.clone(), iv.hi.clone()));
        }
    }
    Interval { lo: acc.0, hi: acc.1, bits }
}

/// Enclosure of sqrt(r): `s^2 <= r*4^bits < (s+1)^2` gives `[s, s+1] / 2^bits`.
fn sqrt_enclosure(r: u64, bits: u32) -> Interval {
    let scaled = BigUint::from(r) << (2 * bits);
    let s = num_integer::Roots::sqrt(&scaled);
    let lo = Rational::new(BigInt::from(s.clone()), pow2(bits));
    let hi = Rational::new(BigInt::from(s + BigUint::one()), pow2(bits));
    Interval { lo, hi, bits }
}

struct DigitCache {
    bits: u32,
    lo: BigInt,
    hi: BigInt,
}

static PI_CACHE: Mutex<Option<DigitCache>> = Mutex::new(None);
static E_CACHE: Mutex<Option<DigitCache>> = Mutex::new(None);

/// `atan(1/x) * 2^bits` with a certified error bound in scaled units.
fn atan_inv_scaled(x: u64, bits: u32) -> (BigInt, BigInt) {
    let one_scaled = pow2(bits);
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = x.clone(); // x^(2k+1)
    let mut k = 0u32;
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    loop {
        let denom = &power * BigInt::from(2 * k + 1);
        let term = &one_scaled / &denom;
        if term.is_zero() {
            break;
        }
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        terms += 1;
        power *= &x2;
        k += 1;
    }
    // Each floor division loses < 1 ulp; the alternating tail is < 1 ulp.
    (sum, BigInt::from(terms + 1))
}

/// Machin: pi = 16*atan(1/5) - 4*atan(1/239).
fn compute_pi(bits: u32) -> DigitCache {
    let work = bits + 16;
    let (a5, e5) = atan_inv_scaled(5, work);
    let (a239, e239) = atan_inv_scaled(239, work);
    let v = BigInt::from(16) * a5 - BigInt::from(4) * a239;
    let err = BigInt::from(16) * e5 + BigInt::from(4) * e239;
    let lo = (&v - &err) >> 16;
    let hi = ((&v + &err) >> 16) + BigInt::one();
    DigitCache { bits, lo, hi }
}

/// e = sum 1/k! with factorial tail bound.
fn compute_e(bits: u32) -> DigitCache {
    let work = bits + 16;
    let one_scaled = pow2(work);
    let mut sum = BigInt::zero();
    let mut fact = BigInt::one();
    let mut k = 0u64;
    let mut terms = 0u64;
    loop {
        let term = &one_scaled / &fact;
        if term.is_zero() {
            break;
        }
        sum += term;
        terms += 1;
        k += 1;
        fact *= BigInt::from(k);
    }
    // floor losses < terms ulps; tail < 2 ulps once terms vanish
    let err = BigInt::from(terms + 2);
    let lo = (&sum - &err) >> 16;
    let hi = ((&sum + &err) >> 16) + BigInt::one();
    DigitCache { bits, lo, hi }
}

fn cached_enclosure(
    cache: &Mutex<Option<DigitCache>>,
    compute: fn(u32) -> DigitCache,
    bits: u32,
) -> Interval {
    let mut guard = cache.lock().unwrap();
    let need_recompute = match guard.as_ref() {
        Some(c) => c.bits < bits,
        None => true,
    };
    if need_recompute {
        *guard = Some(compute(bits.max(64)));
    }
    let c = guard.as_ref().unwrap();
    let shift = c.bits - bits.min(c.bits);
    let lo = Rational::new(c.lo.clone() >> shift, pow2(bits.min(c.bits)));
    let hi = Rational::new((c.hi.clone() >> shift) + BigInt::one(), pow2(bits.min(c.bits)));
    Interval { lo, hi, bits }
}

pub fn pi_enclosure(bits: u32) -> Interval {
    cached_enclosure(&PI_CACHE, compute_pi, bits)
}

pub fn e_enclosure(bits: u32) -> Interval {
    cached_enclosure(&E_CACHE, compute_e, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn radical_reduction() {
        assert_eq!(&ExactScalar::sqrt(2) * &ExactScalar::sqrt(3), ExactScalar::sqrt(6));
        assert_eq!(ExactScalar::sqrt(8), ExactScalar::sqrt(2).mul_rational(&r(2, 1)));
        assert_eq!(ExactScalar::sqrt(4), ExactScalar::from_int(2));
    }

    #[test]
    fn sqrt_square_cancels() {
        let s2 = ExactScalar::sqrt(2);
        assert!((&(&s2 * &s2) - &ExactScalar::from_int(2)).is_zero());
    }

    #[test]
    fn two_pi_minus_two_pi() {
        let two_pi = ExactScalar::pi().mul_rational(&r(2, 1));
        assert!(two_pi.sub(&two_pi).is_zero());
    }

    #[test]
    fn sign_examples() {
        let v = &ExactScalar::sqrt(2) - &ExactScalar::from_int(1);
        assert_eq!(v.sign().unwrap(), Sign::Positive);
        assert_eq!(ExactScalar::zero().sign().unwrap(), Sign::Zero);
        let w = ExactScalar::sqrt(6).add(&ExactScalar::pi()).add(&ExactScalar::from_int(2));
        assert!(w.sub(&w).is_zero());
        assert_eq!(w.sub(&w).sign().unwrap(), Sign::Zero);
    }

    #[test]
    fn sign_mixed_terms() {
        // sqrt(2) - 1.41422 < 0 < sqrt(2) - 1.41421
        let v = &ExactScalar::sqrt(2) - &ExactScalar::from_rational(r(141421, 100000));
        assert_eq!(v.sign().unwrap(), Sign::Positive);
        let v = &ExactScalar::sqrt(2) - &ExactScalar::from_rational(r(141422, 100000));
        assert_eq!(v.sign().unwrap(), Sign::Negative);
    }

    #[test]
    fn interval_soundness_sqrt2() {
        let iv = ExactScalar::sqrt(2).enclosure(20);
        assert!(iv.lo <= r(1414214, 1000000) && r(1414213, 1000000) <= iv.hi);
        assert!(iv.width() <= r(1, 1 << 18));
    }

    #[test]
    fn interval_zero() {
        let iv = ExactScalar::zero().enclosure(4);
        assert_eq!(iv.lo, Rational::zero());
        assert_eq!(iv.hi, Rational::zero());
    }

    #[test]
    fn interval_pi_digits() {
        let iv = ExactScalar::pi().enclosure(10);
        assert!(iv.lo <= r(314159, 100000) && r(314159, 100000) <= iv.hi);
    }

    #[test]
    fn interval_nesting() {
        let v = ExactScalar::sqrt(2).add(&ExactScalar::pi()).sub(&ExactScalar::from_ratio(22, 7));
        let coarse = v.enclosure(16);
        let fine = v.enclosure(48);
        assert!(coarse.contains(&fine));
    }

    #[test]
    fn div_exact_single_term() {
        // 6*pi / 3*pi = 2
        let num = ExactScalar::pi().mul_rational(&r(6, 1));
        let den = ExactScalar::pi().mul_rational(&r(3, 1));
        assert_eq!(num.div_exact(&den).unwrap(), ExactScalar::from_int(2));
        // sqrt(6)/sqrt(2) = sqrt(3)
        assert_eq!(
            ExactScalar::sqrt(6).div_exact(&ExactScalar::sqrt(2)).unwrap(),
            ExactScalar::sqrt(3)
        );
    }

    #[test]
    fn div_exact_conjugate() {
        // 2*(4*sqrt(2)+2*sqrt(3)) / (4*sqrt(2)-2*sqrt(3)) = (22+8*sqrt(6))/5
        let num = ExactScalar::sqrt(2)
            .mul_rational(&r(8, 1))
            .add(&ExactScalar::sqrt(3).mul_rational(&r(4, 1)));
        let den = ExactScalar::sqrt(2)
            .mul_rational(&r(4, 1))
            .sub(&ExactScalar::sqrt(3).mul_rational(&r(2, 1)));
        let q = num.div_exact(&den).unwrap();
        let expect = ExactScalar::from_rational(r(22, 5))
            .add(&ExactScalar::sqrt(6).mul_rational(&r(8, 5)));
        assert_eq!(q, expect);
    }

    #[test]
    fn div_rational_errors() {
        let x = ExactScalar::sqrt(2);
        assert_eq!(
            x.div_rational(&ExactScalar::zero()).unwrap_err(),
            ScalarError::DivisionByZero
        );
        assert_eq!(
            x.div_rational(&ExactScalar::pi()).unwrap_err(),
            ScalarError::NonRationalDivisor
        );
    }

    #[test]
    fn display_round_trip_form() {
        let v = ExactScalar::sqrt(6)
            .add(&ExactScalar::pi())
            .add(&ExactScalar::from_int(2));
        // BTreeMap order: unit monomial, then pi, then sqrt(6)
        assert_eq!(v.to_string(), "2 + pi + sqrt(6)");
    }
}
