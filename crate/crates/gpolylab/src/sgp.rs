//! Normal form for the special integer-valued fragment: integer-linear
//! combinations of brackets over products of nested L-chains, plus an
//! integer polynomial part.
//!
//! `L(a₁n^{j₁}, …, a_l n^{j_l}) = a₁n^{j₁}·ni(L(a₂n^{j₂}, …))`, with the
//! single-entry chain being the bare monomial. The recognizer accepts
//! exactly this shape (after canonicalization) and the one stated
//! rewrite: `ni(a·ni(b·n^k))` collapses to `ni(a·b·n^k)` on the
//! constraint set where the three window conditions hold.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::constraints::{ConstraintError, ConstraintSet};
use crate::gpeval::{self, EvalError};
use crate::gpexpr::GpExpr;
use crate::scalar::{ExactScalar, Rational};

#[derive(Debug, Error)]
pub enum SgpError {
    #[error("expression outside the recognized normal-form fragment: {0}")]
    UnsupportedPattern(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// One nested chain: levels (a_t, j_t) from the outermost head inward.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LChain {
    pub levels: Vec<(ExactScalar, u32)>,
}

impl LChain {
    pub fn degree(&self) -> u32 {
        self.levels.iter().map(|(_, j)| j).sum()
    }

    /// Product of the level coefficients: the leading coefficient.
    pub fn leading(&self) -> ExactScalar {
        let mut acc = ExactScalar::one();
        for (a, _) in &self.levels {
            acc = acc.mul(a);
        }
        acc
    }

    /// Exact chain value at the integer m.
    pub fn eval_at(&self, m: &BigInt) -> Result<ExactScalar, EvalError> {
        self.suffix_value(0, m)
    }

    /// `L(a_t m^{j_t}, …, a_l m^{j_l})` for the suffix starting at level t
    /// (0-based).
    pub fn suffix_value(&self, t: usize, m: &BigInt) -> Result<ExactScalar, EvalError> {
        let (a, j) = &self.levels[t];
        let head = a.mul(&ExactScalar::from_bigint(m.pow(*j)));
        if t + 1 == self.levels.len() {
            Ok(head)
        } else {
            let inner = self.suffix_value(t + 1, m)?;
            let bracket = gpeval::nearest_int(&inner)?;
            Ok(head.mul(&ExactScalar::from_bigint(bracket)))
        }
    }

    /// The chain as an expression in n, suffix starting at level t.
    pub fn suffix_expr(&self, t: usize) -> GpExpr {
        let (a, j) = &self.levels[t];
        let head = GpExpr::monomial(a.clone(), *j);
        if t + 1 == self.levels.len() {
            head
        } else {
            GpExpr::product(vec![head, GpExpr::ni(self.suffix_expr(t + 1))])
        }
    }

    pub fn to_expr(&self) -> GpExpr {
        self.suffix_expr(0)
    }
}

/// One summand `coeff · ni(∏ chains)` with integer coeff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SgpTerm {
    pub coeff: BigInt,
    pub chains: Vec<LChain>,
}

impl SgpTerm {
    pub fn degree(&self) -> u32 {
        self.chains.iter().map(LChain::degree).sum()
    }

    /// Leading coefficient of the bracket content: product over chains.
    pub fn leading(&self) -> ExactScalar {
        let mut acc = ExactScalar::one();
        for c in &self.chains {
            acc = acc.mul(&c.leading());
        }
        acc
    }

    pub fn content_expr(&self) -> GpExpr {
        GpExpr::product(self.chains.iter().map(LChain::to_expr).collect())
    }

    pub fn to_expr(&self) -> GpExpr {
        let bracket = GpExpr::ni(self.content_expr());
        let c = ExactScalar::from_bigint(self.coeff.clone());
        if self.coeff == BigInt::one() {
            bracket
        } else {
            GpExpr::ScalarMul(c, Box::new(bracket))
        }
    }
}

/// `Σ coeff·ni(∏ chains) + Σ c·n^k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SgpForm {
    pub terms: Vec<SgpTerm>,
    pub poly: Vec<(BigInt, u32)>,
}

impl SgpForm {
    pub fn degree(&self) -> u32 {
        let t = self
            .terms
            .iter()
            .filter(|t| !t.coeff.is_zero())
            .map(SgpTerm::degree)
            .max()
            .unwrap_or(0);
        let p = self
            .poly
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(_, k)| *k)
            .max()
            .unwrap_or(0);
        t.max(p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_zero())
            && self.poly.iter().all(|(c, _)| c.is_zero())
    }

    pub fn to_expr(&self) -> GpExpr {
        let mut parts: Vec<GpExpr> = Vec::new();
        for (c, k) in &self.poly {
            if !c.is_zero() {
                parts.push(GpExpr::monomial(ExactScalar::from_bigint(c.clone()), *k));
            }
        }
        for t in &self.terms {
            if !t.coeff.is_zero() {
                parts.push(t.to_expr());
            }
        }
        if parts.is_empty() {
            GpExpr::zero()
        } else {
            GpExpr::sum(parts)
        }
    }

    /// Merge identical bracket products and poly powers; drop zeros;
    /// sort deterministically.
    pub fn normalize(mut self) -> SgpForm {
        self.terms.sort_by(|a, b| a.chains.cmp(&b.chains));
        let mut terms: Vec<SgpTerm> = Vec::new();
        for t in self.terms {
            if let Some(last) = terms.last_mut() {
                if last.chains == t.chains {
                    last.coeff += t.coeff;
                    continue;
                }
            }
            terms.push(t);
        }
        terms.retain(|t| !t.coeff.is_zero());
        self.poly.sort_by_key(|(_, k)| *k);
        let mut poly: Vec<(BigInt, u32)> = Vec::new();
        for (c, k) in self.poly {
            if let Some(last) = poly.last_mut() {
                if last.1 == k {
                    last.0 += c;
                    continue;
                }
            }
            poly.push((c, k));
        }
        poly.retain(|(c, _)| !c.is_zero());
        SgpForm { terms, poly }
    }

    /// Syntactic subtraction: identical bracket products cancel by
    /// coefficient arithmetic; distinct brackets never cancel.
    pub fn sub(&self, other: &SgpForm) -> SgpForm {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| SgpTerm {
            coeff: -t.coeff.clone(),
            chains: t.chains.clone(),
        }));
        let mut poly = self.poly.clone();
        poly.extend(other.poly.iter().map(|(c, k)| (-c.clone(), *k)));
        SgpForm { terms, poly }.normalize()
    }
}

/// Recognize the normal form of a canonical expression, applying the
/// bracket-collapse rewrite where it fires; the returned constraint set
/// carries the windows under which the rewritten form equals the input.
pub fn to_sgp_normal(expr: &GpExpr) -> Result<(SgpForm, ConstraintSet), SgpError> {
    let canon = expr.canonicalize();
    let mut form = SgpForm::default();
    let mut cset = ConstraintSet::all_integers();
    let parts: Vec<&GpExpr> = match &canon {
        GpExpr::Sum(ps) => ps.iter().collect(),
        other => vec![other],
    };
    for part in parts {
        if part.is_zero() {
            continue;
        }
        let (coeff, npow, brackets) = split_term(part)?;
        let c = coeff
            .as_rational()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer());
        let Some(c) = c else {
            return Err(SgpError::UnsupportedPattern(format!(
                "non-integer top-level coefficient in '{}'",
                part.print()
            )));
        };
        if brackets.is_empty() {
            if npow == 0 {
                return Err(SgpError::UnsupportedPattern(
                    "constant term outside a bracket".into(),
                ));
            }
            form.poly.push((c, npow));
            continue;
        }
        let mut chains = Vec::new();
        for (idx, b) in brackets.iter().enumerate() {
            let inner = match b {
                GpExpr::NearestInt(inner) => inner,
                GpExpr::Floor(_) => {
                    return Err(SgpError::UnsupportedPattern(
                        "floor brackets are outside the normal-form fragment".into(),
                    ))
                }
                other => {
                    return Err(SgpError::UnsupportedPattern(format!(
                        "unexpected factor '{}'",
                        other.print()
                    )))
                }
            };
            let mut chain = chain_of(inner)?;
            // a lone bracket with no monomial is the bracket content
            // itself; in every other case each bracket factor needs an
            // explicit head so the product of chain values matches, with
            // the term's monomial absorbed into the first head
            if npow > 0 || brackets.len() > 1 {
                let head_pow = if idx == 0 { npow } else { 0 };
                chain.levels.insert(0, (ExactScalar::one(), head_pow));
            }
            chains.push(collapse_chain(chain, &mut cset)?);
        }
        form.terms.push(SgpTerm { coeff: c, chains });
    }
    Ok((form.normalize(), cset))
}

/// Decompose a canonical term into (scalar coeff, n-power, bracket factors).
fn split_term(e: &GpExpr) -> Result<(ExactScalar, u32, Vec<GpExpr>), SgpError> {
    match e {
        GpExpr::Monomial { coeff, power } => Ok((coeff.clone(), *power, vec![])),
        GpExpr::NearestInt(_) | GpExpr::Floor(_) => {
            Ok((ExactScalar::one(), 0, vec![e.clone()]))
        }
        GpExpr::ScalarMul(c, inner) => {
            let (ic, ip, ib) = split_term(inner)?;
            Ok((c.mul(&ic), ip, ib))
        }
        GpExpr::Product(parts) => {
            let mut coeff = ExactScalar::one();
            let mut npow = 0;
            let mut brackets = Vec::new();
            for p in parts {
                let (c, k, b) = split_term(p)?;
                coeff = coeff.mul(&c);
                npow += k;
                brackets.extend(b);
            }
            Ok((coeff, npow, brackets))
        }
        GpExpr::Sum(_) => Err(SgpError::UnsupportedPattern(
            "sum where a product term was expected".into(),
        )),
    }
}

/// Bracket content as a chain: a single canonical term whose factors
/// nest one bracket at a time.
fn chain_of(inner: &GpExpr) -> Result<LChain, SgpError> {
    let (coeff, npow, brackets) = split_term(inner)?;
    match brackets.len() {
        0 => Ok(LChain { levels: vec![(coeff, npow)] }),
        1 => {
            let sub = match &brackets[0] {
                GpExpr::NearestInt(i) => chain_of(i)?,
                _ => {
                    return Err(SgpError::UnsupportedPattern(
                        "floor bracket inside a chain".into(),
                    ))
                }
            };
            let mut levels = vec![(coeff, npow)];
            levels.extend(sub.levels);
            Ok(LChain { levels })
        }
        _ => Err(SgpError::UnsupportedPattern(
            "product of brackets inside a single bracket level".into(),
        )),
    }
}

/// Apply the collapse rewrite to a chain of the exact shape
/// `[(a, 0), (b, k)]`: with integer a the identity `ni(a·ni(x)) = a·ni(x)`
/// cannot be used here (the coefficient sits inside the bracket), so only
/// non-integer heads collapse, under the three window conditions with
/// rational δ ≤ 1/(4|a|).
fn collapse_chain(chain: LChain, cset: &mut ConstraintSet) -> Result<LChain, SgpError> {
    if chain.levels.len() != 2 {
        return Ok(chain);
    }
    let (a, j1) = &chain.levels[0];
    let (b, k) = &chain.levels[1];
    if *j1 != 0 || *k == 0 {
        return Ok(chain);
    }
    if a.as_rational().map(|r| r.is_one()).unwrap_or(false) {
        return Ok(chain);
    }
    let quarter = Rational::new(1.into(), 4.into());
    let ab = a.mul(b);
    cset.push(GpExpr::monomial(ab.clone(), *k), quarter.clone())?;
    cset.push(
        GpExpr::ScalarMul(a.clone(), Box::new(GpExpr::ni(GpExpr::monomial(b.clone(), *k)))),
        quarter.clone(),
    )?;
    // rational upper bound on |a| from a certified enclosure
    let abs_a = a.abs().map_err(EvalError::from)?;
    let upper = if let Some(r) = abs_a.as_rational() {
        r
    } else {
        abs_a.enclosure(64).hi
    };
    let delta_b = if upper <= Rational::from_integer(1.into()) {
        quarter
    } else {
        (Rational::from_integer(1.into()) / upper) * Rational::new(1.into(), 4.into())
    };
    cset.push(GpExpr::monomial(b.clone(), *k), delta_b)?;
    Ok(LChain { levels: vec![(ab, *k)] })
}
