//! Rigorous evaluation: nearest-integer and floor brackets on exact scalars,
//! fractional parts, integer evaluation of generalized polynomial
//! expressions, and the bracket-sum identity checks.
//!
//! ```
//! use gpolylab::scalar::ExactScalar;
//! use gpolylab::gpeval::{nearest_int, frac, Flavor};
//!
//! // ni(7/2) = 3: the half-tie resolves to the smaller integer.
//! assert_eq!(nearest_int(&ExactScalar::from_ratio(7, 2)).unwrap(), 3.into());
//! let f = frac(&ExactScalar::from_ratio(7, 2), Flavor::Nearest).unwrap();
//! assert_eq!(f.value, ExactScalar::from_ratio(1, 2));
//! ```

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::gpexpr::GpExpr;
use crate::scalar::{precision_cap, ExactScalar, Rational, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("tie undecidable: {0} is suspected to sit exactly on a bracket boundary")]
    TieUndecidable(String),
    #[error("expression is not syntactically integer-valued")]
    NotIntegerValued,
    #[error("integer out of machine range: {0}")]
    Overflow(String),
}

/// Bracket flavor: nearest-integer `ni` with fraction in `(-1/2, 1/2]`,
/// or floor `fl` with fraction in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Nearest,
    Floor,
}

/// An exact fractional part `a - bracket(a)` together with its flavor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracValue {
    pub value: ExactScalar,
    pub flavor: Flavor,
}

/// `ceil` of a scalar, decided exactly for rationals and by interval
/// refinement otherwise. Irrational canonical forms are never integers, so
/// refinement terminates below the precision cap in practice.
fn ceil_scalar(a: &ExactScalar) -> Result<BigInt, EvalError> {
    if let Some(r) = a.as_rational() {
        return Ok(r.ceil().to_integer());
    }
    let cap = precision_cap();
    let mut bits = 32u32;
    loop {
        let iv = a.enclosure(bits);
        let clo = iv.lo.ceil().to_integer();
        let chi = iv.hi.ceil().to_integer();
        if clo == chi {
            return Ok(clo);
        }
        if bits >= cap {
            return Err(EvalError::TieUndecidable(a.to_string()));
        }
        bits = (bits * 2).min(cap);
    }
}

fn floor_scalar(a: &ExactScalar) -> Result<BigInt, EvalError> {
    if let Some(r) = a.as_rational() {
        return Ok(r.floor().to_integer());
    }
    Ok(-ceil_scalar(&a.neg())?)
}

/// The minimum nearest integer: `ni(a) = ceil(a - 1/2)`, so exact
/// half-integer ties resolve downward and `a - ni(a)` lies in `(-1/2, 1/2]`.
pub fn nearest_int(a: &ExactScalar) -> Result<BigInt, EvalError> {
    let shifted = a.sub(&ExactScalar::from_ratio(1, 2));
    ceil_scalar(&shifted)
}

/// The greatest integer not exceeding `a`.
pub fn floor_int(a: &ExactScalar) -> Result<BigInt, EvalError> {
    floor_scalar(a)
}

pub fn bracket(a: &ExactScalar, flavor: Flavor) -> Result<BigInt, EvalError> {
    match flavor {
        Flavor::Nearest => nearest_int(a),
        Flavor::Floor => floor_int(a),
    }
}

/// Exact fractional part: `a = bracket(a) + frac(a)`.
pub fn frac(a: &ExactScalar, flavor: Flavor) -> Result<FracValue, EvalError> {
    let b = bracket(a, flavor)?;
    Ok(FracValue { value: a.sub(&ExactScalar::from_bigint(b)), flavor })
}

/// Real-valued evaluation of an expression at integer `n`.
pub fn eval_real(expr: &GpExpr, n: &BigInt) -> Result<ExactScalar, EvalError> {
    Ok(match expr {
        GpExpr::Monomial { coeff, power } => {
            let npow = Rational::from_integer(n.pow(*power));
            coeff.mul_rational(&npow)
        }
        GpExpr::Sum(parts) => {
            let mut acc = ExactScalar::zero();
            for p in parts {
                acc = acc.add(&eval_real(p, n)?);
            }
            acc
        }
        GpExpr::Product(parts) => {
            let mut acc = ExactScalar::one();
            for p in parts {
                acc = acc.mul(&eval_real(p, n)?);
            }
            acc
        }
        GpExpr::NearestInt(inner) => {
            ExactScalar::from_bigint(nearest_int(&eval_real(inner, n)?)?)
        }
        GpExpr::Floor(inner) => ExactScalar::from_bigint(floor_int(&eval_real(inner, n)?)?),
        GpExpr::ScalarMul(c, inner) => c.mul(&eval_real(inner, n)?),
    })
}

/// True when the expression is guaranteed integer-valued by its outermost
/// structure (outer brackets, integer-coefficient polynomials, and integer
/// combinations thereof).
pub fn integer_valued(expr: &GpExpr) -> bool {
    fn scalar_is_integer(c: &ExactScalar) -> bool {
        c.as_integer().is_some()
    }
    match expr {
        GpExpr::Monomial { coeff, .. } => scalar_is_integer(coeff),
        GpExpr::Sum(parts) | GpExpr::Product(parts) => parts.iter().all(integer_valued),
        GpExpr::NearestInt(_) | GpExpr::Floor(_) => true,
        GpExpr::ScalarMul(c, inner) => scalar_is_integer(c) && integer_valued(inner),
    }
}

/// Exact integer value of an integer-valued expression at `n`, with
/// machine-range overflow detection on the result.
pub fn eval_int(expr: &GpExpr, n: i64) -> Result<i64, EvalError> {
    let v = eval_int_big(expr, &BigInt::from(n))?;
    v.to_i64().ok_or_else(|| EvalError::Overflow(v.to_string()))
}

pub fn eval_int_big(expr: &GpExpr, n: &BigInt) -> Result<BigInt, EvalError> {
    if !integer_valued(expr) {
        return Err(EvalError::NotIntegerValued);
    }
    let v = eval_real(expr, n)?;
    v.as_integer().ok_or(EvalError::NotIntegerValued)
}

/// Outcome of the bracket-sum identity check for one tuple of reals:
/// whether each flavor's hypothesis holds and whether each conclusion holds,
/// computed independently.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BracketSumReport {
    pub condition_nearest: bool,
    pub identity_nearest: bool,
    pub condition_floor: bool,
    pub identity_floor: bool,
}

/// Checks, for `r_1..r_k`, the hypothesis `-1/2 < {r_1}+...+{r_k} <= 1/2`
/// against the conclusion `ni(sum) = ni(r_1)+...+ni(r_k)`, and the floor
/// analogue `0 <= {{r_1}}+...+{{r_k}} < 1` against
/// `fl(sum) = fl(r_1)+...+fl(r_k)`.
pub fn bracket_sum_check(rs: &[ExactScalar]) -> Result<BracketSumReport, EvalError> {
    assert!(!rs.is_empty(), "need k >= 1");
    let mut sum = ExactScalar::zero();
    let mut frac_sum_nearest = ExactScalar::zero();
    let mut frac_sum_floor = ExactScalar::zero();
    let mut ni_sum = BigInt::zero();
    let mut fl_sum = BigInt::zero();
    for r in rs {
        sum = sum.add(r);
        frac_sum_nearest = frac_sum_nearest.add(&frac(r, Flavor::Nearest)?.value);
        frac_sum_floor = frac_sum_floor.add(&frac(r, Flavor::Floor)?.value);
        ni_sum += nearest_int(r)?;
        fl_sum += floor_int(r)?;
    }
    let half = ExactScalar::from_ratio(1, 2);
    // -1/2 < S <= 1/2  <=>  ni(S) = 0 with the downward tie rule
    let cond_nearest = frac_sum_nearest.sub(&half).sign_le_zero()?
        && frac_sum_nearest.add(&half).sign_gt_zero()?;
    let one = ExactScalar::one();
    let cond_floor =
        frac_sum_floor.sign_ge_zero()? && frac_sum_floor.sub(&one).sign_lt_zero()?;
    Ok(BracketSumReport {
        condition_nearest: cond_nearest,
        identity_nearest: nearest_int(&sum)? == ni_sum,
        condition_floor: cond_floor,
        identity_floor: floor_int(&sum)? == fl_sum,
    })
}

// Small sign helpers used for window tests.
pub(crate) trait SignChecks {
    fn sign_gt_zero(&self) -> Result<bool, EvalError>;
    fn sign_lt_zero(&self) -> Result<bool, EvalError>;
    fn sign_ge_zero(&self) -> Result<bool, EvalError>;
    fn sign_le_zero(&self) -> Result<bool, EvalError>;
}

impl SignChecks for ExactScalar {
    fn sign_gt_zero(&self) -> Result<bool, EvalError> {
        Ok(self.sign()? == crate::scalar::Sign::Positive)
    }
    fn sign_lt_zero(&self) -> Result<bool, EvalError> {
        Ok(self.sign()? == crate::scalar::Sign::Negative)
    }
    fn sign_ge_zero(&self) -> Result<bool, EvalError> {
        Ok(self.sign()? != crate::scalar::Sign::Negative)
    }
    fn sign_le_zero(&self) -> Result<bool, EvalError> {
        Ok(self.sign()? != crate::scalar::Sign::Positive)
    }
}

/// `|frac_nearest(a)| < delta`, decided exactly.
pub fn frac_in_window(a: &ExactScalar, delta: &Rational) -> Result<bool, EvalError> {
    let f = frac(a, Flavor::Nearest)?.value;
    let d = ExactScalar::from_rational(delta.clone());
    Ok(f.sub(&d).sign_lt_zero()? && f.add(&d).sign_gt_zero()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(p, d)
    }

    #[test]
    fn nearest_ties_resolve_down() {
        assert_eq!(nearest_int(&q(7, 2)).unwrap(), BigInt::from(3));
        assert_eq!(nearest_int(&q(-1, 2)).unwrap(), BigInt::from(-1));
        assert_eq!(frac(&q(7, 2), Flavor::Nearest).unwrap().value, q(1, 2));
        assert_eq!(frac(&q(-1, 2), Flavor::Nearest).unwrap().value, q(1, 2));
    }

    #[test]
    fn nearest_irrational() {
        assert_eq!(nearest_int(&ExactScalar::sqrt(2)).unwrap(), BigInt::from(1));
        let five_sqrt2 = ExactScalar::sqrt(2).mul_rational(&Rational::from_integer(5.into()));
        assert_eq!(nearest_int(&five_sqrt2).unwrap(), BigInt::from(7));
        let expect = five_sqrt2.sub(&ExactScalar::from_int(7));
        assert_eq!(frac(&five_sqrt2, Flavor::Nearest).unwrap().value, expect);
    }

    #[test]
    fn floor_examples() {
        assert_eq!(floor_int(&q(5, 2)).unwrap(), BigInt::from(2));
        assert_eq!(floor_int(&q(-1, 2)).unwrap(), BigInt::from(-1));
        assert_eq!(floor_int(&ExactScalar::pi()).unwrap(), BigInt::from(3));
        assert_eq!(frac(&q(5, 2), Flavor::Floor).unwrap().value, q(1, 2));
    }

    #[test]
    fn bracket_sum_examples() {
        let rep = bracket_sum_check(&[q(1, 5), q(1, 5)]).unwrap();
        assert!(rep.condition_nearest && rep.identity_nearest);
        let rep = bracket_sum_check(&[q(3, 10), q(3, 10)]).unwrap();
        assert!(!rep.condition_nearest && !rep.identity_nearest);
        let rep = bracket_sum_check(&[q(3, 5), q(7, 10)]).unwrap();
        assert!(!rep.condition_floor && !rep.identity_floor);
    }
}
