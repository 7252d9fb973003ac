//! Constraint sets C(δ,Q): integers where each listed generalized
//! polynomial has nearest-fraction inside an open window (−δ, δ).
//! An empty condition list means all of ℤ. Windows are open; values
//! landing exactly on ±δ are rejected.
//!
//! ```
//! use gpolylab::constraints::{c_enumerate, ConstraintSet};
//! use gpolylab::gpexpr::GpExpr;
//! use gpolylab::scalar::{ExactScalar, Rational};
//!
//! // n with {sqrt(2) n} within 1/10 of an integer
//! let c = ConstraintSet::single(
//!     GpExpr::monomial(ExactScalar::sqrt(2), 1),
//!     Rational::new(1.into(), 10.into()),
//! )
//! .unwrap();
//! assert_eq!(c_enumerate(&c, 1, 30, 1 << 10).unwrap(), vec![5, 12, 17, 24, 29]);
//! ```

use num_bigint::BigInt;
use serde_json::json;
use thiserror::Error;

use crate::gpeval::{self, EvalError};
use crate::gpexpr::GpExpr;
use crate::ipsets::{FSGenerators, FiniteIndexSet, IpError};
use crate::scalar::Rational;

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("window width must lie in (0, 1/2)")]
    BadDelta,
    #[error("range [{lo}, {hi}] exceeds enumeration budget {budget}")]
    RangeBudget { lo: i64, hi: i64, budget: u64 },
    #[error("empty range: lo > hi")]
    EmptyRange,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ip(#[from] IpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub expr: GpExpr,
    pub delta: Rational,
}

/// ∩ {n : {q(n)} ∈ (−δ, δ)} over the listed conditions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    conditions: Vec<Condition>,
}

impl ConstraintSet {
    /// No conditions: all integers.
    pub fn all_integers() -> Self {
        ConstraintSet { conditions: vec![] }
    }

    pub fn new(conditions: Vec<Condition>) -> Result<Self, ConstraintError> {
        for c in &conditions {
            check_delta(&c.delta)?;
        }
        Ok(ConstraintSet { conditions })
    }

    pub fn single(expr: GpExpr, delta: Rational) -> Result<Self, ConstraintError> {
        ConstraintSet::new(vec![Condition { expr, delta }])
    }

    pub fn push(&mut self, expr: GpExpr, delta: Rational) -> Result<(), ConstraintError> {
        check_delta(&delta)?;
        self.conditions.push(Condition { expr, delta });
        Ok(())
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn is_unconstrained(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .conditions
            .iter()
            .map(|c| json!({ "expr": c.expr.print(), "delta": c.delta.to_string() }))
            .collect::<Vec<_>>())
    }
}

fn check_delta(delta: &Rational) -> Result<(), ConstraintError> {
    let zero = Rational::from_integer(0.into());
    let half = Rational::new(1.into(), 2.into());
    if *delta > zero && *delta < half {
        Ok(())
    } else {
        Err(ConstraintError::BadDelta)
    }
}

/// All conditions hold at n, decided exactly.
pub fn c_membership_big(n: &BigInt, c: &ConstraintSet) -> Result<bool, ConstraintError> {
    for cond in c.conditions() {
        let value = gpeval::eval_real(&cond.expr, n)?;
        if !gpeval::frac_in_window(&value, &cond.delta)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn c_membership(n: i64, c: &ConstraintSet) -> Result<bool, ConstraintError> {
    c_membership_big(&BigInt::from(n), c)
}

/// Exactly the members in [lo, hi], sorted.
pub fn c_enumerate(
    c: &ConstraintSet,
    lo: i64,
    hi: i64,
    budget: u64,
) -> Result<Vec<i64>, ConstraintError> {
    if lo > hi {
        return Err(ConstraintError::EmptyRange);
    }
    let span = (hi as i128 - lo as i128 + 1) as u64;
    if span > budget {
        return Err(ConstraintError::RangeBudget { lo, hi, budget });
    }
    let mut out = Vec::new();
    for n in lo..=hi {
        if c_membership(n, c)? {
            out.push(n);
        }
    }
    Ok(out)
}

/// Filter intersection: concatenated condition lists.
pub fn c_intersect(a: &ConstraintSet, b: &ConstraintSet) -> ConstraintSet {
    let mut conditions = a.conditions.clone();
    conditions.extend(b.conditions.iter().cloned());
    ConstraintSet { conditions }
}

/// An α with n_α ∈ C, searched in increasing bitmask order (so small
/// supports come first); `None` when the budget runs out.
pub fn ip_intersection_witness(
    c: &ConstraintSet,
    g: &FSGenerators,
    budget: u64,
) -> Result<Option<FiniteIndexSet>, ConstraintError> {
    let depth = g.len().min(62);
    let top: u64 = if depth >= 63 { u64::MAX } else { (1u64 << depth) - 1 };
    let limit = top.min(budget);
    for mask in 1..=limit {
        let alpha = FiniteIndexSet::from_bitmask(mask).unwrap();
        let n = crate::ipsets::n_alpha(g, &alpha)?;
        if c_membership(n, c)? {
            return Ok(Some(alpha));
        }
    }
    Ok(None)
}
