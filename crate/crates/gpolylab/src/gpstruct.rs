//! Structural calculus on generalized polynomials: leading-coefficient
//! sums, non-degeneracy, the equivalence relation and weight vectors with
//! their well-ordering, shift thresholds, symbolic derivatives with their
//! constraint sets, goodness and properness, and shifted families.
//!
//! ```
//! use gpolylab::gpexpr::GpExpr;
//! use gpolylab::gpstruct::{leading_sum, weight_vector};
//!
//! // the two leading contributions cancel exactly: A(p) = 2*pi - 2*pi = 0
//! let p = GpExpr::parse("n + n*ni(2*pi*n - ni(2*pi*n))").unwrap();
//! assert!(leading_sum(&p).is_zero());
//!
//! let system: Vec<GpExpr> = ["n", "2*n", "n^2"]
//!     .iter()
//!     .map(|s| GpExpr::parse(s).unwrap())
//!     .collect();
//! assert_eq!(weight_vector(&system).unwrap().counts(), &[2, 1]);
//! ```

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::constraints::{c_intersect, ConstraintError, ConstraintSet};
use crate::gpeval::{self, EvalError, Flavor};
use crate::gpexpr::GpExpr;
use crate::scalar::{ExactScalar, Rational, ScalarError, Sign};
use crate::sgp::{self, LChain, SgpError, SgpForm};

/// Default comparison strength for the `>>` and `≈` discipline.
pub const N0: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApproxParams {
    pub n: u64,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams { n: N0 }
    }
}

#[derive(Debug, Error)]
pub enum GpStructError {
    #[error(transparent)]
    Sgp(#[from] SgpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("shift threshold requires degree >= 2, got {0}")]
    ThresholdDegree(u32),
    #[error("degenerate threshold: the weighted leading sums cancel")]
    DegenerateThreshold,
    #[error("shift {0} is not good for this expression")]
    MNotGood(i64),
    #[error("|{m}| does not exceed the shift threshold")]
    MTooSmall { m: i64 },
    #[error("window width must lie in (0, 1/4]")]
    BadDelta,
    #[error("bracket split is not admissible for shift {m}: {detail}")]
    SplitNotAdmissible { m: i64, detail: String },
    #[error("leading-sum law violated: A(D) is not within 1/(2N) of deg(p)*m*A(p)")]
    ApproxViolated,
    #[error("derivative degree did not drop (internal invariant)")]
    DegreeNotReduced,
    #[error("leading-sum separation failed for pair ({0}, {1}) vs ({2}, {3})")]
    SeparationFailed(usize, usize, usize, usize),
}

/// Counts of equivalence classes per degree, ω₁ first, trailing zeros
/// trimmed.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct WeightVector(Vec<usize>);

impl WeightVector {
    pub fn from_counts(mut counts: Vec<usize>) -> Self {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        WeightVector(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    /// ω at 1-based degree d (0 beyond the stored prefix).
    pub fn at_degree(&self, d: usize) -> usize {
        if d == 0 {
            0
        } else {
            self.0.get(d - 1).copied().unwrap_or(0)
        }
    }
}

/// Comparison from the largest differing degree downward.
pub fn pet_compare(a: &WeightVector, b: &WeightVector) -> Ordering {
    let len = a.0.len().max(b.0.len());
    for j in (0..len).rev() {
        let wa = a.0.get(j).copied().unwrap_or(0);
        let wb = b.0.get(j).copied().unwrap_or(0);
        if wa != wb {
            return wa.cmp(&wb);
        }
    }
    Ordering::Equal
}

/// A(p): the sum of the coefficients of the maximal formal-degree
/// components, computed multilinearly on the canonical tree. Brackets
/// pass through; only summands achieving the maximum formal degree
/// contribute.
pub fn leading_sum(p: &GpExpr) -> ExactScalar {
    fn go(e: &GpExpr) -> (u32, ExactScalar) {
        match e {
            GpExpr::Monomial { coeff, power } => {
                if coeff.is_zero() {
                    (0, ExactScalar::zero())
                } else {
                    (*power, coeff.clone())
                }
            }
            GpExpr::Sum(parts) => {
                let pairs: Vec<(u32, ExactScalar)> = parts.iter().map(go).collect();
                let d = pairs.iter().map(|(d, _)| *d).max().unwrap_or(0);
                let mut lead = ExactScalar::zero();
                for (pd, pl) in pairs {
                    if pd == d {
                        lead = lead.add(&pl);
                    }
                }
                (d, lead)
            }
            GpExpr::Product(parts) => {
                let mut d = 0;
                let mut lead = ExactScalar::one();
                for p in parts {
                    let (pd, pl) = go(p);
                    d += pd;
                    lead = lead.mul(&pl);
                }
                (d, lead)
            }
            GpExpr::NearestInt(inner) | GpExpr::Floor(inner) => go(inner),
            GpExpr::ScalarMul(c, inner) => {
                let (d, l) = go(inner);
                (d, c.mul(&l))
            }
        }
    }
    go(&p.canonicalize()).1
}

fn difference(p: &GpExpr, q: &GpExpr) -> GpExpr {
    GpExpr::Sum(vec![
        p.clone(),
        GpExpr::ScalarMul(ExactScalar::from_int(-1), Box::new(q.clone())),
    ])
    .canonicalize()
}

/// All A(p_i) and all A(p_i − p_j) nonzero.
pub fn nondegenerate(ps: &[GpExpr]) -> Result<bool, GpStructError> {
    for p in ps {
        if leading_sum(p).sign()? == Sign::Zero {
            return Ok(false);
        }
    }
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            if i != j && leading_sum(&difference(&ps[i], &ps[j])).sign()? == Sign::Zero {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn equivalent_forms(a: &SgpForm, b: &SgpForm) -> bool {
    if a.degree() != b.degree() {
        return false;
    }
    let diff = a.sub(b);
    diff.is_zero() || diff.degree() < a.degree()
}

/// p ~ q: equal degree and the syntactic difference of normal forms has
/// strictly smaller degree.
pub fn equivalent(p: &GpExpr, q: &GpExpr) -> Result<bool, GpStructError> {
    let (fp, _) = sgp::to_sgp_normal(p)?;
    let (fq, _) = sgp::to_sgp_normal(q)?;
    Ok(equivalent_forms(&fp, &fq))
}

/// Class counts per degree for a finite system.
pub fn weight_vector(ps: &[GpExpr]) -> Result<WeightVector, GpStructError> {
    let forms: Vec<SgpForm> = ps
        .iter()
        .map(|p| sgp::to_sgp_normal(p).map(|(f, _)| f))
        .collect::<Result<_, _>>()?;
    let mut reps: Vec<usize> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (i, f) in forms.iter().enumerate() {
        let d = f.degree() as usize;
        if d == 0 {
            continue;
        }
        if reps.iter().any(|&r| equivalent_forms(&forms[r], f)) {
            continue;
        }
        reps.push(i);
        if counts.len() < d {
            counts.resize(d, 0);
        }
        counts[d - 1] += 1;
    }
    Ok(WeightVector::from_counts(counts))
}

/// Per-term (c_k, deg(p_k), A(p_k)) triples of a normal form, with the
/// bracket-free polynomial part read as c·ni(n^k).
fn term_triples(form: &SgpForm) -> Vec<(BigInt, u32, ExactScalar)> {
    let mut out = Vec::new();
    for t in &form.terms {
        out.push((t.coeff.clone(), t.degree(), t.leading()));
    }
    for (c, k) in &form.poly {
        out.push((c.clone(), *k, ExactScalar::one()));
    }
    out
}

/// m(h) = 2·Σ|c_k·deg(p_k)·A(p_k)| / |Σ c_k·deg(p_k)·A(p_k)|.
pub fn m_threshold(h: &GpExpr) -> Result<ExactScalar, GpStructError> {
    let (form, _) = sgp::to_sgp_normal(h)?;
    if form.degree() < 2 {
        return Err(GpStructError::ThresholdDegree(form.degree()));
    }
    let mut num = ExactScalar::zero();
    let mut den = ExactScalar::zero();
    for (c, d, a) in term_triples(&form) {
        let weighted = a.mul_rational(&Rational::from_integer(c * BigInt::from(d)));
        num = num.add(&weighted.abs()?);
        den = den.add(&weighted);
    }
    if den.sign()? == Sign::Zero {
        return Err(GpStructError::DegenerateThreshold);
    }
    let num = num.mul_rational(&Rational::from_integer(2.into()));
    Ok(num.div_exact(&den.abs()?)?)
}

fn frac_is_half(v: &ExactScalar) -> bool {
    match v.as_rational() {
        Some(r) => (r - Rational::new(1.into(), 2.into())).is_integer(),
        // an irrational canonical value never lands on a half-integer
        None => false,
    }
}

/// All chain-suffix values and full product values at m avoid the
/// half-integer boundary.
pub fn good(m: i64, p: &GpExpr) -> Result<bool, GpStructError> {
    let (form, _) = sgp::to_sgp_normal(p)?;
    let mb = BigInt::from(m);
    for t in &form.terms {
        for chain in &t.chains {
            for s in 0..chain.levels.len() {
                if frac_is_half(&chain.suffix_value(s, &mb)?) {
                    return Ok(false);
                }
            }
        }
        if t.chains.len() > 1 {
            let mut prod = ExactScalar::one();
            for chain in &t.chains {
                prod = prod.mul(&chain.eval_at(&mb)?);
            }
            if frac_is_half(&prod) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_good_delta(delta: &Rational) -> Result<(), GpStructError> {
    let zero = Rational::from_integer(0.into());
    let quarter = Rational::new(1.into(), 4.into());
    if *delta > zero && *delta <= quarter {
        Ok(())
    } else {
        Err(GpStructError::BadDelta)
    }
}

/// C(δ,Q) with Q the chain suffixes (and full products) of p; every
/// member is good, since windows within (−1/4, 1/4) avoid 1/2.
pub fn good_set(p: &GpExpr, delta: &Rational) -> Result<ConstraintSet, GpStructError> {
    check_good_delta(delta)?;
    let (form, mut cset) = sgp::to_sgp_normal(p)?;
    let mut qs: BTreeSet<GpExpr> = BTreeSet::new();
    for t in &form.terms {
        for chain in &t.chains {
            for s in 0..chain.levels.len() {
                qs.insert(chain.suffix_expr(s).canonicalize());
            }
        }
        if t.chains.len() > 1 {
            qs.insert(t.content_expr().canonicalize());
        }
    }
    for q in qs {
        cset.push(q, delta.clone())?;
    }
    Ok(cset)
}

/// `a ≈_N b`: equal, or both |a| and |b| exceed N·|a−b| with the
/// difference nonzero.
pub fn approx_check(
    a: &ExactScalar,
    b: &ExactScalar,
    params: &ApproxParams,
) -> Result<bool, GpStructError> {
    let diff = a.sub(b);
    if diff.sign()? == Sign::Zero {
        return Ok(true);
    }
    let scaled = diff
        .abs()?
        .mul_rational(&Rational::from_integer(BigInt::from(params.n)));
    let ok_a = a.abs()?.sub(&scaled).sign()? == Sign::Positive;
    let ok_b = b.abs()?.sub(&scaled).sign()? == Sign::Positive;
    Ok(ok_a && ok_b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivativeResult {
    pub d: GpExpr,
    pub c1: ConstraintSet,
    pub m: i64,
}

/// One expansion atom: coeff · n^npow · optional bracket factor.
#[derive(Debug, Clone)]
struct Atom {
    coeff: ExactScalar,
    npow: u32,
    bracket: Option<GpExpr>,
}

impl Atom {
    fn to_expr(&self) -> GpExpr {
        let mono = GpExpr::monomial(self.coeff.clone(), self.npow);
        match &self.bracket {
            None => mono,
            Some(b) => GpExpr::product(vec![mono, b.clone()]),
        }
    }
}

/// `L(n+m)` written as principal part (the suffix chain itself, kept
/// implicit) + constants + mixed, valid on the accumulated windows.
struct Expansion {
    consts: ExactScalar,
    mixed: Vec<Atom>,
}

/// Windows and per-split slack data gathered during expansion; δ is
/// chosen afterwards from the total window count.
#[derive(Default)]
struct SplitLog {
    windows: Vec<GpExpr>,
    // (|frac of the constant block|-carrier, windowed part count)
    splits: Vec<(ExactScalar, usize)>,
}

/// Split an expansion into bracketed parts: returns the integer value of
/// the bracketed constant block and the mixed atoms re-wrapped as
/// single-bracket atoms.
fn split_expansion(
    exp: &Expansion,
    principal_expr: &GpExpr,
    log: &mut SplitLog,
) -> Result<(BigInt, Vec<Atom>), GpStructError> {
    let const_is_zero = exp.consts.sign()? == Sign::Zero;
    if const_is_zero && exp.mixed.is_empty() {
        return Ok((BigInt::zero(), vec![]));
    }
    let mut parts = 1; // the principal bracket
    log.windows.push(principal_expr.clone());
    let mut wrapped = Vec::with_capacity(exp.mixed.len());
    for atom in &exp.mixed {
        let expr = atom.to_expr().canonicalize();
        log.windows.push(expr.clone());
        parts += 1;
        wrapped.push(Atom {
            coeff: ExactScalar::one(),
            npow: 0,
            bracket: Some(GpExpr::ni(expr)),
        });
    }
    let k = gpeval::nearest_int(&exp.consts)?;
    let gamma = gpeval::frac(&exp.consts, Flavor::Nearest)?.value;
    log.splits.push((gamma, parts));
    Ok((k, wrapped))
}

/// Expand the suffix chain at argument n+m into an atom list equal to it
/// on the logged windows.
fn expand_chain(
    levels: &[(ExactScalar, u32)],
    m: &BigInt,
    log: &mut SplitLog,
) -> Result<Expansion, GpStructError> {
    let (a, j) = &levels[0];
    let j = *j;
    if levels.len() == 1 {
        // binomial a(n+m)^j
        if j == 0 {
            return Err(GpStructError::Sgp(SgpError::UnsupportedPattern(
                "constant innermost chain level".into(),
            )));
        }
        let mut mixed = Vec::new();
        for i in 1..j {
            let c = binomial(BigInt::from(j), BigInt::from(i)) * m.pow(j - i);
            mixed.push(Atom {
                coeff: a.mul_rational(&Rational::from_integer(c)),
                npow: i,
                bracket: None,
            });
        }
        return Ok(Expansion {
            consts: a.mul(&ExactScalar::from_bigint(m.pow(j))),
            mixed,
        });
    }
    if levels[1..].iter().any(|(_, jj)| *jj == 0 && levels.len() > 2) {
        return Err(GpStructError::Sgp(SgpError::UnsupportedPattern(
            "constant mid-chain level".into(),
        )));
    }
    let inner = expand_chain(&levels[1..], m, log)?;
    let suffix = LChain { levels: levels[1..].to_vec() };
    let principal_expr = suffix.to_expr().canonicalize();
    let (k, inner_mixed) = split_expansion(&inner, &principal_expr, log)?;
    let principal_bracket = GpExpr::ni(principal_expr);

    let mut mixed = Vec::new();
    let mut consts = ExactScalar::zero();
    let k_scalar = ExactScalar::from_bigint(k);
    for i in 0..=j {
        let head = a.mul_rational(&Rational::from_integer(
            binomial(BigInt::from(j), BigInt::from(i)) * m.pow(j - i),
        ));
        // head × principal bracket
        if i < j {
            mixed.push(Atom {
                coeff: head.clone(),
                npow: i,
                bracket: Some(principal_bracket.clone()),
            });
        }
        // head × bracketed constant block
        if !k_scalar.is_zero() {
            let c = head.mul(&k_scalar);
            if i == 0 {
                consts = consts.add(&c);
            } else {
                mixed.push(Atom { coeff: c, npow: i, bracket: None });
            }
        }
        // head × each mixed bracket
        for w in &inner_mixed {
            mixed.push(Atom {
                coeff: head.clone(),
                npow: i,
                bracket: w.bracket.clone(),
            });
        }
    }
    Ok(Expansion { consts, mixed })
}

/// D(p, m) with its constraint set C₁. Requires m good; for degree ≥ 2
/// additionally |m| above the shift threshold. Degree-1 inputs yield
/// D = 0 with the additivity constraint set.
pub fn derivative(
    p: &GpExpr,
    m: i64,
    params: &ApproxParams,
) -> Result<DerivativeResult, GpStructError> {
    derivative_with_cap(p, m, params, None)
}

/// Like `derivative`, with an optional upper bound on the window width δ.
pub fn derivative_with_cap(
    p: &GpExpr,
    m: i64,
    params: &ApproxParams,
    delta_cap: Option<&Rational>,
) -> Result<DerivativeResult, GpStructError> {
    let (form, cset0) = sgp::to_sgp_normal(p)?;
    let deg = form.degree();
    if !good(m, p)? {
        return Err(GpStructError::MNotGood(m));
    }
    if deg >= 2 {
        let threshold = m_threshold(p)?;
        let abs_m = ExactScalar::from_int(m.abs());
        if abs_m.sub(&threshold).sign()? != Sign::Positive {
            return Err(GpStructError::MTooSmall { m });
        }
    }
    let mb = BigInt::from(m);
    let mut log = SplitLog::default();
    let mut d_parts: Vec<GpExpr> = Vec::new();

    // bracket-free polynomial part: exact binomial, no constraints
    for (c, k) in &form.poly {
        for i in 1..*k {
            let coeff = binomial(BigInt::from(*k), BigInt::from(i)) * mb.pow(k - i) * c;
            d_parts.push(GpExpr::monomial(ExactScalar::from_bigint(coeff), i));
        }
    }

    // chain terms: expand, split the top bracket, keep the mixed parts
    for t in &form.terms {
        if t.chains.len() != 1 {
            return Err(GpStructError::Sgp(SgpError::UnsupportedPattern(
                "derivative of a multi-chain bracket product".into(),
            )));
        }
        let chain = &t.chains[0];
        let exp = expand_chain(&chain.levels, &mb, &mut log)?;
        let principal_expr = chain.to_expr().canonicalize();
        let (k_top, wrapped) = split_expansion(&exp, &principal_expr, &mut log)?;
        // the bracketed constant block must reproduce the term at m
        let at_m = gpeval::nearest_int(&chain.eval_at(&mb)?)?;
        if k_top != at_m {
            return Err(GpStructError::SplitNotAdmissible {
                m,
                detail: format!(
                    "constant block rounds to {k_top}, term value at m is {at_m}"
                ),
            });
        }
        let c = ExactScalar::from_bigint(t.coeff.clone());
        for w in wrapped {
            let b = w.bracket.expect("wrapped atoms carry a bracket");
            d_parts.push(if t.coeff.is_one() {
                b
            } else {
                GpExpr::ScalarMul(c.clone(), Box::new(b))
            });
        }
    }

    // choose δ from the total window count, then verify each split's
    // slack: |frac of const block| + parts·δ < 1/2
    let delta_default = Rational::new(1.into(), BigInt::from(8 * (1 + log.windows.len() as u64)));
    let delta = match delta_cap {
        Some(cap) if *cap < delta_default => cap.clone(),
        _ => delta_default,
    };
    let zero = Rational::from_integer(0.into());
    if delta <= zero {
        return Err(GpStructError::BadDelta);
    }
    let half = ExactScalar::from_ratio(1, 2);
    for (gamma, parts) in &log.splits {
        let budget = half.sub(&ExactScalar::from_rational(
            delta.clone() * Rational::from_integer(BigInt::from(*parts as u64)),
        ));
        if budget.sub(&gamma.abs()?).sign()? != Sign::Positive {
            return Err(GpStructError::SplitNotAdmissible {
                m,
                detail: format!(
                    "constant-block fraction leaves no slack for {parts} windowed parts"
                ),
            });
        }
    }
    let mut c1 = cset0;
    let mut seen: BTreeSet<GpExpr> = BTreeSet::new();
    for w in &log.windows {
        let w = w.canonicalize();
        if seen.insert(w.clone()) {
            c1.push(w, delta.clone())?;
        }
    }

    let d = GpExpr::sum(d_parts).canonicalize();
    if deg >= 1 && !d.is_zero() && d.degree() >= deg {
        return Err(GpStructError::DegreeNotReduced);
    }
    if deg >= 2 {
        let target = leading_sum(p).mul_rational(&Rational::from_integer(
            BigInt::from(deg) * BigInt::from(m),
        ));
        let actual = leading_sum(&d);
        let doubled = ApproxParams { n: params.n.saturating_mul(2) };
        if !approx_check(&actual, &target, &doubled)? {
            return Err(GpStructError::ApproxViolated);
        }
    }
    Ok(DerivativeResult { d, c1, m })
}

/// Intersection of the per-pair derivative constraint sets: on it every
/// p(n+m) − p(n) − p(m) equals the computed derivative.
pub fn proper_set(
    ps: &[GpExpr],
    ms: &[i64],
    delta: &Rational,
) -> Result<ConstraintSet, GpStructError> {
    check_good_delta(delta)?;
    let params = ApproxParams::default();
    let mut out = ConstraintSet::all_integers();
    for p in ps {
        for &m in ms {
            let r = derivative_with_cap(p, m, &params, Some(delta))?;
            out = c_intersect(&out, &r.c1);
        }
    }
    Ok(out)
}

/// The family q_{i,j} = D(p_i, k_j) + p_i − p_1 with the shared
/// constraint set; asserts |A(q)| > N and pairwise |A(q − q')| > N.
pub fn shifted_system(
    ps: &[GpExpr],
    shifts: &[i64],
    params: &ApproxParams,
) -> Result<(Vec<GpExpr>, ConstraintSet), GpStructError> {
    let mut qs: Vec<GpExpr> = Vec::new();
    let mut labels: Vec<(usize, usize)> = Vec::new();
    let mut c1 = ConstraintSet::all_integers();
    for (i, p) in ps.iter().enumerate() {
        for (j, &k) in shifts.iter().enumerate() {
            let r = derivative(p, k, params)?;
            c1 = c_intersect(&c1, &r.c1);
            let q = GpExpr::Sum(vec![
                r.d,
                p.clone(),
                GpExpr::ScalarMul(ExactScalar::from_int(-1), Box::new(ps[0].clone())),
            ])
            .canonicalize();
            qs.push(q);
            labels.push((i, j));
        }
    }
    let n_scalar = ExactScalar::from_bigint(BigInt::from(params.n));
    for (x, q) in qs.iter().enumerate() {
        let a = leading_sum(q).abs()?;
        if a.sub(&n_scalar).sign()? != Sign::Positive {
            let (i, j) = labels[x];
            return Err(GpStructError::SeparationFailed(i, j, i, j));
        }
    }
    for x in 0..qs.len() {
        for y in (x + 1)..qs.len() {
            let a = leading_sum(&difference(&qs[x], &qs[y])).abs()?;
            if a.sub(&n_scalar).sign()? != Sign::Positive {
                let (i, j) = labels[x];
                let (i2, j2) = labels[y];
                return Err(GpStructError::SeparationFailed(i, j, i2, j2));
            }
        }
    }
    Ok((qs, c1))
}

/// Integer rescaling helper: k·p stays in the integer-combination
/// fragment and multiplies every leading sum by k.
pub fn rescale(p: &GpExpr, k: i64) -> GpExpr {
    GpExpr::ScalarMul(ExactScalar::from_int(k), Box::new(p.clone())).canonicalize()
}
