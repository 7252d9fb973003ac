//! Finite-sums combinatorics: FS enumeration over generator prefixes,
//! sub-IP extraction, divisibility refinement, window-cell refinement,
//! image additivity, spectra, and scaling.
//!
//! Infinite IP-sets are represented by finite generator prefixes; every
//! statement is depth-parameterized and budgeted. `NotFound` outcomes are
//! legitimate: a bounded search over a finite prefix may miss witnesses
//! that exist at greater depth.
//!
//! ```
//! use gpolylab::ipsets::{fs_enumerate, FSGenerators};
//!
//! let g = FSGenerators::new(vec![1, 2, 4]).unwrap();
//! let set = fs_enumerate(&g, 3, 1 << 10).unwrap();
//! assert_eq!(set.values, vec![1, 2, 3, 4, 5, 6, 7]);
//! ```

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::gpeval::{self, EvalError};
use crate::gpexpr::GpExpr;
use crate::scalar::{ExactScalar, Rational};

#[derive(Debug, Error)]
pub enum IpError {
    #[error("index set must be non-empty and strictly increasing from 1")]
    BadIndexSet,
    #[error("generator entries must be nonzero")]
    ZeroGenerator,
    #[error("index {0} out of range for {1} generators")]
    IndexOutOfRange(usize, usize),
    #[error("enumeration budget exceeded: need {need}, budget {budget}")]
    BudgetExceeded { need: u64, budget: u64 },
    #[error("insufficient generators for divisibility refinement mod {0}")]
    InsufficientGenerators(i64),
    #[error("window width must lie in (0, 1/2)")]
    BadWindow,
    #[error("generator {0} not divisible by {1}")]
    NotDivisible(i64, i64),
    #[error("integer overflow in finite sum")]
    Overflow,
    #[error("refinement requires k >= 1")]
    BadCount,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Support set α: sorted distinct indices, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FiniteIndexSet(Vec<usize>);

impl FiniteIndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self, IpError> {
        if indices.is_empty() || indices[0] == 0 {
            return Err(IpError::BadIndexSet);
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IpError::BadIndexSet);
        }
        Ok(FiniteIndexSet(indices))
    }

    /// Index set from a bitmask: bit i (from 0) selects index i+1.
    pub fn from_bitmask(mask: u64) -> Result<Self, IpError> {
        if mask == 0 {
            return Err(IpError::BadIndexSet);
        }
        let indices = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        Ok(FiniteIndexSet(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn max_index(&self) -> usize {
        *self.0.last().unwrap()
    }

    pub fn disjoint(&self, other: &FiniteIndexSet) -> bool {
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            if x == y {
                return false;
            } else if x < y {
                a.next();
            } else {
                b.next();
            }
        }
        true
    }

    pub fn union(&self, other: &FiniteIndexSet) -> FiniteIndexSet {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        FiniteIndexSet(v)
    }
}

/// Ordered generator list; repetitions allowed, entries nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FSGenerators(Vec<i64>);

impl FSGenerators {
    pub fn new(values: Vec<i64>) -> Result<Self, IpError> {
        if values.iter().any(|&v| v == 0) {
            return Err(IpError::ZeroGenerator);
        }
        Ok(FSGenerators(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

/// The finite sums of a generator prefix, indexed by support sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FSSet {
    pub entries: Vec<(FiniteIndexSet, i64)>,
    /// deduplicated, sorted value set
    pub values: Vec<i64>,
}

impl FSSet {
    fn from_entries(entries: Vec<(FiniteIndexSet, i64)>) -> FSSet {
        let mut values: Vec<i64> = entries.iter().map(|(_, v)| *v).collect();
        values.sort_unstable();
        values.dedup();
        FSSet { entries, values }
    }
}

/// `n_α = Σ_{i∈α} n_i`.
pub fn n_alpha(g: &FSGenerators, alpha: &FiniteIndexSet) -> Result<i64, IpError> {
    let mut sum: i64 = 0;
    for &i in alpha.indices() {
        let v = *g
            .values()
            .get(i - 1)
            .ok_or(IpError::IndexOutOfRange(i, g.len()))?;
        sum = sum.checked_add(v).ok_or(IpError::Overflow)?;
    }
    Ok(sum)
}

/// All `n_α` for non-empty α ⊆ {1..depth}, in bitmask order.
pub fn fs_enumerate(g: &FSGenerators, depth: usize, budget: u64) -> Result<FSSet, IpError> {
    if depth > g.len() {
        return Err(IpError::IndexOutOfRange(depth, g.len()));
    }
    if depth >= 63 {
        return Err(IpError::BudgetExceeded { need: u64::MAX, budget });
    }
    let need = (1u64 << depth) - 1;
    if need > budget {
        return Err(IpError::BudgetExceeded { need, budget });
    }
    let mut entries = Vec::with_capacity(need as usize);
    for mask in 1..=need {
        let alpha = FiniteIndexSet::from_bitmask(mask).unwrap();
        let value = n_alpha(g, &alpha)?;
        entries.push((alpha, value));
    }
    Ok(FSSet::from_entries(entries))
}

/// Generators at indices outside the union of the used supports; order kept.
pub fn sub_ip_excluding(g: &FSGenerators, used: &[FiniteIndexSet]) -> FSGenerators {
    let mut excluded = vec![false; g.len()];
    for alpha in used {
        for &i in alpha.indices() {
            if i <= g.len() {
                excluded[i - 1] = true;
            }
        }
    }
    let kept = g
        .values()
        .iter()
        .zip(&excluded)
        .filter(|(_, &e)| !e)
        .map(|(&v, _)| v)
        .collect();
    FSGenerators(kept)
}

/// Group generators into consecutive disjoint blocks whose sums are
/// divisible by `m`, by pigeonhole on prefix sums mod m: among any |m|+1
/// prefixes two agree, so a left-to-right scan always closes a block
/// within |m| steps.
pub fn divisible_refine(g: &FSGenerators, m: i64) -> Result<FSGenerators, IpError> {
    if m == 0 {
        return Err(IpError::ZeroGenerator);
    }
    let modulus = m.unsigned_abs() as i64;
    let mut out = Vec::new();
    let mut start = 0usize;
    while start < g.len() {
        // residue -> prefix length at which it was seen (0 = empty prefix)
        let mut seen: BTreeMap<i64, usize> = BTreeMap::new();
        seen.insert(0, start);
        let mut sum: i64 = 0;
        let mut closed = false;
        for j in start..g.len() {
            sum = sum.checked_add(g.values()[j]).ok_or(IpError::Overflow)?;
            let r = sum.rem_euclid(modulus);
            if let Some(&i) = seen.get(&r) {
                // block (i..=j) has sum divisible by m; the prefix up to i
                // is dropped (its indices stay unused, keeping blocks
                // disjoint and consecutive)
                let block: i64 = g.values()[i..=j].iter().sum();
                debug_assert_eq!(block.rem_euclid(modulus), 0);
                if block != 0 {
                    out.push(block);
                }
                start = j + 1;
                closed = true;
                break;
            }
            seen.insert(r, j + 1);
        }
        if !closed {
            break;
        }
    }
    if out.is_empty() {
        return Err(IpError::InsufficientGenerators(m));
    }
    Ok(FSGenerators(out))
}

/// Window conditions of the partition-refinement search: for each pair
/// `(b, a)` both `{a·n}` and `{b·⌈a·n⌉}` must land in `(−ε, ε)`.
#[derive(Debug, Clone, Default)]
pub struct CellSpec {
    pub first: Vec<(ExactScalar, ExactScalar)>,
    pub second: Vec<(ExactScalar, ExactScalar)>,
}

impl CellSpec {
    pub fn pairs(&self) -> impl Iterator<Item = &(ExactScalar, ExactScalar)> {
        self.first.iter().chain(self.second.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty() && self.second.is_empty()
    }

    /// All window conditions at the integer n.
    pub fn holds_at(&self, n: i64, eps: &Rational) -> Result<bool, IpError> {
        let nn = ExactScalar::from_int(n);
        for (b, a) in self.pairs() {
            let an = a.mul(&nn);
            if !gpeval::frac_in_window(&an, eps)? {
                return Ok(false);
            }
            let bracket = gpeval::nearest_int(&an)?;
            let bx = b.mul(&ExactScalar::from_bigint(bracket));
            if !gpeval::frac_in_window(&bx, eps)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Search FS(g) for `k` values with pairwise-disjoint supports such that
/// every finite sum of the chosen values satisfies all window conditions.
///
/// Candidates are sums of consecutive generator blocks, examined in
/// increasing magnitude; consecutive blocks keep the disjoint-support
/// bookkeeping exact while covering every value for repetition-heavy
/// generator lists. Returns `None` (not found) at budget exhaustion.
pub fn cell_refine(
    g: &FSGenerators,
    spec: &CellSpec,
    eps: &Rational,
    k: usize,
    budget: u64,
) -> Result<Option<FSGenerators>, IpError> {
    let half = Rational::new(1.into(), 2.into());
    if eps <= &Rational::from_integer(0.into()) || eps >= &half {
        return Err(IpError::BadWindow);
    }
    if k == 0 {
        return Err(IpError::BadCount);
    }
    // candidate blocks (value, start, end exclusive)
    let mut blocks: Vec<(i64, usize, usize)> = Vec::new();
    for start in 0..g.len() {
        let mut sum: i64 = 0;
        for end in start..g.len() {
            sum = match sum.checked_add(g.values()[end]) {
                Some(s) => s,
                None => break,
            };
            if sum != 0 {
                blocks.push((sum, start, end + 1));
            }
        }
    }
    blocks.sort_by_key(|&(v, s, e)| (v.unsigned_abs(), s, e));

    let mut cost: u64 = 0;
    let mut window_memo: BTreeMap<i64, bool> = BTreeMap::new();
    let mut check = |n: i64, cost: &mut u64| -> Result<Option<bool>, IpError> {
        *cost += 1;
        if *cost > budget {
            return Ok(None);
        }
        if let Some(&ok) = window_memo.get(&n) {
            return Ok(Some(ok));
        }
        let ok = spec.holds_at(n, eps)?;
        window_memo.insert(n, ok);
        Ok(Some(ok))
    };

    // depth-first choice of k non-overlapping blocks in sorted order;
    // `sums` holds every non-empty subset sum of the chosen values
    fn dfs(
        blocks: &[(i64, usize, usize)],
        from: usize,
        chosen: &mut Vec<(i64, usize, usize)>,
        sums: &mut Vec<i64>,
        k: usize,
        check: &mut dyn FnMut(i64) -> Result<Option<bool>, IpError>,
    ) -> Result<Option<Vec<i64>>, IpError> {
        if chosen.len() == k {
            return Ok(Some(chosen.iter().map(|&(v, _, _)| v).collect()));
        }
        for idx in from..blocks.len() {
            let (v, s, e) = blocks[idx];
            if chosen.iter().any(|&(_, cs, ce)| s < ce && cs < e) {
                continue;
            }
            let mut new_sums = vec![v];
            for &old in sums.iter() {
                match old.checked_add(v) {
                    Some(t) => new_sums.push(t),
                    None => return Err(IpError::Overflow),
                }
            }
            let mut all_ok = true;
            for &t in &new_sums {
                match check(t)? {
                    Some(true) => {}
                    Some(false) => {
                        all_ok = false;
                        break;
                    }
                    None => return Ok(None), // budget exhausted
                }
            }
            if !all_ok {
                continue;
            }
            chosen.push((v, s, e));
            let base = sums.len();
            sums.extend(new_sums);
            if let Some(found) = dfs(blocks, idx + 1, chosen, sums, k, check)? {
                return Ok(Some(found));
            }
            sums.truncate(base);
            chosen.pop();
        }
        Ok(None)
    }

    let mut chosen = Vec::new();
    let mut sums = Vec::new();
    let result = dfs(&blocks, 0, &mut chosen, &mut sums, k, &mut |n| {
        check(n, &mut cost)
    })?;
    Ok(result.map(FSGenerators))
}

/// True iff `p(n_α) = Σ_{i∈α} p(n_i)` for every non-empty α ⊆ {1..depth}.
pub fn image_additivity_check(p: &GpExpr, g: &FSGenerators, depth: usize) -> Result<bool, IpError> {
    if depth > g.len() {
        return Err(IpError::IndexOutOfRange(depth, g.len()));
    }
    if depth >= 63 {
        return Err(IpError::BudgetExceeded { need: u64::MAX, budget: 1 << 62 });
    }
    let singles: Vec<i64> = g.values()[..depth]
        .iter()
        .map(|&v| gpeval::eval_int(p, v))
        .collect::<Result<_, _>>()?;
    for mask in 1u64..(1 << depth) {
        let alpha = FiniteIndexSet::from_bitmask(mask).unwrap();
        let n = n_alpha(g, &alpha)?;
        let image = gpeval::eval_int(p, n)?;
        let sum: i64 = alpha.indices().iter().map(|&i| singles[i - 1]).sum();
        if image != sum {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Divide every generator by `q`; each must already be divisible
/// (use `divisible_refine` first).
pub fn spectra_div(g: &FSGenerators, q: i64) -> Result<FSGenerators, IpError> {
    if q == 0 {
        return Err(IpError::ZeroGenerator);
    }
    let mut out = Vec::with_capacity(g.len());
    for &v in g.values() {
        if v % q != 0 {
            return Err(IpError::NotDivisible(v, q));
        }
        out.push(v / q);
    }
    Ok(FSGenerators(out))
}

/// Multiply every `n_α` by `q`. With `q = 0` the result is the degenerate
/// all-zero set; the caller decides whether that is meaningful.
pub fn scale_members(s: &FSSet, q: i64) -> Result<FSSet, IpError> {
    let mut entries = Vec::with_capacity(s.entries.len());
    for (alpha, v) in &s.entries {
        let scaled = v.checked_mul(q).ok_or(IpError::Overflow)?;
        entries.push((alpha.clone(), scaled));
    }
    Ok(FSSet::from_entries(entries))
}
