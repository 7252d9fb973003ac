//! Torus systems and recurrence desk checks: exact orbits for a circle
//! rotation and a degree-2 affine skew product, boundary-exact return
//! sets, grid-certified hitting sets, a polynomial multiple-recurrence
//! search, the descending-box refinement, and finite-sums witnesses
//! inside computed sets.
//!
//! All region tests are exact: coordinates live in the radical/π/e
//! scalar field and circle distances are decided through certified
//! fractional parts. Grid searches give one-sided evidence — reported
//! membership is certified, omissions are not.
//!
//! ```
//! use gpolylab::dynsim::{return_set, SystemDescriptor};
//! use gpolylab::scalar::{ExactScalar, Rational};
//!
//! let rot = SystemDescriptor::rotation(ExactScalar::sqrt(2));
//! let eps = Rational::new(1.into(), 10.into());
//! let returns = return_set(&rot, &[ExactScalar::zero()], &eps, 30).unwrap();
//! assert_eq!(returns, vec![5, 12, 17, 24, 29]);
//! ```

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::gpeval::{self, EvalError};
use crate::gpexpr::GpExpr;
use crate::ipsets::{FSGenerators, FiniteIndexSet};
use crate::scalar::{ExactScalar, Rational};

#[derive(Debug, Error)]
pub enum DynError {
    #[error("epsilon must lie in (0, 1/2)")]
    BadEpsilon,
    #[error("arc radius must lie in (0, 1/2)")]
    BadRadius,
    #[error("point/region dimension does not match the system")]
    DimensionMismatch,
    #[error("grid resolution must be at least 8 per coordinate")]
    GridTooCoarse,
    #[error("growth offsets must be non-decreasing")]
    BadGrowth,
    #[error("need one target region per polynomial")]
    ArityMismatch,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A rotation on T¹ or the affine skew T(x,y) = (x+α, y+2x+α) on T²;
/// the twist is chosen so that T^n(0,0) = (nα, n²α) exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemDescriptor {
    Rotation { alpha: ExactScalar },
    Skew2 { alpha: ExactScalar },
}

impl SystemDescriptor {
    pub fn rotation(alpha: ExactScalar) -> Self {
        SystemDescriptor::Rotation { alpha }
    }

    pub fn skew2(alpha: ExactScalar) -> Self {
        SystemDescriptor::Skew2 { alpha }
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemDescriptor::Rotation { .. } => 1,
            SystemDescriptor::Skew2 { .. } => 2,
        }
    }
}

/// Open arc on the circle; membership is decided mod 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub center: ExactScalar,
    pub radius: Rational,
}

/// Axis-aligned open box on T^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxRegion {
    pub arcs: Vec<Arc>,
}

fn check_radius(r: &Rational) -> Result<(), DynError> {
    let zero = Rational::from_integer(0.into());
    let half = Rational::new(1.into(), 2.into());
    if *r > zero && *r < half {
        Ok(())
    } else {
        Err(DynError::BadRadius)
    }
}

impl BoxRegion {
    pub fn new(arcs: Vec<Arc>) -> Result<Self, DynError> {
        for a in &arcs {
            check_radius(&a.radius)?;
        }
        Ok(BoxRegion { arcs })
    }

    pub fn dim(&self) -> usize {
        self.arcs.len()
    }

    /// Exact membership, per coordinate mod 1.
    pub fn contains(&self, x: &[ExactScalar]) -> Result<bool, DynError> {
        if x.len() != self.arcs.len() {
            return Err(DynError::DimensionMismatch);
        }
        for (v, a) in x.iter().zip(&self.arcs) {
            if !gpeval::frac_in_window(&v.sub(&a.center), &a.radius)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_epsilon(eps: &Rational) -> Result<(), DynError> {
    let zero = Rational::from_integer(0.into());
    let half = Rational::new(1.into(), 2.into());
    if *eps > zero && *eps < half {
        Ok(())
    } else {
        Err(DynError::BadEpsilon)
    }
}

/// T^n x in closed form: rotation x + nα; skew (x + nα, y + 2nx + n²α).
pub fn orbit_point(
    s: &SystemDescriptor,
    x: &[ExactScalar],
    n: &BigInt,
) -> Result<Vec<ExactScalar>, DynError> {
    if x.len() != s.dim() {
        return Err(DynError::DimensionMismatch);
    }
    let nn = ExactScalar::from_bigint(n.clone());
    match s {
        SystemDescriptor::Rotation { alpha } => Ok(vec![x[0].add(&nn.mul(alpha))]),
        SystemDescriptor::Skew2 { alpha } => {
            let n2 = ExactScalar::from_bigint(n * n);
            let two_n = ExactScalar::from_bigint(2 * n);
            Ok(vec![
                x[0].add(&nn.mul(alpha)),
                x[1].add(&two_n.mul(&x[0])).add(&n2.mul(alpha)),
            ])
        }
    }
}

/// ρ(T^n x, x) < ε for each coordinate of the displacement, decided
/// through the nearest-fraction window.
fn returns_within(
    s: &SystemDescriptor,
    x: &[ExactScalar],
    n: &BigInt,
    eps: &Rational,
) -> Result<bool, DynError> {
    let y = orbit_point(s, x, n)?;
    for (yi, xi) in y.iter().zip(x) {
        if !gpeval::frac_in_window(&yi.sub(xi), eps)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// {1 ≤ n ≤ N : ρ(T^n x, x) < ε}, boundary-exact.
pub fn return_set(
    s: &SystemDescriptor,
    x: &[ExactScalar],
    eps: &Rational,
    n_max: u64,
) -> Result<Vec<i64>, DynError> {
    check_epsilon(eps)?;
    let mut out = Vec::new();
    for n in 1..=n_max as i64 {
        if returns_within(s, x, &BigInt::from(n), eps)? {
            out.push(n);
        }
    }
    Ok(out)
}

/// Rational sample points strictly inside an arc: center + r(2i+1−g)/g.
fn arc_samples(a: &Arc, grid: u32) -> Vec<ExactScalar> {
    (0..grid)
        .map(|i| {
            let off = a.radius.clone()
                * Rational::new(
                    BigInt::from(2 * i as i64 + 1 - grid as i64),
                    BigInt::from(grid),
                );
            a.center.add(&ExactScalar::from_rational(off))
        })
        .collect()
}

fn box_samples(b: &BoxRegion, grid: u32) -> Vec<Vec<ExactScalar>> {
    let per: Vec<Vec<ExactScalar>> = b.arcs.iter().map(|a| arc_samples(a, grid)).collect();
    let mut out: Vec<Vec<ExactScalar>> = vec![vec![]];
    for coord in per {
        let mut next = Vec::with_capacity(out.len() * coord.len());
        for prefix in &out {
            for v in &coord {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// n ≤ N such that some grid point x ∈ U satisfies T^{p_t(n)}x ∈ V_t
/// for all t. Membership is certified; omissions are not claimed.
pub fn hitting_set(
    s: &SystemDescriptor,
    u: &BoxRegion,
    targets: &[BoxRegion],
    polys: &[GpExpr],
    n_max: u64,
    grid: u32,
) -> Result<Vec<i64>, DynError> {
    if grid < 8 {
        return Err(DynError::GridTooCoarse);
    }
    if polys.len() != targets.len() {
        return Err(DynError::ArityMismatch);
    }
    if u.dim() != s.dim() || targets.iter().any(|t| t.dim() != s.dim()) {
        return Err(DynError::DimensionMismatch);
    }
    let samples = box_samples(u, grid);
    let mut out = Vec::new();
    for n in 1..=n_max as i64 {
        let shifts: Vec<BigInt> = polys
            .iter()
            .map(|p| gpeval::eval_int_big(p, &BigInt::from(n)))
            .collect::<Result<_, _>>()?;
        'sample: for x in &samples {
            for (shift, v) in shifts.iter().zip(targets) {
                if !v.contains(&orbit_point(s, x, shift)?)? {
                    continue 'sample;
                }
            }
            out.push(n);
            break;
        }
    }
    Ok(out)
}

/// First (x, n) on the full-torus grid with ρ(T^{p_t(n)}x, x) < ε for
/// every t; `None` when the budget runs out first.
pub fn vdw_search(
    s: &SystemDescriptor,
    polys: &[GpExpr],
    eps: &Rational,
    n_max: u64,
    grid: u32,
    budget: u64,
) -> Result<Option<(Vec<ExactScalar>, i64)>, DynError> {
    check_epsilon(eps)?;
    if grid < 8 {
        return Err(DynError::GridTooCoarse);
    }
    let d = s.dim();
    let mut samples: Vec<Vec<ExactScalar>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for prefix in &samples {
            for i in 0..grid {
                let mut p = prefix.clone();
                p.push(ExactScalar::from_rational(Rational::new(
                    BigInt::from(i),
                    BigInt::from(grid),
                )));
                next.push(p);
            }
        }
        samples = next;
    }
    let mut spent: u64 = 0;
    for n in 1..=n_max as i64 {
        let shifts: Vec<BigInt> = polys
            .iter()
            .map(|p| gpeval::eval_int_big(p, &BigInt::from(n)))
            .collect::<Result<_, _>>()?;
        'sample: for x in &samples {
            if spent >= budget {
                return Ok(None);
            }
            spent += 1;
            for shift in &shifts {
                let y = orbit_point(s, x, shift)?;
                for (yi, xi) in y.iter().zip(x) {
                    if !gpeval::frac_in_window(&yi.sub(xi), eps)? {
                        continue 'sample;
                    }
                }
            }
            // re-certify before reporting, as an independent pass
            let ok = shifts.iter().try_fold(true, |acc, shift| {
                let y = orbit_point(s, x, shift)?;
                let mut all = acc;
                for (yi, xi) in y.iter().zip(x) {
                    all &= gpeval::frac_in_window(&yi.sub(xi), eps)?;
                }
                Ok::<bool, DynError>(all)
            })?;
            if ok {
                return Ok(Some((x.clone(), n)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub struct DescendResult {
    /// Final nested boxes, one per target.
    pub boxes: Vec<BoxRegion>,
    /// Chosen index sets α₁ < α₂ < …, meeting the growth condition.
    pub alphas: Vec<FiniteIndexSet>,
}

/// Forward image enclosure of a box under T^k: the rotation maps arcs
/// to arcs exactly; the skew shears, and Box((cx,cy),(rx,ry)) lands
/// inside Box(T^k(cx,cy), (rx, ry + 2|k|rx)).
fn image_fits(
    s: &SystemDescriptor,
    center: &[ExactScalar],
    radii: &[Rational],
    k: &BigInt,
    v: &BoxRegion,
) -> Result<bool, DynError> {
    let image = orbit_point(s, center, k)?;
    let grown: Vec<Rational> = match s {
        SystemDescriptor::Rotation { .. } => radii.to_vec(),
        SystemDescriptor::Skew2 { .. } => {
            let two_k = Rational::from_integer(2 * k.abs());
            vec![radii[0].clone(), radii[1].clone() + two_k * radii[0].clone()]
        }
    };
    let zero = Rational::from_integer(0.into());
    for ((u, a), r) in image.iter().zip(&v.arcs).zip(&grown) {
        let slack = a.radius.clone() - r.clone();
        if slack <= zero {
            return Ok(false);
        }
        if !gpeval::frac_in_window(&u.sub(&a.center), &slack)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The descending-box induction: at stage j pick an index block α_j of
/// g with |n_{α_j}| > |n_{α_{j−1}}| + r(|n_{α_{j−1}}|), then shrink
/// each box W_i around a grid point so that T^{p_i(n_{α_j})−j} W_i ⊆ V_i
/// exactly (image-enclosure containment). Earlier stages persist under
/// shrinking. `None` when no stage can be completed within budget —
/// the expected outcome on systems that are not weakly mixing.
pub fn descending_refine(
    s: &SystemDescriptor,
    polys: &[GpExpr],
    targets: &[BoxRegion],
    g: &FSGenerators,
    r: &[u64],
    depth: usize,
    grid: u32,
    budget: u64,
) -> Result<Option<DescendResult>, DynError> {
    if polys.len() != targets.len() || targets.is_empty() {
        return Err(DynError::ArityMismatch);
    }
    if targets.iter().any(|t| t.dim() != s.dim()) {
        return Err(DynError::DimensionMismatch);
    }
    if grid < 8 {
        return Err(DynError::GridTooCoarse);
    }
    if r.windows(2).any(|w| w[0] > w[1]) {
        return Err(DynError::BadGrowth);
    }
    // r(t): clamp to the last listed offset
    let growth = |t: u64| -> u64 {
        if r.is_empty() {
            0
        } else {
            let idx = (t as usize).min(r.len() - 1);
            r[idx]
        }
    };

    let mut boxes: Vec<(Vec<ExactScalar>, Vec<Rational>)> = targets
        .iter()
        .map(|t| {
            (
                t.arcs.iter().map(|a| a.center.clone()).collect(),
                t.arcs.iter().map(|a| a.radius.clone()).collect(),
            )
        })
        .collect();
    let mut alphas: Vec<FiniteIndexSet> = Vec::new();
    let mut prev_abs: u64 = 0;
    let mut prev_end: usize = 0; // last used generator index, 1-based
    let mut spent: u64 = 0;
    let gen_vals = g.values();

    for stage in 1..=depth {
        let mut advanced = false;
        'block: for start in (prev_end + 1)..=gen_vals.len() {
            for end in start..=gen_vals.len() {
                let n_alpha: i64 = gen_vals[start - 1..end].iter().sum();
                let need = prev_abs.saturating_add(growth(prev_abs));
                if n_alpha.unsigned_abs() <= need {
                    continue;
                }
                let shifts: Vec<BigInt> = polys
                    .iter()
                    .map(|p| {
                        gpeval::eval_int_big(p, &BigInt::from(n_alpha))
                            .map(|v| v - BigInt::from(stage as i64))
                    })
                    .collect::<Result<_, _>>()?;
                // search a shrink center among grid points of each box
                let mut new_boxes = Vec::with_capacity(boxes.len());
                for (i, (center, radii)) in boxes.iter().enumerate() {
                    let candidate_box = BoxRegion::new(
                        center
                            .iter()
                            .zip(radii)
                            .map(|(c, rr)| Arc { center: c.clone(), radius: rr.clone() })
                            .collect(),
                    )?;
                    let mut found: Option<(Vec<ExactScalar>, Vec<Rational>)> = None;
                    'sample: for x in box_samples(&candidate_box, grid) {
                        if spent >= budget {
                            return Ok(None);
                        }
                        spent += 1;
                        // sample offset from the box center is rational,
                        // so the room inside the current box is exact
                        let half = Rational::new(1.into(), 2.into());
                        let mut radii_try: Vec<Rational> = radii
                            .iter()
                            .map(|rr| rr.clone() * Rational::new(1.into(), BigInt::from(grid)))
                            .collect();
                        for _ in 0..12 {
                            if image_fits(s, &x, &radii_try, &shifts[i], &targets[i])? {
                                found = Some((x.clone(), radii_try));
                                break 'sample;
                            }
                            for rr in &mut radii_try {
                                *rr *= half.clone();
                            }
                        }
                    }
                    match found {
                        Some(b) => new_boxes.push(b),
                        None => continue 'block,
                    }
                }
                boxes = new_boxes;
                alphas.push(FiniteIndexSet::new((start..=end).collect()).unwrap());
                prev_abs = n_alpha.unsigned_abs();
                prev_end = end;
                advanced = true;
                break 'block;
            }
        }
        if !advanced {
            return Ok(None);
        }
        let _ = stage;
    }
    let out_boxes = boxes
        .into_iter()
        .map(|(center, radii)| {
            BoxRegion::new(
                center
                    .into_iter()
                    .zip(radii)
                    .map(|(c, rr)| Arc { center: c, radius: rr })
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(DescendResult { boxes: out_boxes, alphas }))
}

/// k generators from the list (repetition allowed) with every finite
/// sum also in the list — evidence that the set contains an FS chain.
/// Depth-first over non-decreasing tuples in ascending value order.
pub fn fs_witness_in_set(
    members: &[i64],
    k: usize,
    budget: u64,
) -> Result<Option<FSGenerators>, DynError> {
    let set: std::collections::BTreeSet<i64> = members.iter().copied().collect();
    let values: Vec<i64> = set.iter().copied().filter(|v| *v != 0).collect();
    let mut spent: u64 = 0;

    fn dfs(
        values: &[i64],
        set: &std::collections::BTreeSet<i64>,
        chosen: &mut Vec<i64>,
        sums: &Vec<i64>,
        k: usize,
        spent: &mut u64,
        budget: u64,
    ) -> Option<Vec<i64>> {
        if chosen.len() == k {
            return Some(chosen.clone());
        }
        let min_next = chosen.last().copied().unwrap_or(i64::MIN);
        for &v in values.iter().filter(|v| **v >= min_next) {
            if *spent >= budget {
                return None;
            }
            *spent += 1;
            let mut new_sums = Vec::with_capacity(sums.len() * 2 + 1);
            let mut ok = set.contains(&v);
            if ok {
                new_sums.push(v);
                for s in sums {
                    match s.checked_add(v) {
                        Some(t) if set.contains(&t) => new_sums.push(t),
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok {
                let mut all = sums.clone();
                all.extend(new_sums);
                chosen.push(v);
                if let Some(hit) = dfs(values, set, chosen, &all, k, spent, budget) {
                    return Some(hit);
                }
                chosen.pop();
            }
        }
        None
    }

    if k == 0 {
        return Ok(None);
    }
    let mut chosen = Vec::new();
    match dfs(&values, &set, &mut chosen, &vec![], k, &mut spent, budget) {
        Some(gens) => Ok(Some(FSGenerators::new(gens).expect("nonzero by filter"))),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{c_enumerate, ConstraintSet};

    fn pt(vals: &[i64]) -> Vec<ExactScalar> {
        vals.iter().map(|v| ExactScalar::from_int(*v)).collect()
    }

    fn arc(c: Rational, r: Rational) -> Arc {
        Arc { center: ExactScalar::from_rational(c), radius: r }
    }

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn orbit_closed_forms() {
        let rot = SystemDescriptor::rotation(ExactScalar::sqrt(2));
        let x = orbit_point(&rot, &pt(&[0]), &BigInt::from(29)).unwrap();
        // {29*sqrt(2)} is within 1/50 of 0
        assert!(gpeval::frac_in_window(&x[0], &rat(1, 50)).unwrap());

        let skew = SystemDescriptor::skew2(ExactScalar::sqrt(2));
        let a = ExactScalar::sqrt(2);
        let y = orbit_point(&skew, &pt(&[0, 0]), &BigInt::from(7)).unwrap();
        assert_eq!(y[0], a.mul(&ExactScalar::from_int(7)));
        assert_eq!(y[1], a.mul(&ExactScalar::from_int(49)));
    }

    #[test]
    fn orbit_matches_stepping() {
        let a = ExactScalar::sqrt(3);
        let skew = SystemDescriptor::skew2(a.clone());
        let mut x = vec![ExactScalar::from_ratio(1, 3), ExactScalar::from_ratio(1, 7)];
        let start = x.clone();
        for n in 1..=50i64 {
            // one step of T(x,y) = (x+α, y+2x+α)
            let nx = x[0].add(&a);
            let ny = x[1].add(&x[0].mul(&ExactScalar::from_int(2))).add(&a);
            x = vec![nx, ny];
            let closed = orbit_point(&skew, &start, &BigInt::from(n)).unwrap();
            // equal mod 1 in each coordinate
            for (u, v) in x.iter().zip(&closed) {
                let d = u.sub(v);
                assert!(d.as_integer().is_some(), "mismatch at n = {n}");
            }
        }
    }

    #[test]
    fn rotation_return_matches_enumeration() {
        let rot = SystemDescriptor::rotation(ExactScalar::sqrt(2));
        let got = return_set(&rot, &pt(&[0]), &rat(1, 10), 30).unwrap();
        let c = ConstraintSet::single(
            GpExpr::monomial(ExactScalar::sqrt(2), 1),
            rat(1, 10),
        )
        .unwrap();
        assert_eq!(got, c_enumerate(&c, 1, 30, 1 << 10).unwrap());
        assert!(got.contains(&29));
    }

    #[test]
    fn skew_return_matches_enumeration() {
        let skew = SystemDescriptor::skew2(ExactScalar::sqrt(2));
        let got = return_set(&skew, &pt(&[0, 0]), &rat(1, 10), 200).unwrap();
        let mut c = ConstraintSet::single(
            GpExpr::monomial(ExactScalar::sqrt(2), 1),
            rat(1, 10),
        )
        .unwrap();
        c.push(GpExpr::monomial(ExactScalar::sqrt(2), 2), rat(1, 10)).unwrap();
        assert_eq!(got, c_enumerate(&c, 1, 200, 1 << 10).unwrap());
    }

    #[test]
    fn hitting_set_full_torus() {
        let rot = SystemDescriptor::rotation(ExactScalar::sqrt(2));
        let big = BoxRegion::new(vec![arc(rat(0, 1), rat(49, 100))]).unwrap();
        let got = hitting_set(&rot, &big, &[big.clone()], &[GpExpr::var()], 10, 8).unwrap();
        assert_eq!(got, (1..=10).collect::<Vec<i64>>());
    }

    #[test]
    fn hitting_set_vs_return_set() {
        let rot = SystemDescriptor::rotation(ExactScalar::sqrt(2));
        let u = BoxRegion::new(vec![arc(rat(0, 1), rat(1, 20))]).unwrap();
        let hits = hitting_set(&rot, &u, &[u.clone()], &[GpExpr::var()], 100, 16).unwrap();
        let returns = return_set(&rot, &pt(&[0]), &rat(1, 10), 100).unwrap();
        // a grid hit x, x+nα both within 1/20 of 0 forces ρ(nα, 0) < 1/10
        for n in &hits {
            assert!(returns.contains(n), "uncertified hit {n}");
        }
    }

    #[test]
    fn vdw_finds_smallest_rotation_return() {
        let rot = SystemDescriptor::rotation(ExactScalar::sqrt(2));
        let hit = vdw_search(&rot, &[GpExpr::var()], &rat(1, 10), 100, 8, 1 << 16)
            .unwrap()
            .unwrap();
        assert_eq!(hit.1, 5);
        // duplicated targets change nothing
        let hit2 = vdw_search(
            &rot,
            &[GpExpr::var(), GpExpr::var()],
            &rat(1, 10),
            100,
            8,
            1 << 16,
        )
        .unwrap()
        .unwrap();
        assert_eq!(hit2.1, 5);
    }

    #[test]
    fn vdw_honest_negative_on_rational_rotation() {
        // period 1009: for 1 ≤ n ≤ 100 every distance is ≥ 1/1009
        let rot = SystemDescriptor::rotation(ExactScalar::from_ratio(1, 1009));
        let miss = vdw_search(&rot, &[GpExpr::var()], &rat(1, 2018), 100, 8, 1 << 16).unwrap();
        assert!(miss.is_none());
    }

    #[test]
    fn descend_succeeds_on_generous_skew_targets() {
        let skew = SystemDescriptor::skew2(ExactScalar::sqrt(2));
        let target = BoxRegion::new(vec![
            arc(rat(0, 1), rat(499, 1000)),
            arc(rat(0, 1), rat(499, 1000)),
        ])
        .unwrap();
        let g = FSGenerators::new(vec![1; 40]).unwrap();
        let got = descending_refine(
            &skew,
            &[GpExpr::var()],
            &[target.clone()],
            &g,
            &[1],
            3,
            8,
            1 << 18,
        )
        .unwrap()
        .expect("generous targets admit a refinement");
        assert_eq!(got.alphas.len(), 3);
        // growth and ordering of the chosen index sets
        let mut prev: Option<&FiniteIndexSet> = None;
        let mut prev_abs = 0i64;
        for a in &got.alphas {
            if let Some(p) = prev {
                assert!(p.max_index() < a.indices()[0]);
            }
            let n = crate::ipsets::n_alpha(&g, a).unwrap();
            assert!(n.abs() > prev_abs + 1);
            prev_abs = n.abs();
            prev = Some(a);
        }
        // final boxes nest inside the targets
        for b in &got.boxes {
            for (inner, outer) in b.arcs.iter().zip(&target.arcs) {
                assert!(inner.radius < outer.radius);
            }
        }
    }

    #[test]
    fn descend_honest_negative_on_rotation() {
        // period-4 rotation with two targets whose difference window is
        // unreachable: n/4 mod 1 is never within 1/50 of 1/10
        let rot = SystemDescriptor::rotation(ExactScalar::from_ratio(1, 4));
        let v1 = BoxRegion::new(vec![arc(rat(1, 10), rat(1, 100))]).unwrap();
        let v2 = BoxRegion::new(vec![arc(rat(2, 10), rat(1, 100))]).unwrap();
        let g = FSGenerators::new(vec![1; 20]).unwrap();
        let polys = [GpExpr::var(), GpExpr::parse("2*n").unwrap()];
        let got = descending_refine(&rot, &polys, &[v1, v2], &g, &[1], 2, 8, 1 << 16).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn fs_witness_examples() {
        let evens: Vec<i64> = (1..=50).map(|k| 2 * k).collect();
        let w = fs_witness_in_set(&evens, 3, 1 << 16).unwrap().unwrap();
        assert_eq!(w.len(), 3);
        let vals = w.values().to_vec();
        for mask in 1u64..8 {
            let mut sum = 0i64;
            for (i, v) in vals.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sum += v;
                }
            }
            assert!(evens.contains(&sum));
        }

        assert!(fs_witness_in_set(&[1], 2, 1 << 10).unwrap().is_none());
    }

    #[test]
    fn fs_witness_in_sqrt2_returns() {
        let c = ConstraintSet::single(
            GpExpr::monomial(ExactScalar::sqrt(2), 1),
            rat(1, 10),
        )
        .unwrap();
        let members = c_enumerate(&c, 1, 200, 1 << 10).unwrap();
        let w = fs_witness_in_set(&members, 2, 1 << 16).unwrap().unwrap();
        let vals = w.values();
        assert!(members.contains(&vals[0]));
        assert!(members.contains(&vals[1]));
        assert!(members.contains(&(vals[0] + vals[1])));
    }
}
