//! Acceptance gate: one test per criterion, each printing a pass line.
//! Run with `cargo test --test acceptance -- --nocapture` to see them.

use std::cmp::Ordering;
use std::process::Command;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gpolylab::constraints::{c_enumerate, ConstraintSet};
use gpolylab::dynsim::{self, Arc, BoxRegion, SystemDescriptor};
use gpolylab::gpeval::{self, bracket_sum_check};
use gpolylab::gpexpr::GpExpr;
use gpolylab::gpstruct::{
    self, approx_check, derivative, leading_sum, m_threshold, nondegenerate, pet_compare,
    weight_vector, ApproxParams, WeightVector,
};
use gpolylab::ipsets::{self, CellSpec, FSGenerators};
use gpolylab::scalar::{ExactScalar, Rational, Sign};

fn e(s: &str) -> GpExpr {
    GpExpr::parse(s).unwrap()
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

#[test]
fn acceptance_1_paper_value_regressions() {
    let system = [
        e("3*n^2 - ni(sqrt(5)*n)"),
        e("ni(pi*n^3*ni(sqrt(2)*n)) + ni(1/5*n^3)"),
        e("n*ni(pi*n)"),
        e("ni(pi*n^3*ni(sqrt(2)*n)) + ni(pi*n^2)"),
    ];
    assert_eq!(weight_vector(&system).unwrap().counts(), &[0, 2, 0, 1]);

    let p = e("ni(sqrt(2)*n^2*ni(sqrt(3)*n) + ni(pi*n^3)) + 2*n^3 + 2*n^2");
    let expected = ExactScalar::sqrt(6)
        .add(&ExactScalar::pi())
        .add(&ExactScalar::from_int(2));
    assert_eq!(leading_sum(&p), expected);
    assert!(leading_sum(&e("n + n*ni(2*pi*n - ni(2*pi*n))")).is_zero());

    assert!(nondegenerate(&[e("n^2 + n"), e("n^2 + ni(sqrt(3)*n)")]).unwrap());
    assert!(!nondegenerate(&[e("n*ni(2*pi*n) + n"), e("ni(2*pi*n^2) + 2*n")]).unwrap());

    println!("acceptance 1 (paper-value regressions): pass");
}

fn random_scalar(rng: &mut ChaCha8Rng) -> ExactScalar {
    let q = ExactScalar::from_ratio(rng.gen_range(-30..=30), rng.gen_range(1..=12));
    if rng.gen_range(0..10) < 7 {
        return q;
    }
    let irr = match rng.gen_range(0..5) {
        0 => ExactScalar::sqrt(2),
        1 => ExactScalar::sqrt(3),
        2 => ExactScalar::sqrt(5),
        3 => ExactScalar::pi(),
        _ => ExactScalar::e(),
    };
    let c = ExactScalar::from_ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4));
    q.add(&c.mul(&irr))
}

#[test]
fn acceptance_2_bracket_sum_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB_5C);
    let mut violations = 0u32;
    for _ in 0..10_000 {
        let len = rng.gen_range(2..=4);
        let tuple: Vec<ExactScalar> = (0..len).map(|_| random_scalar(&mut rng)).collect();
        let rep = bracket_sum_check(&tuple).unwrap();
        if rep.condition_nearest && !rep.identity_nearest {
            violations += 1;
        }
        if rep.condition_floor && !rep.identity_floor {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    println!("acceptance 2 (bracket-sum hypothesis => identity, 10^4 tuples): pass");
}

#[test]
fn acceptance_3_derivative_oracle() {
    let cases: [(&str, i64); 4] = [
        ("ni(sqrt(2)*n^2)", 5),
        ("ni(pi*n^3)", 5),
        ("n^2", 7),
        // m = 15 keeps {sqrt(3) m} small enough for the leading-sum law
        ("ni(sqrt(2)*n^2*ni(sqrt(3)*n))", 15),
    ];
    let params = ApproxParams::default();
    for (text, m) in cases {
        let p = e(text);
        assert!(gpstruct::good(m, &p).unwrap(), "{text}: m not good");
        if p.degree() >= 2 {
            let thr = m_threshold(&p).unwrap();
            let gap = ExactScalar::from_int(m.abs()).sub(&thr);
            assert_eq!(gap.sign().unwrap(), Sign::Positive, "{text}: m below threshold");
        }
        let r = derivative(&p, m, &params).unwrap();
        assert!(r.d.is_zero() || r.d.degree() < p.degree());
        let members = c_enumerate(&r.c1, -10_000, 10_000, 1 << 15).unwrap();
        assert!(!members.is_empty(), "{text}: empty constraint set");
        for n in members {
            let lhs = gpeval::eval_int(&p, n + m).unwrap()
                - gpeval::eval_int(&p, n).unwrap()
                - gpeval::eval_int(&p, m).unwrap();
            assert_eq!(lhs, gpeval::eval_int(&r.d, n).unwrap(), "{text}: mismatch at n = {n}");
        }
        // leading-sum law at doubled strength, re-verified externally
        if p.degree() >= 2 {
            let target = leading_sum(&p).mul_rational(&Rational::from_integer(
                BigInt::from(p.degree()) * BigInt::from(m),
            ));
            let doubled = ApproxParams { n: 2 * params.n };
            assert!(approx_check(&leading_sum(&r.d), &target, &doubled).unwrap(), "{text}");
        }
    }
    println!("acceptance 3 (derivative oracle on C1 and leading-sum law): pass");
}

fn random_system(rng: &mut ChaCha8Rng) -> Vec<GpExpr> {
    let irr = ["sqrt(2)", "sqrt(3)", "sqrt(5)", "pi", "e", "1/2", "5/7"];
    let count = rng.gen_range(2..=4);
    (0..count)
        .map(|_| {
            let atoms = rng.gen_range(1..=2);
            let mut text = String::new();
            for a in 0..atoms {
                let c: i64 = rng.gen_range(1..=4);
                let neg = rng.gen_bool(0.4);
                let j = rng.gen_range(1..=3);
                let atom = if rng.gen_bool(0.5) {
                    format!("{c}*n^{j}")
                } else {
                    let s = irr[rng.gen_range(0..irr.len())];
                    format!("{c}*ni({s}*n^{j})")
                };
                if a == 0 {
                    if neg {
                        text.push_str("- ");
                    }
                } else {
                    text.push_str(if neg { " - " } else { " + " });
                }
                text.push_str(&atom);
            }
            GpExpr::parse(&text).unwrap()
        })
        .collect()
}

#[test]
fn acceptance_4_pet_well_foundedness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E7);
    // differencing against a minimal-degree element must shrink the
    // weight vector — the induction step behind the well-ordering
    let mut checked = 0;
    while checked < 200 {
        let system: Vec<GpExpr> = random_system(&mut rng)
            .into_iter()
            .map(|p| p.canonicalize())
            .filter(|p| !p.is_zero())
            .collect();
        let w = weight_vector(&system).unwrap();
        if w.counts().is_empty() {
            continue;
        }
        checked += 1;
        let trial = checked;
        let base = system
            .iter()
            .min_by_key(|p| p.degree())
            .cloned()
            .unwrap();
        let successor: Vec<GpExpr> = system
            .iter()
            .map(|p| {
                GpExpr::Sum(vec![
                    p.clone(),
                    GpExpr::ScalarMul(ExactScalar::from_int(-1), Box::new(base.clone())),
                ])
                .canonicalize()
            })
            .collect();
        let w2 = weight_vector(&successor).unwrap();
        assert_eq!(
            pet_compare(&w2, &w),
            Ordering::Less,
            "trial {trial}: successor did not shrink"
        );
    }

    // trichotomy and transitivity on random vectors
    let mut vecs = Vec::new();
    for _ in 0..3000 {
        let len = rng.gen_range(1..=5);
        vecs.push(WeightVector::from_counts(
            (0..len).map(|_| rng.gen_range(0..=9)).collect(),
        ));
    }
    for triple in vecs.chunks(3).take(1000) {
        let (a, b, c) = (&triple[0], &triple[1], &triple[2]);
        let ab = pet_compare(a, b);
        let ba = pet_compare(b, a);
        assert_eq!(ab, ba.reverse());
        if ab == Ordering::Equal {
            assert_eq!(a.counts(), b.counts());
        }
        let bc = pet_compare(b, c);
        if ab != Ordering::Greater && bc != Ordering::Greater {
            assert_ne!(pet_compare(a, c), Ordering::Greater);
        }
    }
    println!("acceptance 4 (PET order well-foundedness and order laws): pass");
}

#[test]
fn acceptance_5_bohr_constraint_identity() {
    for alpha_r in [2u64, 3] {
        let alpha = ExactScalar::sqrt(alpha_r);
        for (num, den) in [(1i64, 10i64), (1, 20)] {
            let eps = rat(num, den);
            let rot = SystemDescriptor::rotation(alpha.clone());
            let rot_returns =
                dynsim::return_set(&rot, &[ExactScalar::zero()], &eps, 1000).unwrap();
            let c_rot =
                ConstraintSet::single(GpExpr::monomial(alpha.clone(), 1), eps.clone()).unwrap();
            assert_eq!(rot_returns, c_enumerate(&c_rot, 1, 1000, 1 << 10).unwrap());

            let skew = SystemDescriptor::skew2(alpha.clone());
            let origin = vec![ExactScalar::zero(), ExactScalar::zero()];
            let skew_returns = dynsim::return_set(&skew, &origin, &eps, 1000).unwrap();
            let mut c_skew =
                ConstraintSet::single(GpExpr::monomial(alpha.clone(), 1), eps.clone()).unwrap();
            c_skew.push(GpExpr::monomial(alpha.clone(), 2), eps.clone()).unwrap();
            assert_eq!(skew_returns, c_enumerate(&c_skew, 1, 1000, 1 << 10).unwrap());
        }
    }
    println!("acceptance 5 (return sets equal constraint-set enumerations): pass");
}

#[test]
fn acceptance_6_ip_machinery() {
    // finite-sums additivity, exhaustively to depth 12
    let mut rng = ChaCha8Rng::seed_from_u64(0x1B);
    let gens: Vec<i64> = (0..12).map(|_| rng.gen_range(1..=40)).collect();
    let g = FSGenerators::new(gens).unwrap();
    let set = ipsets::fs_enumerate(&g, 12, 1 << 13).unwrap();
    let mut by_mask = vec![0i64; 1 << 12];
    for (idx, v) in &set.entries {
        let mask: usize = idx.indices().iter().map(|i| 1usize << (i - 1)).sum();
        by_mask[mask] = *v;
    }
    for a in 1usize..(1 << 12) {
        let rest = ((1usize << 12) - 1) & !a;
        // iterate submasks of the complement
        let mut b = rest;
        while b > 0 {
            assert_eq!(by_mask[a | b], by_mask[a] + by_mask[b]);
            b = (b - 1) & rest;
        }
    }

    // divisibility refinement on 100 random inputs
    for _ in 0..100 {
        let vals: Vec<i64> = (0..40).map(|_| rng.gen_range(1..=50)).collect();
        let g = FSGenerators::new(vals.clone()).unwrap();
        let m = rng.gen_range(2..=6i64);
        let refined = ipsets::divisible_refine(&g, m).unwrap();
        assert!(!refined.is_empty());
        // each refined value is a consecutive block sum, blocks in order
        let mut start = 0usize;
        for &target in refined.values() {
            assert_eq!(target % m, 0);
            let mut matched = false;
            'outer: for s in start..vals.len() {
                let mut acc = 0i64;
                for (eidx, v) in vals.iter().enumerate().skip(s) {
                    acc += v;
                    if acc == target {
                        start = eidx + 1;
                        matched = true;
                        break 'outer;
                    }
                }
            }
            assert!(matched, "refined value {target} is not an ordered block sum");
        }
    }

    // window-cell refinement for the sqrt(2) chain, verified exactly
    let ones = FSGenerators::new(vec![1; 200]).unwrap();
    let spec = CellSpec {
        first: vec![(ExactScalar::sqrt(2), ExactScalar::sqrt(2))],
        second: vec![],
    };
    let eps = rat(1, 10);
    let found = ipsets::cell_refine(&ones, &spec, &eps, 2, 1 << 16)
        .unwrap()
        .expect("cell refinement within budget");
    let vals = found.values().to_vec();
    assert_eq!(vals.len(), 2);
    for sum in [vals[0], vals[1], vals[0] + vals[1]] {
        assert!(spec.holds_at(sum, &eps).unwrap());
    }
    // the (29, 29) chain passes the same exact windows
    for sum in [29, 58] {
        assert!(spec.holds_at(sum, &eps).unwrap());
    }
    let p = e("ni(sqrt(2)*n)");
    let chain = FSGenerators::new(vals).unwrap();
    assert!(ipsets::image_additivity_check(&p, &chain, 2).unwrap());
    assert!(ipsets::image_additivity_check(
        &p,
        &FSGenerators::new(vec![29, 29]).unwrap(),
        2
    )
    .unwrap());
    assert!(!ipsets::image_additivity_check(
        &p,
        &FSGenerators::new(vec![1, 1]).unwrap(),
        2
    )
    .unwrap());

    // spectra and scale identities
    let g = FSGenerators::new(vec![2, 4, 6]).unwrap();
    assert_eq!(ipsets::spectra_div(&g, 2).unwrap().values(), &[1, 2, 3]);
    let set = ipsets::fs_enumerate(&g, 3, 1 << 10).unwrap();
    let scaled = ipsets::scale_members(&set, 2).unwrap();
    let doubled: Vec<i64> = set.values.iter().map(|v| v * 2).collect();
    assert_eq!(scaled.values, doubled);

    println!("acceptance 6 (IP machinery: additivity, refinements, spectra): pass");
}

#[test]
fn acceptance_7_honest_negatives() {
    // a rotation is not weakly mixing: the two-target refinement with a
    // period-4 rotation can never place n/4 inside a width-1/50 window
    let rot = SystemDescriptor::rotation(ExactScalar::from_ratio(1, 4));
    let v1 = BoxRegion::new(vec![Arc {
        center: ExactScalar::from_ratio(1, 10),
        radius: rat(1, 100),
    }])
    .unwrap();
    let v2 = BoxRegion::new(vec![Arc {
        center: ExactScalar::from_ratio(2, 10),
        radius: rat(1, 100),
    }])
    .unwrap();
    let g = FSGenerators::new(vec![1; 20]).unwrap();
    let polys = [e("n"), e("2*n")];
    let miss =
        dynsim::descending_refine(&rot, &polys, &[v1, v2], &g, &[1], 2, 8, 1 << 16).unwrap();
    assert!(miss.is_none());

    // rational rotation of period 1009: every distance within n <= 100
    // is at least 1/1009, so eps = 1/2018 is unreachable
    let rot = SystemDescriptor::rotation(ExactScalar::from_ratio(1, 1009));
    let miss = dynsim::vdw_search(&rot, &[e("n")], &rat(1, 2018), 100, 8, 1 << 16).unwrap();
    assert!(miss.is_none());

    println!("acceptance 7 (honest NotFound on non-mixing systems): pass");
}

#[test]
fn acceptance_8_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_gpolylab");
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "weight",
            "--poly", "3*n^2 - ni(sqrt(5)*n)",
            "--poly", "ni(pi*n^3*ni(sqrt(2)*n)) + ni(1/5*n^3)",
            "--poly", "n*ni(pi*n)",
            "--poly", "ni(pi*n^3*ni(sqrt(2)*n)) + ni(pi*n^2)",
        ],
        vec!["a", "--expr", "n + n*ni(2*pi*n - ni(2*pi*n))"],
        vec!["eval", "--expr", "ni(pi*n*ni(sqrt(5)*n^2 + 2*n))", "--n", "1"],
        vec!["derive", "--expr", "ni(sqrt(2)*n^2)", "--m", "5"],
        vec!["cset", "enum", "--cond", "sqrt(2)*n@1/10", "--lo", "1", "--hi", "30"],
        vec!["fs", "enum", "--gens", "1,2,4", "--depth", "3"],
        vec!["sim", "return", "--system", "rotation:sqrt(2)", "--eps", "1/10", "--n", "50"],
        vec!["pet-cmp", "--a", "0,2,0,1", "--b", "9,9,9"],
    ];
    for args in &commands {
        let run = |_: usize| {
            let out = Command::new(bin).args(args).output().expect("spawn");
            assert!(out.status.success(), "command {args:?} failed");
            out.stdout
        };
        let first = run(0);
        let second = run(1);
        assert_eq!(first, second, "non-deterministic output for {args:?}");
        assert!(!first.is_empty());
    }
    println!("acceptance 8 (byte-identical CLI reruns): pass");
}
