//! Batch front end: every subcommand parses its inputs, runs one library
//! operation, and emits a deterministic payload (JSON by default, table
//! or CSV on request) together with the run manifest.
//!
//! Exit codes: 0 success, 1 honest NotFound, 2 errors, 64 usage,
//! 75 budget exceeded.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};

use gpolylab::constraints::{
    c_enumerate, c_intersect, c_membership, ip_intersection_witness, ConstraintError,
    ConstraintSet,
};
use gpolylab::dynsim::{
    self, Arc, BoxRegion, DynError, SystemDescriptor,
};
use gpolylab::gpeval;
use gpolylab::gpexpr::{self, GpExpr};
use gpolylab::gpstruct::{self, ApproxParams, GpStructError, WeightVector};
use gpolylab::ipsets::{self, CellSpec, FSGenerators, IpError};
use gpolylab::manifest::{parse_config, Manifest, OutputFormat};
use gpolylab::scalar::{ExactScalar, Rational};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Budget(String),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Budget(_) => 75,
            CliError::Other(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Budget(m) | CliError::Other(m) => m,
        }
    }
}

impl From<ConstraintError> for CliError {
    fn from(e: ConstraintError) -> Self {
        match &e {
            ConstraintError::RangeBudget { .. } => CliError::Budget(e.to_string()),
            ConstraintError::Ip(IpError::BudgetExceeded { .. }) => CliError::Budget(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<IpError> for CliError {
    fn from(e: IpError) -> Self {
        match &e {
            IpError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<DynError> for CliError {
    fn from(e: DynError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<GpStructError> for CliError {
    fn from(e: GpStructError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<gpexpr::ParseError> for CliError {
    fn from(e: gpexpr::ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<gpeval::EvalError> for CliError {
    fn from(e: gpeval::EvalError) -> Self {
        CliError::Other(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "gpolylab", version, about = "Exact bracket calculus, finite-sums combinatorics, constraint sets, and torus dynamics desk checks")]
struct Cli {
    /// Output format: json (default), table, csv
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Line-based `key = value` config supplying defaults
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Validate inputs without computing
    #[arg(long, global = true)]
    dry_run: bool,
    /// Recorded in the manifest; all searches are deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker hint; results are independent of it
    #[arg(long, global = true)]
    jobs: Option<u32>,
    /// Search/enumeration budget (default 65536)
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the run manifest to this path
    #[arg(long, global = true)]
    save_manifest: Option<std::path::PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate an integer-valued expression at n
    Eval {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        n: i64,
    },
    /// Leading-coefficient sum A(p)
    A {
        #[arg(long)]
        expr: String,
    },
    /// Formal degree
    Degree {
        #[arg(long)]
        expr: String,
    },
    /// Equivalence p ~ q (same degree, lower-degree difference)
    Equiv {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Weight vector of a system of expressions
    Weight {
        #[arg(long = "poly", required = true)]
        polys: Vec<String>,
    },
    /// Compare two weight vectors (comma-separated counts)
    PetCmp {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Symbolic derivative D(p, m) with its constraint set
    Derive {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        m: i64,
        /// Comparison strength N for the leading-sum law (default 1000)
        #[arg(long)]
        strength: Option<u64>,
    },
    /// Is m a good shift? With --delta, also emit the good-shift set
    Good {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        m: i64,
        #[arg(long)]
        delta: Option<String>,
    },
    /// All leading sums and pairwise difference sums nonzero
    Nondegenerate {
        #[arg(long = "poly", required = true)]
        polys: Vec<String>,
    },
    /// Finite-sums combinatorics
    Fs {
        #[command(subcommand)]
        sub: FsCmd,
    },
    /// Constraint sets C(delta, Q)
    Cset {
        #[command(subcommand)]
        sub: CsetCmd,
    },
    /// Torus dynamics desk checks
    Sim {
        #[command(subcommand)]
        sub: SimCmd,
    },
    /// Re-execute a saved manifest
    Run {
        #[arg(long)]
        manifest: std::path::PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct GensArg {
    /// Comma-separated nonzero generators, e.g. 1,2,4
    #[arg(long)]
    gens: String,
}

impl GensArg {
    fn parse(&self) -> Result<FSGenerators, CliError> {
        let vals = self
            .gens
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| CliError::Usage(format!("bad generator `{t}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        FSGenerators::new(vals).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Subcommand, Debug)]
enum FsCmd {
    /// Enumerate FS(gens) to the given depth
    Enum {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        depth: usize,
    },
    /// Divisibility refinement (--modulus) or window-cell refinement
    /// (--alpha/--eps/--k) to a sub-sequence of block sums
    Refine {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        modulus: Option<i64>,
        /// Chain scalar: windows on {a n} and {a ni(a n)}
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Generators divided by q (all must be divisible)
    Spectra {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        q: i64,
    },
    /// Enumerate, then divide every finite sum by q
    Scale {
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        q: i64,
    },
    /// Does p(n_alpha) = sum of p(n_i) for every index set?
    ImageCheck {
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct CondArgs {
    /// Condition `expr@delta`, repeatable; empty list means all of Z
    #[arg(long = "cond")]
    conds: Vec<String>,
}

impl CondArgs {
    fn parse(&self) -> Result<ConstraintSet, CliError> {
        let mut set = ConstraintSet::all_integers();
        for c in &self.conds {
            let (expr, delta) = c
                .rsplit_once('@')
                .ok_or_else(|| CliError::Usage(format!("condition `{c}`: expected expr@delta")))?;
            let expr = GpExpr::parse(expr.trim())?;
            let delta = parse_rational(delta.trim())?;
            set.push(expr, delta).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(set)
    }
}

#[derive(Subcommand, Debug)]
enum CsetCmd {
    /// Is n a member?
    Member {
        #[command(flatten)]
        conds: CondArgs,
        #[arg(long)]
        n: i64,
    },
    /// All members in [lo, hi]
    Enum {
        #[command(flatten)]
        conds: CondArgs,
        #[arg(long)]
        lo: i64,
        #[arg(long)]
        hi: i64,
    },
    /// Conjunction of two condition groups
    Intersect {
        #[command(flatten)]
        conds: CondArgs,
        /// Second group, `expr@delta`, repeatable
        #[arg(long = "with")]
        with: Vec<String>,
    },
    /// A finite sum of the generators inside the set
    IpWitness {
        #[command(flatten)]
        conds: CondArgs,
        #[command(flatten)]
        gens: GensArg,
    },
}

#[derive(Args, Debug, Clone)]
struct SystemArg {
    /// `rotation:<scalar>` or `skew2:<scalar>`, e.g. rotation:sqrt(2)
    #[arg(long)]
    system: String,
}

impl SystemArg {
    fn parse(&self) -> Result<SystemDescriptor, CliError> {
        let (kind, alpha) = self
            .system
            .split_once(':')
            .ok_or_else(|| CliError::Usage("expected rotation:<scalar> or skew2:<scalar>".into()))?;
        let alpha = gpexpr::parse_scalar(alpha)?;
        match kind {
            "rotation" => Ok(SystemDescriptor::rotation(alpha)),
            "skew2" => Ok(SystemDescriptor::skew2(alpha)),
            other => Err(CliError::Usage(format!("unknown system kind `{other}`"))),
        }
    }
}

#[derive(Subcommand, Debug)]
enum SimCmd {
    /// Return times of the origin into an eps-ball
    Return {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        n: u64,
    },
    /// Grid-certified hitting set; first --box is the source region
    Hit {
        #[command(flatten)]
        system: SystemArg,
        /// `center:radius[,center:radius]`, repeatable; first is U
        #[arg(long = "box", required = true)]
        boxes: Vec<String>,
        #[arg(long = "poly", required = true)]
        polys: Vec<String>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 8)]
        grid: u32,
    },
    /// Search an (x, n) with all polynomial returns within eps
    Vdw {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long = "poly", required = true)]
        polys: Vec<String>,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 8)]
        grid: u32,
    },
    /// Descending-box refinement along an FS sequence
    Descend {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long = "poly", required = true)]
        polys: Vec<String>,
        /// Target boxes, one per polynomial
        #[arg(long = "box", required = true)]
        boxes: Vec<String>,
        #[command(flatten)]
        gens: GensArg,
        /// Comma-separated non-decreasing growth offsets
        #[arg(long, default_value = "1")]
        growth: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        grid: u32,
    },
    /// FS witness inside a computed return set
    IpWitness {
        #[command(flatten)]
        system: SystemArg,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: usize,
    },
}

fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::Usage(format!("bad rational `{s}`"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::from(0)
        } else {
            whole.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = frac.parse().map_err(|_| bad())?;
        let den = BigInt::from(10).pow(frac.len() as u32);
        let mag = whole.magnitude().clone() * den.magnitude().clone() + digits.magnitude().clone();
        let num = BigInt::from_biguint(
            if neg { num_bigint::Sign::Minus } else { num_bigint::Sign::Plus },
            mag,
        );
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

fn parse_box(s: &str) -> Result<BoxRegion, CliError> {
    let arcs = s
        .split(',')
        .map(|coord| {
            let (center, radius) = coord
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("box coordinate `{coord}`: expected center:radius")))?;
            Ok(Arc {
                center: gpexpr::parse_scalar(center.trim())?,
                radius: parse_rational(radius.trim())?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    BoxRegion::new(arcs).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_polys(texts: &[String]) -> Result<Vec<GpExpr>, CliError> {
    texts.iter().map(|t| Ok(GpExpr::parse(t)?)).collect()
}

fn parse_counts(s: &str) -> Result<WeightVector, CliError> {
    let counts = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("bad count `{t}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WeightVector::from_counts(counts))
}

fn fs_set_json(set: &ipsets::FSSet) -> Value {
    json!({
        "entries": set
            .entries
            .iter()
            .map(|(idx, v)| json!({ "indices": idx.indices(), "value": v }))
            .collect::<Vec<_>>(),
        "values": set.values,
    })
}

fn point_json(x: &[ExactScalar]) -> Value {
    json!(x.iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

fn box_json(b: &BoxRegion) -> Value {
    json!(b
        .arcs
        .iter()
        .map(|a| json!({ "center": a.center.to_string(), "radius": a.radius.to_string() }))
        .collect::<Vec<_>>())
}

struct Outcome {
    payload: Value,
    found: bool,
}

fn ok(payload: Value) -> Result<Outcome, CliError> {
    Ok(Outcome { payload, found: true })
}

fn not_found(payload: Value) -> Result<Outcome, CliError> {
    Ok(Outcome { payload, found: false })
}

fn dispatch(cli: &Cli, budget: u64) -> Result<Outcome, CliError> {
    let dry = cli.dry_run;
    let params = ApproxParams::default();
    match &cli.cmd {
        Cmd::Eval { expr, n } => {
            let e = GpExpr::parse(expr)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let v = gpeval::eval_int_big(&e, &BigInt::from(*n))?;
            ok(json!({ "value": v.to_string() }))
        }
        Cmd::A { expr } => {
            let e = GpExpr::parse(expr)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "a": gpstruct::leading_sum(&e).to_string() }))
        }
        Cmd::Degree { expr } => {
            let e = GpExpr::parse(expr)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "degree": e.degree() }))
        }
        Cmd::Equiv { p, q } => {
            let (p, q) = (GpExpr::parse(p)?, GpExpr::parse(q)?);
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "equivalent": gpstruct::equivalent(&p, &q)? }))
        }
        Cmd::Weight { polys } => {
            let ps = parse_polys(polys)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let w = gpstruct::weight_vector(&ps)?;
            ok(json!({ "weight": w.counts() }))
        }
        Cmd::PetCmp { a, b } => {
            let (wa, wb) = (parse_counts(a)?, parse_counts(b)?);
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let order = match gpstruct::pet_compare(&wa, &wb) {
                std::cmp::Ordering::Less => "less",
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "greater",
            };
            ok(json!({ "order": order }))
        }
        Cmd::Derive { expr, m, strength } => {
            let e = GpExpr::parse(expr)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let params = ApproxParams { n: strength.unwrap_or(params.n) };
            let r = gpstruct::derivative(&e, *m, &params)?;
            ok(json!({
                "d": r.d.print(),
                "c1": r.c1.to_json(),
                "m": r.m,
            }))
        }
        Cmd::Good { expr, m, delta } => {
            let e = GpExpr::parse(expr)?;
            let delta = delta.as_deref().map(parse_rational).transpose()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let is_good = gpstruct::good(*m, &e)?;
            let mut payload = json!({ "good": is_good, "m": m });
            if let Some(d) = delta {
                let set = gpstruct::good_set(&e, &d)?;
                payload["good_set"] = set.to_json();
            }
            ok(payload)
        }
        Cmd::Nondegenerate { polys } => {
            let ps = parse_polys(polys)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "nondegenerate": gpstruct::nondegenerate(&ps)? }))
        }
        Cmd::Fs { sub } => dispatch_fs(sub, dry, budget),
        Cmd::Cset { sub } => dispatch_cset(sub, dry, budget),
        Cmd::Sim { sub } => dispatch_sim(sub, dry, budget),
        Cmd::Run { .. } => unreachable!("run is handled before dispatch"),
    }
}

fn dispatch_fs(sub: &FsCmd, dry: bool, budget: u64) -> Result<Outcome, CliError> {
    match sub {
        FsCmd::Enum { gens, depth } => {
            let g = gens.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let set = ipsets::fs_enumerate(&g, *depth, budget)?;
            ok(fs_set_json(&set))
        }
        FsCmd::Refine { gens, modulus, alpha, eps, k } => {
            let g = gens.parse()?;
            match (modulus, alpha) {
                (Some(m), None) => {
                    if dry {
                        return ok(json!({ "dry_run": true }));
                    }
                    let refined = ipsets::divisible_refine(&g, *m)?;
                    ok(json!({ "generators": refined.values() }))
                }
                (None, Some(a)) => {
                    let a = gpexpr::parse_scalar(a)?;
                    let eps = eps
                        .as_deref()
                        .map(parse_rational)
                        .transpose()?
                        .ok_or_else(|| CliError::Usage("--eps is required with --alpha".into()))?;
                    let k = k.ok_or_else(|| CliError::Usage("--k is required with --alpha".into()))?;
                    if dry {
                        return ok(json!({ "dry_run": true }));
                    }
                    let spec = CellSpec { first: vec![(a.clone(), a)], second: vec![] };
                    match ipsets::cell_refine(&g, &spec, &eps, k, budget)? {
                        Some(refined) => ok(json!({ "generators": refined.values() })),
                        None => not_found(json!({ "generators": Value::Null })),
                    }
                }
                _ => Err(CliError::Usage(
                    "refine needs exactly one of --modulus or --alpha".into(),
                )),
            }
        }
        FsCmd::Spectra { gens, q } => {
            let g = gens.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let divided = ipsets::spectra_div(&g, *q)?;
            ok(json!({ "generators": divided.values() }))
        }
        FsCmd::Scale { gens, depth, q } => {
            let g = gens.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let set = ipsets::fs_enumerate(&g, *depth, budget)?;
            let scaled = ipsets::scale_members(&set, *q)?;
            ok(fs_set_json(&scaled))
        }
        FsCmd::ImageCheck { expr, gens, depth } => {
            let e = GpExpr::parse(expr)?;
            let g = gens.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "additive": ipsets::image_additivity_check(&e, &g, *depth)? }))
        }
    }
}

fn dispatch_cset(sub: &CsetCmd, dry: bool, budget: u64) -> Result<Outcome, CliError> {
    match sub {
        CsetCmd::Member { conds, n } => {
            let set = conds.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "member": c_membership(*n, &set)?, "n": n }))
        }
        CsetCmd::Enum { conds, lo, hi } => {
            let set = conds.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "members": c_enumerate(&set, *lo, *hi, budget)? }))
        }
        CsetCmd::Intersect { conds, with } => {
            let a = conds.parse()?;
            let b = CondArgs { conds: with.clone() }.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            ok(json!({ "conditions": c_intersect(&a, &b).to_json() }))
        }
        CsetCmd::IpWitness { conds, gens } => {
            let set = conds.parse()?;
            let g = gens.parse()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            match ip_intersection_witness(&set, &g, budget)? {
                Some(alpha) => {
                    let n = ipsets::n_alpha(&g, &alpha)?;
                    ok(json!({ "indices": alpha.indices(), "n": n }))
                }
                None => not_found(json!({ "indices": Value::Null })),
            }
        }
    }
}

fn dispatch_sim(sub: &SimCmd, dry: bool, budget: u64) -> Result<Outcome, CliError> {
    match sub {
        SimCmd::Return { system, eps, n } => {
            let s = system.parse()?;
            let eps = parse_rational(eps)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let origin = vec![ExactScalar::zero(); s.dim()];
            ok(json!({ "returns": dynsim::return_set(&s, &origin, &eps, *n)? }))
        }
        SimCmd::Hit { system, boxes, polys, n, grid } => {
            let s = system.parse()?;
            let parsed: Vec<BoxRegion> = boxes.iter().map(|b| parse_box(b)).collect::<Result<_, _>>()?;
            let ps = parse_polys(polys)?;
            if parsed.len() != ps.len() + 1 {
                return Err(CliError::Usage(
                    "need one source --box plus one target --box per polynomial".into(),
                ));
            }
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let (u, targets) = parsed.split_first().unwrap();
            ok(json!({ "hits": dynsim::hitting_set(&s, u, targets, &ps, *n, *grid)? }))
        }
        SimCmd::Vdw { system, polys, eps, n, grid } => {
            let s = system.parse()?;
            let ps = parse_polys(polys)?;
            let eps = parse_rational(eps)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            match dynsim::vdw_search(&s, &ps, &eps, *n, *grid, budget)? {
                Some((x, hit_n)) => ok(json!({ "x": point_json(&x), "n": hit_n })),
                None => not_found(json!({ "x": Value::Null, "n": Value::Null })),
            }
        }
        SimCmd::Descend { system, polys, boxes, gens, growth, depth, grid } => {
            let s = system.parse()?;
            let ps = parse_polys(polys)?;
            let targets: Vec<BoxRegion> =
                boxes.iter().map(|b| parse_box(b)).collect::<Result<_, _>>()?;
            let g = gens.parse()?;
            let r = growth
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|e| CliError::Usage(format!("bad growth `{t}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            match dynsim::descending_refine(&s, &ps, &targets, &g, &r, *depth, *grid, budget)? {
                Some(res) => ok(json!({
                    "boxes": res.boxes.iter().map(box_json).collect::<Vec<_>>(),
                    "alphas": res
                        .alphas
                        .iter()
                        .map(|a| json!(a.indices()))
                        .collect::<Vec<_>>(),
                })),
                None => not_found(json!({ "boxes": Value::Null, "alphas": Value::Null })),
            }
        }
        SimCmd::IpWitness { system, eps, n, k } => {
            let s = system.parse()?;
            let eps = parse_rational(eps)?;
            if dry {
                return ok(json!({ "dry_run": true }));
            }
            let origin = vec![ExactScalar::zero(); s.dim()];
            let members = dynsim::return_set(&s, &origin, &eps, *n)?;
            match dynsim::fs_witness_in_set(&members, *k, budget)? {
                Some(w) => ok(json!({ "generators": w.values() })),
                None => not_found(json!({ "generators": Value::Null })),
            }
        }
    }
}

fn command_name(cmd: &Cmd) -> String {
    match cmd {
        Cmd::Eval { .. } => "eval".into(),
        Cmd::A { .. } => "a".into(),
        Cmd::Degree { .. } => "degree".into(),
        Cmd::Equiv { .. } => "equiv".into(),
        Cmd::Weight { .. } => "weight".into(),
        Cmd::PetCmp { .. } => "pet-cmp".into(),
        Cmd::Derive { .. } => "derive".into(),
        Cmd::Good { .. } => "good".into(),
        Cmd::Nondegenerate { .. } => "nondegenerate".into(),
        Cmd::Fs { sub } => format!(
            "fs {}",
            match sub {
                FsCmd::Enum { .. } => "enum",
                FsCmd::Refine { .. } => "refine",
                FsCmd::Spectra { .. } => "spectra",
                FsCmd::Scale { .. } => "scale",
                FsCmd::ImageCheck { .. } => "image-check",
            }
        ),
        Cmd::Cset { sub } => format!(
            "cset {}",
            match sub {
                CsetCmd::Member { .. } => "member",
                CsetCmd::Enum { .. } => "enum",
                CsetCmd::Intersect { .. } => "intersect",
                CsetCmd::IpWitness { .. } => "ip-witness",
            }
        ),
        Cmd::Sim { sub } => format!(
            "sim {}",
            match sub {
                SimCmd::Return { .. } => "return",
                SimCmd::Hit { .. } => "hit",
                SimCmd::Vdw { .. } => "vdw",
                SimCmd::Descend { .. } => "descend",
                SimCmd::IpWitness { .. } => "ip-witness",
            }
        ),
        Cmd::Run { .. } => "run".into(),
    }
}

fn build_manifest(cli: &Cli, argv: &[String], budget: u64) -> Manifest {
    let mut m = Manifest::new(command_name(&cli.cmd));
    for (i, arg) in argv.iter().skip(1).enumerate() {
        m.parameters.insert(format!("arg{i:03}"), arg.clone());
    }
    m.budget = Some(budget);
    m.seed = cli.seed;
    m.format = cli.format.unwrap_or_default();
    m
}

fn render_table(v: &Value, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, val)| match val {
                Value::Object(_) | Value::Array(_) => {
                    format!("{pad}{k}:\n{}", render_table(val, indent + 1))
                }
                _ => format!("{pad}{k}: {}", plain(val)),
            })
            .collect::<Vec<_>>()
            .join("\n"),
        Value::Array(items) => items
            .iter()
            .map(|it| match it {
                Value::Object(_) | Value::Array(_) => render_table(it, indent),
                _ => format!("{pad}{}", plain(it)),
            })
            .collect::<Vec<_>>()
            .join("\n"),
        _ => format!("{pad}{}", plain(v)),
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_csv(v: &Value) -> String {
    // arrays become rows; the single-array payload case is the
    // plottable one, everything else degrades to key,value lines
    match v {
        Value::Object(map) => {
            if map.len() == 1 {
                if let Some(Value::Array(items)) = map.values().next() {
                    return items.iter().map(plain).collect::<Vec<_>>().join("\n");
                }
            }
            map.iter()
                .map(|(k, val)| format!("{k},{}", plain(val)))
                .collect::<Vec<_>>()
                .join("\n")
        }
        Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join("\n"),
        other => plain(other),
    }
}

fn real_main() -> Result<u8, CliError> {
    let mut argv: Vec<String> = std::env::args().collect();
    let mut cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(0);
            }
            eprint!("{e}");
            return Ok(64);
        }
    };

    // a saved manifest replays its recorded argument list
    if let Cmd::Run { manifest } = &cli.cmd {
        let text = std::fs::read_to_string(manifest)
            .map_err(|e| CliError::Usage(format!("cannot read manifest: {e}")))?;
        let m = Manifest::from_json_str(&text).map_err(|e| CliError::Usage(e.to_string()))?;
        argv = std::iter::once(argv[0].clone())
            .chain(m.parameters.values().cloned())
            .collect();
        cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
        if matches!(cli.cmd, Cmd::Run { .. }) {
            return Err(CliError::Usage("manifest may not contain `run`".into()));
        }
    }

    // config supplies defaults for flags the command line omits
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config: {e}")))?;
        let cfg = parse_config(&text).map_err(|e| CliError::Usage(e.to_string()))?;
        for (key, value) in &cfg {
            match key.as_str() {
                "format" if cli.format.is_none() => {
                    cli.format = Some(value.parse().map_err(CliError::Usage)?);
                }
                "budget" if cli.budget.is_none() => {
                    cli.budget = Some(
                        value
                            .parse()
                            .map_err(|e| CliError::Usage(format!("config budget: {e}")))?,
                    );
                }
                "seed" if cli.seed.is_none() => {
                    cli.seed = Some(
                        value
                            .parse()
                            .map_err(|e| CliError::Usage(format!("config seed: {e}")))?,
                    );
                }
                "jobs" if cli.jobs.is_none() => {
                    cli.jobs = Some(
                        value
                            .parse()
                            .map_err(|e| CliError::Usage(format!("config jobs: {e}")))?,
                    );
                }
                "format" | "budget" | "seed" | "jobs" => {}
                other => {
                    return Err(CliError::Usage(format!("unknown config key `{other}`")));
                }
            }
        }
    }

    let budget = cli.budget.unwrap_or(1 << 16);
    let manifest = build_manifest(&cli, &argv, budget);
    if let Some(path) = &cli.save_manifest {
        std::fs::write(path, manifest.to_json_string())
            .map_err(|e| CliError::Other(format!("cannot write manifest: {e}")))?;
    }

    let outcome = dispatch(&cli, budget)?;
    let format = cli.format.unwrap_or_default();
    let full = json!({
        "command": manifest.command,
        "found": outcome.found,
        "result": outcome.payload,
    });
    match format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&full).unwrap()),
        OutputFormat::Table => println!("{}", render_table(&full, 0)),
        OutputFormat::Csv => println!("{}", render_csv(&outcome.payload)),
    }
    Ok(if outcome.found { 0 } else { 1 })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
