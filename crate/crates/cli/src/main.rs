use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use singular_forge::bounds::{
    corollary1_predicate, forms_o_rank_bound, prop1_check, remark2_bound, theorem1_bound, theorem2_bound, BoundInputs,
};
use singular_forge::exact::{Point, Scalar};
use singular_forge::gauge::SplittingType;
use singular_forge::local::{formal_data_unramified, moser_reduce, regular_exponents, LocalAnalyzer};
use singular_forge::monodromy::{monodromy_rep, trivial_residual, Complex64, DEFAULT_TOL};
use singular_forge::scalarize::theorem2_pipeline;
use singular_forge::system::{Classification, LinearSystem};
use singular_forge::verify::{
    generate_instance, profile_for, tolerances, verify_batch, InstanceProfile, VerifyOptions,
    DEFAULT_TRUNC, SCHEMA,
};
use singular_forge::Error;

#[derive(Parser)]
#[command(name = "singular-forge", version, about = "Exact analysis of linear differential systems dy/dz = B(z) y")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Emit JSON (the only output format).
    #[arg(long, default_value_t = true)]
    json: bool,
    /// Local error tolerance for numeric transport.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Series truncation order.
    #[arg(long, default_value_t = DEFAULT_TRUNC)]
    trunc: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-point ranks, classification and local exponent data.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Moser reduction at one point, or at every non-Fuchsian point.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Cyclic vector, scalar equation and apparent-point count.
    Scalarize {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Loop monodromy matrices and the product relation residual.
    Monodromy {
        file: PathBuf,
        /// Base point as `re,im`.
        #[arg(long)]
        base: Option<String>,
        /// Only report `‖G − I‖∞` at this point.
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form bounds.
    Bounds(BoundsArgs),
    /// Generate and verify a batch of seeded instances.
    Verify {
        /// `a..b` (inclusive), `a..=b`, `a` or a comma list.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        no_monodromy: bool,
        /// Omit per-seed reports.
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the seeded instance as JSON.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    theorem1: bool,
    #[arg(long)]
    remark2: bool,
    #[arg(long)]
    theorem2: bool,
    #[arg(long)]
    prop1: bool,
    #[arg(long)]
    forms_o: bool,
    #[arg(long)]
    corollary1: bool,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Minimal Poincaré ranks, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ranks: Vec<i64>,
    /// Katz ranks as rationals, comma separated.
    #[arg(long, value_delimiter = ',')]
    katz: Vec<String>,
    /// Splitting type, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Vec<i64>,
    #[arg(long = "R", allow_hyphen_values = true)]
    r_total: Option<i64>,
    #[arg(long = "M")]
    m: Option<i64>,
    #[arg(long)]
    r1: Option<i64>,
    #[arg(long)]
    r0: Option<i64>,
    #[arg(long)]
    r: Option<i64>,
}

enum Failure {
    Input(String, String),
    Verification(Value),
    Runtime(String, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let input = matches!(
            e,
            Error::Parse(_)
                | Error::Dimension(_)
                | Error::UnsupportedScalarField(_)
                | Error::NotSingular(_)
                | Error::NotAPole(_)
                | Error::Precondition(_)
                | Error::Inadmissible(_)
                | Error::PartitionMismatch(_)
        );
        if input {
            Failure::Input(e.kind().into(), e.to_string())
        } else {
            Failure::Runtime(e.kind().into(), e.to_string())
        }
    }
}

fn input(kind: &str, msg: impl Into<String>) -> Failure {
    Failure::Input(kind.into(), msg.into())
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input("parse", format!("{}: {e}", path.display())))
}

fn read_system(path: &Path) -> Result<LinearSystem, Failure> {
    Ok(LinearSystem::from_json(&read_json(path)?)?)
}

fn read_profile(path: &Option<PathBuf>) -> Result<Option<InstanceProfile>, Failure> {
    path.as_ref()
        .map(|p| InstanceProfile::from_json(&read_json(p)?).map_err(Failure::from))
        .transpose()
}

fn parse_point(s: &str) -> Result<Point, Failure> {
    s.parse::<Point>().map_err(|e| input("parse", format!("point {s:?}: {e}")))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Failure> {
    let num = |x: &str| x.trim().parse::<u64>().map_err(|_| input("parse", format!("bad seed {x:?}")));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(input("parse", format!("empty seed range {s}")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_base(s: &str) -> Result<Complex64, Failure> {
    let bad = || input("parse", format!("base point {s:?} must be re,im"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok(Complex64::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn options(c: &Common, monodromy: bool) -> VerifyOptions {
    VerifyOptions { tol: c.tol, trunc: c.trunc, monodromy }
}

fn analyze(s: &LinearSystem, c: &Common) -> Result<Value, Failure> {
    let an = LocalAnalyzer::new(s);
    let mut points = Vec::new();
    for a in s.singular_locus() {
        let rep = an.report(a)?;
        let mut v = rep.to_json();
        let local = match rep.classification {
            Classification::Fuchsian => regular_exponents(s, a).map(|d| d.to_json()),
            Classification::IrregularUnramified if rep.minimal_rank == rep.poincare_rank => {
                formal_data_unramified(s, a, c.trunc).map(|d| d.to_json())
            }
            _ => Err(Error::Precondition("no closed-form local data for this class".into())),
        };
        v["local_data"] = local.unwrap_or_else(|e| json!({ "unavailable": format!("{}: {e}", e.kind()) }));
        points.push(v);
    }
    Ok(json!({
        "schema": SCHEMA,
        "tolerances": tolerances(&options(c, false)),
        "dimension": s.dim(),
        "singular_points": points,
        "residue_trace_sum": s.residue_trace_sum().to_json(),
    }))
}

fn reduce(s: &LinearSystem, point: &Option<String>) -> Result<Value, Failure> {
    let targets: Vec<Point> = match point {
        Some(p) => vec![parse_point(p)?],
        None => {
            let an = LocalAnalyzer::new(s);
            let mut out = Vec::new();
            for a in s.singular_locus() {
                if an.classify(a)? != Classification::Fuchsian {
                    out.push(a.clone());
                }
            }
            out
        }
    };
    let mut reductions = Vec::new();
    for a in &targets {
        let red = moser_reduce(s, a)?;
        reductions.push(json!({
            "point": a.to_json(),
            "rank_before": red.rank_before,
            "rank_after": red.rank_after,
            "steps": red.steps,
            "gauge": red.gauge.to_json(),
            "system": red.system.to_json(),
            "other_points": red.other_ranks.iter().map(|(b, x, y)| json!({"point": b.to_json(), "before": x, "after": y})).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({ "schema": SCHEMA, "reductions": reductions }))
}

fn run(cli: Cli) -> Result<Value, Failure> {
    match cli.cmd {
        Cmd::Analyze { file, common } => analyze(&read_system(&file)?, &common),
        Cmd::Reduce { file, point, .. } => reduce(&read_system(&file)?, &point),
        Cmd::Scalarize { file, .. } => {
            let t2 = theorem2_pipeline(&read_system(&file)?)?;
            Ok(json!({
                "schema": SCHEMA,
                "scalarization": t2.scalarization.to_json(),
                "theorem2": t2.to_json(),
            }))
        }
        Cmd::Monodromy { file, base, point, common } => {
            let s = read_system(&file)?;
            if let Some(pt) = point {
                let a = parse_point(&pt)?;
                let res = trivial_residual(&s, &a, common.tol)?;
                return Ok(json!({
                    "schema": SCHEMA,
                    "point": a.to_json(),
                    "residual": res,
                    "trivial": res <= common.tol,
                    "tol": common.tol,
                }));
            }
            let base = base.as_deref().map(parse_base).transpose()?;
            let rep = monodromy_rep(&s, base, common.tol)?;
            let mut v = rep.to_json();
            v["schema"] = json!(SCHEMA);
            Ok(v)
        }
        Cmd::Bounds(b) => bounds(&b),
        Cmd::Verify { seeds, profile, no_monodromy, summary, common } => {
            let seeds = parse_seeds(&seeds)?;
            let profile = read_profile(&profile)?;
            let batch = verify_batch(&seeds, profile.as_ref(), &options(&common, !no_monodromy));
            let mut v = batch.to_json();
            if summary {
                v.as_object_mut().unwrap().remove("reports");
            }
            if batch.pass() {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Cmd::Generate { seed, profile } => {
            let profile = read_profile(&profile)?;
            let prof = profile_for(seed, profile.as_ref());
            let s = generate_instance(&prof)?;
            Ok(json!({ "profile": prof.to_json(), "B": s.matrix().to_json() }))
        }
    }
}

fn need<T: Copy>(x: Option<T>, name: &str) -> Result<T, Failure> {
    x.ok_or_else(|| input("missing_argument", format!("--{name} is required")))
}

fn bounds(b: &BoundsArgs) -> Result<Value, Failure> {
    let chosen = [b.theorem1, b.remark2, b.theorem2, b.prop1, b.forms_o, b.corollary1]
        .iter()
        .filter(|x| **x)
        .count();
    if chosen != 1 {
        return Err(input("usage", "choose exactly one of --theorem1 --remark2 --theorem2 --prop1 --forms-o --corollary1"));
    }
    let check_n = |len: usize| -> Result<(), Failure> {
        match b.n {
            Some(n) if n != len => Err(input("dimension", format!("--n {n} does not match {len} listed points"))),
            _ => Ok(()),
        }
    };
    if b.theorem1 || b.remark2 {
        check_n(b.ranks.len())?;
        let inputs = BoundInputs::new(need(b.p, "p")?, b.ranks.clone());
        let v = if b.theorem1 { theorem1_bound(&inputs)? } else { remark2_bound(&inputs)? };
        return Ok(json!(v));
    }
    if b.theorem2 {
        let katz = b
            .katz
            .iter()
            .map(|k| k.parse::<Scalar>().ok().filter(Scalar::is_real).map(|s| s.re().clone()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| input("parse", "--katz takes real rationals"))?;
        check_n(katz.len())?;
        return Ok(json!(theorem2_bound(&BoundInputs::with_katz(need(b.p, "p")?, katz))));
    }
    if b.prop1 || b.forms_o {
        let k = SplittingType::new(b.k.clone())?;
        if b.forms_o {
            return Ok(json!(forms_o_rank_bound(need(b.r1, "r1")?, &k)));
        }
        let r_total = match b.r_total {
            Some(r) => r,
            None => b.ranks.iter().sum(),
        };
        return Ok(json!(prop1_check(&k, need(b.n, "n")?, r_total, need(b.m, "M")?)?));
    }
    Ok(json!(corollary1_predicate(need(b.r0, "r0")?, need(b.r, "r")?, need(b.p, "p")?)?))
}

fn diagnostic(kind: &str, msg: &str) {
    eprintln!("{}", json!({ "error": kind, "message": msg }));
}

// A closed pipe downstream is not an error worth a panic.
fn emit(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            diagnostic("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(v)) => {
            emit(&v);
            ExitCode::from(1)
        }
        Err(Failure::Input(kind, msg)) => {
            diagnostic(&kind, &msg);
            ExitCode::from(2)
        }
        Err(Failure::Runtime(kind, msg)) => {
            diagnostic(&kind, &msg);
            ExitCode::from(1)
        }
    }
}
